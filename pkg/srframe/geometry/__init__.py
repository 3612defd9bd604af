"""
Perspective normals, reprojection, rigid transforms and warping.
"""
from .normals import NormalField, depth_gradient, gradient_operators, normals_from_depth
from .warping import project, reproject, transform, warp, warp_jacobian
