"""
Spherical-harmonic shading, photometric residuals and the Cauchy robustifier.
"""
from .robust import RobustifierConfig, cauchy_value, irls_weight, robust_energy
from .shading import photometric_residual, residual, sh_basis, shade, shading_field, warp_image
