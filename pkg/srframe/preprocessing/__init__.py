"""
Data production: image pyramids, the downsampling operator and the synthetic scene generator.
"""
from .pyramid import PyramidLevel, build_pyramid, downsample_area, level_shapes
from .sampling import (
    DownsampleOperator,
    apply_D,
    apply_D_transpose,
    bilinear_resize,
    bilinear_sample,
    bilinear_upsample,
    infer_scale_factor,
)
