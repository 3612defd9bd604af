# degenerate depth after a rigid transform
EPS_Z = 1e-6
# area element below which a normal is discarded
EPS_AREA = 1e-12
# albedo denominator below which a pixel keeps its previous albedo
EPS_ALBEDO = 1e-12
LEVENBERG_DAMPING = 1e-9
TIKHONOV_DAMPING = 1e-9

DEFAULT_LIGHTING = (0.2, 0.0, 0.0, -1.0)
RGB_CHANNELS = 3
SH_ORDER1_SIZE = 4
SCALE_FACTORS = (2, 4, 8)

# coarse levels with fewer working pixels are dropped
MIN_LEVEL_PIXELS = 16
# relative eigenvalue of the scaled pose system below which a direction is left untouched
GN_EIGEN_FLOOR = 1e-8
