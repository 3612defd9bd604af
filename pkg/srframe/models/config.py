from pydantic import BaseModel, ConfigDict, Field, field_validator


class SolverConfig(BaseModel):
    """
    Parameters of the coarse-to-fine IRLS solver.

    Attributes
    ----------
    lam : float
        Cauchy scale in intensity units.
    tau_tilde : float
        Unitless weight of the depth prior before normalization.
    levels : int
        Pyramid levels; the coarsest has ``2 ** -(levels - 1)`` of the input resolution.
    tol : float
        Relative energy change at which a level is considered converged.
    max_sweeps : int
        Sweep cap per level.
    gn_max_iter : int
        Gauss-Newton iterations per pose update.
    gn_step_tol : float
        Gauss-Newton stops once the twist step is shorter than this.
    gn_max_halvings : int
        Step halvings tried when a Gauss-Newton step increases the surrogate.
    gn_max_motion : float
        Largest RMS pixel displacement a single Gauss-Newton step may predict; longer steps are shortened.
    cg_rtol : float
        Relative residual tolerance of the depth solve.
    cg_max_iter : int
        Iteration cap of the depth solve.
    depth_max_halvings : int
        Halvings of the depth step tried when it raises the energy; the depth is kept if none helps.
    frames : int | None
        Number of frames used from the dataset; all frames when ``None``.
    n_jobs : int
        Worker threads for per-frame work.
    show_progress : bool
        Display a progress bar over pyramid levels.
    """

    model_config = ConfigDict(frozen=True)

    lam: float = Field(default=0.04, gt=0)
    tau_tilde: float = Field(default=10.0, gt=0)
    levels: int = Field(default=5, ge=1)
    tol: float = Field(default=1e-5, gt=0, lt=1)
    max_sweeps: int = Field(default=50, ge=1)
    gn_max_iter: int = Field(default=10, ge=1)
    gn_step_tol: float = Field(default=1e-6, gt=0)
    gn_max_halvings: int = Field(default=5, ge=0)
    gn_max_motion: float = Field(default=2.0, gt=0)
    cg_rtol: float = Field(default=1e-8, gt=0, lt=1)
    cg_max_iter: int = Field(default=5000, ge=1)
    depth_max_halvings: int = Field(default=5, ge=0)
    frames: int | None = Field(default=20, ge=1)
    n_jobs: int = Field(default=1, ge=1)
    show_progress: bool = False

    @field_validator("frames")
    @classmethod
    def validate_frames(cls, frames):
        assert frames is None or frames >= 3, "Photometric stereo needs at least 3 frames"
        return frames
