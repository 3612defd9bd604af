from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..models.image_grid import ImageGrid
from ..utils.errors import DegenerateConfigurationError


def cauchy_value(r, lam: float):
    """Cauchy M-estimator ``phi(r) = lam^2 / 2 * log(1 + r^2 / lam^2)``."""
    r = np.asarray(r, dtype=float)
    return 0.5 * lam**2 * np.log1p((r / lam) ** 2)


def irls_weight(r, lam: float):
    """IRLS weight ``phi'(r) / r = lam^2 / (lam^2 + r^2)``, equal to 1 at ``r = 0``."""
    r = np.asarray(r, dtype=float)
    return lam**2 / (lam**2 + r**2)


class RobustifierConfig(BaseModel):
    """
    Cauchy robustifier.

    Attributes
    ----------
    lam : float
        Scale in intensity units, strictly positive.
    """

    model_config = ConfigDict(frozen=True)

    lam: float = Field(default=0.04, gt=0)

    def value(self, r):
        return cauchy_value(r, self.lam)

    def weight(self, r):
        return irls_weight(r, self.lam)

    def weights(self, residual: ImageGrid) -> np.ndarray:
        """Per-pixel, per-channel weights of a residual grid; 0 outside its mask."""
        return np.where(residual.mask[..., None], irls_weight(residual.data, self.lam), 0.0)


def robust_energy(
    residuals: Sequence[ImageGrid], lam: float, weights: Sequence[np.ndarray] | None = None
) -> float:
    """
    Robust photometric energy summed over frames, valid pixels and channels.

    Parameters
    ----------
    residuals : Sequence[ImageGrid]
        One residual grid per frame.
    lam : float
        Cauchy scale.
    weights : Sequence[np.ndarray], optional
        Frozen IRLS weights, one ``(H, W, C)`` array per frame. When given the quadratic surrogate
        ``sum 1/2 w r^2`` is returned instead of ``sum phi(r)``.

    Raises
    ------
    DegenerateConfigurationError
        If no residual is valid.
    """
    if weights is not None and len(weights) != len(residuals):
        raise ValueError(f"Got {len(weights)} weight arrays for {len(residuals)} residuals")
    if sum(grid.valid_count for grid in residuals) == 0:
        raise DegenerateConfigurationError("No valid residual to evaluate the energy on")

    energy = 0.0
    for index, grid in enumerate(residuals):
        r = grid.data[grid.mask]
        if weights is None:
            energy += float(cauchy_value(r, lam).sum())
        else:
            w = np.asarray(weights[index])[grid.mask]
            energy += float(0.5 * (w * r**2).sum())
    return energy
