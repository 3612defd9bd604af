from typing import Iterable, Literal

import pandas as pd
from loguru import logger

from ..models.config import SolverConfig
from .base_method import BaseMethod
from .super_resolution import SuperResolution

PARAMETERS = ("n", "tau")


class ParameterStudy(BaseMethod):
    """
    Accuracy of the reconstruction as one parameter varies.

    ``n`` varies the number of frames used, ``tau`` the unitless prior weight; everything else comes
    from ``config``. The dataset must carry ground-truth depth.
    """

    config: SolverConfig = SolverConfig()

    def solve_with(self, param: Literal["n", "tau"], value: float):
        if param == "n":
            config = self.config.model_copy(update={"frames": int(value)})
        elif param == "tau":
            config = self.config.model_copy(update={"tau_tilde": float(value)})
        else:
            raise ValueError(f"Unknown parameter '{param}', expected one of {PARAMETERS}")
        return SuperResolution(dataset=self.dataset, config=SolverConfig(**config.model_dump())).run()

    def run(self, param: Literal["n", "tau"], values: Iterable[float]) -> pd.DataFrame:
        """
        Solves once per value.

        Returns
        -------
        pd.DataFrame
            Columns ``value``, ``mae_deg``, ``rmse``, one row per value in input order.
        """
        if param not in PARAMETERS:
            raise ValueError(f"Unknown parameter '{param}', expected one of {PARAMETERS}")
        if self.dataset.ground_truth is None:
            raise ValueError("Parameter studies need a dataset with ground-truth depth")

        rows = []
        for value in values:
            estimate = self.solve_with(param, value)
            report = self.score(estimate.depth)
            logger.info(f"{param}={value}: MAE {report.mae_deg:.4f} deg, RMSE {report.rmse:.6g}")
            rows.append({"value": value, "mae_deg": report.mae_deg, "rmse": report.rmse})
        return pd.DataFrame(rows, columns=["value", "mae_deg", "rmse"])
