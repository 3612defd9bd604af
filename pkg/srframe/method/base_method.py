from abc import ABC

from pydantic import BaseModel, InstanceOf

from ..models.dataset import Dataset, GroundTruth
from ..models.image_grid import ImageGrid
from .metrics import MetricsReport, evaluate


class BaseMethod(ABC, BaseModel):
    """
    Base of the methods that work on a dataset.

    Attributes
    ----------
    dataset : Dataset
        Frames, LR depth, mask and intrinsics, optionally with ground truth.

    Methods
    -------
    score(depth) -> MetricsReport
        Accuracy of an HR depth map against the dataset's ground truth, on the dataset mask.
    """

    dataset: InstanceOf[Dataset]

    @property
    def ground_truth(self) -> GroundTruth:
        ground_truth = self.dataset.ground_truth
        if ground_truth is None:
            raise ValueError("Dataset carries no ground-truth depth")
        return ground_truth

    def score(self, depth: ImageGrid) -> MetricsReport:
        return evaluate(depth, self.ground_truth.depth, self.dataset.intrinsics, self.dataset.mask)
