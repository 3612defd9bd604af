"""End-to-end reconstructions of the desk-scale sphere; run the quick suite with ``pytest -m "not slow"``"""

import numpy as np
import pytest

from srframe import ParameterStudy, SceneGenerator, SceneSpec, SuperResolution, SynthSpec, TrajectorySpec
from srframe.method import evaluate, upsampled_input
from srframe.models import SolverConfig
from srframe.preprocessing.scene_generator import NoiseModel

pytestmark = pytest.mark.slow


def _desk_scene(mode):
    return SceneGenerator(spec=SynthSpec(trajectory=TrajectorySpec(mode=mode, n_frames=20))).generate(seed=0)


@pytest.fixture(scope="module")
def desk_dataset():
    return _desk_scene("rotation_translation")


@pytest.mark.parametrize("mode", ["rotation_translation", "rotation"])
def test_beats_upsampled_input(mode, desk_dataset):
    dataset = desk_dataset if mode == "rotation_translation" else _desk_scene(mode)
    truth = dataset.ground_truth.depth
    baseline = evaluate(upsampled_input(dataset), truth, dataset.intrinsics, dataset.mask)

    config = SolverConfig()
    method = SuperResolution(dataset=dataset, config=config)
    estimate = method.run()
    report = evaluate(estimate.depth, truth, dataset.intrinsics, dataset.mask)

    assert report.mae_deg <= 0.5 * baseline.mae_deg
    assert report.rmse <= baseline.rmse

    for level in sorted({record.level for record in method.records}):
        records = [record for record in method.records if record.level == level]
        assert len(records) < config.max_sweeps, level
        assert records[-1].converged, level


def test_prior_weight_trend(desk_dataset):
    table = ParameterStudy(dataset=desk_dataset).run("tau", [1e-3, 10.0, 1e5]).set_index("value")
    assert table.loc[1e-3, "rmse"] > table.loc[10.0, "rmse"]
    assert table.loc[1e5, "mae_deg"] > table.loc[10.0, "mae_deg"]


def test_more_frames_give_better_normals(desk_dataset):
    table = ParameterStudy(dataset=desk_dataset).run("n", [5, 15]).set_index("value")
    assert table.loc[15, "mae_deg"] < table.loc[5, "mae_deg"]


def test_sweeps_descend_across_seeds():
    """The energy after a sweep does not exceed the energy before it in at least 95% of the sweeps"""
    scene = SceneSpec(surface="sphere", sphere_radius=250.0, width=64, height=48, f=80.0, checker_size=30.0)
    config = SolverConfig(levels=2, max_sweeps=8, frames=None)
    descending = total = 0
    for seed in range(10):
        spec = SynthSpec(
            scene=scene,
            trajectory=TrajectorySpec(n_frames=5, max_rotation_deg=4.0),
            noise=NoiseModel(kappa=1e-5, seed=seed),
            scale_factor=2,
            quantize=False,
        )
        method = SuperResolution(dataset=SceneGenerator(spec=spec).generate(seed=seed), config=config)
        method.run()
        total += len(method.records)
        descending += sum(record.energy <= record.energy_before + 1e-8 for record in method.records)
    assert descending >= 0.95 * total
