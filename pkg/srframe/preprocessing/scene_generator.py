"""
Procedural synthetic scenes rendered by a camera carrying its own light source.

Surfaces are ray-cast in reference-frame coordinates, so depth, normals and albedo are exact. Frames are
shaded with the clamped Lambertian model under first-order spherical-harmonic lighting. Lengths are in
millimetres by default.
"""

from pathlib import Path
from typing import Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, ValidationError, model_validator
from scipy.spatial.transform import Rotation

from ..formats.dataset_io import write_dataset
from ..geometry.normals import pixel_grid
from ..models.camera import CameraIntrinsics
from ..models.dataset import Dataset, GroundTruth
from ..models.image_grid import ImageGrid
from ..models.pose import TwistPose
from ..utils.errors import EmptyMaskError, MalformedFileError
from ..utils.key_value import read_key_value
from ..utils.parallel import parallel_map
from .sampling import apply_D

NEWTON_ITERATIONS = 50
NEWTON_TOLERANCE = 1e-9


class SceneSpec(BaseModel):
    """
    Geometry, reflectance and camera of a synthetic scene.

    Attributes
    ----------
    surface : str
        ``sphere``, ``wavy_plane`` or ``superposition`` (nearest hit of both).
    sphere_center, sphere_radius
        Sphere in reference-camera coordinates.
    plane_depth, plane_amplitude, plane_frequency
        Height field ``Z = depth + amplitude sin(frequency X) cos(frequency Y)``.
    albedo : str
        ``constant``, ``checkerboard`` or ``noise`` (smooth random texture).
    albedo_color, albedo_color_b
        Colours of the pattern.
    checker_size : float
        Checker square side in scene units, measured on the reference X and Y axes.
    noise_frequency : float
        Spatial frequency of the noise texture.
    width, height : int
        Image size.
    f, cx, cy : float
        Intrinsics; the principal point defaults to the image centre.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    surface: Literal["sphere", "wavy_plane", "superposition"] = "sphere"
    sphere_center: tuple[float, float, float] = (0.0, 0.0, 1000.0)
    sphere_radius: float = Field(default=300.0, gt=0)
    plane_depth: float = Field(default=1200.0, gt=0)
    plane_amplitude: float = Field(default=20.0, ge=0)
    plane_frequency: float = Field(default=0.01, gt=0)
    albedo: Literal["constant", "checkerboard", "noise"] = "checkerboard"
    albedo_color: tuple[float, float, float] = (0.8, 0.5, 0.3)
    albedo_color_b: tuple[float, float, float] = (0.3, 0.6, 0.8)
    checker_size: float = Field(default=60.0, gt=0)
    noise_frequency: float = Field(default=0.02, gt=0)
    width: int = Field(default=320, gt=0)
    height: int = Field(default=240, gt=0)
    f: float = Field(default=300.0, gt=0)
    cx: float | None = None
    cy: float | None = None

    @property
    def intrinsics(self) -> CameraIntrinsics:
        cx = (self.width - 1) / 2 if self.cx is None else self.cx
        cy = (self.height - 1) / 2 if self.cy is None else self.cy
        return CameraIntrinsics(f=self.f, cx=cx, cy=cy)


class TrajectorySpec(BaseModel):
    """
    Camera motion of the frames.

    Frame ``i`` of ``n`` turns by ``max_rotation_deg * i / (n - 1)`` about an axis circling in the image
    plane. In ``rotation`` mode the camera turns about its own centre (zero translation); in
    ``rotation_translation`` mode it orbits the point ``(0, 0, pivot_depth)``, which stays fixed in view.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: Literal["rotation", "rotation_translation"] = "rotation_translation"
    n_frames: int = Field(default=20, ge=1)
    max_rotation_deg: float = Field(default=10.0, ge=0)
    pivot_depth: float = Field(default=1000.0, gt=0)

    def poses(self) -> list[TwistPose]:
        poses = []
        for index in range(self.n_frames):
            fraction = index / (self.n_frames - 1) if self.n_frames > 1 else 0.0
            angle = 2 * np.pi * fraction
            omega = np.radians(self.max_rotation_deg) * fraction * np.array([np.cos(angle), np.sin(angle), 0.0])
            if self.mode == "rotation" or not omega.any():
                poses.append(TwistPose(xi=np.concatenate([np.zeros(3), omega])))
                continue
            rotation = Rotation.from_rotvec(omega).as_matrix()
            pivot = np.array([0.0, 0.0, self.pivot_depth])
            poses.append(TwistPose.from_rt(rotation, pivot - rotation @ pivot))
        return poses


class LightingSpec(BaseModel):
    """
    Lighting schedule.

    ``collocated`` expresses a light fixed to the camera, pointing along its optical axis, in the
    reference frame: ``l_i = (ambient, R_i^T (0, 0, -strength))``. ``constant`` uses the frame-0 lighting
    for every frame.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: Literal["collocated", "constant"] = "collocated"
    ambient: float = 0.2
    strength: float = Field(default=1.0, ge=0)

    def lighting(self, poses: list[TwistPose]) -> np.ndarray:
        frontal = np.array([0.0, 0.0, -self.strength])
        rows = []
        for pose in poses:
            direction = frontal if self.mode == "constant" else pose.rotation.T @ frontal
            rows.append(np.concatenate([[self.ambient], direction]))
        return np.array(rows)


class NoiseModel(BaseModel):
    """
    Depth noise ``N(0, (kappa z^2)^2)`` per LR pixel.

    Attributes
    ----------
    kappa : float
        Standard deviation per squared depth unit.
    seed : int
        Key of the counter-based generator.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kappa: float = Field(default=1e-5, ge=0)
    seed: int = Field(default=0, ge=0)


class SynthSpec(BaseModel):
    """Everything :func:`generate_dataset` needs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    scene: SceneSpec = SceneSpec()
    trajectory: TrajectorySpec = TrajectorySpec()
    lighting: LightingSpec = LightingSpec()
    noise: NoiseModel = NoiseModel()
    scale_factor: int = 4
    quantize: bool = True

    @model_validator(mode="after")
    def validate_model(self):
        assert self.trajectory.n_frames >= 3, "Photometric stereo needs at least 3 frames"
        assert self.scale_factor in (2, 4, 8), "Scale factor should be 2, 4 or 8"
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "SynthSpec":
        """
        Reads a key-value file with dotted keys (``scene.sphere_radius = 250``); vectors are
        comma-separated.

        Raises
        ------
        MalformedFileError
            If a key is unknown or a value invalid.
        """
        values = {}
        for key, value in read_key_value(path).items():
            parsed = [part.strip() for part in value.split(",")] if "," in value else value
            section, _, name = key.partition(".")
            if name:
                values.setdefault(section, {})[name] = parsed
            else:
                values[key] = parsed
        try:
            return cls.model_validate(values)
        except ValidationError as error:
            raise MalformedFileError(path, f"invalid synthetic scene ({error})") from error


class RenderedFrame(BaseModel):
    """
    One rendered view.

    Attributes
    ----------
    image : ImageGrid
        RGB frame; background pixels are 0 and every pixel is valid.
    depth : ImageGrid
        Camera-frame depth, valid on the silhouette.
    albedo : ImageGrid
        Albedo seen at every pixel, valid on the silhouette.
    normals : np.ndarray
        Unit normals in reference-frame coordinates, shape ``(H, W, 3)``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    image: ImageGrid
    depth: ImageGrid
    albedo: ImageGrid
    normals: InstanceOf[np.ndarray]


def _sphere_hits(scene: SceneSpec, origin: np.ndarray, directions: np.ndarray):
    center = np.asarray(scene.sphere_center)
    offset = origin - center
    a = (directions**2).sum(axis=-1)
    b = 2 * directions @ offset
    c = offset @ offset - scene.sphere_radius**2
    discriminant = b**2 - 4 * a * c
    root = np.sqrt(np.maximum(discriminant, 0.0))
    near = (-b - root) / (2 * a)
    far = (-b + root) / (2 * a)
    distance = np.where(near > 0, near, far)
    distance = np.where((discriminant >= 0) & (distance > 0), distance, np.inf)
    points = origin + np.where(np.isfinite(distance), distance, 0.0)[..., None] * directions
    normals = (points - center) / scene.sphere_radius
    return distance, normals


def _wavy_plane_hits(scene: SceneSpec, origin: np.ndarray, directions: np.ndarray):
    amplitude, frequency = scene.plane_amplitude, scene.plane_frequency

    def residual(distance):
        points = origin + distance[..., None] * directions
        x, y = frequency * points[..., 0], frequency * points[..., 1]
        value = points[..., 2] - scene.plane_depth - amplitude * np.sin(x) * np.cos(y)
        slope = directions[..., 2] - amplitude * frequency * (
            np.cos(x) * np.cos(y) * directions[..., 0] - np.sin(x) * np.sin(y) * directions[..., 1]
        )
        return value, slope

    with np.errstate(divide="ignore", invalid="ignore"):
        distance = (scene.plane_depth - origin[2]) / directions[..., 2]
        for _ in range(NEWTON_ITERATIONS):
            value, slope = residual(distance)
            distance = distance - value / slope
        value, _ = residual(distance)
    hit = np.isfinite(distance) & (distance > 0) & (np.abs(value) < NEWTON_TOLERANCE * scene.plane_depth)
    distance = np.where(hit, distance, np.inf)

    points = origin + np.where(hit, distance, 0.0)[..., None] * directions
    x, y = frequency * points[..., 0], frequency * points[..., 1]
    gradient = np.stack(
        [
            -amplitude * frequency * np.cos(x) * np.cos(y),
            amplitude * frequency * np.sin(x) * np.sin(y),
            np.ones_like(x),
        ],
        axis=-1,
    )
    return distance, gradient / np.linalg.norm(gradient, axis=-1, keepdims=True)


def _albedo(scene: SceneSpec, points: np.ndarray, seed: int) -> np.ndarray:
    color = np.asarray(scene.albedo_color)
    color_b = np.asarray(scene.albedo_color_b)
    if scene.albedo == "constant":
        return np.broadcast_to(color, points.shape).copy()
    if scene.albedo == "checkerboard":
        cells = np.floor(points[..., 0] / scene.checker_size) + np.floor(points[..., 1] / scene.checker_size)
        return np.where((cells % 2 == 0)[..., None], color, color_b)
    generator = np.random.Generator(np.random.Philox(key=seed))
    directions = generator.normal(size=(4, 3))
    phases = generator.uniform(0, 2 * np.pi, size=(4, 3))
    texture = np.zeros(points.shape)
    for direction, phase in zip(directions, phases):
        texture += np.sin(scene.noise_frequency * points @ direction[:, None] + phase) / len(directions)
    blend = 0.5 + 0.5 * texture
    return (1 - blend) * color + blend * color_b


def render_frame(
    scene: SceneSpec,
    pose: TwistPose,
    lighting: np.ndarray,
    quantize: bool = True,
    texture_seed: int = 0,
) -> RenderedFrame:
    """
    Ray-casts the scene from a posed camera and shades it.

    The intensity is ``rho_c max(0, <m(n), l>)`` with ``n`` and ``l`` in reference coordinates,
    optionally clamped to ``[0, 1]`` and quantized to 8 bits.

    Parameters
    ----------
    scene : SceneSpec
    pose : TwistPose
        Motion from the reference camera to this camera.
    lighting : np.ndarray
        ``(ambient, l_x, l_y, l_z)`` in reference coordinates.
    quantize : bool
        Round to 8-bit levels.
    texture_seed : int
        Key of the noise texture, so that every view sees the same texture.

    Raises
    ------
    EmptyMaskError
        If the surface is not visible.
    """
    intrinsics = scene.intrinsics
    xs, ys = pixel_grid(scene.height, scene.width)
    rays = np.stack([(xs - intrinsics.cx) / intrinsics.f, (ys - intrinsics.cy) / intrinsics.f, np.ones_like(xs)], -1)
    rotation = pose.rotation
    origin = -rotation.T @ pose.translation
    directions = rays @ rotation

    hits = []
    if scene.surface in ("sphere", "superposition"):
        hits.append(_sphere_hits(scene, origin, directions))
    if scene.surface in ("wavy_plane", "superposition"):
        hits.append(_wavy_plane_hits(scene, origin, directions))
    distances = np.stack([distance for distance, _ in hits])
    nearest = np.argmin(distances, axis=0)
    distance = np.take_along_axis(distances, nearest[None], axis=0)[0]
    normals = np.stack([normal for _, normal in hits])
    normals = np.take_along_axis(normals, nearest[None, ..., None], axis=0)[0]

    mask = np.isfinite(distance)
    if not mask.any():
        raise EmptyMaskError("Surface is not visible from this pose")
    facing = (normals * directions).sum(axis=-1) > 0
    normals = np.where(facing[..., None], -normals, normals)
    normals = np.where(mask[..., None], normals, 0.0)

    points = origin + np.where(mask, distance, 0.0)[..., None] * directions
    albedo = np.where(mask[..., None], _albedo(scene, points, texture_seed), 0.0)
    lighting = np.asarray(lighting, dtype=float)
    shading = np.maximum(0.0, lighting[0] + normals @ lighting[1:])
    image = np.where(mask[..., None], albedo * shading[..., None], 0.0)
    if quantize:
        image = np.round(np.clip(image, 0.0, 1.0) * 255.0) / 255.0

    depth = np.where(mask, distance, 0.0)
    return RenderedFrame(
        image=ImageGrid.from_array(image),
        depth=ImageGrid(data=depth, mask=mask),
        albedo=ImageGrid(data=albedo, mask=mask),
        normals=normals,
    )


def make_lr_depth(z_gt: ImageGrid, scale_factor: int, noise: NoiseModel) -> ImageGrid:
    """
    Block-mean downsampling plus zero-mean Gaussian noise of standard deviation ``kappa z^2``.

    Noise comes from a counter-based generator keyed by ``noise.seed`` and is drawn for every LR pixel
    in row-major order, so the result depends only on the inputs. Pixels pushed to non-positive depth
    become invalid.
    """
    lr = apply_D(z_gt, scale_factor)
    generator = np.random.Generator(np.random.Philox(key=noise.seed))
    draws = generator.standard_normal(lr.shape)
    depth = lr.values + noise.kappa * lr.values**2 * draws
    mask = lr.mask & (depth > 0)
    return ImageGrid(data=np.where(mask, depth, 0.0), mask=mask)


class SceneGenerator(BaseModel):
    """
    Renders a full synthetic dataset.

    Attributes
    ----------
    spec : SynthSpec

    Methods
    -------
    generate(seed=None, n_jobs=1, show_progress=False) -> Dataset
        Frames, noisy LR depth, mask and ground truth in memory.
    """

    spec: SynthSpec = SynthSpec()

    def generate(self, seed: int | None = None, n_jobs: int = 1, show_progress: bool = False) -> Dataset:
        spec = self.spec
        noise = spec.noise if seed is None else spec.noise.model_copy(update={"seed": seed})
        poses = spec.trajectory.poses()
        lighting = spec.lighting.lighting(poses)

        def render(index: int) -> RenderedFrame:
            return render_frame(spec.scene, poses[index], lighting[index], spec.quantize, noise.seed)

        frames = parallel_map(render, range(len(poses)), n_jobs, desc="Rendering frames", show_progress=show_progress)
        reference = frames[0]
        depth_lr = make_lr_depth(reference.depth, spec.scale_factor, noise)
        logger.info(
            f"Rendered {len(frames)} frames of {spec.scene.width}x{spec.scene.height},"
            f" {reference.depth.valid_count} surface pixels"
        )
        return Dataset(
            frames=[frame.image for frame in frames],
            depth_lr=depth_lr,
            mask=reference.depth.mask,
            intrinsics=spec.scene.intrinsics,
            ground_truth=GroundTruth(depth=reference.depth, albedo=reference.albedo, poses=poses, lighting=lighting),
        )


def generate_dataset(spec: SynthSpec, out_dir: str | Path, seed: int | None = None, n_jobs: int = 1) -> Path:
    """
    Renders ``spec`` and writes it in the dataset layout.

    Quantized scenes are written as 8-bit PNG frames, unquantized ones as PFM frames.

    Returns
    -------
    Path
        The manifest file.
    """
    dataset = SceneGenerator(spec=spec).generate(seed=seed, n_jobs=n_jobs)
    return write_dataset(dataset, out_dir, frame_format="png" if spec.quantize else "pfm")
