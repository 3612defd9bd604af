import numpy as np
from pydantic import BaseModel, ConfigDict, InstanceOf, PrivateAttr, field_validator
from scipy.spatial.transform import Rotation

SMALL_ANGLE = 1e-8


def skew(vector: np.ndarray) -> np.ndarray:
    """Cross-product matrix ``[v]x`` of a 3-vector."""
    x, y, z = vector
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _left_jacobian(omega: np.ndarray) -> np.ndarray:
    """The ``V`` matrix mapping the translational twist part to the translation."""
    theta = np.linalg.norm(omega)
    omega_hat = skew(omega)
    if theta < SMALL_ANGLE:
        b = 0.5 - theta**2 / 24.0
        c = 1.0 / 6.0 - theta**2 / 120.0
    else:
        b = (1.0 - np.cos(theta)) / theta**2
        c = (theta - np.sin(theta)) / theta**3
    return np.eye(3) + b * omega_hat + c * omega_hat @ omega_hat


def _left_jacobian_inverse(omega: np.ndarray) -> np.ndarray:
    theta = np.linalg.norm(omega)
    omega_hat = skew(omega)
    if theta < SMALL_ANGLE:
        d = 1.0 / 12.0 + theta**2 / 720.0
    else:
        half = 0.5 * theta
        d = (1.0 - half * np.cos(half) / np.sin(half)) / theta**2
    return np.eye(3) - 0.5 * omega_hat + d * omega_hat @ omega_hat


class TwistPose(BaseModel):
    """
    Rigid body motion parametrized by twist coordinates.

    The pose maps reference-frame coordinates to the coordinates of another camera, ``P' = R P + t``.

    Attributes
    ----------
    xi : np.ndarray
        Twist ``(v, w)``: translational part ``v`` followed by the rotation vector ``w``.

    Methods
    -------
    identity() -> TwistPose
    from_rt(rotation, translation) -> TwistPose
        Logarithm of a rigid motion.
    compose(other) -> TwistPose
        ``self o other``: applies ``other`` first.
    inverse() -> TwistPose
    left_update(delta) -> TwistPose
        ``exp(delta) o self``, the perturbation used by the pose update.
    transform(points) -> np.ndarray
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    xi: InstanceOf[np.ndarray]

    _rotation: np.ndarray = PrivateAttr()
    _translation: np.ndarray = PrivateAttr()

    @field_validator("xi", mode="before")
    @classmethod
    def validate_xi(cls, xi):
        xi = np.array(xi, dtype=float).reshape(-1)
        assert xi.shape == (6,), "Twist should have 6 coordinates"
        assert np.isfinite(xi).all(), "Twist should be finite"
        xi.setflags(write=False)
        return xi

    def model_post_init(self, __context) -> None:
        v, omega = self.xi[:3], self.xi[3:]
        self._rotation = Rotation.from_rotvec(np.array(omega)).as_matrix()
        self._translation = _left_jacobian(omega) @ v

    @classmethod
    def identity(cls) -> "TwistPose":
        return cls(xi=np.zeros(6))

    @classmethod
    def from_rt(cls, rotation: np.ndarray, translation: np.ndarray) -> "TwistPose":
        omega = Rotation.from_matrix(np.asarray(rotation, dtype=float)).as_rotvec()
        v = _left_jacobian_inverse(omega) @ np.asarray(translation, dtype=float)
        return cls(xi=np.concatenate([v, omega]))

    @property
    def rotation(self) -> np.ndarray:
        return self._rotation.copy()

    @property
    def translation(self) -> np.ndarray:
        return self._translation.copy()

    @property
    def matrix(self) -> np.ndarray:
        """Homogeneous 4x4 matrix."""
        matrix = np.eye(4)
        matrix[:3, :3] = self._rotation
        matrix[:3, 3] = self._translation
        return matrix

    @property
    def is_identity(self) -> bool:
        return not self.xi.any()

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Applies ``R P + t`` to points stacked on the last axis."""
        return np.asarray(points, dtype=float) @ self._rotation.T + self._translation

    def compose(self, other: "TwistPose") -> "TwistPose":
        rotation = self._rotation @ other._rotation
        translation = self._rotation @ other._translation + self._translation
        return TwistPose.from_rt(rotation, translation)

    def inverse(self) -> "TwistPose":
        return TwistPose.from_rt(self._rotation.T, -self._rotation.T @ self._translation)

    def left_update(self, delta: np.ndarray) -> "TwistPose":
        return TwistPose(xi=delta).compose(self)

    def to_list(self) -> list[float]:
        return [float(value) for value in self.xi]
