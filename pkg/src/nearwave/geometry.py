"""Array geometry, rigid poses, and exact near-field LOS channel synthesis.

Conventions:
    * The transmit array lies in the xy-plane with its center at the origin.
      The receive array is placed by a rigid pose (translation ``r``,
      rotation ``R``) applied to a centered local grid.
    * Channel tensors are complex arrays with axes ordered
      (n_rx, n_ry, n_tx, n_ty, n_f).
    * All lengths are in meters, all angles in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact by definition

_TOPOLOGY_PARAMS = {
    ("linear", "single"): 2,
    ("planar", "single"): 3,
    ("linear", "linear"): 4,
    ("planar", "linear"): 5,
    ("planar", "planar"): 6,
}


@dataclass(frozen=True)
class ArraySpec:
    """Dimensions and spacings of the two arrays plus the frequency grid.

    Attributes:
        ntx, nty: transmit antenna counts along the array's x and y axes.
        nrx, nry: receive antenna counts along the array's x and y axes.
        dtx, dty, drx, dry: antenna spacings in meters. A spacing may be 0
            only for a singleton dimension.
        nf: number of equispaced frequencies.
        df: dimensionless fractional frequency step.
        fc: carrier frequency in Hz.
    """

    ntx: int = 1
    nty: int = 1
    nrx: int = 1
    nry: int = 1
    dtx: float = 0.0
    dty: float = 0.0
    drx: float = 0.0
    dry: float = 0.0
    nf: int = 1
    df: float = 0.0
    fc: float = 30e9

    def __post_init__(self):
        for name in ("ntx", "nty", "nrx", "nry", "nf"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for count, spacing in (
            (self.ntx, self.dtx),
            (self.nty, self.dty),
            (self.nrx, self.drx),
            (self.nry, self.dry),
        ):
            if count > 1 and spacing <= 0.0:
                raise ValueError("spacing must be > 0 for a non-singleton dimension")
        if self.df < 0.0:
            raise ValueError("df must be >= 0")
        if self.fc <= 0.0:
            raise ValueError("fc must be > 0")

    @classmethod
    def half_wavelength(cls, ntx=1, nty=1, nrx=1, nry=1, nf=1, df=0.0, fc=30e9):
        """Spec with half-wavelength spacings at the carrier on every axis."""
        d = SPEED_OF_LIGHT / fc / 2.0
        return cls(ntx=ntx, nty=nty, nrx=nrx, nry=nry,
                   dtx=d, dty=d, drx=d, dry=d, nf=nf, df=df, fc=fc)

    @property
    def wavelength(self) -> float:
        """Carrier wavelength in meters."""
        return SPEED_OF_LIGHT / self.fc

    @property
    def shape(self) -> tuple[int, int, int, int, int]:
        """Channel tensor shape (nrx, nry, ntx, nty, nf)."""
        return (self.nrx, self.nry, self.ntx, self.nty, self.nf)

    @property
    def size(self) -> int:
        """Total number of tensor entries."""
        return self.nrx * self.nry * self.ntx * self.nty * self.nf

    @property
    def tx_aperture(self) -> float:
        """Largest transmit-array dimension (diagonal for a planar array)."""
        return math.hypot((self.ntx - 1) * self.dtx, (self.nty - 1) * self.dty)

    @property
    def rx_aperture(self) -> float:
        """Largest receive-array dimension (diagonal for a planar array)."""
        return math.hypot((self.nrx - 1) * self.drx, (self.nry - 1) * self.dry)

    @property
    def tx_topology(self) -> str:
        return _topology(self.ntx, self.nty)

    @property
    def rx_topology(self) -> str:
        return _topology(self.nrx, self.nry)


def _topology(nx: int, ny: int) -> str:
    if nx == 1 and ny == 1:
        return "single"
    if nx == 1 or ny == 1:
        return "linear"
    return "planar"


def geometric_parameter_count(tx_topology: str, rx_topology: str) -> int:
    """Minimal number of geometric parameters for a pair of array topologies.

    Accepts the five supported pairs in either order, e.g.
    ``("linear", "single") -> 2`` and ``("planar", "planar") -> 6``.
    """
    key = (tx_topology, rx_topology)
    if key in _TOPOLOGY_PARAMS:
        return _TOPOLOGY_PARAMS[key]
    key = (rx_topology, tx_topology)
    if key in _TOPOLOGY_PARAMS:
        return _TOPOLOGY_PARAMS[key]
    raise ValueError(f"unsupported topology pair: ({tx_topology}, {rx_topology})")


@dataclass(frozen=True)
class GeometryPose:
    """Rigid placement of the receive array: translation ``r`` and rotation ``R``.

    ``R`` must be orthonormal with determinant +1 (tolerance 1e-12) and
    ``r`` must be nonzero.
    """

    r: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(3)
        R = np.asarray(self.R, dtype=float).reshape(3, 3)
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-12:
            raise ValueError("R is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-12:
            raise ValueError("R must have determinant +1")
        if np.linalg.norm(r) <= 0.0:
            raise ValueError("translation must be nonzero")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "R", R)

    @classmethod
    def from_euler(cls, r, phi_x=0.0, phi_y=0.0, phi_z=0.0) -> "GeometryPose":
        return cls(r=np.asarray(r, dtype=float), R=rotation_from_euler(phi_x, phi_y, phi_z))

    @property
    def distance(self) -> float:
        """Distance between array centers, ||r||."""
        return float(np.linalg.norm(self.r))

    @property
    def direction(self) -> np.ndarray:
        """Unit vector r / ||r||."""
        return self.r / self.distance


def rotation_x(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_euler(phi_x: float, phi_y: float, phi_z: float) -> np.ndarray:
    """Rotation composed as Rz(phi_z) @ Ry(phi_y) @ Rx(phi_x)."""
    return rotation_z(phi_z) @ rotation_y(phi_y) @ rotation_x(phi_x)


def skew(omega) -> np.ndarray:
    """Skew-symmetric 3x3 matrix such that skew(w) @ v == cross(w, v)."""
    w = np.asarray(omega, dtype=float).reshape(3)
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def rotation_from_tangent(omega, base: np.ndarray | None = None) -> np.ndarray:
    """Rotation base @ expm(skew(omega)) via the Rodrigues closed form.

    The closed form is exact for skew-symmetric 3x3 matrices; ``base``
    defaults to the identity.
    """
    w = np.asarray(omega, dtype=float).reshape(3)
    theta = float(np.linalg.norm(w))
    K = skew(w)
    if theta < 1e-9:
        # second-order series; error O(theta^3) is below double rounding here
        R = np.eye(3) + K + 0.5 * (K @ K)
    else:
        R = (np.eye(3)
             + (math.sin(theta) / theta) * K
             + ((1.0 - math.cos(theta)) / theta**2) * (K @ K))
    if base is not None:
        R = np.asarray(base, dtype=float) @ R
    return R


def rotation_from_tangent_batch(omega: np.ndarray) -> np.ndarray:
    """Rodrigues map applied to a batch of tangent vectors, shape (S, 3) -> (S, 3, 3)."""
    w = np.asarray(omega, dtype=float)
    S = w.shape[0]
    theta = np.linalg.norm(w, axis=1)
    K = np.zeros((S, 3, 3))
    K[:, 0, 1], K[:, 0, 2] = -w[:, 2], w[:, 1]
    K[:, 1, 0], K[:, 1, 2] = w[:, 2], -w[:, 0]
    K[:, 2, 0], K[:, 2, 1] = -w[:, 1], w[:, 0]
    small = theta < 1e-9
    t = np.where(small, 1.0, theta)
    a = np.where(small, 1.0, np.sin(t) / t)
    b = np.where(small, 0.5, (1.0 - np.cos(t)) / t**2)
    K2 = K @ K
    return np.eye(3)[None] + a[:, None, None] * K + b[:, None, None] * K2


def rotation_log(R: np.ndarray) -> np.ndarray:
    """Tangent vector omega with rotation_from_tangent(omega) == R, ||omega|| <= pi."""
    R = np.asarray(R, dtype=float)
    cos_theta = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = math.acos(cos_theta)
    axis_raw = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if theta < 1e-7:
        return 0.5 * axis_raw
    if theta > math.pi - 1e-5:
        # near pi the antisymmetric part vanishes; recover the axis from R + I
        M = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.clip(np.diag(M), 0.0, None))
        k = int(np.argmax(axis))
        for j in range(3):
            if j != k and M[k, j] < 0.0:
                axis[j] = -axis[j]
        axis /= np.linalg.norm(axis)
        # disambiguate the overall sign with the antisymmetric remainder
        if axis @ axis_raw < 0.0:
            axis = -axis
        return theta * axis
    return (theta / (2.0 * math.sin(theta))) * axis_raw


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation from a normalized 4-component Gaussian quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def sample_pose(rng: np.random.Generator, rmin: float = 5.0, rmax: float = 15.0,
                measure: str = "volume") -> GeometryPose:
    """Random pose: ``r`` uniform over the shell rmin <= ||r|| <= rmax, ``R`` Haar.

    ``measure`` selects the radial law: "volume" draws uniformly over the
    shell volume (inverse CDF on the cubed radius), "radius" draws the
    radius uniformly on [rmin, rmax].
    """
    if not 0.0 < rmin < rmax:
        raise ValueError("need 0 < rmin < rmax")
    if measure == "volume":
        radius = rng.uniform(rmin**3, rmax**3) ** (1.0 / 3.0)
    elif measure == "radius":
        radius = rng.uniform(rmin, rmax)
    else:
        raise ValueError(f"unknown shell measure: {measure!r}")
    direction = rng.normal(size=3)
    norm = np.linalg.norm(direction)
    while norm < 1e-12:
        direction = rng.normal(size=3)
        norm = np.linalg.norm(direction)
    return GeometryPose(r=radius * direction / norm, R=random_rotation(rng))


def _centered_grid(count: int, spacing: float) -> np.ndarray:
    return spacing * (np.arange(count) - (count - 1) / 2.0)


def tx_positions(spec: ArraySpec) -> np.ndarray:
    """Transmit antenna positions, shape (ntx, nty, 3); grid centered at the origin."""
    gx = _centered_grid(spec.ntx, spec.dtx)
    gy = _centered_grid(spec.nty, spec.dty)
    pos = np.zeros((spec.ntx, spec.nty, 3))
    pos[:, :, 0] = gx[:, None]
    pos[:, :, 1] = gy[None, :]
    return pos


def _rx_local_grid(spec: ArraySpec) -> np.ndarray:
    gx = _centered_grid(spec.nrx, spec.drx)
    gy = _centered_grid(spec.nry, spec.dry)
    pos = np.zeros((spec.nrx, spec.nry, 3))
    pos[:, :, 0] = gx[:, None]
    pos[:, :, 1] = gy[None, :]
    return pos


def rx_positions(spec: ArraySpec, pose: GeometryPose) -> np.ndarray:
    """Receive antenna positions r + R @ local, shape (nrx, nry, 3)."""
    local = _rx_local_grid(spec)
    return pose.r + np.einsum("ij,xyj->xyi", pose.R, local)


def antenna_positions(spec: ArraySpec, pose: GeometryPose):
    """Positions of both arrays: (tx (ntx, nty, 3), rx (nrx, nry, 3))."""
    return tx_positions(spec), rx_positions(spec, pose)


def antenna_positions_alt(spec: ArraySpec, distance: float, tx_angles, rx_angles):
    """Alternative placement: both arrays rotated, receive center on the z-axis.

    The transmit grid is rotated by Euler angles ``tx_angles`` about the
    origin; the receive grid is rotated by ``rx_angles`` and centered at
    (0, 0, distance). Redundant angles may be zeroed by the caller.
    """
    if distance <= 0.0:
        raise ValueError("distance must be > 0")
    Rt = rotation_from_euler(*tx_angles)
    Rr = rotation_from_euler(*rx_angles)
    tx = np.einsum("ij,xyj->xyi", Rt, tx_positions(spec))
    rx = np.einsum("ij,xyj->xyi", Rr, _rx_local_grid(spec))
    rx[:, :, 2] += distance
    return tx, rx


def distance_tensor(spec: ArraySpec, pose: GeometryPose) -> np.ndarray:
    """Pairwise antenna distances, shape (nrx, nry, ntx, nty)."""
    tx = tx_positions(spec)
    rx = rx_positions(spec, pose)
    diff = rx[:, :, None, None, :] - tx[None, None, :, :, :]
    return np.linalg.norm(diff, axis=-1)


def pairwise_distance(spec: ArraySpec, pose: GeometryPose, n_t, n_r) -> float:
    """Distance between transmit antenna n_t = (ntx, nty) and receive antenna n_r."""
    tx = tx_positions(spec)[n_t[0], n_t[1]]
    rx = rx_positions(spec, pose)[n_r[0], n_r[1]]
    return float(np.linalg.norm(rx - tx))


def frequency_factors(spec: ArraySpec) -> np.ndarray:
    """Per-frequency scale factors 1 + df * (nf - (Nf - 1) / 2), shape (nf,)."""
    return 1.0 + spec.df * (np.arange(spec.nf) - (spec.nf - 1) / 2.0)


def synth(spec: ArraySpec, pose: GeometryPose, unit_amplitude: bool = False) -> np.ndarray:
    """Exact LOS channel tensor, shape (nrx, nry, ntx, nty, nf).

    Each entry is (D / D_pair) * exp(-j * 2 pi / wavelength * D_pair * f_scale)
    with D the center distance and D_pair the antenna pair distance. With
    ``unit_amplitude`` the leading amplitude factor is forced to 1.
    """
    dist = distance_tensor(spec, pose)
    phase = (-2.0 * np.pi / spec.wavelength) * dist[..., None] * frequency_factors(spec)
    h = np.exp(1j * phase)
    if not unit_amplitude:
        h *= (pose.distance / dist)[..., None]
    return h


def synth_batch(spec: ArraySpec, r: np.ndarray, R: np.ndarray,
                unit_amplitude: bool = False) -> np.ndarray:
    """Channel tensors for a batch of poses, shape (S, nrx, nry, ntx, nty, nf).

    ``r`` has shape (S, 3) and ``R`` shape (S, 3, 3). Rotations are not
    validated; this is the hot path of the pose optimizer.
    """
    r = np.asarray(r, dtype=float)
    R = np.asarray(R, dtype=float)
    tx = tx_positions(spec)
    local = _rx_local_grid(spec)
    rx = r[:, None, None, :] + np.einsum("sij,xyj->sxyi", R, local)
    diff = rx[:, :, :, None, None, :] - tx[None, None, None, :, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    phase = (-2.0 * np.pi / spec.wavelength) * dist[..., None] * frequency_factors(spec)
    h = np.exp(1j * phase)
    if not unit_amplitude:
        center = np.linalg.norm(r, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            h *= (center[:, None, None, None, None] / dist)[..., None]
    return h
