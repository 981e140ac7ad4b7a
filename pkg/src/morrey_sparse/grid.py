"""Periodic-box fields, spectral operators, and sliding ball-integral kernels.

All fields live on a cubic periodic box [0, L)^3 sampled by an n^3 voxel
lattice.  Scales of interest are capped at 1 and the box side must exceed 2,
so a ball of radius <= 1 never sees itself through the periodic wrap.
Differential operators are spectral (exact on band-limited fields); the
sliding window L^p kernels are FFT convolutions of |f|^p with a voxelized
ball indicator, checked against a transform-free brute force.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TAU = 2.0 * math.pi

#: volume of the 3D unit ball
UNIT_BALL_VOLUME = 4.0 * math.pi / 3.0


class FieldFileError(ValueError):
    """Base class for field-file I/O failures."""


class FieldHeaderError(FieldFileError):
    """Header line is missing, malformed, or declares an unsupported layout."""


class FieldSizeError(FieldFileError):
    """Payload length disagrees with the header-declared shape."""


class NonFiniteDataError(FieldFileError):
    """Payload (or field) contains NaN or infinity."""


def _axis_distance(n: int, spacing: float, c: int) -> np.ndarray:
    d = np.abs(np.arange(n) - (c % n))
    return np.minimum(d, n - d) * spacing


@dataclass(frozen=True)
class Grid3:
    """Cubic periodic grid: n voxels per axis on a box of side ``box_len``.

    Voxel centers sit at ``i * spacing`` for ``i = 0..n-1`` along each axis.
    """

    n: int
    box_len: float = TAU

    def __post_init__(self) -> None:
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 8, got n={self.n}")
        if not self.box_len > 2.0:
            raise ValueError(f"box length must exceed 2, got {self.box_len}")

    @property
    def spacing(self) -> float:
        return self.box_len / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def voxel_volume(self) -> float:
        return self.spacing**3

    def axis_coords(self) -> np.ndarray:
        return np.arange(self.n) * self.spacing

    def min_image_axis(self) -> np.ndarray:
        """Per-axis periodic distance from index 0 to every voxel plane."""
        return _axis_distance(self.n, self.spacing, 0)

    def distance_sq_from(self, center: tuple[int, int, int]) -> np.ndarray:
        """Squared min-image distance from a voxel center to every voxel."""
        dx = _axis_distance(self.n, self.spacing, int(center[0])) ** 2
        dy = _axis_distance(self.n, self.spacing, int(center[1])) ** 2
        dz = _axis_distance(self.n, self.spacing, int(center[2])) ** 2
        return dx[:, None, None] + dy[None, :, None] + dz[None, None, :]


@dataclass(frozen=True)
class ScalarField:
    """Real scalar samples on a Grid3, C-order with z fastest."""

    grid: Grid3
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.shape != self.grid.shape:
            raise ValueError(f"data shape {self.data.shape} != grid shape {self.grid.shape}")
        if self.data.dtype != np.float64:
            object.__setattr__(self, "data", np.ascontiguousarray(self.data, dtype=np.float64))

    @classmethod
    def zeros(cls, grid: Grid3) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    def validate_finite(self) -> None:
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteDataError("scalar field contains non-finite values")


@dataclass(frozen=True)
class VectorField:
    """Three scalar components on a shared Grid3, stored as (3, n, n, n)."""

    grid: Grid3
    data: np.ndarray

    def __post_init__(self) -> None:
        if self.data.shape != (3,) + self.grid.shape:
            raise ValueError(f"data shape {self.data.shape} != (3,)+{self.grid.shape}")
        if self.data.dtype != np.float64:
            object.__setattr__(self, "data", np.ascontiguousarray(self.data, dtype=np.float64))

    @classmethod
    def zeros(cls, grid: Grid3) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.shape))

    @classmethod
    def from_components(cls, fx: ScalarField, fy: ScalarField, fz: ScalarField) -> "VectorField":
        if not (fx.grid == fy.grid == fz.grid):
            raise ValueError("components must share one grid")
        return cls(fx.grid, np.stack([fx.data, fy.data, fz.data]))

    @property
    def components(self) -> tuple[ScalarField, ScalarField, ScalarField]:
        return tuple(ScalarField(self.grid, c) for c in self.data)  # type: ignore[return-value]

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.einsum("cijk,cijk->ijk", self.data, self.data))

    def validate_finite(self) -> None:
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteDataError("vector field contains non-finite values")


Field = ScalarField | VectorField


def magnitude_power(f: Field, p: float) -> np.ndarray:
    """Pointwise |f|^p, with |f| the Euclidean magnitude for vector fields."""
    mag = np.abs(f.data) if isinstance(f, ScalarField) else f.magnitude()
    if p == 1.0:
        return mag
    if p == 2.0:
        return mag * mag
    return mag**p


def sup_norm(f: Field) -> float:
    """Max over voxels of the pointwise Euclidean magnitude."""
    return float(magnitude_power(f, 1.0).max())


# ---------------------------------------------------------------------------
# spectral operators
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _wavenumbers(n: int, box_len: float):
    """Broadcastable rfft wavenumber arrays (kx, ky, kz) and |k|^2.

    The Nyquist entries are zeroed: the self-aliased Nyquist plane breaks the
    evenness of quadratic multipliers (projection, curl compositions), and
    band-limited fields carry no content there anyway.
    """
    k0 = TAU / box_len
    k_full = np.fft.fftfreq(n, d=1.0 / n) * k0
    k_full[n // 2] = 0.0
    k_half = np.fft.rfftfreq(n, d=1.0 / n) * k0
    k_half[-1] = 0.0
    kx = k_full.reshape(n, 1, 1)
    ky = k_full.reshape(1, n, 1)
    kz = k_half.reshape(1, 1, k_half.size)
    k2 = kx**2 + ky**2 + kz**2
    for arr in (kx, ky, kz, k2):
        arr.setflags(write=False)
    return kx, ky, kz, k2


def rfft_wavenumbers(grid: Grid3):
    """(kx, ky, kz, |k|^2) for the grid's real FFT layout (read-only views)."""
    return _wavenumbers(grid.n, grid.box_len)


def _rfftn(data: np.ndarray) -> np.ndarray:
    return np.fft.rfftn(data, axes=(-3, -2, -1))


def _irfftn(hat: np.ndarray, n: int) -> np.ndarray:
    return np.fft.irfftn(hat, s=(n, n, n), axes=(-3, -2, -1))


def curl(f: VectorField) -> VectorField:
    """Spectral curl; exact for band-limited fields, divergence-free output."""
    kx, ky, kz, _ = rfft_wavenumbers(f.grid)
    fh = _rfftn(f.data)
    ch = np.empty_like(fh)
    ch[0] = 1j * (ky * fh[2] - kz * fh[1])
    ch[1] = 1j * (kz * fh[0] - kx * fh[2])
    ch[2] = 1j * (kx * fh[1] - ky * fh[0])
    return VectorField(f.grid, _irfftn(ch, f.grid.n))


def divergence(f: VectorField) -> ScalarField:
    kx, ky, kz, _ = rfft_wavenumbers(f.grid)
    fh = _rfftn(f.data)
    dh = 1j * (kx * fh[0] + ky * fh[1] + kz * fh[2])
    return ScalarField(f.grid, _irfftn(dh, f.grid.n))


def gradient(s: ScalarField) -> VectorField:
    kx, ky, kz, _ = rfft_wavenumbers(s.grid)
    sh = _rfftn(s.data)
    gh = np.stack([1j * kx * sh, 1j * ky * sh, 1j * kz * sh])
    return VectorField(s.grid, _irfftn(gh, s.grid.n))


def leray_project(f: VectorField) -> VectorField:
    """Project onto divergence-free fields (mean flow untouched)."""
    kx, ky, kz, k2 = rfft_wavenumbers(f.grid)
    fh = _rfftn(f.data)
    k2safe = np.where(k2 == 0.0, 1.0, k2)
    kdotf = (kx * fh[0] + ky * fh[1] + kz * fh[2]) / k2safe
    fh[0] -= kx * kdotf
    fh[1] -= ky * kdotf
    fh[2] -= kz * kdotf
    return VectorField(f.grid, _irfftn(fh, f.grid.n))


def biot_savart(omega: VectorField) -> VectorField:
    """Mean-zero velocity with the given (divergence-free) curl.

    u_hat = i k x omega_hat / |k|^2, zero at k = 0.  curl(biot_savart(w)) == w
    for mean-zero solenoidal w.
    """
    kx, ky, kz, k2 = rfft_wavenumbers(omega.grid)
    oh = _rfftn(omega.data)
    k2safe = np.where(k2 == 0.0, 1.0, k2)
    uh = np.empty_like(oh)
    uh[0] = 1j * (ky * oh[2] - kz * oh[1]) / k2safe
    uh[1] = 1j * (kz * oh[0] - kx * oh[2]) / k2safe
    uh[2] = 1j * (kx * oh[1] - ky * oh[0]) / k2safe
    uh[:, 0, 0, 0] = 0.0
    return VectorField(omega.grid, _irfftn(uh, omega.grid.n))


# ---------------------------------------------------------------------------
# ball kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BallKernel:
    """Voxel indicator of {|y| <= radius} around index 0, periodic min-image.

    A voxel belongs to the ball iff its center lies within ``radius`` of the
    ball center; ties (distance exactly ``radius``) are included.
    """

    grid: Grid3
    radius: float
    mask: np.ndarray
    voxel_count: int

    @property
    def volume(self) -> float:
        return self.voxel_count * self.grid.voxel_volume

    @property
    def volume_error(self) -> float:
        """Relative voxelization error against the exact ball volume."""
        exact = UNIT_BALL_VOLUME * self.radius**3
        return abs(self.volume - exact) / exact


def _ball_mask(grid: Grid3, radius: float) -> np.ndarray:
    d = grid.min_image_axis()
    d2 = d**2
    dist2 = d2[:, None, None] + d2[None, :, None] + d2[None, None, :]
    return dist2 <= radius * radius


@lru_cache(maxsize=64)
def _ball_kernel_cached(n: int, box_len: float, radius: float) -> BallKernel:
    grid = Grid3(n, box_len)
    mask = _ball_mask(grid, radius)
    mask.setflags(write=False)
    return BallKernel(grid, radius, mask, int(mask.sum()))


@lru_cache(maxsize=64)
def _ball_spectrum_cached(n: int, box_len: float, radius: float) -> np.ndarray:
    kernel = _ball_kernel_cached(n, box_len, radius)
    spec = _rfftn(kernel.mask.astype(np.float64))
    spec.setflags(write=False)
    return spec


def ball_kernel(grid: Grid3, radius: float) -> BallKernel:
    if not 0.0 < radius < grid.box_len / 2.0:
        raise ValueError(f"radius {radius} outside (0, {grid.box_len / 2})")
    return _ball_kernel_cached(grid.n, grid.box_len, float(radius))


def sliding_ball_sum(grid: Grid3, values: np.ndarray, radius: float) -> np.ndarray:
    """Periodic sum of ``values`` over the ball around every voxel (FFT path).

    The kernel is symmetric under the min-image convention, so correlation
    and convolution coincide.  Deterministic for fixed inputs.
    """
    spec = _ball_spectrum_cached(grid.n, grid.box_len, float(radius))
    out = _irfftn(_rfftn(values) * spec, grid.n)
    return out


def sliding_ball_power(f: Field, p: float, r: float) -> np.ndarray:
    """x -> integral of |f|^p over B_r(x), Riemann sum over ball voxels."""
    grid = f.grid
    if not grid.spacing < r < grid.box_len / 2.0:
        raise ValueError(f"radius {r} outside (spacing, box_len/2) = ({grid.spacing}, {grid.box_len / 2})")
    sums = sliding_ball_sum(grid, magnitude_power(f, p), r)
    np.maximum(sums, 0.0, out=sums)
    return sums * grid.voxel_volume


def sliding_ball_power_multi(f: Field, p: float, scales):
    """Yield (r, ball power integral field) per scale, one field FFT total."""
    grid = f.grid
    spec = _rfftn(magnitude_power(f, p))
    for r in scales:
        r = float(r)
        if not grid.spacing < r < grid.box_len / 2.0:
            raise ValueError(f"radius {r} outside (spacing, box_len/2)")
        out = _irfftn(spec * _ball_spectrum_cached(grid.n, grid.box_len, r), grid.n)
        np.maximum(out, 0.0, out=out)
        yield r, out * grid.voxel_volume


def sliding_ball_lp(f: Field, p: float, r: float) -> ScalarField:
    """x -> ( integral_{B_r(x)} |f|^p dy )^(1/p) at every voxel center."""
    power = sliding_ball_power(f, p, r)
    if p != 1.0:
        power **= 1.0 / p
    return ScalarField(f.grid, power)


def ball_lp_bruteforce(f: Field, p: float, index: tuple[int, int, int], r: float) -> float:
    """Transform-free oracle: direct sum of |f|^p over the periodic ball.

    Same geometric membership rule as the FFT kernel (center distance <= r,
    ties included), but summed by explicit gather; no FFTs anywhere.
    """
    grid = f.grid
    if not 0.0 < r < grid.box_len / 2.0:
        raise ValueError(f"radius {r} outside (0, {grid.box_len / 2})")
    magp = magnitude_power(f, p)
    dist2 = grid.distance_sq_from(index)
    total = float(magp[dist2 <= r * r].sum()) * grid.voxel_volume
    return total ** (1.0 / p)


# ---------------------------------------------------------------------------
# field file I/O
# ---------------------------------------------------------------------------

_HEADER_KEYS = ("version", "n", "box_len", "ncomp", "dtype", "order")


def save_field(f: Field, path) -> None:
    """Write the bit-exact field file: one JSON header line + raw <f8 payload."""
    f.validate_finite()
    ncomp = 1 if isinstance(f, ScalarField) else 3
    header = {
        "version": 1,
        "n": f.grid.n,
        "box_len": f.grid.box_len,
        "ncomp": ncomp,
        "dtype": "f64le",
        "order": "zyx-c",
    }
    line = json.dumps(header, separators=(",", ":")) + "\n"
    payload = np.ascontiguousarray(f.data, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(line.encode("ascii"))
        fh.write(payload.tobytes())


def load_field(path) -> Field:
    """Read a field file; byte-exact inverse of :func:`save_field`.

    Raises
    ------
    FieldHeaderError
        missing/malformed header line or unsupported layout values
    FieldSizeError
        payload byte count disagrees with the declared shape
    NonFiniteDataError
        payload contains NaN or infinity
    """
    with open(path, "rb") as fh:
        line = fh.readline()
        if not line.endswith(b"\n"):
            raise FieldHeaderError("missing newline-terminated header line")
        try:
            header = json.loads(line.decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FieldHeaderError(f"malformed header: {exc}") from exc
        if not isinstance(header, dict) or set(header) != set(_HEADER_KEYS):
            raise FieldHeaderError(f"header must carry exactly the keys {_HEADER_KEYS}")
        if header["version"] != 1:
            raise FieldHeaderError(f"unsupported version {header['version']}")
        if header["dtype"] != "f64le" or header["order"] != "zyx-c":
            raise FieldHeaderError("unsupported dtype/order declaration")
        n, ncomp = header["n"], header["ncomp"]
        if not (isinstance(n, int) and isinstance(ncomp, int) and ncomp in (1, 3)):
            raise FieldHeaderError("n must be int and ncomp must be 1 or 3")
        payload = fh.read()
    expected = ncomp * n**3 * 8
    if len(payload) != expected:
        raise FieldSizeError(f"payload holds {len(payload)} bytes, header implies {expected}")
    grid = Grid3(n, float(header["box_len"]))
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if not np.all(np.isfinite(data)):
        raise NonFiniteDataError("payload contains non-finite values")
    if ncomp == 1:
        return ScalarField(grid, data.reshape(grid.shape))
    return VectorField(grid, data.reshape((3,) + grid.shape))
