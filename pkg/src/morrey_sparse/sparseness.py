"""Super-level sets, 1D/3D sparseness, admissible threshold/ratio pairs, and
the explicit constants of the sparseness implications.

Conventions.  A set is 3D delta-sparse around x0 at scale r when it fills at
most the fraction delta of B_r(x0) (voxel-counted); r-semi-mixed with ratio
delta when that holds at every center simultaneously.  Super-level sets use
strict inequality against lambda times the vector sup norm.

The implication constants c* and eps carry a bump-chain prefactor in place of
the generic smooth cutoff: the radial ramp is the polynomial smoothstep
3t^2 - 2t^3, whose gradient L^p norms have closed/one-dimensional-quadrature
forms.  The prefactor depends on the pair through the plateau fraction (there
is no absolute constant valid uniformly up to the admissibility boundary),
and is recorded alongside the derived constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.ndimage import map_coordinates

from .grid import (
    UNIT_BALL_VOLUME,
    Grid3,
    VectorField,
    ball_kernel,
    sliding_ball_sum,
    sup_norm,
)

SET_LABELS = ("S_1+", "S_1-", "S_2+", "S_2-", "S_3+", "S_3-")


class ZeroFieldError(ValueError):
    """Operation needs a nonzero field (sup norm vanished)."""


class InadmissiblePairError(ValueError):
    """Requested (lambda, delta) violates 1/(1+lambda) < delta."""


class ScaleRangeError(ValueError):
    """Requested sparseness scale falls outside what the grid can resolve."""


@dataclass(frozen=True)
class VoxelSet:
    """Boolean voxel mask over a grid."""

    grid: Grid3
    mask: np.ndarray

    def __post_init__(self) -> None:
        if self.mask.shape != self.grid.shape or self.mask.dtype != np.bool_:
            raise ValueError("mask must be a boolean array on the grid shape")

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    @property
    def volume(self) -> float:
        return self.count * self.grid.voxel_volume


@dataclass(frozen=True)
class PairLD:
    """Threshold/ratio pair (lambda, delta) with the slab-opening value h.

    Constructed by :func:`admissible_pair`; lambda then solves
    lambda*h + (1 - h) = 2*lambda exactly, and 1/(1+lambda) < delta holds.
    """

    lam: float
    delta: float
    h: float

    def __post_init__(self) -> None:
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lambda must lie in (0,1), got {self.lam}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")
        if not self.delta * (1.0 + self.lam) > 1.0:
            raise InadmissiblePairError(
                f"need 1/(1+lambda) < delta: lambda={self.lam}, delta={self.delta}")


def admissible_pair(delta: float) -> PairLD:
    """The canonical admissible pair for a ratio delta.

    h = (2/pi) arcsin((1-delta^2)/(1+delta^2)) and lambda = (1-h)/(2-h); the
    pair is rejected when 1/(1+lambda) >= delta.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0,1), got {delta}")
    h = (2.0 / math.pi) * math.asin((1.0 - delta * delta) / (1.0 + delta * delta))
    lam = (1.0 - h) / (2.0 - h)
    if not 1.0 / (1.0 + lam) < delta:
        raise InadmissiblePairError(
            f"delta={delta} gives lambda={lam:.6f} with 1/(1+lambda)={1 / (1 + lam):.6f} >= delta")
    return PairLD(lam, delta, h)


# ---------------------------------------------------------------------------
# level sets and sparseness measures
# ---------------------------------------------------------------------------


def superlevel_sets(f: VectorField, lam: float) -> dict[str, VoxelSet]:
    """Six masks {f_i^+- > lambda * ||f||_inf}, strict inequality.

    Keys follow SET_LABELS ("S_1+", "S_1-", ...).
    """
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0,1), got {lam}")
    sup = sup_norm(f)
    if sup == 0.0:
        raise ZeroFieldError("cannot threshold the zero field")
    thr = lam * sup
    out: dict[str, VoxelSet] = {}
    for i in range(3):
        out[SET_LABELS[2 * i]] = VoxelSet(f.grid, f.data[i] > thr)
        out[SET_LABELS[2 * i + 1]] = VoxelSet(f.grid, -f.data[i] > thr)
    return out


def sparse_3d(S: VoxelSet, center: tuple[int, int, int], r: float) -> float:
    """Voxel-counted density of S in the ball B_r(center), in [0, 1]."""
    kernel = ball_kernel(S.grid, r)
    dist2 = S.grid.distance_sq_from(center)
    inside = dist2 <= r * r
    return float(S.mask[inside].sum()) / kernel.voxel_count


class SemiMixed(NamedTuple):
    ok: bool
    max_density: float
    witness: tuple[int, int, int]


def semi_mixed(S: VoxelSet, r: float, delta: float) -> SemiMixed:
    """Worst-case ball density over every center, via one mask convolution.

    Counts are rounded back to integers (they are integers; the FFT path
    carries rounding dust), so the result matches per-center brute force
    exactly.
    """
    kernel = ball_kernel(S.grid, r)
    counts = sliding_ball_sum(S.grid, S.mask.astype(np.float64), r)
    counts = np.clip(np.rint(counts), 0.0, kernel.voxel_count)
    flat = int(np.argmax(counts))
    witness = tuple(int(c) for c in np.unravel_index(flat, S.grid.shape))
    max_density = float(counts.reshape(-1)[flat]) / kernel.voxel_count
    return SemiMixed(max_density <= delta, max_density, witness)


def fibonacci_directions(count: int) -> np.ndarray:
    """(count, 3) unit vectors on the golden-angle spiral."""
    if count < 2:
        raise ValueError("need at least two directions")
    i = np.arange(count)
    z = 1.0 - 2.0 * (i + 0.5) / count
    rad = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=1)


def segment_trace_ratios(S: VoxelSet, center: tuple[int, int, int], r: float,
                         dirs: np.ndarray) -> np.ndarray:
    """Trace measure / (2r) of S along (center - r v, center + r v) per row v.

    Segments are sampled at spacing/2 steps; the mask is trilinearly
    interpolated and the samples averaged.
    """
    grid = S.grid
    step = grid.spacing / 2.0
    m = int(math.floor(r / step + 1e-9))
    s = np.arange(-m, m + 1) * step
    base = np.asarray(center, dtype=np.float64).reshape(3, 1, 1)
    coords = base + dirs.T[:, :, None] * (s[None, None, :] / grid.spacing)
    vals = map_coordinates(S.mask.astype(np.float64), coords.reshape(3, -1),
                           order=1, mode="grid-wrap")
    return vals.reshape(len(dirs), s.size).mean(axis=1)


def sparse_1d(S: VoxelSet, center: tuple[int, int, int], r: float,
              ndir: int = 256) -> tuple[float, np.ndarray]:
    """Best (smallest) segment trace ratio over sampled directions.

    Existence claims are verified up to the direction resolution of the
    golden-angle sample.
    """
    dirs = fibonacci_directions(ndir)
    ratios = segment_trace_ratios(S, center, r, dirs)
    best = int(np.argmin(ratios))
    return float(ratios[best]), dirs[best]


# ---------------------------------------------------------------------------
# implication constants
# ---------------------------------------------------------------------------


def kappa(pair: PairLD) -> float:
    """Plateau fraction kappa = cbrt((d(l+1)+1) / (2 d(l+1)))  in (2^-1/3, 1)."""
    x = pair.delta * (1.0 + pair.lam)
    if not x > 1.0:
        raise InadmissiblePairError(f"need delta*(1+lambda) > 1, got {x}")
    return ((x + 1.0) / (2.0 * x)) ** (1.0 / 3.0)


def _ramp_l2_moment(kap: float) -> float:
    """integral_0^1 q'(t)^2 (kappa + (1-kappa) t)^2 dt for q = 3t^2 - 2t^3."""
    return 1.2 * kap + (12.0 / 35.0) * (1.0 - kap) ** 2


def bump_gradient_l2(kap: float, r: float) -> float:
    """Exact L^2 norm of the smoothstep shell gradient (plateau kappa*r, outer r)."""
    return math.sqrt(4.0 * math.pi * _ramp_l2_moment(kap) * r / (1.0 - kap))


def bump_chain_constant(pair: PairLD) -> float:
    """Prefactor replacing the generic constant in the L^2 implication.

    Derived from the smoothstep cutoff with plateau kappa*r: the cutoff
    gradient has exact L^2 norm sqrt(4 pi J(kappa) / (1-kappa)) r^(1/2), so a
    semi-mixedness violation forces
        sup_x ||f||_{L^2(B_r(x))} > cstar * r^(5/2) * ||curl f||_inf
    with cstar = cal * varpi * (1-kappa)^(-1/2) * (delta(1+lambda)-1)/2 and
    cal = (1-kappa) / sqrt(4 pi J(kappa)).  The prefactor vanishes at the
    admissibility boundary; no absolute constant works there.
    """
    kap = kappa(pair)
    return (1.0 - kap) / math.sqrt(4.0 * math.pi * _ramp_l2_moment(kap))


def cstar(pair: PairLD, cal: float | None = None) -> float:
    """Threshold constant of the local-L^2 sparseness implication.

    cstar = cal * varpi * (1-kappa)^(-1/2) * (delta(1+lambda) - 1)/2, with
    cal defaulting to the recorded bump-chain prefactor.
    """
    kap = kappa(pair)
    if cal is None:
        cal = bump_chain_constant(pair)
    x = pair.delta * (1.0 + pair.lam)
    return cal * UNIT_BALL_VOLUME * (x - 1.0) / 2.0 / math.sqrt(1.0 - kap)


def _conjugate(p: float) -> float:
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return math.inf if p == 1.0 else p / (p - 1.0)


@lru_cache(maxsize=256)
def _ramp_lp_coeff(pprime: float, ramp: float) -> float:
    """[4 pi integral_0^1 q'(t)^p' (1 + ramp t)^2 dt]^(1/p') for the outer-shell
    smoothstep (plateau radius r, outer (1+ramp) r)."""
    t = np.linspace(0.0, 1.0, 4001)
    q = (6.0 * t * (1.0 - t)) ** pprime
    integrand = q * (1.0 + ramp * t) ** 2
    val = 4.0 * math.pi * float(np.trapezoid(integrand, t))
    return val ** (1.0 / pprime)


def ramp_fraction(pair: PairLD) -> float:
    """Shell-widening fraction eta with (1+eta)^3 = (delta(1+lambda)+1)/2."""
    x = pair.delta * (1.0 + pair.lam)
    return ((x + 1.0) / 2.0) ** (1.0 / 3.0) - 1.0


def gm_chain_constant(pair: PairLD, p: float, theta: float, alpha: float,
                      rho: float = 0.0, r_max: float = 0.85,
                      holder_c: float | None = None, safety: float = 1.2) -> float:
    """Prefactor for the Morrey-type implication threshold.

    Closes the chain: semi-mixedness violation at scale r, the outer-shell
    smoothstep cutoff, the exact tail-norm drop bounds for the Stieltjes term,
    and the frozen pairing constant.  Minimized over r <= r_max (capped so the
    widened shell stays inside the weight support); the r-dependence cancels
    except through the tail-norm boundary factors.
    """
    if holder_c is None:
        from .predual import HOLDER_CONSTANT
        holder_c = HOLDER_CONSTANT
    pprime = _conjugate(p)
    if math.isinf(pprime):
        raise ValueError("p = 1 gives an L^inf shell norm; unsupported here")
    ramp = ramp_fraction(pair)
    x = pair.delta * (1.0 + pair.lam)
    a_half = (x - 1.0) / 2.0
    b_half = (x + 1.0) / 2.0
    c1 = _ramp_lp_coeff(pprime, ramp)
    base = a_half ** (1.0 / pprime) / (holder_c * c1 * ramp ** (1.0 / pprime))
    if math.isinf(theta):
        # the B and (r v rho) factors cancel exactly against the sup-form
        # tail drop; the minimum over r is the base itself
        return base / safety
    if not alpha * theta > 1.0:
        raise ValueError(f"need alpha*theta > 1, got {alpha * theta}")
    from .morrey import WeightSpec
    from .predual import total_weight_norm, weight_tail_norm

    w = WeightSpec(nu=alpha, rho=rho, theta=theta)
    wtotal = total_weight_norm(w)
    total_inv = 0.0 if math.isinf(wtotal) else 1.0 / wtotal
    r_cap = min(r_max, 0.95 / (1.0 + ramp))
    e_neg = (alpha * theta - 1.0) / theta  # = -E > 0
    best = math.inf
    for r in np.geomspace(max(rho, 0.02), r_cap, 64):
        tail_at_shell = weight_tail_norm(w, min((1.0 + ramp) * r, 0.999))
        m_r = (1.0 / tail_at_shell if tail_at_shell > 0.0 else math.inf) + total_inv
        val = max(r, rho) ** e_neg * b_half ** (e_neg / 3.0) / m_r
        best = min(best, val)
    return base * best / safety


def eps_const(pair: PairLD, p: float, theta: float, alpha: float,
              cal: float | None = None, rho: float = 0.0) -> float:
    """Threshold constant of the Morrey-type sparseness implication.

    eps = cal * varpi * ((d(1+l)-1)/2)^(1-1/p') * ((d(1+l)+1)/2)^E/3 * ramp
    with E = (1-alpha*theta)/theta (finite theta) or -alpha (theta = inf) and
    ramp = cbrt((d(1+l)+1)/2) - 1.  cal defaults to the chain prefactor of
    :func:`gm_chain_constant`.
    """
    if math.isfinite(theta) and not alpha * theta > 1.0:
        raise ValueError(f"need alpha*theta > 1 for finite theta, got {alpha * theta}")
    pprime = _conjugate(p)
    x = pair.delta * (1.0 + pair.lam)
    a_half = (x - 1.0) / 2.0
    b_half = (x + 1.0) / 2.0
    e_exp = -alpha if math.isinf(theta) else (1.0 - alpha * theta) / theta
    ramp = b_half ** (1.0 / 3.0) - 1.0
    if cal is None:
        cal = gm_chain_constant(pair, p, theta, alpha, rho=rho)
    one_minus = 0.0 if math.isinf(pprime) else 1.0 / pprime
    return cal * UNIT_BALL_VOLUME * a_half ** (1.0 - one_minus) * b_half ** (e_exp / 3.0) * ramp


@dataclass(frozen=True)
class SparseConstants:
    """Derived constants for one admissible pair (and one exponent triple)."""

    kappa: float
    cstar: float
    eps: float
    cal: float
    eps_cal: float


def sparse_constants(pair: PairLD, p: float = 2.0, theta: float = math.inf,
                     alpha: float = 0.5, rho: float = 0.0) -> SparseConstants:
    cal = bump_chain_constant(pair)
    eps_cal = gm_chain_constant(pair, p, theta, alpha, rho=rho)
    return SparseConstants(
        kappa=kappa(pair),
        cstar=cstar(pair, cal),
        eps=eps_const(pair, p, theta, alpha, cal=eps_cal, rho=rho),
        cal=cal,
        eps_cal=eps_cal,
    )


# ---------------------------------------------------------------------------
# sparseness-class membership
# ---------------------------------------------------------------------------


def z_alpha_member(f: VectorField, alpha: float, pair: PairLD, c0: float,
                   n_scales: int = 9) -> tuple[bool, list[tuple[int, int, int]]]:
    """Scale-comparable sparseness membership check.

    For every voxel x0, the dominant signed component (argmax of f_i^+-; ties:
    smallest index, then the positive part) must have its super-level set 3D
    delta-sparse around x0 at some scale (1/c) ||f||_inf^(-alpha) with c on a
    log grid inside (1/c0, c0).  Returns (ok, failing voxels truncated to 10).
    Membership is sound-for-pass at the sampled scales only.
    """
    if not c0 > 1.0:
        raise ValueError(f"c0 must exceed 1, got {c0}")
    grid = f.grid
    sup = sup_norm(f)
    if sup == 0.0:
        raise ZeroFieldError("membership undefined for the zero field")
    sets = superlevel_sets(f, pair.lam)
    base = sup ** (-alpha)
    cs = np.geomspace(1.0 / c0, c0, n_scales + 2)[1:-1]
    scales = base / cs
    valid = (scales > grid.spacing) & (scales < grid.box_len / 2.0)
    if not valid.any():
        raise ScaleRangeError(
            f"all scales (1/c) ||f||^-alpha = {base:.3g}/c fall outside "
            f"({grid.spacing:.3g}, {grid.box_len / 2:.3g})")
    scales = scales[valid]

    # dominant signed component per voxel, in SET_LABELS order
    parts = np.empty((6,) + grid.shape)
    for i in range(3):
        parts[2 * i] = np.maximum(f.data[i], 0.0)
        parts[2 * i + 1] = np.maximum(-f.data[i], 0.0)
    dominant = parts.argmax(axis=0)

    ok_any = np.zeros((6,) + grid.shape, dtype=bool)
    for si, label in enumerate(SET_LABELS):
        mask = sets[label].mask.astype(np.float64)
        for r in scales:
            kernel = ball_kernel(grid, float(r))
            counts = np.clip(np.rint(sliding_ball_sum(grid, mask, float(r))), 0.0,
                             kernel.voxel_count)
            ok_any[si] |= counts / kernel.voxel_count <= pair.delta
    ok_vox = np.take_along_axis(ok_any, dominant[None], axis=0)[0]
    failing = np.argwhere(~ok_vox)
    witnesses = [tuple(int(v) for v in row) for row in failing[:10]]
    return bool(ok_vox.all()), witnesses
