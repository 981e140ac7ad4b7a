"""Closed-form weight-tail norms, dual weights, and the pairing (predual)
functional for truncated power weights.

The predual functional bounds integral |f g| against the global Morrey-type
norm of g: it is a scale-Stieltjes integral of complement-of-ball norms of f
against the derivative of the inverse tail norm, plus a global term.  The
tail norm of the truncated weight vanishes at scale 1, so the Stieltjes
density is set to zero past 1; the measure still blows up approaching 1 from
below, which makes the functional finite only when the mass of f sits within
distance 1 of the best center.  Gridded fields are sums of voxel point
masses, so the complement norm is a step function of the radius and the
Stieltjes integral is evaluated exactly (no quadrature error), one term per
distinct voxel distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Field, magnitude_power, sup_norm
from .morrey import WeightSpec

#: Frozen constant for the pairing inequality
#:     integral |f||g| <= HOLDER_CONSTANT * predual_bound(f) * gm_norm(g).
#: Provenance: max observed ratio 1.3342035913447365 over the seeded
#: calibration set of `calibrate_holder_constant` (n=16, 50 localized f /
#: global g pairs, the (p, theta, nu, rho) grid below), times a 1.25 safety
#: factor.  Regenerate with `calibrate_holder_constant()` if the norm kernels
#: change.
HOLDER_CONSTANT = 1.6677544891809206


class DualWeightDomainError(ValueError):
    """Dual weight requested where its defining integral is zero."""


def _tail_power_integral(w: WeightSpec, a: float) -> float:
    """integral_a^1 s^(-nu*theta) ds for a in [0, 1], +inf when divergent."""
    nt = w.nu * w.theta
    if a >= 1.0:
        return 0.0
    if math.isclose(nt, 1.0, rel_tol=1e-12):
        return math.inf if a == 0.0 else math.log(1.0 / a)
    if a == 0.0:
        return math.inf if nt > 1.0 else 1.0 / (1.0 - nt)
    return (1.0 - a ** (1.0 - nt)) / (1.0 - nt)


def _head_power_integral(w: WeightSpec, b: float) -> float:
    """integral_rho^min(b,1) s^(-nu*theta) ds, +inf when divergent."""
    nt = w.nu * w.theta
    hi = min(b, 1.0)
    if hi <= w.rho:
        return 0.0
    if w.rho == 0.0 and nt >= 1.0:
        return math.inf
    if math.isclose(nt, 1.0, rel_tol=1e-12):
        return math.log(hi / w.rho)
    return (hi ** (1.0 - nt) - w.rho ** (1.0 - nt)) / (1.0 - nt)


def weight_tail_norm(w: WeightSpec, t: float) -> float:
    """||w||_{L^theta(t, inf)} in closed form.

    Piecewise: constant on (0, rho], power-law core on (rho, 1), zero for
    t >= 1; logarithmic antiderivative when nu*theta == 1.
    """
    if t <= 0.0:
        raise ValueError(f"t must be positive, got {t}")
    if t >= 1.0:
        return 0.0
    a = max(t, w.rho)
    if math.isinf(w.theta):
        return a ** (-w.nu) if a > 0.0 else math.inf
    return _tail_power_integral(w, a) ** (1.0 / w.theta)


def total_weight_norm(w: WeightSpec) -> float:
    """||w||_{L^theta(0, inf)} (tail norm at t -> 0+)."""
    if math.isinf(w.theta):
        if w.rho > 0.0:
            return w.rho ** (-w.nu)
        return math.inf if w.nu > 0.0 else 1.0
    return _tail_power_integral(w, w.rho) ** (1.0 / w.theta)


def dual_weight(w: WeightSpec, t: float, variant: str = "tilde") -> float:
    """Pointwise dual weight of the truncated power weight (theta < inf).

    ``tilde``: w(t)^(theta-1) / integral_t^inf w^theta; defined for t < 1.
    ``bar``:   w(t)^(theta-1) / integral_0^t w^theta; defined past rho.
    """
    if math.isinf(w.theta):
        raise ValueError("dual weights are defined for theta < inf")
    if variant not in ("tilde", "bar"):
        raise ValueError(f"unknown variant {variant!r}")
    wt = float(w.value(t))
    if variant == "tilde":
        denom = _tail_power_integral(w, max(t, w.rho))
        if denom <= 0.0:
            raise DualWeightDomainError(f"tail integral vanishes at t={t} (support ends at 1)")
        return wt ** (w.theta - 1.0) / denom
    denom = _head_power_integral(w, t)
    if denom == 0.0:
        raise DualWeightDomainError(f"head integral vanishes at t={t} (support starts at {w.rho})")
    if math.isinf(denom):
        return 0.0
    return wt ** (w.theta - 1.0) / denom


def dual_weight_power_law(nu: float, theta: float, t: float, variant: str = "tilde") -> float:
    """Dual weight of the untruncated power law w(s) = s^(-nu) on (0, inf)."""
    if not (t > 0.0 and math.isfinite(theta) and theta > 1.0):
        raise ValueError("need t > 0 and finite theta > 1")
    nt = nu * theta
    if variant == "tilde":
        if nt <= 1.0:
            raise DualWeightDomainError("tail integral diverges unless nu*theta > 1")
        return (nt - 1.0) * t ** (nu - 1.0)
    if variant == "bar":
        if nt >= 1.0:
            raise DualWeightDomainError("head integral diverges unless nu*theta < 1")
        return (1.0 - nt) * t ** (nu - 1.0)
    raise ValueError(f"unknown variant {variant!r}")


# ---------------------------------------------------------------------------
# pairing functional
# ---------------------------------------------------------------------------

#: relative magnitude below which trailing field values count as support dust
SUPPORT_RTOL = 1e-12


class _RadialProfile:
    """Sorted-by-distance view of |f|^p' around one center.

    Complement norms are step functions of the radius; this exposes the step
    breakpoints and exact complement masses between them.
    """

    def __init__(self, f: Field, pprime: float, center: tuple[int, int, int]):
        grid = f.grid
        power = math.isfinite(pprime)
        vals = magnitude_power(f, pprime if power else 1.0).reshape(-1)
        dist = np.sqrt(grid.distance_sq_from(center)).reshape(-1)
        order = np.argsort(dist, kind="stable")
        self.pprime = pprime
        self.dist = dist[order]
        self.vox = grid.voxel_volume
        if power:
            csum = np.cumsum(vals[order] * self.vox)
            self.total = float(csum[-1])
            self.prefix = csum
        else:
            v = vals[order]
            self.suffix_max = np.maximum.accumulate(v[::-1])[::-1]
            self.total = float(v.max()) if v.size else 0.0
        # support radius: largest distance carrying non-dust mass
        scale = sup_norm(f)
        mask = vals[order] > SUPPORT_RTOL * scale if scale > 0.0 else np.zeros_like(vals, dtype=bool)
        self.support_radius = float(self.dist[mask].max()) if mask.any() else 0.0

    def complement_norm_beyond(self, t: float) -> float:
        """||f||_{L^p'} over {dist > t} (ties at t excluded, matching the
        ball rule that includes ties)."""
        idx = int(np.searchsorted(self.dist, t, side="right"))
        if math.isfinite(self.pprime):
            mass = self.total - (self.prefix[idx - 1] if idx > 0 else 0.0)
            return max(mass, 0.0) ** (1.0 / self.pprime)
        return float(self.suffix_max[idx]) if idx < self.dist.size else 0.0

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        d = np.unique(self.dist)
        return d[(d > lo) & (d < hi)]


def _conjugate(p: float) -> float:
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def _inverse_tail_drop(w: WeightSpec, thetaprime: float, t: float) -> float:
    """g(t) = ||w||_{L^theta(t,inf)}^(-theta') for t < 1 (+inf at t >= 1)."""
    if math.isinf(w.theta):
        # theta' = 1; inverse sup-norm of the tail
        return max(t, w.rho) ** (w.nu * thetaprime)
    T = _tail_power_integral(w, max(t, w.rho))
    if T == 0.0:
        return math.inf
    if math.isinf(T):
        return 0.0
    return T ** (-thetaprime / w.theta)


def stieltjes_predual_integral(f: Field, p: float, w: WeightSpec,
                               center: tuple[int, int, int]) -> float:
    """Exact scale-Stieltjes integral
    integral_0^inf ||f||^{theta'}_{L^p'(complement of B_t(center))} d(||w||^{-theta'}_{L^theta(t,inf)}).

    The derivative vanishes on (0, rho] (constant tail) and is forced to zero
    for t >= 1 where the tail norm has vanished.  Complement norms are taken
    on the torus.  Gridded complement norms are exact step functions, so the
    integral is summed exactly over the voxel-distance breakpoints; returns
    +inf when f carries mass at distance >= 1 from the center (the measure is
    not integrable against a non-vanishing integrand there).
    """
    if math.isinf(w.theta):
        raise ValueError("theta = inf is handled inside predual_bound")
    if not w.theta > 1.0:
        raise ValueError("need theta in (1, inf)")
    thetaprime = w.theta / (w.theta - 1.0)
    pprime = _conjugate(p)
    prof = _RadialProfile(f, pprime, center)
    if prof.total == 0.0:
        return 0.0
    if prof.support_radius >= 1.0:
        return math.inf
    lo = w.rho
    hi = min(1.0, prof.support_radius + SUPPORT_RTOL)
    edges = np.concatenate(([lo], prof.breakpoints(lo, hi), [hi]))
    total = 0.0
    g_right = None
    for a, b in zip(edges[:-1], edges[1:]):
        c = prof.complement_norm_beyond(a)
        if c == 0.0:
            break
        g_left = _inverse_tail_drop(w, thetaprime, a) if g_right is None else g_right
        g_right = _inverse_tail_drop(w, thetaprime, b)
        total += c**thetaprime * (g_right - g_left)
    return float(total)


@dataclass(frozen=True)
class PredualBound:
    """Value and decomposition of the pairing bound at the witnessing center."""

    value: float
    center: tuple[int, int, int]
    stieltjes_term: float
    global_term: float


def _support_centroid(f: Field) -> tuple[int, int, int]:
    """|f|-weighted circular-mean voxel, robust on the torus."""
    grid = f.grid
    mag = magnitude_power(f, 1.0)
    out = []
    for axis in range(3):
        m = mag.sum(axis=tuple(a for a in range(3) if a != axis))
        ang = 2.0 * math.pi * np.arange(grid.n) / grid.n
        s, c = float(m @ np.sin(ang)), float(m @ np.cos(ang))
        idx = int(round(math.atan2(s, c) / (2.0 * math.pi) * grid.n)) % grid.n
        out.append(idx)
    return tuple(out)


def candidate_centers(f: Field) -> list[tuple[int, int, int]]:
    """Support centroid of |f| plus its 26 one-voxel neighbors."""
    n = f.grid.n
    c = _support_centroid(f)
    cands = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                cands.append(((c[0] + dx) % n, (c[1] + dy) % n, (c[2] + dz) % n))
    return cands


def _theta_inf_term(f: Field, p: float, w: WeightSpec, center) -> float:
    """Exact Stieltjes term for theta = inf (theta' = 1, measure d((t v rho)^nu))."""
    pprime = _conjugate(p)
    prof = _RadialProfile(f, pprime, center)
    if prof.total == 0.0:
        return 0.0
    lo = w.rho
    hi = min(1.0, max(prof.support_radius + SUPPORT_RTOL, lo))
    if hi <= lo:
        return 0.0
    edges = np.concatenate(([lo], prof.breakpoints(lo, hi), [hi]))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        c = prof.complement_norm_beyond(a)
        if c == 0.0:
            break
        total += c * (max(b, w.rho) ** w.nu - max(a, w.rho) ** w.nu)
    return float(total)


def predual_bound(f: Field, p: float, w: WeightSpec,
                  centers: list[tuple[int, int, int]] | None = None) -> PredualBound:
    """Pairing bound: (inf over candidate centers of the Stieltjes integral)^(1/theta')
    plus ||f||_{L^p'} / ||w||_{L^theta(0, inf)}.

    The inf runs over a small candidate set (default: support centroid of |f|
    and its 26 neighbors) rather than all voxels; for localized f the
    centered choice minimizes the integral.
    """
    wtotal = total_weight_norm(w)
    if wtotal == 0.0:
        raise ValueError("degenerate weight (zero total norm)")
    pprime = _conjugate(p)
    if math.isfinite(pprime):
        fnorm = float((magnitude_power(f, pprime).sum() * f.grid.voxel_volume) ** (1.0 / pprime))
    else:
        fnorm = sup_norm(f)
    global_term = 0.0 if math.isinf(wtotal) else fnorm / wtotal
    if centers is None:
        centers = candidate_centers(f)
    if math.isinf(w.theta):
        vals = [_theta_inf_term(f, p, w, c) for c in centers]
        best = int(np.argmin(vals))
        st = vals[best]
    else:
        thetaprime = w.theta / (w.theta - 1.0)
        vals = [stieltjes_predual_integral(f, p, w, c) for c in centers]
        best = int(np.argmin(vals))
        st = vals[best] ** (1.0 / thetaprime) if math.isfinite(vals[best]) else math.inf
    return PredualBound(st + global_term, centers[best], st, global_term)


def pairing_integral(f: Field, g: Field) -> float:
    """integral over the torus of |f(x)| |g(x)| dx (Euclidean magnitudes)."""
    if f.grid != g.grid:
        raise ValueError("fields must share one grid")
    return float((magnitude_power(f, 1.0) * magnitude_power(g, 1.0)).sum() * f.grid.voxel_volume)


def calibrate_holder_constant(n: int = 16, pairs: int = 50, seed: int = 20240801) -> float:
    """Max observed pairing ratio over the seeded calibration ensemble.

    The frozen HOLDER_CONSTANT is this value times a 1.25 safety factor.
    Localized f (support inside the unit ball), global band-limited g, over a
    small (p, theta, nu, rho) grid.
    """
    from .grid import Grid3
    from .fields import localized_field, random_solenoidal_field
    from .morrey import MorreyParams, gm_norm

    grid = Grid3(n)
    configs = [
        (2.0, math.inf, 0.5, 0.25),
        (2.0, 2.0, 1.0, 0.25),
        (2.0, 2.0, 1.5, 0.1),
        (1.5, 3.0, 1.0, 0.2),
    ]
    worst = 0.0
    for i in range(pairs):
        fband = localized_field(grid, kmax=4, seed=seed + 2 * i, radius=0.85)
        gband = random_solenoidal_field(grid, kmax=4, seed=seed + 2 * i + 1)
        lhs = pairing_integral(fband, gband)
        for pp, th, nu, rho in configs:
            w = WeightSpec(nu=nu, rho=rho, theta=th)
            pb = predual_bound(fband, pp, w)
            gm = gm_norm(gband, MorreyParams.default(grid, w, p=pp)).value
            if pb.value > 0.0 and gm > 0.0 and math.isfinite(pb.value):
                worst = max(worst, lhs / (pb.value * gm))
    return worst
