"""Local, complementary-local, and global Morrey-type quasi-norms.

The scale weight is the truncated power law ``w(s) = s^(-nu)`` on ``[rho, 1]``
and zero elsewhere.  Norms take an L^theta average (or sup, theta = inf) in
the scale variable of weighted local L^p ball norms.  The L^theta(0, inf)
integral truncates exactly to the weight support; quadrature over the scale
nodes is trapezoidal in log r and runs in log space so huge finite theta
values stay stable.

Caveat: fields live on a torus, so complement-of-ball norms count everything
in one fundamental cell outside the ball.  For fields that are not compactly
supported well inside a cell this differs from the whole-space quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import Field, Grid3, magnitude_power, sliding_ball_power_multi


@dataclass(frozen=True)
class WeightSpec:
    """Truncated power weight w(s) = s^(-nu) * 1_[rho, 1].

    ``theta`` is the scale-integrability exponent; ``theta = math.inf`` selects
    the sup form.  ``log_tail`` flags the nu*theta == 1 edge case where the
    closed-form tail integrals switch to the logarithmic antiderivative.
    """

    nu: float
    rho: float = 0.0
    theta: float = math.inf

    #: upper end of the weight support (fixed)
    upper: float = 1.0

    def __post_init__(self) -> None:
        if self.nu < 0.0:
            raise ValueError(f"weight exponent must be >= 0, got nu={self.nu}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"lower cutoff must lie in [0, 1), got rho={self.rho}")
        if not self.theta > 1.0:
            raise ValueError(f"theta must lie in (1, inf], got {self.theta}")
        if self.upper != 1.0:
            raise ValueError("weight support upper end is fixed at 1")

    @property
    def log_tail(self) -> bool:
        return math.isfinite(self.theta) and math.isclose(self.nu * self.theta, 1.0, rel_tol=1e-12)

    def value(self, s):
        """Pointwise weight, vectorized; zero outside [rho, 1]."""
        s = np.asarray(s, dtype=np.float64)
        inside = (s >= self.rho) & (s <= 1.0) & (s > 0.0)
        out = np.zeros_like(s)
        np.power(s, -self.nu, out=out, where=inside)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class MorreyParams:
    """Lebesgue exponent, scale weight, and quadrature nodes for one norm."""

    p: float
    weight: WeightSpec
    scales: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.p < 1.0:
            raise ValueError(f"p must be >= 1, got {self.p}")
        sc = tuple(float(s) for s in self.scales)
        if not sc:
            raise ValueError("scale list must be non-empty")
        if any(s <= 0.0 for s in sc) or any(b <= a for a, b in zip(sc, sc[1:])):
            raise ValueError("scales must be positive and strictly increasing")
        object.__setattr__(self, "scales", sc)

    @classmethod
    def default(cls, grid: Grid3, weight: WeightSpec, p: float = 2.0, count: int = 32,
                r_max: float = 1.0) -> "MorreyParams":
        """Log-spaced nodes on [max(rho, 2*spacing), r_max]."""
        lo = max(weight.rho, 2.0 * grid.spacing)
        if not lo < r_max:
            raise ValueError(f"empty scale range [{lo}, {r_max}]")
        return cls(p, weight, tuple(np.geomspace(lo, r_max, count)))


def log_scale_nodes(grid: Grid3, rho: float, r_max: float = 1.0, count: int = 32) -> tuple[float, ...]:
    lo = max(rho, 2.0 * grid.spacing)
    if not lo < r_max:
        raise ValueError(f"empty scale range [{lo}, {r_max}]")
    return tuple(np.geomspace(lo, r_max, count))


class GmNorm(NamedTuple):
    value: float
    center: tuple[int, int, int]
    scale: float | None  # argmax scale for theta = inf, None otherwise


class ClassicalMorrey(NamedTuple):
    value: float
    center: tuple[int, int, int]
    scale: float


def _trapezoid_logr_coeffs(scales: np.ndarray) -> np.ndarray:
    """Coefficients c_i with  integral g(r) dr  ~=  sum_i c_i g(r_i).

    Trapezoid rule in u = log r:  integral g dr = integral g(r) r du.
    """
    if scales.size == 1:
        # a single node cannot support a quadrature; treat as a point mass of
        # unit log-width so homogeneity and monotonicity still hold
        return scales.copy()
    u = np.log(scales)
    du = np.diff(u)
    c = np.zeros_like(scales)
    c[:-1] += 0.5 * du
    c[1:] += 0.5 * du
    return c * scales


def _supported_scales(params: MorreyParams) -> np.ndarray:
    w = params.weight
    sc = np.asarray(params.scales)
    keep = (sc >= w.rho) & (sc <= w.upper)
    return sc[keep]


def _combine_theta(weighted: np.ndarray, scales: np.ndarray, theta: float) -> np.ndarray:
    """Reduce w(r)*v(r) samples over the scale axis (axis 0) per L^theta.

    ``weighted`` has shape (n_scales, ...); returns shape (...).  Finite theta
    integrates [w v]^theta in log-r trapezoid form, evaluated in log space.
    """
    if math.isinf(theta):
        return weighted.max(axis=0)
    coeffs = _trapezoid_logr_coeffs(scales)
    with np.errstate(divide="ignore"):
        logs = np.log(weighted)  # -inf where the sample is zero
    terms = theta * logs + np.log(coeffs).reshape((-1,) + (1,) * (weighted.ndim - 1))
    peak = terms.max(axis=0)
    with np.errstate(invalid="ignore"):
        total = peak + np.log(np.exp(terms - peak).sum(axis=0))
    out = np.exp(total / theta)
    return np.where(np.isfinite(peak), out, 0.0)


def _ball_lp_profile(f: Field, p: float, center: tuple[int, int, int], scales: np.ndarray) -> np.ndarray:
    """||f||_{L^p(B_r(center))} for every r in ``scales`` (single center)."""
    magp = magnitude_power(f, p)
    dist2 = f.grid.distance_sq_from(center)
    order = np.argsort(dist2, axis=None, kind="stable")
    sorted_d2 = dist2.reshape(-1)[order]
    csum = np.cumsum(magp.reshape(-1)[order])
    idx = np.searchsorted(sorted_d2, scales**2, side="right")
    sums = np.where(idx > 0, csum[np.maximum(idx - 1, 0)], 0.0)
    return (sums * f.grid.voxel_volume) ** (1.0 / p)


def lm_norm(f: Field, params: MorreyParams, center: tuple[int, int, int]) -> float:
    """Local Morrey-type quasi-norm centered at one voxel.

    theta < inf: log-trapezoid quadrature over the scale nodes of
    [w(r) ||f||_{L^p(B_r(center))}]^theta dr, to the power 1/theta;
    theta = inf: max over the nodes of w(r) ||f||_{L^p(B_r(center))}.
    """
    scales = _supported_scales(params)
    if scales.size == 0:
        raise ValueError("no scale nodes inside the weight support")
    vals = _ball_lp_profile(f, params.p, center, scales)
    weighted = params.weight.value(scales) * vals
    return float(_combine_theta(weighted, scales, params.weight.theta))


def clm_norm(f: Field, params: MorreyParams, center: tuple[int, int, int]) -> float:
    """Complementary local norm: L^p over the torus minus the ball."""
    scales = _supported_scales(params)
    if scales.size == 0:
        raise ValueError("no scale nodes inside the weight support")
    magp = magnitude_power(f, params.p)
    total = float(magp.sum()) * f.grid.voxel_volume
    ball = _ball_lp_profile(f, params.p, center, scales) ** params.p
    comp = np.maximum(total - ball, 0.0) ** (1.0 / params.p)
    weighted = params.weight.value(scales) * comp
    return float(_combine_theta(weighted, scales, params.weight.theta))


def gm_norm(f: Field, params: MorreyParams) -> GmNorm:
    """Global Morrey-type quasi-norm: sup over all voxel centers.

    One sliding ball pass per scale node; never n^3 independent local norms.
    """
    scales = _supported_scales(params)
    if scales.size == 0:
        raise ValueError("no scale nodes inside the weight support")
    grid = f.grid
    wvals = params.weight.value(scales)
    theta = params.weight.theta
    p = params.p

    if math.isinf(theta):
        best = None
        best_scale_idx = None
        for i, (r, power) in enumerate(sliding_ball_power_multi(f, p, scales)):
            layer = wvals[i] * power ** (1.0 / p)
            if best is None:
                best = layer
                best_scale_idx = np.zeros(grid.shape, dtype=np.int32)
            else:
                replace = layer > best
                best = np.where(replace, layer, best)
                best_scale_idx[replace] = i
        flat = int(np.argmax(best))
        center = np.unravel_index(flat, grid.shape)
        return GmNorm(float(best.reshape(-1)[flat]), tuple(int(c) for c in center),
                      float(scales[best_scale_idx.reshape(-1)[flat]]))

    stack = np.empty((scales.size,) + grid.shape)
    for i, (r, power) in enumerate(sliding_ball_power_multi(f, p, scales)):
        stack[i] = wvals[i] * power ** (1.0 / p)
    per_voxel = _combine_theta(stack, scales, theta)
    flat = int(np.argmax(per_voxel))
    center = np.unravel_index(flat, grid.shape)
    return GmNorm(float(per_voxel.reshape(-1)[flat]), tuple(int(c) for c in center), None)


def classical_morrey(f: Field, p: float, alpha: float, r_min: float, r_max: float,
                     scales=None, count: int = 32) -> ClassicalMorrey:
    """sup over centers and scales of r^(-alpha) * integral_{B_r(x)} |f|^p dy.

    Note the integral is NOT taken to the power 1/p; this is the raw local
    mass quantity.  Returns the sup with a witnessing (center, scale).
    """
    grid = f.grid
    if not 0.0 < r_min < r_max <= 1.0:
        raise ValueError(f"need 0 < r_min < r_max <= 1, got [{r_min}, {r_max}]")
    if scales is None:
        lo = max(r_min, 2.0 * grid.spacing)
        if not lo < r_max:
            raise ValueError(f"scale range [{lo}, {r_max}] empty after the grid floor")
        scales = np.geomspace(lo, r_max, count)
    else:
        scales = np.asarray(sorted(float(s) for s in scales))
        if scales.size == 0 or scales[0] < r_min - 1e-12 or scales[-1] > r_max + 1e-12:
            raise ValueError("explicit scales must be non-empty and lie in [r_min, r_max]")
    best_val = -math.inf
    best_center = (0, 0, 0)
    best_scale = float(scales[0])
    for r, power in sliding_ball_power_multi(f, p, scales):
        layer = power * r ** (-alpha)
        flat = int(np.argmax(layer))
        val = float(layer.reshape(-1)[flat])
        if val > best_val:
            best_val = val
            best_center = tuple(int(c) for c in np.unravel_index(flat, grid.shape))
            best_scale = float(r)
    return ClassicalMorrey(best_val, best_center, best_scale)
