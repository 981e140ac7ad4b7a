"""Property-test harness for the sparseness implications.

Each check compares a norm premise against its threshold and then measures
the claimed conclusion (semi-mixedness of the six super-level sets).  The
headline property is soundness: whenever the premise holds, the conclusion
must hold; a report that fails the implication indicates a defect in the
constants, kernels, or discretization margins.

Both sides of every premise are degree-1 homogeneous in the field, so
amplitude rescaling can never change a verdict (this is asserted as a test
property).  Whether the premise is satisfiable at all on a given grid is a
question of field geometry: the derived thresholds are small, so on desk-size
grids the random ensemble typically falsifies the premise and passes the
implication vacuously.  Sweep summaries therefore report how many cases held
the premise, and the constructed counterexample exercises the contrapositive
quantitatively: it violates semi-mixedness and is guaranteed to break the
premise, with a wide measured margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

from .fields import random_solenoidal_field, vorticity_blob
from .grid import Grid3, VectorField, biot_savart, curl, sliding_ball_lp, sup_norm
from .morrey import MorreyParams, WeightSpec, gm_norm, log_scale_nodes
from .sparseness import (
    PairLD,
    SET_LABELS,
    admissible_pair,
    cstar,
    eps_const,
    kappa,
    ramp_fraction,
    semi_mixed,
    superlevel_sets,
)

#: relative guard band: a premise that holds by less than this margin is
#: flagged marginal (discretization error could flip it on the continuum)
GUARD_BAND = 0.05


@dataclass(frozen=True)
class VerifyReport:
    """Outcome of one implication check."""

    premise_lhs: float
    premise_rhs: float
    premise_holds: bool
    conclusion_holds: bool
    per_set_densities: tuple[float, ...]
    params: dict
    marginal: bool = False
    degenerate: bool = False

    @property
    def verdict(self) -> bool:
        """Pass iff the implication (premise => conclusion) is unviolated."""
        return (not self.premise_holds) or self.conclusion_holds


def _conclusion(base: VectorField, lam: float, delta: float, scale: float):
    sets = superlevel_sets(base, lam)
    densities = []
    ok = True
    for label in SET_LABELS:
        res = semi_mixed(sets[label], scale, delta)
        densities.append(res.max_density)
        ok = ok and res.ok
    return ok, tuple(densities)


def check_lemma_l2(f: VectorField, pair: PairLD, r: float, cal: float | None = None,
                   guard: float = GUARD_BAND) -> VerifyReport:
    """L^2 implication: sup_x ||f||_{L^2(B_r(x))} <= c* r^(5/2) ||curl f||_inf
    forces every super-level set of curl f to be (kappa r)-semi-mixed with
    ratio delta."""
    if not 0.0 < r <= 1.0:
        raise ValueError(f"scale must lie in (0, 1], got {r}")
    omega = curl(f)
    omega_sup = sup_norm(omega)
    lhs = float(sliding_ball_lp(f, 2.0, r).data.max())
    rhs = cstar(pair, cal) * r**2.5 * omega_sup
    params = {"lambda": pair.lam, "delta": pair.delta, "r": r, "mode": "l2"}
    if omega_sup == 0.0:
        # curl-free field: nothing to threshold; report a degenerate pass
        return VerifyReport(lhs, rhs, lhs <= rhs, True, (0.0,) * 6, params,
                            degenerate=True)
    conclusion, densities = _conclusion(omega, pair.lam, pair.delta, kappa(pair) * r)
    holds = lhs <= rhs
    marginal = holds and lhs > (1.0 - guard) * rhs
    return VerifyReport(lhs, rhs, holds, conclusion, densities, params, marginal=marginal)


def check_lemma_gm(f: VectorField, pair: PairLD, p: float, theta: float, alpha: float,
                   rho: float, r: float, mode: str = "curl", cal: float | None = None,
                   guard: float = GUARD_BAND, scale_count: int = 32) -> VerifyReport:
    """Morrey-type implication: a small global weighted norm of f forces every
    super-level set of curl f (mode "curl") or of f itself (mode "identity")
    to be r-semi-mixed with ratio delta."""
    if mode not in ("curl", "identity"):
        raise ValueError(f"mode must be 'curl' or 'identity', got {mode!r}")
    if not 0.0 < r <= 1.0:
        raise ValueError(f"scale must lie in (0, 1], got {r}")
    r_cap = 0.95 / (1.0 + ramp_fraction(pair))
    if r > r_cap:
        # the widened cutoff shell would cross the weight-support end, where
        # the pairing functional diverges and no threshold is sound
        raise ValueError(f"scale {r} exceeds the soundness cap {r_cap:.4f} "
                         "for this pair (cutoff shell must stay inside the "
                         "weight support)")
    pprime = math.inf if p == 1.0 else p / (p - 1.0)
    if math.isinf(pprime):
        raise ValueError("p must exceed 1")
    base = curl(f) if mode == "curl" else f
    base_sup = sup_norm(base)
    weight = WeightSpec(nu=alpha, rho=rho, theta=theta)
    params_obj = MorreyParams(p, weight, log_scale_nodes(f.grid, rho, 1.0, scale_count))
    lhs = gm_norm(f, params_obj).value
    e_exp = -alpha if math.isinf(theta) else (1.0 - alpha * theta) / theta
    shell_exp = (4.0 - 3.0 / pprime) if mode == "curl" else (3.0 - 3.0 / pprime)
    eps = eps_const(pair, p, theta, alpha, cal=cal, rho=rho)
    rhs = eps * max(r, rho) ** e_exp * r**shell_exp * base_sup
    params = {"lambda": pair.lam, "delta": pair.delta, "r": r, "p": p,
              "theta": theta, "alpha": alpha, "rho": rho, "mode": mode}
    if base_sup == 0.0:
        return VerifyReport(lhs, rhs, lhs <= rhs, True, (0.0,) * 6, params,
                            degenerate=True)
    conclusion, densities = _conclusion(base, pair.lam, pair.delta, r)
    holds = lhs <= rhs
    marginal = holds and lhs > (1.0 - guard) * rhs
    return VerifyReport(lhs, rhs, holds, conclusion, densities, params, marginal=marginal)


class ScaleTooSmallError(ValueError):
    """Construction scale falls under the grid resolution floor."""


def counterexample_field(r: float, pair: PairLD, grid: Grid3,
                         center: tuple[int, int, int] | None = None,
                         sigma_factor: float = 1.5) -> VectorField:
    """Velocity field whose vorticity defeats (kappa r)-semi-mixedness.

    The vorticity is a coherent axis-aligned blob whose first component
    exceeds lambda ||w||_inf on all of B_{kappa r}(center) (density 1 there),
    reconstructed to a velocity through the periodic curl inverse.  The
    implication's contrapositive then guarantees the L^2 premise fails.
    """
    kap = kappa(pair)
    if kap * r < 4.0 * grid.spacing:
        raise ScaleTooSmallError(
            f"kappa*r = {kap * r:.4f} under-resolved (need >= 4 spacing = {4 * grid.spacing:.4f})")
    if center is None:
        center = (grid.n // 2, grid.n // 2, grid.n // 2)
    sigma = sigma_factor * kap * r
    omega = vorticity_blob(grid, center, sigma, axis=(1.0, 0.0, 0.0))
    return biot_savart(omega)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepConfig:
    """Cartesian sweep grid for implication checks.

    ``lemma`` selects the premise family ("l2" or "gm"); gm sweeps also take
    exponent lists.  ``adversarial`` appends one counterexample field per
    (delta, scale) cell.
    """

    lemma: str = "l2"
    n: int = 32
    deltas: tuple[float, ...] = (0.75,)
    scales: tuple[float, ...] = (0.2, 0.5)
    seeds: tuple[int, ...] = tuple(range(20))
    kmax: int = 8
    modes: tuple[str, ...] = ("curl",)
    thetas: tuple[float, ...] = (math.inf,)
    p: float = 2.0
    alphas: tuple[float, ...] = (0.5,)
    rho: float = 0.05
    adversarial: bool = False
    box_len: float = 2.0 * math.pi

    def __post_init__(self) -> None:
        if self.lemma not in ("l2", "gm"):
            raise ValueError(f"lemma must be 'l2' or 'gm', got {self.lemma!r}")


@dataclass
class SweepSummary:
    total: int = 0
    premise_holding: int = 0
    degenerate: int = 0
    marginal: int = 0
    violations: int = 0
    marginal_violations: int = 0
    reports: list[VerifyReport] = field(default_factory=list)


def sweep(config: SweepConfig, threads: int = 1) -> list[VerifyReport]:
    """Run the full Cartesian grid; reports are ordered by parameter index.

    ``threads`` sizes the worker pool; ordering and values are independent of
    the pool size (order-preserving map over a pre-built case list).
    """
    grid = Grid3(config.n, config.box_len)
    pairs = [admissible_pair(d) for d in config.deltas]
    jobs = []
    for pair in pairs:
        for r in config.scales:
            cases: list[VectorField] = [
                random_solenoidal_field(grid, config.kmax, seed) for seed in config.seeds
            ]
            if config.adversarial and kappa(pair) * r >= 4.0 * grid.spacing:
                cases.append(counterexample_field(r, pair, grid))
            for f in cases:
                if config.lemma == "l2":
                    jobs.append((check_lemma_l2, (f, pair, r)))
                else:
                    for theta, alpha, mode in product(config.thetas, config.alphas,
                                                      config.modes):
                        jobs.append((check_lemma_gm,
                                     (f, pair, config.p, theta, alpha, config.rho, r, mode)))
    if threads <= 1:
        return [fn(*fargs) for fn, fargs in jobs]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda job: job[0](*job[1]), jobs))


def summarize(reports: list[VerifyReport]) -> SweepSummary:
    s = SweepSummary(reports=list(reports))
    s.total = len(reports)
    for rep in reports:
        s.premise_holding += rep.premise_holds and not rep.degenerate
        s.degenerate += rep.degenerate
        s.marginal += rep.marginal
        if not rep.verdict:
            if rep.marginal:
                s.marginal_violations += 1
            else:
                s.violations += 1
    return s
