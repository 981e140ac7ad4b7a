"""Pseudo-spectral incompressible Navier-Stokes on the periodic box, plus the
dynamic restricted-Morrey criterion evaluators.

The stepper is integrating-factor RK4 (the viscous factor is exact, so pure
Fourier-mode decay is reproduced to rounding), with a 2/3-rule dealiased
convective term and Leray projection; viscosity is fixed at 1.  Decaying box
flows have no escape times, so criterion evaluation also accepts
user-selected reference times; the evaluated quantities are the point, not
the blow-up dichotomy.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .fields import random_solenoidal_field
from .grid import (
    Grid3,
    VectorField,
    curl,
    load_field,
    rfft_wavenumbers,
    save_field,
    sup_norm,
)
from .morrey import MorreyParams, WeightSpec, gm_norm, log_scale_nodes

VISCOSITY = 1.0


class SolverInstabilityError(RuntimeError):
    """Non-finite state detected; carries the last good time."""

    def __init__(self, message: str, last_good_time: float):
        super().__init__(message)
        self.last_good_time = last_good_time


class SchedulingError(RuntimeError):
    """Criterion window holds too few snapshots for the inf."""


@dataclass(frozen=True)
class SolverConfig:
    n: int
    dt: float
    t_end: float
    ic: str = "taylor-green"
    ic_params: dict = field(default_factory=dict)
    snapshot_every: int = 50
    seed: int = 0
    nu: float = VISCOSITY
    box_len: float = 2.0 * math.pi

    def __post_init__(self) -> None:
        if self.dt <= 0.0 or self.t_end <= 0.0:
            raise ValueError("dt and t_end must be positive")
        if self.nu != VISCOSITY:
            raise ValueError("viscosity is fixed at 1")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")


@dataclass
class Trajectory:
    """Solver output: periodic snapshots plus per-step norm series."""

    grid: Grid3
    series: dict[str, np.ndarray]
    snapshots: list[tuple[float, VectorField]]
    config: SolverConfig | None = None

    def snapshot_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    def series_at(self, t: float, column: str) -> float:
        ts = self.series["t"]
        idx = int(np.argmin(np.abs(ts - t)))
        return float(self.series[column][idx])


SERIES_COLUMNS = ("t", "u_sup", "omega_sup", "energy", "enstrophy")


def initial_condition(name: str, grid: Grid3, params: dict | None = None,
                      seed: int = 0) -> VectorField:
    """Built-in initial flows: shear, taylor-green, abc, random."""
    params = dict(params or {})
    x = grid.axis_coords()
    X = x[:, None, None]
    Y = x[None, :, None]
    Z = x[None, None, :]
    shape = grid.shape
    amp = float(params.pop("amplitude", 1.0))
    if name == "shear":
        data = np.zeros((3,) + shape)
        data[0] = amp * np.broadcast_to(np.sin(Y), shape)
        return VectorField(grid, data)
    if name == "taylor-green":
        data = np.zeros((3,) + shape)
        data[0] = amp * np.sin(X) * np.cos(Y) * np.cos(Z)
        data[1] = -amp * np.cos(X) * np.sin(Y) * np.cos(Z)
        return VectorField(grid, data)
    if name == "abc":
        a = float(params.pop("a", 1.0))
        b = float(params.pop("b", 1.0))
        c = float(params.pop("c", 1.0))
        data = np.empty((3,) + shape)
        data[0] = amp * (a * np.sin(Z) + c * np.cos(Y))
        data[1] = amp * (b * np.sin(X) + a * np.cos(Z))
        data[2] = amp * (c * np.sin(Y) + b * np.cos(X))
        return VectorField(grid, data)
    if name == "random":
        kmax = int(params.pop("kmax", max(2, grid.n // 8)))
        return random_solenoidal_field(grid, kmax, seed, amplitude=amp)
    raise ValueError(f"unknown initial condition {name!r}")


def _dealias_mask(grid: Grid3) -> np.ndarray:
    # built from raw integer frequencies (the derivative arrays zero Nyquist,
    # which must NOT sneak through the 2/3 cut)
    n = grid.n
    ix = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    iz = np.abs(np.fft.rfftfreq(n, d=1.0 / n))
    cut = n / 3.0
    return ((ix < cut)[:, None, None] & (ix < cut)[None, :, None]
            & (iz < cut)[None, None, :])


def simulate(config: SolverConfig) -> Trajectory:
    """Integrate the incompressible momentum equation from the configured flow.

    Integrating-factor RK4 in spectral space; convective term dealiased by the
    2/3 rule and Leray-projected each evaluation.  Snapshots are stored every
    ``snapshot_every`` steps (plus t = 0 and the final time); the norm series
    is recorded at every step.
    """
    grid = Grid3(config.n, config.box_len)
    u0 = initial_condition(config.ic, grid, config.ic_params, config.seed)
    u0_sup = sup_norm(u0)
    cfl = 0.5 * grid.spacing / max(1.0, u0_sup)
    if config.dt > cfl:
        raise ValueError(f"dt={config.dt} violates the step bound {cfl:.3e}")

    kx, ky, kz, k2 = rfft_wavenumbers(grid)
    dealias = _dealias_mask(grid)
    uh = np.fft.rfftn(u0.data, axes=(-3, -2, -1))
    # project the initial data; analytic ICs are solenoidal already
    uh = _project(uh, kx, ky, kz, k2)
    # viscous factor uses the true |k|^2 (the derivative arrays zero Nyquist)
    k0 = 2.0 * math.pi / grid.box_len
    kfull = np.fft.fftfreq(grid.n, d=1.0 / grid.n) * k0
    khalf = np.fft.rfftfreq(grid.n, d=1.0 / grid.n) * k0
    k2visc = (kfull**2)[:, None, None] + (kfull**2)[None, :, None] + (khalf**2)[None, None, :]
    half = np.exp(-config.nu * k2visc * config.dt / 2.0)
    full = half * half

    nsteps = int(round(config.t_end / config.dt))
    rows = {name: [] for name in SERIES_COLUMNS}
    snapshots: list[tuple[float, VectorField]] = []

    def record(step: int, t: float, uh_now):
        u_phys = np.fft.irfftn(uh_now, s=grid.shape, axes=(-3, -2, -1))
        oh = _curl_hat(uh_now, kx, ky, kz)
        w_phys = np.fft.irfftn(oh, s=grid.shape, axes=(-3, -2, -1))
        umag2 = np.einsum("cijk,cijk->ijk", u_phys, u_phys)
        wmag2 = np.einsum("cijk,cijk->ijk", w_phys, w_phys)
        rows["t"].append(t)
        rows["u_sup"].append(math.sqrt(float(umag2.max())))
        rows["omega_sup"].append(math.sqrt(float(wmag2.max())))
        rows["energy"].append(0.5 * float(umag2.sum()) * grid.voxel_volume)
        rows["enstrophy"].append(0.5 * float(wmag2.sum()) * grid.voxel_volume)
        if step % config.snapshot_every == 0 or step == nsteps:
            snapshots.append((t, VectorField(grid, u_phys)))

    record(0, 0.0, uh)
    t = 0.0
    for step in range(1, nsteps + 1):
        n1 = _nonlinear(uh, grid, kx, ky, kz, k2, dealias)
        n2 = _nonlinear(half * (uh + 0.5 * config.dt * n1), grid, kx, ky, kz, k2, dealias)
        n3 = _nonlinear(half * uh + 0.5 * config.dt * n2, grid, kx, ky, kz, k2, dealias)
        n4 = _nonlinear(full * uh + config.dt * half * n3, grid, kx, ky, kz, k2, dealias)
        uh = full * uh + (config.dt / 6.0) * (full * n1 + 2.0 * half * (n2 + n3) + n4)
        t = step * config.dt
        if not np.isfinite(uh.view(np.float64)).all():
            raise SolverInstabilityError(f"non-finite state at t={t:.6f}", t - config.dt)
        record(step, t, uh)

    series = {name: np.asarray(vals) for name, vals in rows.items()}
    return Trajectory(grid, series, snapshots, config)


def _curl_hat(uh, kx, ky, kz):
    oh = np.empty_like(uh)
    oh[0] = 1j * (ky * uh[2] - kz * uh[1])
    oh[1] = 1j * (kz * uh[0] - kx * uh[2])
    oh[2] = 1j * (kx * uh[1] - ky * uh[0])
    return oh


def _project(fh, kx, ky, kz, k2):
    k2safe = np.where(k2 == 0.0, 1.0, k2)
    kdotf = (kx * fh[0] + ky * fh[1] + kz * fh[2]) / k2safe
    out = fh.copy()
    out[0] -= kx * kdotf
    out[1] -= ky * kdotf
    out[2] -= kz * kdotf
    return out


def _nonlinear(uh, grid: Grid3, kx, ky, kz, k2, dealias):
    """P[u x omega] in spectral space, 2/3-dealiased.

    Rotational form: (u . grad)u = omega x u + grad(|u|^2/2); the gradient
    part is absorbed into pressure by the projection, so P[u x omega] is the
    projected convective term with a third fewer transforms.
    """
    u = np.fft.irfftn(uh, s=grid.shape, axes=(-3, -2, -1))
    w = np.fft.irfftn(_curl_hat(uh, kx, ky, kz), s=grid.shape, axes=(-3, -2, -1))
    cross = np.empty_like(u)
    cross[0] = u[1] * w[2] - u[2] * w[1]
    cross[1] = u[2] * w[0] - u[0] * w[2]
    cross[2] = u[0] * w[1] - u[1] * w[0]
    ch = np.fft.rfftn(cross, axes=(-3, -2, -1))
    ch *= dealias
    return _project(ch, kx, ky, kz, k2)


# ---------------------------------------------------------------------------
# escape times and the dynamic criterion
# ---------------------------------------------------------------------------


def detect_escape_times(series: dict[str, np.ndarray], which: str = "u") -> list[float]:
    """Sample times whose norm every strictly later sample exceeds.

    Discrete stand-in for the escape-time definition; the final sample never
    qualifies.  ``which`` selects the u or omega sup-norm series.
    """
    col = {"u": "u_sup", "omega": "omega_sup"}.get(which)
    if col is None:
        raise ValueError(f"which must be 'u' or 'omega', got {which!r}")
    t = np.asarray(series["t"])
    v = np.asarray(series[col])
    if t.size == 0:
        raise ValueError("empty series")
    suffix_min = math.inf
    qualifies = np.zeros(v.size, dtype=bool)
    for k in range(v.size - 2, -1, -1):
        suffix_min = min(suffix_min, v[k + 1])
        qualifies[k] = v[k] < suffix_min
    return [float(tk) for tk, q in zip(t, qualifies) if q]


class DissipationScale(NamedTuple):
    value: float
    clipped: bool


def dissipation_scale(norm: float, beta: float, c: float, grid: Grid3) -> DissipationScale:
    """eta = c * norm^(-beta), clipped to [2 spacing, 1]; clipping is flagged."""
    if norm <= 0.0:
        raise ValueError("norm must be positive")
    raw = c * norm ** (-beta)
    lo = 2.0 * grid.spacing
    val = min(max(raw, lo), 1.0)
    return DissipationScale(val, val != raw)


@dataclass(frozen=True)
class CriterionSpec:
    """Parameters of the dynamic restricted-Morrey criterion.

    ``field_mode`` picks the measured field (u or omega); ``reference`` the
    norm entering the cutoff and threshold (defaults to omega); the threshold
    exponent family is "curl" when the thresholded field is the curl of the
    measured one, "identity" otherwise (resolved automatically).  The mixed
    variant uses both norms: cutoff c u^(-beta) w^(-beta2) and threshold
    eps0 u^gamma1 w^gamma2.
    """

    alpha: float
    beta: float
    nu_w: float
    p: float = 2.0
    theta: float = math.inf
    c: float = 1.0
    c0: float = 2.0
    eps0: float = 0.1
    field_mode: str = "u"
    window_mode: str = "vorticity"
    reference: str = "omega"
    beta2: float | None = None
    gamma1: float | None = None
    gamma2: float | None = None
    scale_count: int = 24

    def __post_init__(self) -> None:
        if self.field_mode not in ("u", "omega"):
            raise ValueError("field_mode must be 'u' or 'omega'")
        if self.window_mode not in ("velocity", "vorticity"):
            raise ValueError("window_mode must be 'velocity' or 'vorticity'")
        if self.reference not in ("u", "omega"):
            raise ValueError("reference must be 'u' or 'omega'")
        if not self.c0 > 1.0:
            raise ValueError("c0 must exceed 1")
        if self.eps0 < 0.0:
            raise ValueError("eps0 must be nonnegative")
        if math.isfinite(self.theta) and not self.nu_w * self.theta > 1.0:
            raise ValueError("need nu_w * theta > 1 for finite theta")
        if (self.gamma1 is None) != (self.gamma2 is None):
            raise ValueError("mixed thresholds need both gamma1 and gamma2")

    @property
    def exponent_mode(self) -> str:
        return "curl" if (self.field_mode == "u" and self.reference == "omega") else "identity"

    @property
    def mixed(self) -> bool:
        return self.beta2 is not None or self.gamma1 is not None


class BalanceError(ValueError):
    """No admissible parameter solves the exponent-balance equation."""


def _shell_exponent(spec: CriterionSpec) -> float:
    pprime = math.inf if spec.p == 1.0 else spec.p / (spec.p - 1.0)
    inv = 0.0 if math.isinf(pprime) else 1.0 / pprime
    return (4.0 - 3.0 * inv) if spec.exponent_mode == "curl" else (3.0 - 3.0 * inv)


def criterion_exponent(spec: CriterionSpec) -> float:
    """Threshold exponent on the reference norm.

    min(alpha, beta) * K - alpha * S + 1 with K = nu (theta = inf) or
    (nu theta - 1)/theta, and S = 4 - 3/p' (curl family) or 3 - 3/p'."""
    k_term = spec.nu_w if math.isinf(spec.theta) else (spec.nu_w * spec.theta - 1.0) / spec.theta
    return min(spec.alpha, spec.beta) * k_term - spec.alpha * _shell_exponent(spec) + 1.0


def solve_exponent_balance(spec: CriterionSpec, free: str) -> float:
    """Value of one free parameter making the criterion exponent vanish.

    Raises BalanceError when no admissible root exists (admissibility:
    nu_w >= 0 with nu_w*theta > 1 for finite theta, alpha > 0, beta > 0,
    p >= 1, theta > 1).
    """
    s_exp = _shell_exponent(spec)
    k_term = spec.nu_w if math.isinf(spec.theta) else (spec.nu_w * spec.theta - 1.0) / spec.theta
    m = min(spec.alpha, spec.beta)

    if free == "nu_w":
        if m == 0.0:
            raise BalanceError("min(alpha, beta) = 0 leaves nu_w without effect")
        target = (spec.alpha * s_exp - 1.0) / m
        nu = target if math.isinf(spec.theta) else target + 1.0 / spec.theta
        if nu < 0.0 or (math.isfinite(spec.theta) and not nu * spec.theta > 1.0):
            raise BalanceError(f"balance needs nu_w = {nu:.6g}, inadmissible")
        return nu
    if free == "alpha":
        roots = []
        if s_exp != k_term:
            a = 1.0 / (s_exp - k_term)
            if a > 0.0 and a <= spec.beta:
                roots.append(a)
        if s_exp != 0.0:
            a = (spec.beta * k_term + 1.0) / s_exp
            if a > 0.0 and a > spec.beta:
                roots.append(a)
        if not roots:
            raise BalanceError("no admissible alpha root")
        return min(roots)
    if free == "beta":
        target = spec.alpha * s_exp - 1.0
        if k_term == 0.0:
            raise BalanceError("k-term vanishes; beta has no effect")
        if math.isclose(spec.alpha * k_term, target, rel_tol=1e-12):
            return spec.alpha  # any beta >= alpha balances; return the boundary
        b = target / k_term
        if 0.0 < b <= spec.alpha:
            return b
        raise BalanceError(f"balance needs beta = {b:.6g}, inadmissible")
    if free == "theta":
        if m == 0.0:
            raise BalanceError("min(alpha, beta) = 0 leaves theta without effect")
        target = (spec.alpha * s_exp - 1.0) / m  # required k_term
        if math.isclose(spec.nu_w, target, rel_tol=1e-12):
            return math.inf
        denom = spec.nu_w - target
        if denom <= 0.0:
            raise BalanceError("required k-term exceeds nu_w")
        theta = 1.0 / denom
        if theta <= 1.0 or not spec.nu_w * theta > 1.0:
            raise BalanceError(f"balance needs theta = {theta:.6g}, inadmissible")
        return theta
    if free == "p":
        # exponent is linear in 3/p' through S
        base = 4.0 if spec.exponent_mode == "curl" else 3.0
        if spec.alpha == 0.0:
            raise BalanceError("alpha = 0 leaves p without effect")
        s_needed = (m * k_term + 1.0) / spec.alpha
        three_over_pp = base - s_needed
        if three_over_pp < 0.0:
            raise BalanceError("balance needs 3/p' < 0")
        if three_over_pp == 0.0:
            return 1.0  # p' = inf
        pprime = 3.0 / three_over_pp
        if pprime <= 1.0:
            raise BalanceError(f"balance needs p' = {pprime:.6g} <= 1")
        return pprime / (pprime - 1.0)
    raise ValueError(f"unknown free parameter {free!r}")


@dataclass(frozen=True)
class CriterionReport:
    s_star: float
    lhs: float
    rhs: float
    exponent: float
    satisfied: bool
    scale_window: tuple[float, float]
    witness: tuple[tuple[int, int, int], float | None]
    eta_clipped: bool
    window: tuple[float, float]
    rows: tuple[tuple, ...]  # (t, eta, lhs, rhs, satisfied) per snapshot in the window


def _window(spec: CriterionSpec, t: float, u_sup_t: float, omega_sup_t: float):
    if spec.window_mode == "vorticity":
        scale = spec.c0 * omega_sup_t
        return (t + 1.0 / (4.0 * scale), t + 1.0 / scale)
    scale = (spec.c0 * u_sup_t) ** 2
    return (t + 1.0 / (4.0 * scale), t + 1.0 / scale)


def evaluate_criterion(traj: Trajectory, t_escape: float, spec: CriterionSpec) -> CriterionReport:
    """Evaluate the restricted criterion over the window opened at ``t_escape``.

    Builds the window from the reference norms at t_escape, takes the min over
    window snapshots of the weighted global norm of the measured field (with
    the weight cutoff at the dynamic dissipation scale), and compares against
    eps0 times the reference norm to the criterion exponent.
    """
    ts = traj.series["t"]
    if not (ts[0] - 1e-12 <= t_escape <= ts[-1] + 1e-12):
        raise ValueError(f"t_escape {t_escape} outside the trajectory range")
    u_sup_t = traj.series_at(t_escape, "u_sup")
    omega_sup_t = traj.series_at(t_escape, "omega_sup")
    w_lo, w_hi = _window(spec, t_escape, u_sup_t, omega_sup_t)
    snaps = [(t, f) for t, f in traj.snapshots if w_lo - 1e-12 <= t <= w_hi + 1e-12]
    if len(snaps) < 3:
        raise SchedulingError(
            f"{len(snaps)} snapshots in window [{w_lo:.4f}, {w_hi:.4f}]; need >= 3 "
            "(raise the snapshot cadence)")
    exponent = math.nan if spec.mixed else criterion_exponent(spec)
    best = None
    rows = []
    for t, u_s in snaps:
        u_sup_s = traj.series_at(t, "u_sup")
        omega_sup_s = traj.series_at(t, "omega_sup")
        ref = {"u": u_sup_s, "omega": omega_sup_s}[spec.reference]
        if spec.beta2 is None:
            eta = dissipation_scale(ref, spec.beta, spec.c, traj.grid)
        else:
            raw = spec.c * u_sup_s ** (-spec.beta) * omega_sup_s ** (-spec.beta2)
            lo = 2.0 * traj.grid.spacing
            val = min(max(raw, lo), 1.0)
            eta = DissipationScale(val, val != raw)
        measured = u_s if spec.field_mode == "u" else curl(u_s)
        # a cutoff at exactly 1 collapses the scale window; keep half a voxel
        # of support so the quantity stays defined (the report still carries
        # the true eta and its clip flag)
        rho_w = min(eta.value, 1.0 - 0.5 * traj.grid.spacing)
        weight = WeightSpec(nu=spec.nu_w, rho=rho_w, theta=spec.theta)
        scales = log_scale_nodes(traj.grid, rho_w, 1.0, spec.scale_count)
        gm = gm_norm(measured, MorreyParams(spec.p, weight, scales))
        if spec.gamma1 is not None:
            rhs = spec.eps0 * u_sup_s**spec.gamma1 * omega_sup_s**spec.gamma2
        else:
            rhs = spec.eps0 * ref**exponent
        ratio = 0.0 if gm.value == 0.0 else (math.inf if rhs == 0.0 else gm.value / rhs)
        rows.append((t, eta.value, gm.value, rhs, ratio <= 1.0))
        if best is None or ratio < best[0]:
            best = (ratio, t, gm, rhs, eta)
    ratio, s_star, gm, rhs, eta = best
    return CriterionReport(
        s_star=s_star,
        lhs=gm.value,
        rhs=rhs,
        exponent=exponent,
        satisfied=ratio <= 1.0,
        scale_window=(eta.value, 1.0),
        witness=(gm.center, gm.scale),
        eta_clipped=eta.clipped,
        window=(w_lo, w_hi),
        rows=tuple(rows),
    )


# ---------------------------------------------------------------------------
# trajectory I/O (series CSV + snapshot field files)
# ---------------------------------------------------------------------------


def save_trajectory(traj: Trajectory, outdir) -> list[Path]:
    """Write series.csv, snapshot field files (time in the name), meta.json."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    series_path = outdir / "series.csv"
    with open(series_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SERIES_COLUMNS + ("eta", "criterion_lhs", "criterion_rhs", "satisfied"))
        for i in range(traj.series["t"].size):
            writer.writerow([format(traj.series[c][i], ".17g") for c in SERIES_COLUMNS]
                            + ["", "", "", ""])
    written.append(series_path)
    snap_files = []
    for t, f in traj.snapshots:
        path = outdir / f"u_t{t:.9f}.fld"
        save_field(f, path)
        written.append(path)
        snap_files.append({"t": t, "file": path.name})
    meta = {
        "n": traj.grid.n,
        "box_len": traj.grid.box_len,
        "snapshots": snap_files,
        "series": series_path.name,
    }
    meta_path = outdir / "meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(meta_path)
    return written


def load_trajectory(indir) -> Trajectory:
    indir = Path(indir)
    meta = json.loads((indir / "meta.json").read_text())
    grid = Grid3(int(meta["n"]), float(meta["box_len"]))
    series: dict[str, list[float]] = {c: [] for c in SERIES_COLUMNS}
    with open(indir / meta["series"], newline="") as fh:
        for row in csv.DictReader(fh):
            for c in SERIES_COLUMNS:
                series[c].append(float(row[c]))
    snapshots = []
    for entry in meta["snapshots"]:
        f = load_field(indir / entry["file"])
        snapshots.append((float(entry["t"]), f))
    return Trajectory(grid, {c: np.asarray(v) for c, v in series.items()}, snapshots)
