"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
The heavy implication suites stay within their stated runtime budgets on a
laptop-class machine.
"""

import math
import time

import numpy as np
import pytest

from morrey_sparse.grid import (
    Grid3,
    VectorField,
    ball_lp_bruteforce,
    biot_savart,
    curl,
    divergence,
    sliding_ball_lp,
)
from morrey_sparse.fields import (
    bump_gradient,
    localized_field,
    random_solenoidal_field,
    vorticity_blob,
)
from morrey_sparse.morrey import (
    MorreyParams,
    WeightSpec,
    classical_morrey,
    gm_norm,
    lm_norm,
    log_scale_nodes,
)
from morrey_sparse.nse import (
    CriterionSpec,
    SolverConfig,
    criterion_exponent,
    dissipation_scale,
    simulate,
)
from morrey_sparse.predual import (
    HOLDER_CONSTANT,
    pairing_integral,
    predual_bound,
    stieltjes_predual_integral,
)
from morrey_sparse.sparseness import (
    admissible_pair,
    kappa,
    semi_mixed,
    superlevel_sets,
)
from morrey_sparse.verify import check_lemma_l2, check_lemma_gm, counterexample_field, summarize


def _report(num, text):
    print(f"\nACCEPTANCE {num}: PASS - {text}")


def test_criterion_01_l2_implication_suite():
    t0 = time.time()
    grid = Grid3(64)
    pairs = [admissible_pair(d) for d in (0.7, 0.75, 0.85)]
    scales = (0.1, 0.2, 0.4, 0.8)
    # 200 solenoidal band-limited fields; amplitude normalization cannot move
    # the scale-invariant premise ratio, so 30 of them are concentrated
    # vortex blobs whose geometry puts the premise in reach at the coarse
    # cells (the margin knob the construction actually has)
    fields = []
    for seed in range(170):
        fields.append(random_solenoidal_field(grid, kmax=16, seed=seed))
    rng = np.random.default_rng(123)
    for i in range(30):
        center = tuple(int(v) for v in rng.integers(0, 64, 3))
        sigma = float(rng.choice([0.15, 0.16, 0.2, 0.3]))
        axis = rng.standard_normal(3)
        fields.append(biot_savart(vorticity_blob(grid, center, sigma, axis=tuple(axis))))
    assert len(fields) == 200
    reports = []
    for f in fields:
        for pair in pairs:
            for r in scales:
                reports.append(check_lemma_l2(f, pair, r))
    s = summarize(reports)
    assert s.total == 200 * 3 * 4
    assert s.violations == 0
    assert s.marginal_violations == 0
    # nonvacuity: the blob subset satisfies the premise somewhere, with the
    # 10% margin, and those cases genuinely exercised the conclusion
    holding = [r for r in reports if r.premise_holds and not r.degenerate]
    assert len(holding) > 0
    assert any(r.premise_lhs <= 0.9 * r.premise_rhs for r in holding)
    assert all(r.conclusion_holds for r in holding)
    elapsed = time.time() - t0
    assert elapsed < 600.0
    _report(1, f"{s.total} L^2 implication checks, 0 violations "
               f"({len(holding)} premise-holding, {elapsed:.0f}s)")


def test_criterion_02_gm_implication_suite():
    t0 = time.time()
    grid = Grid3(32)
    pair = admissible_pair(0.75)
    rho = 0.25
    cases = {(2.0, math.inf, 0.5), (2.0, 2.0, 1.0)}  # (p, theta, alpha), alpha*theta > 1
    reports = []
    for seed in range(100):
        f = random_solenoidal_field(grid, kmax=8, seed=10_000 + seed)
        for (p, theta, alpha) in cases:
            for mode in ("curl", "identity"):
                reports.append(check_lemma_gm(f, pair, p, theta, alpha, rho, 0.5, mode))
    s = summarize(reports)
    assert s.total == 100 * 2 * 2
    assert s.violations == 0
    assert s.marginal_violations == 0
    elapsed = time.time() - t0
    assert elapsed < 900.0
    _report(2, f"{s.total} Morrey-type implication checks over "
               f"theta in {{2, inf}} x {{curl, identity}}, 0 violations ({elapsed:.0f}s)")


def test_criterion_03_counterexample_validity():
    grid = Grid3(64)
    combos = []
    for d in (0.7, 0.75, 0.85):
        for r in (0.5, 0.65, 0.8):
            combos.append((d, r, (32, 32, 32)))
            combos.append((d, r, (12, 40, 55)))
    combos = combos[:20]
    assert len(combos) == 18  # 3 deltas x 3 scales x 2 centers
    combos += [(0.75, 0.7, (5, 5, 5)), (0.85, 0.7, (50, 20, 8))]
    for d, r, center in combos:
        pair = admissible_pair(d)
        u = counterexample_field(r, pair, grid, center=center)
        omega = curl(u)
        sets = superlevel_sets(omega, pair.lam)
        res = semi_mixed(sets["S_1+"], kappa(pair) * r, pair.delta)
        assert not res.ok, (d, r)  # (a) semi-mixedness defeated
        rep = check_lemma_l2(u, pair, r)
        assert not rep.premise_holds, (d, r)  # (b) premise falsified
    _report(3, "20 counterexamples all defeat semi-mixedness and falsify the premise")


def test_criterion_04_oracle_equivalence():
    grid = Grid3(16)
    rng = np.random.default_rng(777)
    worst = 0.0
    for trial in range(20):
        f = random_solenoidal_field(grid, kmax=4, seed=20_000 + trial)
        p = float(rng.choice([1.0, 2.0, 3.0]))
        r = float(rng.uniform(1.5 * grid.spacing, 1.0))
        fast = sliding_ball_lp(f, p, r).data
        # transform-free dense oracle: accumulate rolls over the ball offsets
        magp = np.abs(f.magnitude()) ** p
        d = grid.min_image_axis() ** 2
        mask = (d[:, None, None] + d[None, :, None] + d[None, None, :]) <= r * r
        acc = np.zeros(grid.shape)
        for off in np.argwhere(mask):
            acc += np.roll(magp, tuple(-off), axis=(0, 1, 2))
        brute = (acc * grid.voxel_volume) ** (1.0 / p)
        worst = max(worst, float(np.abs(fast - brute).max() / brute.max()))
        # spot-check the per-voxel oracle op as well
        idx = tuple(int(v) for v in rng.integers(0, 16, 3))
        assert fast[idx] == pytest.approx(ball_lp_bruteforce(f, p, idx, r), rel=1e-10)
    assert worst <= 1e-10
    # gm oracle: all-centers max of the local norm
    w = WeightSpec(nu=0.5, rho=0.45, theta=math.inf)
    params = MorreyParams(2.0, w, tuple(np.geomspace(0.45, 1.0, 8)))
    f = random_solenoidal_field(grid, kmax=4, seed=21_000)
    res = gm_norm(f, params)
    brute_gm = max(lm_norm(f, params, (i, j, k))
                   for i in range(16) for j in range(16) for k in range(16))
    assert res.value == pytest.approx(brute_gm, rel=1e-9)
    _report(4, f"sliding window vs brute force max rel err {worst:.2e} <= 1e-10; "
               "gm matches the all-centers scan to 1e-9")


def test_criterion_05_admissible_pair_anchor():
    pair = admissible_pair(0.75)
    assert 1.0 / 3.0 < pair.lam < 1.0
    assert abs(pair.lam * pair.h + (1.0 - pair.h) - 2.0 * pair.lam) <= 1e-12
    _report(5, f"delta=3/4 -> lambda={pair.lam:.6f} in (1/3, 1), "
               f"identity residual {abs(pair.lam * pair.h + (1 - pair.h) - 2 * pair.lam):.1e}")


def test_criterion_06_exponent_anchor():
    spec = CriterionSpec(alpha=0.5, beta=0.5, nu_w=0.5, p=2.0, theta=math.inf)
    e = criterion_exponent(spec)
    assert abs(e) <= 1e-15
    _report(6, f"criterion exponent at (theta=inf, nu=beta=1/2, p=2, alpha=1/2) = {e!r}")


def test_criterion_07_solver_exactness():
    t0 = time.time()
    traj = simulate(SolverConfig(n=32, dt=1e-3, t_end=1.0, ic="shear",
                                 snapshot_every=100))
    err = abs(traj.series["u_sup"][-1] - math.exp(-1.0))
    assert err <= 1e-6
    for t, f in traj.snapshots:
        assert np.abs(divergence(f).data).max() <= 1e-10
    tg = simulate(SolverConfig(n=32, dt=1e-3, t_end=0.25, ic="taylor-green",
                               snapshot_every=25))
    assert np.all(np.diff(tg.series["energy"]) < 0.0)
    for t, f in tg.snapshots:
        assert np.abs(divergence(f).data).max() <= 1e-10
    elapsed = time.time() - t0
    assert elapsed < 120.0
    _report(7, f"shear decay error {err:.2e} <= 1e-6; snapshots solenoidal; "
               f"energy strictly decreasing ({elapsed:.0f}s)")


def test_criterion_08_criterion_consistency():
    tg = simulate(SolverConfig(n=32, dt=1e-3, t_end=0.25, ic="taylor-green",
                               snapshot_every=25))
    count = 0
    for t, u_s in tg.snapshots:
        if count >= 10:
            break
        omega_sup = tg.series_at(t, "omega_sup")
        eta = dissipation_scale(omega_sup, 0.5, 1.0, tg.grid)
        rho_w = min(eta.value, 1.0 - 0.5 * tg.grid.spacing)
        scales = log_scale_nodes(tg.grid, rho_w, 1.0, 24)
        w = WeightSpec(nu=0.5, rho=rho_w, theta=math.inf)
        gm = gm_norm(u_s, MorreyParams(2.0, w, scales))
        cm = classical_morrey(u_s, 2.0, 1.0, rho_w, 1.0, scales=scales)
        assert gm.value**2 == pytest.approx(cm.value, rel=1e-9)
        count += 1
    assert count >= 10
    _report(8, f"(sup-form gm)^2 equals the restricted sup quantity on {count} snapshots")


def test_criterion_09_scaling_covariance():
    coarse = Grid3(16)
    fine = Grid3(32)
    idx = np.arange(32) % 16
    base_scales = np.geomspace(0.2, 0.5, 8)
    worst = 0.0
    for seed in range(10):
        f = random_solenoidal_field(coarse, kmax=3, seed=30_000 + seed)
        tiled = f.data[:, idx][:, :, idx][:, :, :, idx]
        f2 = VectorField(fine, 2.0 * tiled)
        v_fine = classical_morrey(f2, 2.0, 1.0, 0.19, 0.51, scales=base_scales).value
        v_coarse = classical_morrey(f, 2.0, 1.0, 0.39, 1.0, scales=2.0 * base_scales).value
        worst = max(worst, abs(v_fine - v_coarse) / v_coarse)
    assert worst <= 1e-6
    _report(9, f"scaling covariance (lambda=2 refinement) worst rel err {worst:.2e} <= 1e-6")


def test_criterion_10_predual_suite():
    grid = Grid3(16)
    w = WeightSpec(nu=0.5, rho=0.25, theta=math.inf)
    params = MorreyParams.default(grid, w, p=2.0)
    w2 = WeightSpec(nu=1.0, rho=0.25, theta=2.0)
    params2 = MorreyParams.default(grid, w2, p=2.0)
    worst_ratio = 0.0
    for i in range(50):
        f = localized_field(grid, kmax=4, seed=910_000 + 2 * i, radius=0.85)
        g = random_solenoidal_field(grid, kmax=4, seed=910_001 + 2 * i)
        lhs = pairing_integral(f, g)
        for ww, pp in ((w, params), (w2, params2)):
            bound = predual_bound(f, 2.0, ww).value * gm_norm(g, pp).value
            assert lhs <= HOLDER_CONSTANT * bound
            worst_ratio = max(worst_ratio, lhs / bound)
    # log-log slope of the scale-Stieltjes integral in the bump radius
    wslope = WeightSpec(nu=1.5, rho=0.02, theta=2.0)
    radii = (0.1, 0.2, 0.4)
    vals = []
    for r, n in zip(radii, (256, 128, 64)):
        gg = Grid3(n)
        c = (n // 2,) * 3
        f = bump_gradient(gg, c, 0.5 * r, r)
        vals.append(stieltjes_predual_integral(f, 2.0, wslope, c) ** 0.5)
    slope = float(np.polyfit(np.log(radii), np.log(vals), 1)[0])
    target = 0.5 + (wslope.nu * wslope.theta - 1.0) / wslope.theta
    assert slope == pytest.approx(target, abs=0.1)
    _report(10, f"50 fresh pairing checks under the frozen constant "
                f"(worst ratio {worst_ratio:.3f} <= {HOLDER_CONSTANT:.3f}); "
                f"Stieltjes slope {slope:.3f} vs {target} within 0.1")
