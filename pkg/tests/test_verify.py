import math

import numpy as np
import pytest

from morrey_sparse.grid import Grid3, VectorField, curl, divergence, sup_norm
from morrey_sparse.sparseness import admissible_pair, kappa, semi_mixed, superlevel_sets
from morrey_sparse.verify import (
    ScaleTooSmallError,
    SweepConfig,
    check_lemma_gm,
    check_lemma_l2,
    counterexample_field,
    summarize,
    sweep,
)
from conftest import random_field, unit_x_field


PAIR = admissible_pair(0.75)


# ---------------------------------------------------------------------------
# L^2 implication
# ---------------------------------------------------------------------------


def test_l2_constant_field_degenerate_pass(grid16):
    rep = check_lemma_l2(unit_x_field(grid16, 2.0), PAIR, 0.5)
    assert rep.degenerate
    assert rep.verdict


def test_l2_zero_field(grid16):
    rep = check_lemma_l2(unit_x_field(grid16, 0.0), PAIR, 0.5)
    assert rep.degenerate and rep.verdict
    assert rep.premise_holds  # 0 <= 0


def test_l2_random_ensemble_soundness():
    grid = Grid3(32)
    for seed in range(12):
        f = random_field(grid, seed=seed, kmax=8)
        for r in (0.8, 0.4):
            rep = check_lemma_l2(f, PAIR, r)
            assert rep.verdict, (seed, r, rep)


def test_l2_verdict_scale_invariant():
    grid = Grid3(32)
    f = random_field(grid, seed=77, kmax=8)
    rep1 = check_lemma_l2(f, PAIR, 0.5)
    # power-of-two amplitude: every comparison scales exactly
    rep4 = check_lemma_l2(VectorField(grid, 4.0 * f.data), PAIR, 0.5)
    assert rep1.premise_holds == rep4.premise_holds
    assert rep1.conclusion_holds == rep4.conclusion_holds
    assert rep1.verdict == rep4.verdict
    assert rep4.premise_lhs == pytest.approx(4.0 * rep1.premise_lhs, rel=1e-12)
    assert rep4.premise_rhs == pytest.approx(4.0 * rep1.premise_rhs, rel=1e-12)
    rep3 = check_lemma_l2(VectorField(grid, 3.0 * f.data), PAIR, 0.5)
    assert rep1.verdict == rep3.verdict


def test_l2_nonvacuous_premise_blob():
    # a tight vortex blob satisfies the premise (with margin) at the friendly
    # cell and the conclusion holds: the implication is exercised for real
    from morrey_sparse.fields import vorticity_blob
    from morrey_sparse.grid import biot_savart

    grid = Grid3(64)
    pair = admissible_pair(0.85)
    w = vorticity_blob(grid, (32, 32, 32), sigma=0.15)
    u = biot_savart(w)
    rep = check_lemma_l2(u, pair, 0.8)
    assert rep.premise_holds and not rep.marginal
    assert rep.premise_lhs <= 0.9 * rep.premise_rhs
    assert rep.conclusion_holds
    assert rep.verdict


# ---------------------------------------------------------------------------
# counterexample construction
# ---------------------------------------------------------------------------


def test_counterexample_defeats_semimixedness_and_premise():
    grid = Grid3(64)
    r = 0.5
    u = counterexample_field(r, PAIR, grid)
    omega = curl(u)
    # (a) the first positive super-level set is fully dense at the center
    sets = superlevel_sets(omega, PAIR.lam)
    res = semi_mixed(sets["S_1+"], kappa(PAIR) * r, PAIR.delta)
    assert not res.ok
    assert res.max_density == 1.0
    # (b) the premise fails, with a wide margin
    rep = check_lemma_l2(u, PAIR, r)
    assert not rep.premise_holds
    assert rep.premise_lhs > 10.0 * rep.premise_rhs
    assert rep.verdict  # falsified premise, not the implication


def test_counterexample_vorticity_is_solenoidal():
    grid = Grid3(64)
    u = counterexample_field(0.6, PAIR, grid)
    omega = curl(u)
    assert np.abs(divergence(omega).data).max() <= 1e-10 * max(1.0, sup_norm(omega))


def test_counterexample_scale_floor():
    grid = Grid3(16)
    with pytest.raises(ScaleTooSmallError):
        counterexample_field(0.2, PAIR, grid)


# ---------------------------------------------------------------------------
# Morrey-type implication
# ---------------------------------------------------------------------------


def test_gm_zero_field_degenerate(grid16):
    rep = check_lemma_gm(unit_x_field(grid16, 0.0), PAIR, 2.0, math.inf, 0.5, 0.25, 0.5)
    assert rep.degenerate and rep.verdict


def test_gm_soundness_small_ensemble():
    grid = Grid3(32)
    for seed in range(6):
        f = random_field(grid, seed=100 + seed, kmax=8)
        for theta, alpha in ((math.inf, 0.5), (2.0, 1.0)):
            for mode in ("curl", "identity"):
                rep = check_lemma_gm(f, PAIR, 2.0, theta, alpha, 0.25, 0.5, mode)
                assert rep.verdict, (seed, theta, mode)


def test_gm_exponent_structure_matches_l2_special_case():
    # curl mode, p=2, theta=inf, alpha=1/2: threshold scales as
    # (r v rho)^(-1/2) r^(5/2), the same scale structure as the L^2 premise
    grid = Grid3(16)
    f = random_field(grid, seed=5)
    rho = 1e-6
    r1, r2 = 0.45, 0.9
    reps = [check_lemma_gm(f, PAIR, 2.0, math.inf, 0.5, rho, r, "curl") for r in (r1, r2)]
    ratio = reps[1].premise_rhs / reps[0].premise_rhs
    assert ratio == pytest.approx((r2 / r1) ** 2.0, rel=1e-9)  # -1/2 + 5/2
    # past the cap the cutoff shell would cross the weight-support end
    with pytest.raises(ValueError):
        check_lemma_gm(f, PAIR, 2.0, math.inf, 0.5, rho, 0.99, "curl")


def test_gm_mode_validation(grid16):
    with pytest.raises(ValueError):
        check_lemma_gm(unit_x_field(grid16), PAIR, 2.0, math.inf, 0.5, 0.25, 0.5, "bogus")
    with pytest.raises(ValueError):
        check_lemma_gm(unit_x_field(grid16), PAIR, 2.0, 2.0, 0.4, 0.25, 0.5)  # alpha theta < 1


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_empty():
    cfg = SweepConfig(n=16, deltas=(), seeds=(), scales=())
    assert sweep(cfg) == []


def test_sweep_deterministic_and_sound():
    cfg = SweepConfig(n=16, deltas=(0.75,), scales=(0.9,), seeds=(0, 1, 2), kmax=4)
    reports1 = sweep(cfg)
    reports2 = sweep(cfg)
    assert len(reports1) == 3
    for a, b in zip(reports1, reports2):
        assert a.premise_lhs == b.premise_lhs
        assert a.params == b.params
    s = summarize(reports1)
    assert s.total == 3
    assert s.violations == 0 and s.marginal_violations == 0


def test_sweep_adversarial_passes():
    cfg = SweepConfig(n=32, deltas=(0.75, 0.85), scales=(0.85,), seeds=(0,),
                      kmax=8, adversarial=True)
    reports = sweep(cfg)
    assert len(reports) == 4  # one random + one counterexample per delta
    s = summarize(reports)
    assert s.violations == 0 and s.marginal_violations == 0
    # the adversarial entries falsified the premise
    assert sum(not r.premise_holds for r in reports) >= 2


def test_sweep_gm_mode():
    cfg = SweepConfig(lemma="gm", n=16, deltas=(0.75,), scales=(0.8,), seeds=(0, 1),
                      kmax=4, thetas=(math.inf, 2.0), alphas=(1.0,), rho=0.45,
                      modes=("curl", "identity"))
    reports = sweep(cfg)
    assert len(reports) == 2 * 2 * 2
    assert summarize(reports).violations == 0
