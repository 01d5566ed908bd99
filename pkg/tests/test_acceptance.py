"""Acceptance suite: one test per release criterion, each printing a
PASS line with its headline numbers when it completes.

Criterion 8 exists in two variants: the desk-scale run (always on, under a
minute) and the full-scale run, gated behind ``LADM_PAPER_SCALE=1``
because it needs several minutes of dense eigensolves.
"""

import math
import os
import time

import numpy as np
import pytest

from ladm import (
    AdmissibleClass,
    ClusterEnvelope,
    DecaySpec,
    NormKind,
    OrthonormalBasis,
    OversamplingSplit,
    PolynomialFilter,
    SpectrumSpec,
    condition_bounds,
    construct_Hp,
    distance_bounds,
    dominant_basis,
    filtered_distance_bound,
    gaussian_subspace,
    invariance_defects,
    is_member,
    lowrank_error_report,
    nearest_admissible,
    orthonormalize,
    random_member,
    rayleigh_ritz,
    residual_angle_bounds,
    ritz_value_bounds,
    sharp_example,
    sin_theta_max,
    sin_theta_norm,
    synth_model,
    tangent_matrix,
)
from ladm.errors import RankDeficiencyError
from ladm.experiments import preset_config, run_figure
from ladm.ritz import admissible_distance_bounds
from tests.conftest import make_class, make_model, random_subspace

BOTH_NORMS = [NormKind.SPECTRAL, NormKind.FROBENIUS]

LAYOUTS = {20: (2, 4, 8), 60: (3, 6, 12), 200: (5, 10, 30)}


def _random_instance(rng, n, seed):
    j, h, k = LAYOUTS[n]
    decay = DecaySpec("exponential", (10.0, 0.01)) if seed % 2 else DecaySpec("linear", (10.0, 1.0))
    delta = float(10.0 ** -rng.integers(1, 5))
    spec = SpectrumSpec(n=n, j=j, h=h, k=k, decay=decay, delta=delta, seed=seed)
    model, env = synth_model(spec)
    return AdmissibleClass.create(model, env)


def test_criterion_01_distance_bound_everywhere():
    t0 = time.time()
    rng = np.random.default_rng(10)
    checked = 0
    for n, count in ((20, 80), (60, 80), (200, 40)):
        for i in range(count):
            cls = _random_instance(rng, n, seed=1000 * n + i)
            t_dim = int(rng.integers(cls.h, cls.env.k + 6))
            T = random_subspace(rng, n, t_dim)
            witness = nearest_admissible(T, cls)
            assert is_member(witness, cls, tol=1e-9)
            for norm in BOTH_NORMS:
                lhs = sin_theta_norm(witness, T, norm)
                rhs = (sin_theta_norm(cls.Xj, T, norm)
                       + sin_theta_norm(cls.Xk, T, norm))
                assert lhs <= rhs + 1e-9
                checked += 1
    elapsed = time.time() - t0
    assert checked >= 400
    assert elapsed < 60
    print(f"\nC1 PASS: witness distance <= sum bound on {checked} checks "
          f"({elapsed:.1f} s, zero violations)")


def test_criterion_02_equality_inside_xk():
    rng = np.random.default_rng(20)
    worst = 0.0
    for i in range(100):
        n = (20, 60, 200)[i % 3]
        cls = _random_instance(rng, n, seed=2000 + i)
        t_dim = int(rng.integers(cls.h, cls.env.k + 1))
        C = rng.standard_normal((cls.env.k, t_dim))
        T = OrthonormalBasis(np.linalg.qr(cls.Xk.data @ C)[0][:, :t_dim])
        S = nearest_admissible(T, cls)
        for norm in BOTH_NORMS:
            gap = abs(sin_theta_norm(S, T, norm) - sin_theta_norm(cls.Xj, T, norm))
            worst = max(worst, gap)
            assert gap < 1e-9
    print(f"\nC2 PASS: equality for targets inside X_k holds to {worst:.2e} over 100 instances")


def test_criterion_03_tiny_grid_oracle():
    t0 = time.time()
    rng = np.random.default_rng(30)
    spec = SpectrumSpec(n=4, j=1, h=2, k=3, decay=DecaySpec("linear", (4.0, 1.0)),
                        delta=0.2, seed=5)
    model, env = synth_model(spec)
    cls = AdmissibleClass.create(model, env)
    x1, x2 = model.X[:, [1]], model.X[:, [2]]
    phis = np.linspace(0.0, np.pi, 10_000, endpoint=False)
    circle = np.empty((phis.size, 4, 2))
    circle[:, :, 0] = cls.Xj.data[:, 0][None, :]
    circle[:, :, 1] = (np.cos(phis)[None, :] * x1 + np.sin(phis)[None, :] * x2).T
    for trial in range(50):
        T = random_subspace(rng, 4, 2)
        rep = distance_bounds(T, cls, NormKind.SPECTRAL)
        resid = circle - np.einsum("ij,jk,pkl->pil", T.data, T.data.T, circle)
        grid_min = float(np.linalg.svd(resid, compute_uv=False)[:, 0].min())
        assert rep.upper >= grid_min - 1e-9
        assert rep.measured <= grid_min + (rep.upper - rep.lower) + 1e-9
    elapsed = time.time() - t0
    assert elapsed < 30
    print(f"\nC3 PASS: grid-search oracle brackets the witness on 50 targets ({elapsed:.1f} s)")


def test_criterion_04_member_estimates():
    rng = np.random.default_rng(40)
    members = 0
    for m in range(20):
        n = int(rng.integers(40, 81))
        j = int(rng.integers(1, 4))
        h = j + int(rng.integers(1, 4))
        k = h + int(rng.integers(2, 7))
        delta = float(10.0 ** -rng.integers(2, 4))
        model, env = make_model(n=n, j=j, h=h, k=k, delta=delta, seed=4000 + m)
        cls = AdmissibleClass.create(model, env)
        for i in range(5):
            S = random_member(cls, seed=100 * m + i)
            ritz_value_bounds(S, cls)  # enclosures asserted inside
            for norm in BOTH_NORMS:
                lowrank_error_report(S, cls, norm)  # sandwich asserted inside
            comm, resid = invariance_defects(S, cls)  # <= spread asserted inside
            assert comm <= env.delta + 1e-9 and resid <= env.delta + 1e-9
            members += 1
    assert members == 100
    print(f"\nC4 PASS: Ritz enclosures, low-rank sandwich and invariance defects "
          f"on {members} members, zero violations")


def test_criterion_05_filtered_proximity():
    model, env = make_model(n=60, j=3, h=6, k=12, delta=1e-2, seed=50)
    cls = AdmissibleClass.create(model, env)
    lam = model.lam
    worst_margin = math.inf
    for s_idx, split in enumerate([OversamplingSplit(0, 2), OversamplingSplit(1, 1),
                                   OversamplingSplit(2, 0)]):
        W = gaussian_subspace(60, 8, seed=500 + s_idx)
        hp = construct_Hp(W, split, cls)
        # the four structural conditions of the reduced space
        assert hp.dim == 8 - split.total >= env.h
        aux = np.hstack([model.X[:, env.j:env.j + split.p1],
                         model.X[:, env.k:env.k + split.p2]])
        if aux.size:
            assert np.linalg.norm(aux.T @ hp.data, 2) < 1e-10
        assert np.linalg.norm(hp.data - W.data @ (W.data.T @ hp.data)) < 1e-10
        sv_j = np.linalg.svd(cls.Xj.data.T @ hp.data, compute_uv=False)
        assert np.sum(sv_j > 1e-12) == env.j
        sv_k = np.linalg.svd(cls.Xk.data.T @ hp.data, compute_uv=False)
        assert np.sum(sv_k > 1e-12) == hp.dim
        ratio = max(lam[env.j + split.p1] / lam[env.j - 1],
                    lam[env.k + split.p2] / lam[env.k - 1])
        prev = None
        Wq = W
        for q in range(1, 41):
            Wq = orthonormalize(model.A @ Wq.data)
            for norm in BOTH_NORMS:
                fb = filtered_distance_bound(W, split, PolynomialFilter.monomial(q), cls, norm)
                measured = sin_theta_norm(nearest_admissible(Wq, cls), Wq, norm)
                assert measured <= fb.total + 1e-9
                worst_margin = min(worst_margin, fb.total - measured)
                if norm is NormKind.SPECTRAL:
                    if prev is not None:
                        assert fb.total / prev <= ratio + 1e-12
                    prev = fb.total
    print(f"\nC5 PASS: filtered bounds valid for degrees 1..40 with geometric decay "
          f"(smallest margin {worst_margin:.2e})")


def test_criterion_06_ritz_bounds_and_membership():
    rng = np.random.default_rng(60)
    counted = {"k_le_r": 0, "r_lt_k": 0}
    for i in range(100):
        model, env = make_model(n=60, j=3, h=6, k=12,
                                delta=float(10.0 ** -rng.integers(2, 4)), seed=6000 + i)
        cls_h = AdmissibleClass.create(model, env)
        r = int(rng.integers(env.h, 17))
        Q = random_subspace(rng, 60, r)
        part = rayleigh_ritz(model, Q, env.h, env, seed=0)
        for norm in BOTH_NORMS:
            for ab in residual_angle_bounds(part, model, env, norm):
                if ab.applicable and math.isfinite(ab.rhs):
                    assert ab.lhs <= ab.rhs + 1e-9
            rep = admissible_distance_bounds(part, model, env, norm)
            wx1 = sin_theta_norm(nearest_admissible(part.X1, cls_h), part.X1, norm)
            assert wx1 <= rep.bound_x1 + 1e-9
            Qspace = OrthonormalBasis(np.hstack([part.X1.data, part.X2.data]))
            if rep.branch == "k_le_r":
                wq = sin_theta_norm(nearest_admissible(Qspace, cls_h), Qspace, norm)
            else:
                env_r = ClusterEnvelope.from_model(model, env.j, r, env.k)
                wq = sin_theta_norm(
                    nearest_admissible(Qspace, AdmissibleClass.create(model, env_r)),
                    Qspace, norm)
            assert wq <= rep.bound_q + 1e-9
        counted[rep.branch] += 1
    assert min(counted.values()) > 0
    # zero residual block forces membership even with a large total residual
    model, env = make_model(n=60, j=3, h=6, k=12, seed=61)
    cls = AdmissibleClass.create(model, env)
    member_cols = list(range(env.j)) + [env.j, env.j + 2, env.j + 4]
    junk = model.X[:, env.k:env.k + 6] @ np.linalg.qr(
        np.random.default_rng(0).standard_normal((6, 3)))[0]
    Q = orthonormalize(np.hstack([model.X[:, member_cols], junk]))
    part = rayleigh_ritz(model, Q, env.h, env, seed=0)
    assert np.linalg.norm(part.R1, 2) <= 1e-9 < np.linalg.norm(part.R, 2)
    assert is_member(part.X1, cls, tol=1e-8)
    print(f"\nC6 PASS: residual/gap bounds hold on 100 trials "
          f"(branches {counted}), zero-residual membership confirmed")


def test_criterion_07_sharpness_example():
    ex = sharp_example(24, 2, 4, 6, alpha=12.0, beta=1.0, theta_x=0.07, theta_y=0.11)
    upper = 1.0 / (12.0 - 1.0) + 1.0
    lower = 1.0
    assert 0.0 <= upper - lower <= 0.1
    assert abs(np.linalg.norm(ex.A - ex.B, 2) - ex.exact_normdiff) < 1e-10
    # numerical Hausdorff distance through matched member pairs
    cls_a = AdmissibleClass.create(ex.model_a, ex.env)
    cls_b = AdmissibleClass.create(ex.model_b, ex.env)
    worst = 0.0
    for i in range(10):
        member = random_member(cls_b, seed=i)
        worst = max(worst, sin_theta_max(nearest_admissible(member, cls_a), member))
        back = random_member(cls_a, seed=i)
        worst = max(worst, sin_theta_max(nearest_admissible(back, cls_b), back))
    assert abs(worst - ex.exact_dh) < 1e-10
    bracket = condition_bounds(ex.model_a, ex.env)
    assert bracket.admissible_upper == pytest.approx(upper, rel=1e-12)
    print(f"\nC7 PASS: bracket width {upper - lower:.4f} <= 0.1, norm and Hausdorff "
          f"closed forms reproduced to 1e-10")


def _check_figure1_patterns(curves, label):
    delta = float(curves.meta["delta"])
    gamma = float(curves.meta["gamma"])
    d_xh = curves.column("plot1", "d_xh_wq")
    witness = curves.column("plot1", "witness_h_wq")
    assert d_xh.min() >= 0.5, f"{label}: eigen-space distance dipped to {d_xh.min()}"
    assert witness.min() < 1e-8, f"{label}: witness floor {witness.min()}"
    amd1 = curves.column("plot2", "bound_amd1_vq")
    ref = delta / gamma
    tail = np.median(amd1[-50:])
    assert 0.1 * ref <= tail <= 10 * ref, f"{label}: plateau {tail} vs {ref}"
    steps = np.median(curves.column("plot3", "step_len")[-50:])
    assert 1e-2 * delta <= steps <= delta, f"{label}: step plateau {steps}"
    assert curves.violations() == 0


def test_criterion_08_figure1_desk(tmp_path):
    t0 = time.time()
    curves = run_figure(preset_config(1, scale="desk", seed=0, out_dir=tmp_path))
    elapsed = time.time() - t0
    _check_figure1_patterns(curves, "desk")
    assert elapsed < 60
    print(f"\nC8 PASS (desk): all four patterns at n=400 in {elapsed:.1f} s")


@pytest.mark.skipif(not os.environ.get("LADM_PAPER_SCALE"),
                    reason="full-scale run takes minutes; set LADM_PAPER_SCALE=1")
def test_criterion_08_figure1_paper_scale(tmp_path):
    t0 = time.time()
    curves = run_figure(preset_config(1, scale="paper", seed=0, out_dir=tmp_path))
    elapsed = time.time() - t0
    _check_figure1_patterns(curves, "paper")
    print(f"\nC8 PASS (paper): all four patterns at n=3000 in {elapsed:.1f} s "
          f"(target 600 s)")


def test_criterion_09_krylov_figures(tmp_path):
    ratios = {}
    for fig in (4, 5):
        curves = run_figure(preset_config(fig, scale="desk", seed=0,
                                          out_dir=tmp_path / f"fig{fig}"))
        dims = curves.column("plot1", "dim_kq")
        assert dims[1] >= curves.meta["k"]
        assert curves.column("plot2", "d_xh_vq")[-1] < 1e-8
        assert curves.column("plot2", "witness_h_vq")[-1] < 1e-8
        amd1 = curves.column("plot2", "bound_amd1_vq")
        nak = curves.column("plot2", "bound_nakatsukasa_vq")
        ratio = float(np.median((nak / amd1)[-5:]))
        ratios[fig] = ratio
        assert ratio >= 100
        assert curves.violations() == 0
    print(f"\nC9 PASS: Krylov figures converge below 1e-8; comparison-bound excess "
          f"{ratios[4]:.0f}x / {ratios[5]:.0f}x >= 100x")


def test_criterion_10_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for target in (a, b):
        run_figure(preset_config(3, scale="desk", seed=11, q_max=15, out_dir=target))
    files = sorted(p.name for p in a.iterdir())
    assert files
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()
    print(f"\nC10 PASS: {len(files)} output files byte-identical across reruns")
