"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run as `pytest tests/test_acceptance.py -v -s` to see the per-criterion lines.
"""

import json
import math
import time

import numpy as np
import pytest

import cmc_bifurcate as cb
from cmc_bifurcate.cli import main as cli_main
from cmc_bifurcate.geometry import field_inner, field_norm

from conftest import EXP_ROOT_PI4_B2, smooth_field


def _report(num: int, ok: bool, detail: str):
    print(f"criterion {num} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_1_closed_form_vs_oracle_spectrum():
    t0 = time.time()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(30):
        gamma = rng.uniform(0.2, math.pi - 0.2)
        r = rng.uniform(0.5, 2.0)
        h = rng.uniform(1.0, 10.0)
        cfg = cb.CylinderConfig(cb.Scenario.PLANAR_STRIP, r=r, gamma=gamma)
        targets = {(k, n): cb.planar_eigenvalue(r, gamma, h, k, n)
                   for k in (1, 2, 3) for n in (1, 2, 3)}
        lam_cap = max(targets.values())
        # closed-form rank bound sizes the oracle request
        rank = 0
        k = 1
        while True:
            lam_k1 = cb.planar_eigenvalue(r, gamma, h, k, 1)
            if lam_k1 > lam_cap:
                break
            n = 1
            while cb.planar_eigenvalue(r, gamma, h, k, n) <= lam_cap:
                rank += 1
                n += 1
            k += 1
        m = min(rank + 5, 1001 // 4)
        oracle = {(e.k, e.n): e.lam
                  for e in cb.modal_jacobi_spectrum(cfg, h, cb.TMode.DIRICHLET_ENDS,
                                                    m, 1001)}
        for key, lam in targets.items():
            assert key in oracle, f"mode {key} missing from oracle list"
            worst = max(worst, abs(lam - oracle[key]) / abs(lam))
    elapsed = time.time() - t0
    _report(1, worst < 1e-6 and elapsed < 30.0,
            f"30 configs, k,n<=3: worst rel err {worst:.2e} (<1e-6), "
            f"{elapsed:.1f}s (<30s)")


def test_criterion_2_critical_length_zero_crossing():
    worst = 0.0
    for gamma in (0.55 * math.pi, 0.6 * math.pi, 0.75 * math.pi, 0.9 * math.pi):
        closed = cb.planar_critical_length(1.0, gamma)
        oracle = cb.critical_length_zero_crossing(1.0, gamma, ns=2001)
        worst = max(worst, abs(oracle - closed) / closed)
    target = cb.planar_critical_length(1.0, 0.75 * math.pi)
    anchor = abs(target - 3 * math.pi / math.sqrt(5.0)) < 1e-12
    _report(2, worst < 1e-4 and anchor,
            f"four angles: worst rel err {worst:.2e} (<1e-4), "
            f"h0(3pi/4) = {target:.6f}")


def test_criterion_3_period_identities():
    exact = all(
        cb.planar_bifurcation_period(r, gamma)
        == 2.0 * cb.planar_critical_length(r, gamma)
        for r in (0.5, 1.0, 2.0)
        for gamma in (0.55 * math.pi, 0.75 * math.pi, 0.9 * math.pi))
    r, beta = 1.0, 2 * math.pi / 3
    cfg = cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=r, gamma=math.pi / 2,
                            beta=beta, convexity=cb.Convexity.CONVEX)
    T, _ = cb.wedge_bifurcation_period(cfg)
    t_neumann = 4 * math.pi * r * beta / math.sqrt(4 * beta * beta - math.pi ** 2)
    c = math.pi / (2 * beta)
    t_osc = 2 * math.pi * r / math.sqrt(1 - c * c)
    wedge_gap = max(abs(T - t_neumann), abs(t_neumann - t_osc)) / T
    _report(3, exact and wedge_gap < 1e-14,
            f"T = 2 h0 exact; wedge form agreement {wedge_gap:.2e} (<1e-14)")


def test_criterion_4_wedge_classifications():
    ok = True
    notes = []
    concave = cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0, gamma=math.pi / 6,
                                beta=0.3, convexity=cb.Convexity.CONCAVE)
    for h in (1.0, 10.0, 100.0, 1000.0):
        ok &= cb.wedge_stability(concave, h).classification \
            is cb.Classification.STABLE
    notes.append("concave stable to h=1e3")

    narrow = cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0, gamma=math.pi / 2,
                               beta=math.pi / 3, convexity=cb.Convexity.CONVEX)
    wide = cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0, gamma=math.pi / 2,
                             beta=2 * math.pi / 3, convexity=cb.Convexity.CONVEX)
    ok &= cb.wedge_stability(narrow, 1000.0).classification \
        is cb.Classification.STABLE
    ok &= cb.wedge_stability(wide, 100.0).classification \
        is cb.Classification.UNSTABLE
    notes.append("right-angle split at beta = pi/2")

    triggers = [
        ("exp", cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0,
                                  gamma=math.pi / 4, beta=2.0,
                                  convexity=cb.Convexity.CONVEX)),
        ("linear", cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0,
                                     gamma=math.pi / 4, beta=math.tan(math.pi / 4),
                                     convexity=cb.Convexity.CONVEX)),
        ("tan>pi/2", cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0, gamma=2.0,
                                       beta=2.2, convexity=cb.Convexity.CONVEX)),
        ("tan<pi/2", cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0,
                                       gamma=0.45 * math.pi, beta=1.5,
                                       convexity=cb.Convexity.CONVEX)),
    ]
    worst = 0.0
    for label, cfg in triggers:
        verdict = cb.wedge_stability(cfg, 100.0)
        ok &= verdict.classification is cb.Classification.UNSTABLE
        ok &= verdict.lambda_min < 0
        oracle = cb.modal_jacobi_spectrum(cfg, 100.0, cb.TMode.DIRICHLET_ENDS,
                                          1, 2001)[0].lam
        worst = max(worst, abs(oracle - verdict.lambda_min) / abs(verdict.lambda_min))
    notes.append(f"trigger eigenvalues oracle-confirmed, worst rel {worst:.2e}")
    ok &= worst < 1e-6
    _report(4, ok, "; ".join(notes))


def test_criterion_5_transcendental_root_vs_oracle():
    res = cb.solve_transcendental(cb.CaseId.CONVEX_EXP, math.pi / 4, 2.0)
    c = res.root_c
    cfg = cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0, gamma=math.pi / 4,
                            beta=2.0, convexity=cb.Convexity.CONVEX)
    mu = cb.sturm_eigen(cb.sturm_problem_for(cfg, 2001), 1).mu[0]
    rel = abs(mu + c * c) / (c * c)
    ok = (abs(c - EXP_ROOT_PI4_B2) < 1e-10 and abs(res.residual) < 1e-12
          and rel < 1e-6)
    _report(5, ok, f"c = {c:.6f} (~0.957), residual {abs(res.residual):.1e} "
                   f"(<1e-12), oracle mu vs -c^2 rel {rel:.2e} (<1e-6)")


def test_criterion_6_discrete_operator_fidelity():
    # absolute accuracy at 64x64 on short-arc configurations
    planar = cb.CylinderConfig(cb.Scenario.PLANAR_STRIP, r=1.0, gamma=0.5)
    wedge = cb.CylinderConfig(cb.Scenario.RIGHT_WEDGE, r=1.0, gamma=math.pi / 4,
                              beta=1.0, convexity=cb.Convexity.CONVEX)
    errs = []
    for cfg in (planar, wedge):
        g = cb.build_grid(cfg, 64, 64, 5.0, cb.TMode.DIRICHLET_ENDS)
        H = cb.mean_curvature(cb.normal_graph(cfg, g, cb.ScalarField.zeros(g)))
        errs.append(float(np.max(np.abs(2 * cfg.r * H.values - 1.0))))
    flat_ok = max(errs) < 1e-4

    # order of convergence on the wide strip against the exact value
    wide = cb.CylinderConfig(cb.Scenario.PLANAR_STRIP, r=1.0, gamma=0.75 * math.pi)

    def href(nn):
        g = cb.build_grid(wide, nn, nn, 5.0, cb.TMode.DIRICHLET_ENDS)
        H = cb.mean_curvature(cb.normal_graph(wide, g, cb.ScalarField.zeros(g)))
        return float(np.max(np.abs(H.values - 0.5)))

    rate = math.log(href(64) / href(128)) / math.log(127.0 / 63.0)
    order_ok = 1.8 <= rate <= 2.2

    # directional derivative of H vs (1/2) L on five random smooth fields
    g = cb.build_grid(planar, 160, 160, 4.0, cb.TMode.DIRICHLET_ENDS)
    H0 = cb.mean_curvature(cb.normal_graph(planar, g, cb.ScalarField.zeros(g))).values
    eps = 1e-5
    dd_worst = 0.0
    for seed in range(5):
        v = smooth_field(g, seed=seed)
        He = cb.mean_curvature(cb.normal_graph(planar, g,
                                               cb.ScalarField(g, eps * v))).values
        dd = (He - H0) / eps
        Lv = cb.jacobi_apply(planar, g, cb.ScalarField(g, v)).values
        inner = (slice(1, -1), slice(1, -1))
        dd_worst = max(dd_worst, float(
            np.max(np.abs(dd[inner] - 0.5 * Lv[inner]))
            / np.max(np.abs(0.5 * Lv[inner]))))
    dd_ok = dd_worst < 1e-4
    _report(6, flat_ok and order_ok and dd_ok,
            f"H(0) rel err {max(errs):.2e} (<1e-4) at 64x64, order {rate:.2f} "
            f"(2 +/- 0.2), derivative rel err {dd_worst:.2e} (<1e-4)")


def test_criterion_7_crandall_rabinowitz_hypotheses():
    t0 = time.time()
    cfg = cb.CylinderConfig(cb.Scenario.PLANAR_STRIP, r=1.0, gamma=0.75 * math.pi)
    point = cb.locate_bifurcation(cfg, nt=64, ns=64)
    grid = point.kernel.grid
    pairs = cb.full_2d_jacobi_spectrum(cfg, grid, 6)
    in_band = [lam for lam, _ in pairs if abs(lam) < 1e-4]
    band_ok = len(in_band) == 1 and pairs[-1][0] > 1e-4

    tt, ss = np.meshgrid(grid.t, grid.s, indexing="ij")
    mode = np.sin(np.pi * (ss - grid.s_lo) / (2 * cfg.gamma)) \
        * np.cos(2 * np.pi * tt / point.T)
    corr = abs(field_inner(cfg, grid, point.kernel.values, mode)) \
        / (field_norm(cfg, grid, point.kernel.values) * field_norm(cfg, grid, mode))
    expect = 8 * point.H0 * (1 - math.pi ** 2 / (4 * cfg.gamma ** 2))
    trans_rel = abs(point.transversality - expect) / expect
    elapsed = time.time() - t0
    _report(7, band_ok and corr > 0.999 and trans_rel < 0.05 and elapsed < 60.0,
            f"one eigenvalue in (-1e-4, 1e-4) [{in_band[0]:.1e}], kernel corr "
            f"{corr:.6f} (>0.999), transversality rel dev {trans_rel:.2%} (<5%), "
            f"{elapsed:.1f}s (<60s)")


def test_criterion_8_branch_existence_and_structure():
    t0 = time.time()
    cfg = cb.CylinderConfig(cb.Scenario.PLANAR_STRIP, r=1.0, gamma=0.75 * math.pi)
    point = cb.locate_bifurcation(cfg, nt=64, ns=64)
    plus = cb.branch_switch(point, 1e-2)
    minus = cb.branch_switch(point, -1e-2)
    trivial = cb.branch_switch(point, 0.0)
    states = cb.continue_branch(plus, 20, 5e-3)

    res_ok = all(s.residual_norm < 1e-10 for s in states)
    nonrot_ok = all(
        float(np.max(s.u.values.max(axis=0) - s.u.values.min(axis=0)))
        > 0.5 * abs(s.epsilon) for s in states)
    sym = max(cb.check_alexandrov_symmetry(s) for s in states)
    mirror = abs(plus.H - minus.H)

    eps = np.array([s.epsilon for s in [plus] + states])
    hs = np.array([s.H for s in [plus] + states])
    design = np.stack([eps * eps, np.ones_like(eps)], axis=1)
    coef, *_ = np.linalg.lstsq(design, hs - trivial.H, rcond=None)
    fitted = design @ coef
    y = hs - trivial.H
    r2 = 1.0 - np.sum((y - fitted) ** 2) / np.sum((y - np.mean(y)) ** 2)
    elapsed = time.time() - t0
    _report(8, res_ok and nonrot_ok and sym < 1e-8 and mirror < 1e-8
            and r2 > 0.99 and elapsed < 300.0,
            f"20 steps: residuals < 1e-10 [{res_ok}], non-rotational [{nonrot_ok}], "
            f"symmetry defect {sym:.1e} (<1e-8), mirror dH {mirror:.1e} (<1e-8), "
            f"quadratic fit R^2 {r2:.5f} (>0.99), {elapsed:.0f}s (<300s)")


def test_criterion_9_determinism(tmp_path):
    def battery(outdir):
        base = ["--out", str(outdir), "--scenario", "planar-strip",
                "--gamma", "3pi/4"]
        assert cli_main(base + ["spectrum", "--h", "5", "--m", "4",
                                "--oracle-ns", "501"]) == 0
        assert cli_main(base + ["stability", "--h", "5"]) == 0
        assert cli_main(base + ["critical"]) == 0
        assert cli_main(base + ["bifurcate", "--nt", "48", "--ns", "48"]) == 0
        assert cli_main(base + ["trace", "--steps", "3", "--ds", "0.005",
                                "--nt", "48", "--ns", "48",
                                "--export-meshes"]) == 0
        assert cli_main(base + ["sweep", "--run", "critical", "--axis", "gamma",
                                "--values", "0.6pi,0.75pi,0.9pi"]) == 0
        wedge = ["--out", str(outdir), "--scenario", "right-wedge", "--gamma",
                 "pi/4", "--beta", "2", "--convexity", "convex"]
        assert cli_main(wedge + ["spectrum", "--h", "3", "--m", "4",
                                 "--oracle-ns", "501"]) == 0

    d1, d2 = tmp_path / "run1", tmp_path / "run2"
    battery(d1)
    battery(d2)
    files = sorted(p.name for p in d1.iterdir())
    identical = all((d1 / name).read_bytes() == (d2 / name).read_bytes()
                    for name in files)
    # outputs must also round-trip through the toolkit's own parsers
    from cmc_bifurcate.outputs import parse_table_csv
    parse_table_csv((d1 / "spectrum.csv").read_text())
    json.loads((d1 / "critical.json").read_text())
    _report(9, identical and len(files) >= 10,
            f"{len(files)} output files byte-identical across two runs")
