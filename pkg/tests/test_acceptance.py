"""Acceptance suite: twelve end-to-end checks, each printing one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the status lines are
printed even without ``-s``.
"""

import json
import math

import numpy as np
import pytest

from oracles import grid_scan_norm
from orlicz_torus import cli, embed, metric, pde, spectral
from orlicz_torus.claims import REGISTRY, claim_borderline_log, membership_table
from orlicz_torus.config import RunConfig
from orlicz_torus.qtorus import LatticeGrid, MatrixRep, ThetaMatrix, TorusElement, matrix_rep, trace
from orlicz_torus.verdict import FAILS, HOLDS
from orlicz_torus.young import Power, PowerLog, interpolate, luxemburg_norm

CATALOG = [Power(1.0), Power(2.0), Power(3.5), PowerLog(2.0, 1.0), PowerLog(2.5, 0.0), PowerLog(1.0, 1.0),
           interpolate(Power(1.0), Power(2.0), 0.5)]
TH = ThetaMatrix(2, (0.3,))


@pytest.fixture
def announce(capsys):
    def _announce(title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {title}: {detail}")
        assert ok, detail

    return _announce


def test_luxemburg_norm_correctness(announce):
    closed = [
        abs(luxemburg_norm([0.7], Power(2)) - 0.7),
        abs(luxemburg_norm([0.5, 0.25], Power(1)) - 0.75),
        abs(luxemburg_norm([1.0, 1.0], Power(2)) - math.sqrt(2)),
    ]
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(100):
        mu = np.sort(rng.random(10))[::-1]
        phi = CATALOG[i % len(CATALOG)]
        worst = max(worst, abs(luxemburg_norm(mu, phi) - grid_scan_norm(mu, phi)))
    ok = max(closed) <= 1e-10 and worst <= 1e-6
    announce("Luxemburg norm", ok, f"closed-form err {max(closed):.2e}, grid-scan max diff {worst:.2e} over 100")


def test_weyl_constant(announce):
    c2 = spectral.weyl_fit(LatticeGrid(2, 40)).C_hat
    c1 = spectral.weyl_fit(LatticeGrid(1, 200)).C_hat
    r2, r1 = c2 * 4 * math.pi - 1, c1 * math.pi - 1
    announce("Weyl constant", abs(r2) <= 0.05 and abs(r1) <= 0.05,
             f"d=2 C_hat={c2:.6f} ({r2:+.2%}), d=1 C_hat={c1:.6f} ({r1:+.2%})")


def test_singular_value_decay(announce):
    grid = LatticeGrid(2, 40)
    ls_spec = spectral.ls_spectrum(grid, 1.0)
    C = spectral.weyl_fit(grid).C_hat
    N = spectral.resolved_rank(grid)
    lo, hi = int(math.sqrt(N) / math.sqrt(10)), int(math.sqrt(N) * math.sqrt(10))
    n = np.arange(lo, hi + 1)
    ratio = ls_spec.values[n - 1] * np.sqrt(n / C)
    ok = bool(np.all((ratio >= 0.8) & (ratio <= 1.25)))
    announce("singular-value decay", ok, f"ranks {lo}..{hi}, ratio in [{ratio.min():.4f}, {ratio.max():.4f}]")


def test_membership_rule(announce):
    rows = membership_table(2, 1.0, 40)
    got = {(r["p"], r["alpha"]): r["status"] for r in rows}
    expected = {(p, a): (HOLDS if p == 2.5 else FAILS) for p in (1.5, 2.0, 2.5) for a in (0.0, 1.0)}
    flag = claim_borderline_log(RunConfig.from_sources()).numbers
    ok = got == expected and flag["discrepancy"] is True and flag["phi"] == "powerlog:p=2,alpha=1"
    announce("membership threshold", ok,
             f"{sorted((k, v) for k, v in got.items())}; borderline p=2, alpha=1 discrepancy={flag['discrepancy']}")


def test_ideal_property(announce):
    grid = LatticeGrid(2, 4)
    rng = np.random.default_rng(7)
    n = grid.size
    failures, worst = 0, -math.inf
    for _ in range(100):
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        Y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        A = matrix_rep(TorusElement.random(grid, TH, rng, decay=rng.uniform(0, 3))).entries
        xo, yo = spectral.operator_norm(X), spectral.operator_norm(Y)
        mu_xay = spectral.singular_values(X @ A @ Y).values
        mu_a = spectral.singular_values(A).values
        for phi in CATALOG:
            lhs = luxemburg_norm(mu_xay, phi)
            rhs = xo * yo * luxemburg_norm(mu_a, phi)
            worst = max(worst, lhs - rhs)
            failures += lhs > rhs + 1e-8
    announce("ideal property", failures == 0,
             f"{100 * len(CATALOG)} checks, failures={failures}, max(lhs - rhs)={worst:.3e}")


def test_factorization(announce):
    grid = LatticeGrid(2, 4)
    phi = PowerLog(2.5, 0.0)
    rep = embed.factorize(grid, 1.0, phi, seed=0, n_vectors=100, n_families=200)
    symbol = 1.0 / grid.sobolev_weights(1.0)
    pi1 = embed.best_pi1_lower(symbol, n_families=200, seed=0)
    all_below = max(pi1["values"]) <= rep.upper_bound + 1e-8
    pi2 = embed.pi_summing_lower(symbol, embed.VectorFamily(np.eye(grid.size)), 2)
    pi2_err = abs(pi2 - np.linalg.norm(symbol))
    rng = np.random.default_rng(1)
    spread = 0.0
    for A in (spectral.ls_operator(grid, 1.0), matrix_rep(TorusElement.random(grid, TH, rng, decay=1.0))):
        vals = [embed.cb_amplification_norm(A, k) for k in range(1, 5)]
        spread = max(spread, max(vals) - min(vals))
    ok = rep.reconstruction_error <= 1e-12 and all_below and pi2_err <= 1e-10 and spread <= 1e-10
    announce("factorization", ok,
             f"recon err {rep.reconstruction_error:.1e}, best pi1 {pi1['best']:.4f} <= {rep.upper_bound:.4f}, "
             f"pi2 err {pi2_err:.1e}, cb spread {spread:.1e}")


def test_optimality(announce):
    crit = embed.optimality_scan(1.0, Power(2.0), [4, 8, 16, 32], d=2)
    norms = np.array([v for _, v in crit.rows])
    steps = np.diff(norms) / norms[:-1]
    conv = embed.optimality_scan(1.0, PowerLog(2.5, 0.0), [4, 8, 16], d=2)
    cn = [v for _, v in conv.rows]
    plateau = abs(cn[2] / cn[1] - 1)
    ok = bool(np.all(steps > 0.02)) and crit.membership.status == FAILS and crit.verdict == "Diverges" \
        and plateau <= 0.02
    announce("optimality", ok,
             f"Power(2) steps {np.round(steps, 4).tolist()} ({crit.verdict}); "
             f"PowerLog(2.5,0) step after R=8 {plateau:.4f}")


def test_interpolation(announce):
    phi = interpolate(Power(1.0), Power(2.0), 0.5)
    t = np.geomspace(1e-3, 1e3, 20)
    rel = float(np.max(np.abs(phi.eval(t) / t ** (4 / 3) - 1)))
    sym = 0.0
    for a, b, th in [(Power(1.5), PowerLog(2, 1), 0.3), (Power(1), Power(3), 0.8)]:
        sym = max(sym, float(np.max(np.abs(interpolate(a, b, th).eval(t) - interpolate(b, a, 1 - th).eval(t))
                                    / interpolate(a, b, th).eval(t))))
    announce("interpolation", rel <= 1e-6 and sym <= 1e-9, f"t^(4/3) rel err {rel:.2e}, symmetry err {sym:.2e}")


def test_elliptic_regularity(announce):
    grid = LatticeGrid(2, 4)
    phi = PowerLog(2.5, 0.0)
    scalar = pde.EllipticProblem(TorusElement.unit(grid, TH, 1.0), 1.0, phi)
    gap = pde.spectral_gap(scalar)
    rng = np.random.default_rng(11)
    margins = [pde.regularity_check(scalar, TorusElement.random(grid, TH, rng), gap).margin for _ in range(50)]
    eq = pde.regularity_check(scalar, TorusElement.unit(grid, TH), gap)
    eq_err = abs(eq.notes["norm_u"] - eq.notes["norm_f"])
    V = TorusElement.from_modes(grid, TH, {(0, 0): 1.0, (1, 0): 0.5, (-1, 0): 0.5})
    survey = pde.regularity_survey(pde.EllipticProblem(V, 1.0, phi),
                                   [TorusElement.random(grid, TH, rng) for _ in range(20)])
    table = " ".join(f"{r['margin']:+.3f}" for r in survey)
    ok = min(margins) >= -1e-10 and eq_err <= 1e-10 and abs(gap.lambda0 - 1) <= 1e-10 and len(survey) == 20
    announce("elliptic regularity", ok,
             f"scalar min margin {min(margins):.4f}, equality err {eq_err:.1e}; non-scalar margins: {table}")


def test_heat_semigroup(announce):
    grid = LatticeGrid(2, 4)
    rng = np.random.default_rng(3)
    comp, trace_ok = 0.0, True
    for _ in range(10):
        x = TorusElement.random(grid, TH, rng)
        A = MatrixRep(grid, rng.standard_normal((grid.size, grid.size)))
        t1, t2 = rng.uniform(0, 0.2, 2)
        comp = max(comp, float(np.max(np.abs(pde.heat_apply(grid, t1 + t2, x).coeffs
                                             - pde.heat_apply(grid, t1, pde.heat_apply(grid, t2, x)).coeffs))))
        comp = max(comp, float(np.max(np.abs(pde.heat_apply(grid, t1 + t2, A).entries
                                             - pde.heat_apply(grid, t1, pde.heat_apply(grid, t2, A)).entries))))
        trace_ok &= trace(pde.heat_apply(grid, t1, x)) == trace(x)
    smooth = pde.heat_smoothing_check(grid, 0.01, PowerLog(2.5, 0.0), trials=30, seed=0)
    fit = pde.heat_scaling_fit(grid, 2.0, np.geomspace(1e-3, 1e-1, 7))
    ok = comp <= 1e-12 and trace_ok and math.isfinite(smooth.notes["worst_ratio"]) \
        and math.isfinite(fit["kernel_slope"])
    announce("heat semigroup", ok,
             f"composition err {comp:.1e}, trace exact={trace_ok}; smoothing worst ratio "
             f"{smooth.notes['worst_ratio']:.4f} ({smooth.status}, report-only); kernel slope "
             f"{fit['kernel_slope']:.3f}, operator slope {fit['operator_slope']:.3f} vs classical "
             f"{fit['classical_slope']} (report-only)")


def test_transport(announce):
    grid = LatticeGrid(2, 4)
    phi = PowerLog(2.5, 0.0)
    pool = metric.default_pool(grid, TH, seed=0)
    rng = np.random.default_rng(5)
    chain, fails = math.inf, 0
    for _ in range(50):
        rho, sigma = metric.DensityOperator.random(grid, rng), metric.DensityOperator.random(grid, rng)
        v = metric.transport_check(rho, sigma, phi, pool)
        chain = min(chain, v.notes["min_chain_slack"])
        fails += v.failed
    rho, sigma = metric.DensityOperator.random(grid, rng), metric.DensityOperator.random(grid, rng)
    same = metric.spectral_distance_lower(rho, rho, pool)
    sizes = [10, len(pool) // 2, len(pool)]
    dists = [metric.spectral_distance_lower(rho, sigma, metric.CandidatePool(pool.elements[:k]), data_adapted=False)
             for k in sizes]
    monotone = all(a <= b for a, b in zip(dists, dists[1:]))
    ok = fails == 0 and chain >= -1e-8 and same == 0.0 and monotone
    announce("transport", ok, f"50 pairs, min chain slack {chain:.3e}, rho=sigma -> {same}, "
                              f"pool sizes {sizes} -> {np.round(dists, 6).tolist()}")


def test_check_all_determinism(announce, tmp_path, capsys):
    codes = []
    for name in ("first", "second"):
        codes.append(cli.main(["check-all", "--out", str(tmp_path / name)]))
    capsys.readouterr()
    a = (tmp_path / "first" / "claims.json").read_bytes()
    b = (tmp_path / "second" / "claims.json").read_bytes()
    ids = [c["id"] for c in json.loads(a)["claims"]]
    ok = a == b and codes == [0, 0] and ids == [c.id for c in REGISTRY]
    announce("check-all determinism", ok, f"{len(a)} bytes, identical={a == b}, exit codes {codes}, "
                                          f"{len(ids)} claims each once")
