"""Registry of verifiable claims and the harness that runs them.

Required claims are provable on the truncation and must hold; report-only
claims are empirical surveys whose outcome is recorded but never gates the
exit code.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import embed, metric, pde, spectral
from .config import RunConfig
from .errors import MembershipFailed, OrliczTorusError
from .qtorus import LatticeGrid, MatrixRep, ThetaMatrix, TorusElement, matrix_rep, trace
from .verdict import FAILS, HOLDS, Verdict
from .young import Power, PowerLog, interpolate, luxemburg_norm, series_membership

EXPECTED_FAIL = "expected-fail"


@dataclass
class Outcome:
    verdict: Verdict
    numbers: dict = field(default_factory=dict)
    expected_fail: bool = False

    @property
    def status(self) -> str:
        return EXPECTED_FAIL if self.expected_fail else self.verdict.status


@dataclass(frozen=True)
class Claim:
    id: str
    locus: str
    required: bool
    run: Callable[[RunConfig], Outcome]


@dataclass
class ClaimReport:
    id: str
    locus: str
    required: bool
    status: str
    verdict: dict
    numbers: dict
    runtime: Optional[float] = None

    @property
    def passed(self) -> bool:
        return not self.required or self.status in (HOLDS, EXPECTED_FAIL)

    def to_json(self, timings: bool = False) -> dict:
        out = {
            "id": self.id,
            "locus": self.locus,
            "tier": "required" if self.required else "report-only",
            "status": self.status,
            "passed": self.passed,
            "verdict": self.verdict,
            "numbers": self.numbers,
        }
        if timings:
            out["runtime"] = self.runtime
        return out


def _all(checks: dict, **numbers) -> Outcome:
    """Holds iff every named boolean check is true."""
    failed = sorted(k for k, ok in checks.items() if not ok)
    nums = {"checks": {k: bool(v) for k, v in checks.items()}, **numbers}
    if failed:
        return Outcome(Verdict.fails({"failed_checks": failed}), nums)
    return Outcome(Verdict.holds(margin=0.0), nums)


def _grid(cfg: RunConfig) -> LatticeGrid:
    return LatticeGrid(cfg.d, cfg.R)


def _rng(cfg: RunConfig, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, tag]))


def _catalog(cfg: RunConfig) -> list:
    return [
        Power(1.0),
        Power(2.0),
        PowerLog(2.0, 1.0),
        PowerLog(2.5, 0.0),
        interpolate(Power(1.0), Power(2.0), 0.5),
        cfg.phi,
    ]


# ---------------------------------------------------------------------------
# Young functions and ideals


def claim_interpolation(cfg: RunConfig) -> Outcome:
    phi = interpolate(Power(1.0), Power(2.0), 0.5)
    t = np.geomspace(1e-3, 1e3, 20)
    rel = float(np.max(np.abs(phi.eval(t) / t ** (4.0 / 3.0) - 1.0)))
    cases = [(Power(1.0), Power(2.0), th) for th in (0.25, 0.5, 0.75)] + [(PowerLog(2.0, 1.0), Power(3.0), 0.4)]
    inv_err, sym_err = 0.0, 0.0
    ys = np.array([0.1, 1.0, 10.0])
    for a, b, th in cases:
        mix = interpolate(a, b, th)
        gm = a.inverse(ys) ** (1 - th) * b.inverse(ys) ** th
        inv_err = max(inv_err, float(np.max(np.abs(mix.inverse(ys) / gm - 1))))
        swap = interpolate(b, a, 1 - th)
        sym_err = max(sym_err, float(np.max(np.abs(swap.eval(t[5:15]) / mix.eval(t[5:15]) - 1))))
    return _all(
        {"power_law": rel <= 1e-6, "inverse_relation": inv_err <= 1e-9, "symmetry": sym_err <= 1e-9},
        max_rel_error_t43=rel,
        max_inverse_error=inv_err,
        max_symmetry_error=sym_err,
    )


def ideal_trial(rng: np.random.Generator, grid: LatticeGrid, theta, phis) -> list:
    """One random triple ``X, A, Y``; returns ``(lhs, rhs)`` for each gauge."""
    n = grid.size
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A = matrix_rep(TorusElement.random(grid, theta, rng, decay=1.0)).entries
    mu_a = spectral.singular_values(A).values
    mu_xay = spectral.singular_values(X @ A @ Y).values
    scale = spectral.operator_norm(X) * spectral.operator_norm(Y)
    return [(luxemburg_norm(mu_xay, phi), scale * luxemburg_norm(mu_a, phi)) for phi in phis]


def claim_ideal(cfg: RunConfig) -> Outcome:
    grid = _grid(cfg)
    phis = _catalog(cfg)
    rng = _rng(cfg, 5)
    worst = math.inf
    failures = 0
    for _ in range(cfg.block("ideal")["trials"]):
        for lhs, rhs in ideal_trial(rng, grid, cfg.theta, phis):
            slack = rhs - lhs
            worst = min(worst, slack / max(rhs, 1.0))
            failures += slack < -1e-8 * max(rhs, 1.0)
    return _all({"no_failures": failures == 0}, failures=failures, min_relative_slack=worst,
                gauges=[p.descriptor for p in phis])


# ---------------------------------------------------------------------------
# spectra


def claim_weyl(cfg: RunConfig) -> Outcome:
    R2, R1 = cfg.block("spectrum")["R"], cfg.block("spectrum")["R_1d"]
    f2 = spectral.weyl_fit(LatticeGrid(2, R2))
    f1 = spectral.weyl_fit(LatticeGrid(1, R1))
    e2 = abs(f2.C_hat * 4 * math.pi - 1)
    e1 = abs(f1.C_hat * math.pi - 1)
    return _all(
        {"d2_within_5pct": e2 <= 0.05, "d1_within_5pct": e1 <= 0.05},
        d2=f2.to_json(),
        d1=f1.to_json(),
        d2_rel_error=e2,
        d1_rel_error=e1,
    )


def middle_decade(n_valid: int) -> tuple:
    centre = math.sqrt(n_valid)
    return int(math.ceil(centre / math.sqrt(10))), int(math.floor(centre * math.sqrt(10)))


def decay_ratios(grid: LatticeGrid, s: float) -> dict:
    fit = spectral.weyl_fit(grid)
    mu = spectral.ls_values(grid, s)
    lo, hi = middle_decade(spectral.resolved_rank(grid))
    n = np.arange(lo, hi + 1)
    ratio = mu[n - 1] * (n / fit.C_hat) ** (s / grid.d)
    return {"C_hat": fit.C_hat, "ranks": [lo, hi], "min": float(ratio.min()), "max": float(ratio.max())}


def claim_sv_decay(cfg: RunConfig) -> Outcome:
    r = decay_ratios(LatticeGrid(cfg.d, cfg.block("spectrum")["R"]), cfg.s)
    return _all({"ratios_in_band": 0.8 <= r["min"] and r["max"] <= 1.25}, **r)


def membership_table(d: int, s: float, R: int) -> list:
    grid = LatticeGrid(d, R)
    ls_spec = spectral.ls_spectrum(grid, s)
    head = ls_spec.values[: spectral.resolved_rank(grid)]
    rows = []
    crit = d / s
    for p in (crit - 0.5, crit, crit + 0.5):
        if p < 1:
            continue
        for alpha in (0.0, 1.0):
            v = series_membership(ls_spec.tail, PowerLog(p, alpha), head)
            rows.append({"p": p, "alpha": alpha, "status": v.status, "expected": HOLDS if p > crit else FAILS})
    return rows


def claim_membership(cfg: RunConfig) -> Outcome:
    rows = membership_table(cfg.d, cfg.s, cfg.block("spectrum")["R"])
    return _all({"threshold_rule": all(r["status"] == r["expected"] for r in rows)}, table=rows)


def claim_borderline_log(cfg: RunConfig) -> Outcome:
    grid = LatticeGrid(cfg.d, cfg.block("spectrum")["R"])
    ls_spec = spectral.ls_spectrum(grid, cfg.s)
    phi = PowerLog(max(cfg.d / cfg.s, 1.0), 1.0)
    v = series_membership(ls_spec.tail, phi, ls_spec.values[: spectral.resolved_rank(grid)])
    nums = {
        "phi": phi.descriptor,
        "claimed": "member",
        "computed": {HOLDS: "member", FAILS: "not member"}.get(v.status, "undecided"),
        "discrepancy": v.status != HOLDS,
        "membership": v.to_dict(),
    }
    return Outcome(v, nums)


# ---------------------------------------------------------------------------
# factorization, summing norms, optimality


def claim_factorization(cfg: RunConfig) -> Outcome:
    block = cfg.block("factorize")
    grid = _grid(cfg)
    try:
        rep = embed.factorize(grid, cfg.s, cfg.phi, seed=cfg.seed, n_vectors=block["n_vectors"],
                              n_families=block["n_families"], n_jobs=block["n_jobs"])
    except MembershipFailed as exc:
        v = exc.verdict
        nums = {"error": "MembershipFailed", "message": str(exc), "membership": v.to_dict() if v else None}
        return Outcome(v if v is not None else Verdict.fails(), nums, expected_fail=v is not None and v.failed)
    symbol = 1.0 / grid.sobolev_weights(cfg.s)
    basis = embed.VectorFamily(np.eye(grid.size))
    pi2_basis = embed.pi_summing_lower(symbol, basis, 2)
    checks = {
        "reconstruction": rep.reconstruction_error <= 1e-12,
        "pi1_below_upper": rep.pi1_lower <= rep.upper_bound + 1e-8,
        "pi2_basis_equals_hs": abs(pi2_basis - rep.pi2_exact) <= 1e-10,
    }
    return _all(checks, pi2_basis=pi2_basis, **rep.to_json())


def claim_cb(cfg: RunConfig) -> Outcome:
    grid = _grid(cfg)
    ops = {
        "L_s": spectral.ls_operator(grid, cfg.s),
        "left_multiplier": matrix_rep(TorusElement.random(grid, cfg.theta, _rng(cfg, 8), decay=1.0)),
    }
    table, spread = {}, 0.0
    for name, A in ops.items():
        vals = [embed.cb_amplification_norm(A, k) for k in range(1, 5)]
        table[name] = vals
        spread = max(spread, max(vals) - min(vals))
    return _all({"constant_in_k": spread <= 1e-10}, amplification=table, max_spread=spread)


def claim_optimality(cfg: RunConfig) -> Outcome:
    sc = cfg.block("scan")
    radii, tol = sc["radii"], sc["plateau_tol"]
    crit = cfg.d / cfg.s
    if crit < 1:
        return Outcome(Verdict.inconclusive(reason="d/s < 1 has no critical power gauge"),
                       {"reason": "critical exponent below 1"})
    critical = embed.optimality_scan(cfg.s, Power(crit), radii, d=cfg.d, plateau_tol=tol)
    reference = embed.optimality_scan(cfg.s, PowerLog(crit + 0.5, 0.0), radii, d=cfg.d, plateau_tol=tol)
    configured = embed.optimality_scan(cfg.s, cfg.phi, radii, d=cfg.d, plateau_tol=tol)
    norms = [n for R, n in reference.rows if R >= 8]
    settled = len(norms) < 2 or all(abs(b / a - 1) <= tol for a, b in zip(norms, norms[1:]))
    return _all(
        {"critical_diverges": critical.verdict == "Diverges", "reference_plateaus": settled},
        critical=critical.to_json(),
        reference=reference.to_json(),
        configured=configured.to_json(),
    )


# ---------------------------------------------------------------------------
# elliptic problem


def _scalar_problem(cfg, c, phi=None):
    grid = _grid(cfg)
    return pde.EllipticProblem(TorusElement.unit(grid, cfg.theta, c), cfg.s, phi or cfg.phi)


def default_nonscalar_potential(grid: LatticeGrid, theta) -> TorusElement:
    e1 = (1,) + (0,) * (grid.d - 1)
    m1 = tuple(-x for x in e1)
    return TorusElement.from_modes(grid, theta, {(0,) * grid.d: 1.0, e1: 0.5, m1: 0.5})


def _potential(cfg) -> TorusElement:
    V = cfg.block("pde")["V"]
    grid = _grid(cfg)
    if V is None:
        return default_nonscalar_potential(grid, cfg.theta)
    return TorusElement.from_json(V).extend(grid)


def claim_spectral_gap(cfg: RunConfig) -> Outcome:
    c = cfg.block("pde")["c"]
    scalar = pde.spectral_gap(_scalar_problem(cfg, c))
    zero = pde.spectral_gap(pde.EllipticProblem(TorusElement.zeros(_grid(cfg), cfg.theta), cfg.s, cfg.phi))
    g1 = LatticeGrid(1, max(cfg.R, 4))
    V1 = TorusElement.from_modes(g1, ThetaMatrix.zero(1), {(0,): 2.0, (1,): 1.0, (-1,): 1.0})
    example = pde.spectral_gap(pde.EllipticProblem(V1, cfg.s, cfg.phi))
    configured = pde.spectral_gap(pde.EllipticProblem(_potential(cfg), cfg.s, cfg.phi))
    checks = {
        "scalar_gap_equals_c": abs(scalar.lambda0 - c) <= 1e-10,
        "zero_potential_fails": zero.verdict.failed,
        "tridiagonal_example_positive": example.lambda0 > 0,
        "configured_positive": configured.lambda0 > 0,
    }
    return _all(
        checks,
        scalar=scalar.to_json(),
        zero=zero.to_json(),
        tridiagonal_example={**example.to_json(), "lambda0_below_vmin": example.lambda0 < example.vmin},
        configured=configured.to_json(),
    )


def claim_regularity_scalar(cfg: RunConfig) -> Outcome:
    block = cfg.block("pde")
    prob = _scalar_problem(cfg, block["c"])
    gap = pde.spectral_gap(prob)
    rng = _rng(cfg, 11)
    margins = []
    for _ in range(block["trials"]):
        f = TorusElement.random(prob.grid, cfg.theta, rng, decay=1.0)
        margins.append(pde.regularity_check(prob, f, gap).margin)
    unit = _scalar_problem(cfg, 1.0)
    f0 = TorusElement.unit(unit.grid, cfg.theta)
    eq = pde.regularity_check(unit, f0)
    eq_gap = abs(eq.notes["norm_u"] - eq.notes["norm_f"])
    return _all(
        {"all_hold": min(margins) >= -1e-10, "equality_case": eq_gap <= 1e-10 and abs(eq.notes["lambda0"] - 1) <= 1e-10},
        c=block["c"],
        trials=len(margins),
        min_margin=min(margins),
        equality_gap=eq_gap,
    )


def claim_regularity_large_c(cfg: RunConfig) -> Outcome:
    c = cfg.block("pde")["c_large"]
    prob = _scalar_problem(cfg, c)
    e1 = (1,) + (0,) * (cfg.d - 1)
    v = pde.regularity_check(prob, TorusElement.monomial(prob.grid, cfg.theta, e1))
    return Outcome(v, {"c": c, "source": "single mode U^(1,0,...)", **v.to_dict()})


def claim_regularity_nonscalar(cfg: RunConfig) -> Outcome:
    prob = pde.EllipticProblem(_potential(cfg), cfg.s, cfg.phi)
    rng = _rng(cfg, 13)
    sources = [TorusElement.random(prob.grid, cfg.theta, rng, decay=1.0)
               for _ in range(cfg.block("pde")["survey_trials"])]
    rows = pde.regularity_survey(prob, sources)
    n_fail = sum(r["status"] == FAILS for r in rows)
    v = Verdict.holds(margin=min(r["margin"] for r in rows)) if n_fail == 0 else Verdict.fails({"n_fail": n_fail})
    return Outcome(v, {"table": rows, "n_fail": n_fail})


def claim_trace_class(cfg: RunConfig) -> Outcome:
    phi = PowerLog(1.0, 1.0)
    prob = _scalar_problem(cfg, 1.0, phi)
    gap = pde.spectral_gap(prob)
    const = 1.0 / (gap.lambda0 * float(phi.inverse(1.0)))
    rng = _rng(cfg, 17)
    ratios = []
    for _ in range(cfg.block("pde")["trials"]):
        f = TorusElement.random(prob.grid, cfg.theta, rng, decay=1.0)
        u = pde.solve(prob, f)
        s1 = spectral.schatten_norm(spectral.singular_values(matrix_rep(f)), 1)
        ratios.append(pde.sobolev_orlicz_norm(u, cfg.s, phi) / s1)
    worst = max(ratios)
    v = Verdict.holds(margin=const - worst) if worst <= const + 1e-10 else Verdict.fails({"ratio": worst})
    return Outcome(v, {"phi": phi.descriptor, "constant": const, "max_ratio": worst, "mean_ratio": float(np.mean(ratios))})


# ---------------------------------------------------------------------------
# heat flow


def claim_heat_semigroup(cfg: RunConfig) -> Outcome:
    grid = _grid(cfg)
    rng = _rng(cfg, 19)
    ts = cfg.block("heat")["t_list"]
    x = TorusElement.random(grid, cfg.theta, rng)
    A = MatrixRep(grid, rng.standard_normal((grid.size, grid.size)) + 0j)
    comp_err, trace_exact = 0.0, True
    for t1 in ts:
        for t2 in ts:
            a = pde.heat_apply(grid, t1 + t2, x).coeffs
            b = pde.heat_apply(grid, t1, pde.heat_apply(grid, t2, x)).coeffs
            M1 = pde.heat_apply(grid, t1 + t2, A).entries
            M2 = pde.heat_apply(grid, t1, pde.heat_apply(grid, t2, A)).entries
            comp_err = max(comp_err, float(np.max(np.abs(a - b))), float(np.max(np.abs(M1 - M2))))
        trace_exact &= trace(pde.heat_apply(grid, t1, x)) == trace(x)
    identity = pde.heat_apply(grid, 0.0, x) == x
    return _all(
        {"composition": comp_err <= 1e-12, "trace_preserving": bool(trace_exact), "t0_identity": identity},
        max_composition_error=comp_err,
    )


def claim_heat_smoothing(cfg: RunConfig) -> Outcome:
    grid = _grid(cfg)
    h = cfg.block("heat")
    rows, worst, worst_v = [], -math.inf, None
    for i, t in enumerate(h["t_list"]):
        v = pde.heat_smoothing_check(grid, t, cfg.phi, trials=h["trials"], seed=cfg.seed + i)
        rows.append({"t": t, "status": v.status, "worst_ratio": v.notes["worst_ratio"],
                     "bound_factor": v.notes["bound_factor"],
                     "flat_low_modes": pde.flat_low_mode_ratios(grid, t, cfg.phi)})
        if v.notes["worst_ratio"] > worst:
            worst, worst_v = v.notes["worst_ratio"], v
    return Outcome(worst_v, {"worst_ratio": worst, "table": rows})


def claim_heat_scaling(cfg: RunConfig) -> Outcome:
    h = cfg.block("heat")
    fit = pde.heat_scaling_fit(_grid(cfg), h["p"], h["scaling_t"])
    dev = abs(fit["kernel_slope"] - fit["classical_slope"])
    v = Verdict.holds(margin=0.1 - dev) if dev <= 0.1 else Verdict.fails({"kernel_slope": fit["kernel_slope"]})
    return Outcome(v, fit)


# ---------------------------------------------------------------------------
# transport


def claim_transport(cfg: RunConfig) -> Outcome:
    grid = _grid(cfg)
    m = cfg.block("metric")
    pool = metric.default_pool(grid, cfg.theta, seed=cfg.seed, n_random=m["n_random"])
    rng = _rng(cfg, 23)
    margins, chain = [], math.inf
    failures = 0
    for _ in range(m["trials"]):
        rho = metric.DensityOperator.random(grid, rng)
        sigma = metric.DensityOperator.random(grid, rng)
        v = metric.transport_check(rho, sigma, cfg.phi, pool)
        failures += v.failed
        margins.append(v.notes["bound"] - v.notes["d_lower"])
        chain = min(chain, v.notes["min_chain_slack"])
    rho = metric.DensityOperator.random(grid, rng)
    same = metric.spectral_distance_lower(rho, rho, pool)
    sigma = metric.DensityOperator.random(grid, rng)
    half = metric.CandidatePool(pool.elements[: len(pool) // 2])
    d_half = metric.spectral_distance_lower(rho, sigma, half, data_adapted=False)
    d_full = metric.spectral_distance_lower(rho, sigma, pool, data_adapted=False)
    sweep = perturbation_sweep(grid, cfg.phi, pool, m["perturbations"], rng)
    lip = metric.lip_constant_estimate(grid, pool)
    return _all(
        {"chain_holds": failures == 0 and chain >= -1e-8, "identical_states_zero": same == 0.0,
         "pool_monotone": d_half <= d_full},
        K_hat=lip.K_hat,
        pool_size=lip.pool_size,
        cb_surrogate="K_hat = max ||a||_op / L(a) over the pool",
        trials=m["trials"],
        min_margin=min(margins),
        min_chain_slack=chain,
        perturbation_sweep=sweep,
    )


def perturbation_sweep(grid, phi, pool, sizes, rng) -> list:
    """``rho = sigma + eps (v v^* - w w^*)`` style pairs: rank-one moves of size eps."""
    base = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    other = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    sigma = metric.DensityOperator.from_vectors(grid, [base, other], weights=[1.0, 1.0])
    rows = []
    for eps in sizes:
        rho = metric.DensityOperator.from_vectors(grid, [base, other], weights=[1.0 + eps, 1.0 - eps]) \
            if eps < 1 else metric.DensityOperator.from_vectors(grid, [base])
        v = metric.transport_check(rho, sigma, phi, pool)
        rows.append({"eps": eps, "status": v.status, "d_lower": v.notes["d_lower"], "bound": v.notes["bound"]})
    return rows


REGISTRY = (
    Claim("thm-interpolation", "Orlicz interpolation theorem, inverse geometric mean", True, claim_interpolation),
    Claim("lemma-ideal", "two-sided ideal property of the Orlicz-Schatten class", True, claim_ideal),
    Claim("prop-weyl", "Weyl law for the Laplacian eigenvalue counting function", True, claim_weyl),
    Claim("prop-sv-decay", "singular-value decay of the Bessel potential", True, claim_sv_decay),
    Claim("example-membership-threshold", "power-log membership threshold p > d/s", True, claim_membership),
    Claim("example-borderline-log", "borderline p = d/s with a positive log power", False, claim_borderline_log),
    Claim("thm-main-factorization", "factorization of the Sobolev embedding through S_Phi", True,
          claim_factorization),
    Claim("thm-cb-summing", "complete boundedness of the factorization maps", True, claim_cb),
    Claim("prop-optimality", "optimality of the threshold gauge", True, claim_optimality),
    Claim("lemma-spectral-gap", "positive spectral gap of -Delta + V", True, claim_spectral_gap),
    Claim("thm-regularity-scalar", "Orlicz-Sobolev regularity, constant potential", True, claim_regularity_scalar),
    Claim("thm-regularity-scalar-large-c", "Orlicz-Sobolev regularity, large constant potential", False,
          claim_regularity_large_c),
    Claim("thm-regularity-nonscalar", "Orlicz-Sobolev regularity, non-constant potential", False,
          claim_regularity_nonscalar),
    Claim("cor-trace-class", "trace-class sources with the t log(e+t) gauge", False, claim_trace_class),
    Claim("def-heat-semigroup", "heat semigroup: composition and trace preservation", True, claim_heat_semigroup),
    Claim("prop-heat-smoothing", "S_1 to S_Phi smoothing of the heat semigroup", False, claim_heat_smoothing),
    Claim("example-heat-scaling", "small-time scaling of the heat flow", False, claim_heat_scaling),
    Claim("thm-transport", "transport inequality for the spectral distance", True, claim_transport),
)


def run_claim(claim: Claim, cfg: RunConfig) -> ClaimReport:
    start = time.perf_counter()
    try:
        out = claim.run(cfg)
    except OrliczTorusError as exc:
        raise ClaimError(claim.id, exc) from exc
    return ClaimReport(
        claim.id,
        claim.locus,
        claim.required,
        out.status,
        out.verdict.to_dict(),
        out.numbers,
        time.perf_counter() - start,
    )


class ClaimError(RuntimeError):
    def __init__(self, claim_id: str, cause: Exception):
        super().__init__(f"claim {claim_id}: {type(cause).__name__}: {cause}")
        self.claim_id = claim_id
        self.cause = cause


def run_all(cfg: RunConfig, only: Optional[list] = None) -> list:
    return [run_claim(c, cfg) for c in REGISTRY if only is None or c.id in only]
