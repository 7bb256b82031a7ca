"""Elliptic operator ``-Delta + V`` and the heat semigroup on the truncation.

With the positive Laplacian the operator is ``diag(lam_n) + M(V)`` in the
Fourier basis, where ``M(V)`` is left multiplication by the potential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

from .errors import InvalidParameter, NoConvergence, NotPSD, NotSelfAdjoint, SingularOperator
from .qtorus import LatticeGrid, MatrixRep, TorusElement, adjoint, matrix_rep, trace
from .spectral import heat_bound_factor, orlicz_schatten_norm
from .verdict import Verdict
from .young import Power, PowerLog, YoungFunction, luxemburg_norm

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EllipticProblem:
    """Potential ``V`` (self-adjoint element) together with the Sobolev order and gauge.

    ``nonnegative`` records the claim ``V >= 0``; it is verified on the
    truncated multiplication operator at construction.
    """

    V: TorusElement
    s: float = 1.0
    phi: YoungFunction = field(default_factory=lambda: PowerLog(2.5, 0.0))
    nonnegative: bool = True

    def __post_init__(self):
        if np.max(np.abs(adjoint(self.V).coeffs - self.V.coeffs), initial=0.0) > HERMITIAN_TOL:
            raise NotSelfAdjoint("potential is not self-adjoint")
        M = matrix_rep(self.V).entries
        if np.max(np.abs(M - M.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise NotSelfAdjoint("multiplication by the potential is not hermitian")
        if self.nonnegative and self.vmin < -HERMITIAN_TOL:
            raise NotPSD(f"potential has negative spectrum (min {self.vmin:.3e})")

    @property
    def grid(self) -> LatticeGrid:
        return self.V.grid

    @property
    def theta(self):
        return self.V.theta

    @property
    def vmin(self) -> float:
        M = matrix_rep(self.V).entries
        return float(np.linalg.eigvalsh(0.5 * (M + M.conj().T))[0])

    @property
    def is_scalar(self) -> bool:
        return bool(np.all(self.V.coeffs[1:] == 0))

    def at_radius(self, R: int) -> "EllipticProblem":
        grid = LatticeGrid(self.grid.d, R, self.grid.max_dimension)
        return EllipticProblem(self.V.extend(grid), self.s, self.phi, self.nonnegative)


@dataclass(frozen=True)
class GapReport:
    lambda0: float
    vmin: float
    trace_v: float
    lambda0_check: float
    check_radius: int

    @property
    def verdict(self) -> Verdict:
        notes = {"vmin": self.vmin, "trace_v": self.trace_v, "lambda0_ge_vmin": self.lambda0 >= self.vmin - 1e-12}
        if self.lambda0 > 1e-12:
            return Verdict.holds(margin=self.lambda0, **notes)
        return Verdict.fails({"lambda0": self.lambda0}, **notes)

    def to_json(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "vmin": self.vmin,
            "trace_v": self.trace_v,
            "lambda0_check": self.lambda0_check,
            "check_radius": self.check_radius,
        }


def assemble(problem: EllipticProblem) -> MatrixRep:
    M = matrix_rep(problem.V).entries
    if np.max(np.abs(M - M.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise NotSelfAdjoint("assembled operator is not hermitian")
    A = np.diag(problem.grid.eigenvalues).astype(complex) + 0.5 * (M + M.conj().T)
    return MatrixRep(problem.grid, A, hermitian=True)


def _lowest_eigenvalue(problem):
    try:
        return float(np.linalg.eigvalsh(assemble(problem).entries)[0])
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigensolver failed: {exc}") from exc


def spectral_gap(problem: EllipticProblem, check_radius: Optional[int] = None, tol: float = 1e-6) -> GapReport:
    """Smallest eigenvalue of the truncated operator, confirmed on a larger grid."""
    vmin = problem.vmin
    if vmin < -HERMITIAN_TOL:
        raise NotPSD(f"potential has negative spectrum (min {vmin:.3e})")
    lam0 = _lowest_eigenvalue(problem)
    R2 = 2 * problem.grid.R if check_radius is None else check_radius
    lam_check = _lowest_eigenvalue(problem.at_radius(max(R2, 1)))
    if abs(lam0 - lam_check) > tol * max(1.0, abs(lam0)):
        raise NoConvergence(f"lowest eigenvalue moved from {lam0:.12g} to {lam_check:.12g} between radii")
    return GapReport(lam0, vmin, float(trace(problem.V).real), lam_check, max(R2, 1))


def solve(problem: EllipticProblem, f: TorusElement) -> TorusElement:
    """Solve ``(-Delta + V) u = f`` on the truncation by a Cholesky factorization."""
    if f.grid != problem.grid:
        f = f.extend(problem.grid)
    A = assemble(problem).entries
    try:
        factor = sla.cho_factor(A)
    except np.linalg.LinAlgError as exc:
        raise SingularOperator("operator is not positive definite on the truncation") from exc
    u = sla.cho_solve(factor, f.coeffs)
    res = np.linalg.norm(A @ u - f.coeffs)
    if res > 1e-10 * max(np.linalg.norm(f.coeffs), 1e-300):
        raise NoConvergence(f"solve residual {res:.3e} too large")
    return f.with_coeffs(u)


def residual(problem: EllipticProblem, u: TorusElement, f: TorusElement) -> float:
    return float(np.linalg.norm(assemble(problem).entries @ u.coeffs - f.coeffs))


def sobolev_orlicz_norm(u: TorusElement, s: float, phi: YoungFunction) -> float:
    """``|| (1 + Delta)^(s/2) u ||_{S_Phi}`` through the left-multiplication matrix."""
    lifted = u.with_coeffs(u.coeffs * u.grid.sobolev_weights(s))
    return orlicz_schatten_norm(matrix_rep(lifted), phi)


def regularity_check(problem: EllipticProblem, f: TorusElement, gap: Optional[GapReport] = None,
                     tol: float = 1e-10) -> Verdict:
    """Test ``||u||_{W^{s,Phi}} <= ||f||_{S_Phi} / lambda0`` for the solution of ``L u = f``."""
    gap = spectral_gap(problem) if gap is None else gap
    u = solve(problem, f)
    norm_u = sobolev_orlicz_norm(u, problem.s, problem.phi)
    norm_f = orlicz_schatten_norm(matrix_rep(f), problem.phi)
    bound = norm_f / gap.lambda0
    margin = bound - norm_u
    notes = {"norm_u": norm_u, "norm_f": norm_f, "lambda0": gap.lambda0, "bound": bound}
    if margin >= -tol * max(1.0, bound):
        return Verdict.holds(margin=margin, **notes)
    return Verdict.fails({"norm_u": norm_u, "bound": bound, "ratio": norm_u / bound}, margin=margin, **notes)


def regularity_survey(problem: EllipticProblem, sources: Sequence[TorusElement]) -> list:
    """Per-source margins; one row ``{index, status, margin, norm_u, bound}`` per source."""
    gap = spectral_gap(problem)
    rows = []
    for i, f in enumerate(sources):
        v = regularity_check(problem, f, gap)
        rows.append(
            {
                "index": i,
                "status": v.status,
                "margin": v.notes["bound"] - v.notes["norm_u"],
                "norm_u": v.notes["norm_u"],
                "bound": v.notes["bound"],
            }
        )
    return rows


# ---------------------------------------------------------------------------
# heat semigroup


def heat_symbol(grid: LatticeGrid, t: float) -> np.ndarray:
    if t < 0:
        raise InvalidParameter("t must be >= 0")
    return np.exp(-t * grid.eigenvalues)


def heat_apply(grid: LatticeGrid, t: float, x: Union[TorusElement, MatrixRep]):
    """``exp(-t Delta)`` on an element (modewise) or on an operator (from the left)."""
    sym = heat_symbol(grid, t)
    if isinstance(x, TorusElement):
        if x.grid != grid:
            raise InvalidParameter("element lives on a different grid")
        return x.with_coeffs(x.coeffs * sym)
    if isinstance(x, MatrixRep):
        if x.grid != grid:
            raise InvalidParameter("operator lives on a different grid")
        return MatrixRep(grid, sym[:, None] * x.entries)
    raise TypeError("heat_apply expects a TorusElement or MatrixRep")


def _random_s1_operator(rng, n, profile):
    if profile == "rank-one":
        sv = np.zeros(n)
        sv[0] = 1.0
    elif profile == "flat":
        k = int(rng.integers(1, n + 1))
        sv = np.zeros(n)
        sv[:k] = 1.0 / k
    else:
        ratio = rng.uniform(0.3, 0.95)
        sv = ratio ** np.arange(n)
        sv /= sv.sum()
    U = unitary_group.rvs(n, random_state=rng)
    W = unitary_group.rvs(n, random_state=rng)
    return (U * sv[None, :]) @ W.conj().T


def flat_low_mode_ratios(grid: LatticeGrid, t: float, phi: YoungFunction, ks=None) -> list:
    """Ratio to the bound factor for ``T = diag(1/k)`` on the k lowest modes."""
    bound = heat_bound_factor(grid, t, phi)
    sym = heat_symbol(grid, t)
    ks = ks if ks is not None else sorted({1, 2, 5, 10, 25, 50, grid.size} & set(range(1, grid.size + 1)))
    rows = []
    for k in ks:
        sv = np.sort(sym[:k] / k)[::-1]
        rows.append({"k": int(k), "norm": luxemburg_norm(sv, phi), "ratio": luxemburg_norm(sv, phi) / bound})
    return rows


def heat_smoothing_check(grid: LatticeGrid, t: float, phi: YoungFunction, trials: int = 50,
                         seed: int = 0) -> Verdict:
    """Compare ``||exp(-t Delta) T||_{S_Phi}`` over unit-trace-norm ``T`` with the bound factor.

    Test operators: the rank-one projection on the constant mode, flat
    diagonals on the lowest modes, and random ``U diag(s) W^*`` with rank-one,
    flat or geometric singular-value profiles (all normalized to trace norm 1).
    """
    if t <= 0:
        raise InvalidParameter("t must be > 0")
    bound = heat_bound_factor(grid, t, phi)
    n = grid.size
    sym = heat_symbol(grid, t)
    worst = {"ratio": -np.inf}
    per_profile = {}

    def record(profile, value, extra=None):
        ratio = value / bound
        per_profile[profile] = max(per_profile.get(profile, -np.inf), ratio)
        if ratio > worst["ratio"]:
            worst.update({"ratio": ratio, "profile": profile, "norm": value, **(extra or {})})

    const = np.zeros(n)
    const[0] = 1.0
    record("constant-mode", luxemburg_norm(sym[:1], phi))
    for row in flat_low_mode_ratios(grid, t, phi):
        record("flat-low-modes", row["norm"], {"k": row["k"]})
    streams = np.random.SeedSequence(seed).spawn(trials)
    profiles = ("rank-one", "flat", "geometric")
    for i, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        profile = profiles[i % 3]
        T = _random_s1_operator(rng, n, profile)
        sv = np.linalg.svd(sym[:, None] * T, compute_uv=False)
        record(profile, luxemburg_norm(np.sort(sv)[::-1], phi))
    notes = {
        "bound_factor": bound,
        "worst_ratio": worst["ratio"],
        "per_profile": per_profile,
        "trials": trials,
    }
    if worst["ratio"] <= 1 + 1e-10:
        return Verdict.holds(margin=1 - worst["ratio"], **notes)
    return Verdict.fails(dict(worst), **notes)


def heat_kernel_lp_norm(t: float, p: float, d: int = 2, samples: int = 4096) -> float:
    """``L^p`` norm of the commutative heat kernel (normalized measure).

    The kernel is a product of one-dimensional theta series, so the norm is
    the d-th power of a one-dimensional norm, computed by sampling.
    """
    nmax = int(np.ceil(np.sqrt(80.0 / (4 * np.pi**2 * t)))) + 1
    n = np.arange(-nmax, nmax + 1)
    x = np.arange(samples) / samples
    k1 = np.exp(-t * 4 * np.pi**2 * n**2) @ np.cos(2 * np.pi * np.outer(n, x))
    one_d = float(np.mean(np.abs(k1) ** p)) ** (1.0 / p)
    return one_d**d


def heat_scaling_fit(grid: LatticeGrid, p: float, ts: Sequence[float]) -> dict:
    """Log-log slopes of two heat-flow quantities against ``-d(1 - 1/p)/2``.

    ``operator`` is the best ``||exp(-t Delta) T||_{S_p}`` over trace-norm-one
    ``T`` among the rank-one constant-mode projection and flat low-mode
    diagonals; it equals 1 because the constant mode is never damped.
    ``kernel`` is the normalized ``L^1 -> L^p`` norm of the heat kernel.
    """
    phi = Power(p)
    ts = np.asarray(ts, dtype=float)
    rows = []
    for t in ts:
        op = max(r["norm"] for r in flat_low_mode_ratios(grid, float(t), phi))
        rows.append({"t": float(t), "operator": op, "kernel": heat_kernel_lp_norm(float(t), p, grid.d)})
    logt = np.log(ts)
    op_slope = float(np.polyfit(logt, np.log([r["operator"] for r in rows]), 1)[0])
    k_slope = float(np.polyfit(logt, np.log([r["kernel"] for r in rows]), 1)[0])
    return {
        "p": p,
        "d": grid.d,
        "classical_slope": -grid.d * (1 - 1 / p) / 2,
        "operator_slope": op_slope,
        "kernel_slope": k_slope,
        "rows": rows,
    }
