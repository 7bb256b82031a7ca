"""Factorization of the truncated Sobolev embedding and summing-norm estimators.

The embedding ``W^{s,2} -> L^2`` is written in the orthonormal basis
``U^n / w_s(n)`` of the Sobolev space. There it is the diagonal operator with
symbol ``mu_s(n) = (1 + lam_n)^(-s/2)``, and it factors as the isometry
``x -> w_s * x_hat`` followed by that diagonal multiplier.

Summing norms are only estimated from below: each finite vector family gives
``(sum ||T x_i||^p)^(1/p) / weak_p(x)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import CapExceeded, FamilyTooLarge, InvalidParameter, MembershipFailed
from .qtorus import LatticeGrid, as_array
from .spectral import MAX_GRID, ls_spectrum, resolved_rank
from .verdict import FAILS, HOLDS, Verdict
from .young import TailEnvelope, YoungFunction, _tail_integral, luxemburg_norm, series_membership

MAX_PATTERNS = 2**16
SAMPLED_PATTERNS = 2**12


@dataclass(frozen=True, eq=False)
class VectorFamily:
    """Finite family in the truncated Sobolev space.

    ``vectors`` holds Fourier coefficients (one row per vector); the Hilbert
    norm is ``||weights * x_hat||``. With the default unit weights the rows are
    already Hilbert coordinates.
    """

    vectors: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vectors))
        if v.size == 0 or v.shape[0] == 0:
            raise InvalidParameter("a vector family must be nonempty")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter("family has non-finite entries")
        if np.any(np.linalg.norm(v, axis=1) == 0):
            raise InvalidParameter("family vectors must be nonzero")
        object.__setattr__(self, "vectors", v)

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def coords(self) -> np.ndarray:
        """Coordinates in an orthonormal basis of the domain."""
        if self.weights is None:
            return self.vectors
        return self.vectors * np.asarray(self.weights)[None, :]

    @property
    def is_real(self) -> bool:
        return bool(np.isrealobj(self.vectors) or np.all(np.imag(self.vectors) == 0))


def _weak2(Y):
    return float(np.linalg.svd(Y, compute_uv=False)[0])


def weak_l1_bounds(fam: VectorFamily, phases: int = 8, max_patterns: int = MAX_PATTERNS, seed: int = 0,
                   allow_sampling: bool = True) -> dict:
    """Bracket ``sup_{||f|| <= 1} sum_i |f(x_i)|``.

    The lower value maximizes ``||sum eps_i x_i||`` over sign patterns (real
    families) or ``phases``-point phase patterns (complex families), then
    polishes the best pattern by alternating maximization. The upper value is
    certified for the complex field: ``sqrt(k) * weak_2`` always, plus
    ``best / cos(pi / phases)`` for an exhaustive complex search or
    ``sqrt(2) * best`` for an exhaustive real one.
    """
    Y = np.asarray(fam.coords)
    k = Y.shape[0]
    real = fam.is_real
    if real:
        Y = Y.real
    alphabet = np.array([1.0, -1.0]) if real else np.exp(2j * np.pi * np.arange(phases) / phases)
    n_patterns = len(alphabet) ** (k - 1)
    exhaustive = n_patterns <= max_patterns
    if not exhaustive and not allow_sampling:
        raise FamilyTooLarge(f"{n_patterns} patterns exceed the exhaustive budget {max_patterns}")
    if k == 1:
        idx = np.zeros((1, 0), dtype=int)
    elif exhaustive:
        idx = np.indices((len(alphabet),) * (k - 1)).reshape(k - 1, -1).T
    else:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, len(alphabet), size=(min(max_patterns, SAMPLED_PATTERNS), k - 1))
    patterns = np.hstack([np.ones((idx.shape[0], 1)), alphabet[idx].reshape(idx.shape[0], k - 1)])
    # ||eps @ Y||^2 = eps G eps^H with the k x k Gram matrix G = Y Y^H
    G = Y @ Y.conj().T
    sq = np.real(np.sum((patterns @ G) * patterns.conj(), axis=1))
    j = int(np.argmax(sq))
    best_val, best_eps = math.sqrt(max(float(sq[j]), 0.0)), patterns[j]
    lower = best_val
    z = best_eps @ Y
    for _ in range(50):
        nz = np.linalg.norm(z)
        if nz == 0:
            break
        inner = Y.conj() @ z / nz if not real else Y @ z / nz
        val = float(np.sum(np.abs(inner)))
        if val <= lower * (1 + 1e-15):
            lower = max(lower, val)
            break
        lower = val
        eps = np.sign(inner) if real else np.exp(1j * np.angle(inner))
        z = eps @ Y
    upper = math.sqrt(k) * _weak2(Y)
    if exhaustive:
        upper = min(upper, best_val * (math.sqrt(2.0) if real else 1.0 / math.cos(math.pi / phases)))
    return {
        "lower": lower,
        "upper": max(upper, lower),
        "exhaustive": exhaustive,
        "patterns": int(patterns.shape[0]),
        "field": "real" if real else "complex",
    }


def weak_lp_norm(fam: VectorFamily, p: float, **kwargs) -> float:
    """``(sup_{||f|| <= 1} sum_i |f(x_i)|^p)^(1/p)`` for p = 1 or 2.

    p = 2 is exact (square root of the top eigenvalue of the frame operator).
    p = 1 returns the pattern-search lower value of :func:`weak_l1_bounds`.
    """
    if p == 2:
        return _weak2(fam.coords)
    if p == 1:
        return weak_l1_bounds(fam, **kwargs)["lower"]
    raise InvalidParameter("weak norms are implemented for p = 1 and p = 2")


def pi_summing_lower(symbol, fam: VectorFamily, p: float, certified: bool = True, **kwargs) -> float:
    """Lower estimate of the p-summing norm of the diagonal map ``diag(symbol)``.

    With ``certified`` (default) the p = 1 ratio uses the certified upper
    bound of the weak norm, so the result never exceeds the true summing norm.
    """
    Y = fam.coords
    symbol = np.asarray(symbol)
    if symbol.shape != (Y.shape[1],):
        raise InvalidParameter("symbol length does not match the family dimension")
    strong = np.linalg.norm(Y * symbol[None, :], axis=1)
    if p == 2:
        weak = _weak2(Y)
    elif p == 1:
        bounds = weak_l1_bounds(fam, **kwargs)
        weak = bounds["upper"] if certified else bounds["lower"]
    else:
        raise InvalidParameter("p must be 1 or 2")
    return float(np.sum(strong**p) ** (1.0 / p) / weak)


def random_family(rng: np.random.Generator, dim: int, k: int, low_modes: Optional[int] = None) -> VectorFamily:
    width = dim if low_modes is None else min(dim, low_modes)
    Y = np.zeros((k, dim), dtype=complex)
    Y[:, :width] = rng.standard_normal((k, width)) + 1j * rng.standard_normal((k, width))
    return VectorFamily(Y)


def best_pi1_lower(symbol, n_families: int = 200, seed: int = 0, n_jobs: int = 1) -> dict:
    """Best certified pi_1 lower bound over the basis family and random families.

    Family ``i`` draws from its own stream ``SeedSequence(seed).spawn(...)[i]``,
    so the result is independent of ``n_jobs``.
    """
    symbol = np.asarray(symbol, dtype=float)
    dim = symbol.size
    basis = VectorFamily(np.eye(dim))
    streams = np.random.SeedSequence(seed).spawn(n_families)

    def one(ss):
        rng = np.random.default_rng(ss)
        k = int(rng.integers(2, 7))
        low = int(rng.choice([k, 2 * k, dim]))
        fam = random_family(rng, dim, k, low_modes=low)
        return pi_summing_lower(symbol, fam, 1)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            values = list(pool.map(one, streams))
    else:
        values = [one(ss) for ss in streams]
    basis_value = pi_summing_lower(symbol, basis, 1)
    all_values = [basis_value] + values
    return {"best": float(max(all_values)), "basis": basis_value, "values": all_values}


def inclusion_constant(phi: YoungFunction, n: int) -> float:
    """Norm of the identity ``S_Phi -> S_1`` on n-dimensional space.

    For fixed support size k, Jensen gives ``sum x_i <= k phi^{-1}(1/k)`` on the
    unit ball, with equality for flat vectors, so the maximum over k is exact.
    """
    k = np.arange(1, n + 1, dtype=float)
    return float(np.max(k * phi.inverse(1.0 / k)))


def luxemburg_norm_with_tail(head, env: TailEnvelope, phi: YoungFunction, rtol: float = 1e-10) -> float:
    """Upper bound for the Luxemburg norm of ``head`` followed by the envelope tail."""
    head = np.asarray(head, dtype=float)
    n0 = head.size + 1
    if env.exponent * phi.small_exponent <= 1:
        return math.inf

    def F(lam):
        scaled = TailEnvelope(env.c / lam, env.exponent, env.start_index)
        body, rem = _tail_integral(scaled, phi, float(n0 - 1) if n0 > 1 else 1.0)
        first = 0.0 if n0 > 1 else float(phi._raw(np.asarray(env.c / lam)))
        return float(np.sum(phi._raw(head / lam))) + body + rem + first

    lo = luxemburg_norm(head, phi)
    hi = max(lo, 1e-300)
    while F(hi) > 1.0:
        lo, hi = hi, hi * 2.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if F(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass
class FactorizationReport:
    s: float
    phi: str
    d: int
    R: int
    ls_orlicz_norm: float
    ls_orlicz_norm_tail_bound: float
    iso_norm: float
    inclusion_constant: float
    pi2_exact: float
    pi1_lower: float
    upper_bound: float
    reconstruction_error: float
    literal_composition_error: float
    membership: dict
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pi1_lower > self.upper_bound + 1e-8:
            raise AssertionError("pi_1 lower bound exceeds the factorization upper bound")

    def to_json(self) -> dict:
        return asdict(self)


def factorize(grid: LatticeGrid, s: float, phi: YoungFunction, seed: int = 0, n_vectors: int = 100,
              n_families: int = 200, n_jobs: int = 1) -> FactorizationReport:
    """Realize the embedding as multiplier composed with the Sobolev isometry and measure it."""
    ls_spec = ls_spectrum(grid, s)
    n_valid = resolved_rank(grid)
    membership = series_membership(ls_spec.tail, phi, ls_spec.values[:n_valid])
    if membership.status != HOLDS:
        raise MembershipFailed(
            f"series of {phi.descriptor} along mu_n(L_s) is not certified convergent "
            f"(d={grid.d}, s={s}): {membership.status}",
            verdict=membership,
        )
    weights = grid.sobolev_weights(s)
    symbol = 1.0 / weights
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_vectors, grid.size)) + 1j * rng.standard_normal((n_vectors, grid.size))
    iso = X * weights[None, :]
    recon = iso * symbol[None, :]
    recon_err = float(np.max(np.abs(recon - X)))
    literal = X * symbol[None, :]  # T_s x = L_s x taken literally
    literal_err = float(np.max(np.abs(literal - X)))

    ls_norm = luxemburg_norm(ls_spec.values, phi)
    tail_bound = luxemburg_norm_with_tail(ls_spec.values[:n_valid], ls_spec.tail, phi)
    c_phi = inclusion_constant(phi, grid.size)
    pi1 = best_pi1_lower(symbol, n_families=n_families, seed=seed, n_jobs=n_jobs)
    return FactorizationReport(
        s=float(s),
        phi=phi.descriptor,
        d=grid.d,
        R=grid.R,
        ls_orlicz_norm=ls_norm,
        ls_orlicz_norm_tail_bound=tail_bound,
        iso_norm=1.0,
        inclusion_constant=c_phi,
        pi2_exact=float(np.linalg.norm(symbol)),
        pi1_lower=pi1["best"],
        upper_bound=c_phi * ls_norm,
        reconstruction_error=recon_err,
        literal_composition_error=literal_err,
        membership=membership.to_dict(),
        notes={
            "composition": "isometry x -> w_s * x_hat followed by the multiplier 1/w_s; "
                           "reading T_s(x) = L_s x literally returns L_s x instead of x "
                           "(see literal_composition_error)",
            "pi1_lower": "max over the basis family and seeded random families, certified",
        },
    )


def cb_amplification_norm(A, k: int, cap: int = MAX_GRID) -> float:
    """Operator norm of ``A (x) I_k`` acting by left multiplication."""
    m = as_array(A)
    if not 1 <= k <= 4:
        raise InvalidParameter("amplification level must lie in 1..4")
    if m.shape[0] * k > cap:
        raise CapExceeded(f"amplified size {m.shape[0] * k} exceeds cap {cap}")
    amp = np.kron(m, np.eye(k))
    return float(np.linalg.svd(amp, compute_uv=False)[0])


@dataclass
class OptimalityScan:
    s: float
    phi: str
    d: int
    rows: list
    verdict: str
    membership: Verdict

    def to_csv(self) -> str:
        lines = ["R,norm,verdict"]
        lines += [f"{R},{norm:.15g},{self.verdict}" for R, norm in self.rows]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "phi": self.phi,
            "d": self.d,
            "rows": [[R, norm] for R, norm in self.rows],
            "verdict": self.verdict,
            "membership": self.membership.to_dict(),
        }


def optimality_scan(s: float, phi: YoungFunction, radii: Sequence[int], d: int = 2,
                    plateau_tol: float = 0.02) -> OptimalityScan:
    """Truncated ``||L_s||_{S_Phi}`` along increasing radii.

    ``Diverges`` needs every consecutive relative increase above
    ``plateau_tol`` and a certified divergent series; ``Converges`` needs the
    last increase within ``plateau_tol`` and a certified finite series.
    """
    radii = [int(R) for R in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidParameter("radii must be strictly increasing")
    rows = []
    for R in radii:
        grid = LatticeGrid(d, R)
        rows.append((R, luxemburg_norm(ls_spectrum(grid, s).values, phi)))
    grid = LatticeGrid(d, radii[-1])
    ls_spec = ls_spectrum(grid, s)
    membership = series_membership(ls_spec.tail, phi, ls_spec.values[: resolved_rank(grid)])
    norms = np.array([n for _, n in rows])
    steps = np.diff(norms) / norms[:-1] if norms.size > 1 else np.array([])
    if membership.status == FAILS and steps.size and np.all(steps > plateau_tol):
        verdict = "Diverges"
    elif membership.status == HOLDS and steps.size and steps[-1] <= plateau_tol:
        verdict = "Converges"
    else:
        verdict = "Inconclusive"
    return OptimalityScan(float(s), phi.descriptor, d, rows, verdict, membership)
