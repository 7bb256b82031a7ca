"""Lip-norms, lower bounds for the spectral distance, and the transport inequality.

The Lip-norm is ``L(a) = || [Delta^(1/2), a] ||`` with ``Delta^(1/2)`` the
diagonal ``omega_n = 2 pi |n|``. States are density operators ``rho`` on the
truncated GNS space normalized by ``Tr(rho) / N = 1``, and pairings use the
same normalized trace ``tau(a X) = Tr(M(a) X) / N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .embed import inclusion_constant
from .errors import EmptyPool, GridMismatch, InvalidParameter, NotPSD, NotSelfAdjoint
from .qtorus import LatticeGrid, MatrixRep, ThetaMatrix, TorusElement, matrix_rep
from .spectral import orlicz_schatten_norm, singular_values
from .verdict import Verdict
from .young import YoungFunction

DENSITY_TOL = 1e-10
CHAIN_TOL = 1e-8
DEFAULT_RANDOM = 100
RANDOM_SUPPORT = 2


@dataclass(frozen=True, eq=False)
class DensityOperator:
    grid: LatticeGrid
    matrix: MatrixRep

    def __post_init__(self):
        A = self.matrix.entries
        if self.matrix.grid != self.grid:
            raise GridMismatch("matrix lives on a different grid")
        if np.max(np.abs(A - A.conj().T), initial=0.0) > DENSITY_TOL:
            raise NotSelfAdjoint("density operator must be hermitian")
        lo = float(np.linalg.eigvalsh(0.5 * (A + A.conj().T))[0])
        if lo < -DENSITY_TOL:
            raise NotPSD(f"density operator has negative eigenvalue {lo:.3e}")
        tr = float(np.trace(A).real) / self.grid.size
        if abs(tr - 1.0) > DENSITY_TOL:
            raise InvalidParameter(f"normalized trace is {tr:.12g}, expected 1")

    @classmethod
    def from_vectors(cls, grid: LatticeGrid, vecs, weights=None) -> "DensityOperator":
        """``N * sum_i w_i v_i v_i^* / sum_i w_i ||v_i||^2``."""
        V = np.atleast_2d(np.asarray(vecs, dtype=complex))
        w = np.ones(V.shape[0]) if weights is None else np.asarray(weights, dtype=float)
        A = (V.T * w) @ V.conj()
        A = 0.5 * (A + A.conj().T)
        A *= grid.size / np.trace(A).real
        return cls(grid, MatrixRep(grid, A, hermitian=True))

    @classmethod
    def random(cls, grid: LatticeGrid, rng: np.random.Generator, rank: Optional[int] = None) -> "DensityOperator":
        r = int(rng.integers(1, grid.size + 1)) if rank is None else rank
        V = rng.standard_normal((r, grid.size)) + 1j * rng.standard_normal((r, grid.size))
        return cls.from_vectors(grid, V)

    def to_json(self) -> dict:
        return self.matrix.to_json()


@dataclass(frozen=True)
class LipReport:
    K_hat: float
    pool_size: int
    argmax: int = -1

    def to_json(self) -> dict:
        return {"K_hat": self.K_hat, "pool_size": self.pool_size, "surrogate": "max ||a||_op / L(a) over pool"}


def _omega(grid: LatticeGrid) -> np.ndarray:
    return 2 * np.pi * np.sqrt(grid.norms_sq)


def _block(a: TorusElement, pad: int) -> LatticeGrid:
    return a.grid.padded(pad) if pad else a.grid


def _padded_matrix(a: TorusElement, pad: int) -> np.ndarray:
    return matrix_rep(a, _block(a, pad)).entries


def lip_norm(a: TorusElement, pad: int = 0) -> float:
    """Top singular value of ``[Omega, M(a)]`` compressed to the grid.

    Entries ``C[m, n] = M(a)[m, n] (omega_m - omega_n)`` depend only on
    ``m, n``, so the interior block of a padded assembly is the assembly on
    the grid itself. ``pad > 0`` enlarges the block, which can only raise
    the value toward the untruncated norm.
    """
    M = _padded_matrix(a, pad)
    w = _omega(_block(a, pad))
    C = w[:, None] * M - M * w[None, :]
    if not np.any(C):
        return 0.0
    return float(singular_values(C).values[0])


def _trace_zero(a: TorusElement) -> TorusElement:
    c = a.coeffs.copy()
    c[0] = 0.0
    return a.with_coeffs(c)


class CandidatePool:
    """Trace-zero test elements with cached Lip-norms and operator norms.

    Elements with a vanishing Lip-norm are dropped. Operator norms are taken
    on the same block as the Lip-norms.
    """

    def __init__(self, elements: Sequence[TorusElement], pad: int = 0):
        els = [_trace_zero(a) for a in elements]
        if els:
            grid = els[0].grid
            if any(a.grid != grid for a in els):
                raise GridMismatch("pool elements live on different grids")
        self.pad = pad
        self.elements, self.lip, self.op = [], [], []
        for a in els:
            L = lip_norm(a, pad)
            if L <= 1e-14:
                continue
            self.elements.append(a)
            self.lip.append(L)
            self.op.append(float(singular_values(_padded_matrix(a, pad)).values[0]))
        self.lip = np.asarray(self.lip)
        self.op = np.asarray(self.op)

    def __len__(self):
        return len(self.elements)

    @property
    def grid(self) -> LatticeGrid:
        if not self.elements:
            raise EmptyPool("pool is empty")
        return self.elements[0].grid

    @property
    def coeff_matrix(self) -> np.ndarray:
        return np.array([a.coeffs for a in self.elements])

    def extended(self, extra: Sequence[TorusElement]) -> "CandidatePool":
        pool = CandidatePool([], self.pad)
        more = CandidatePool(extra, self.pad)
        pool.elements = self.elements + more.elements
        pool.lip = np.concatenate([self.lip, more.lip])
        pool.op = np.concatenate([self.op, more.op])
        return pool


def default_pool(grid: LatticeGrid, theta: ThetaMatrix, seed: int = 0, n_random: int = DEFAULT_RANDOM,
                 pad: int = 0) -> CandidatePool:
    """All modes ``U^n`` (n != 0) plus seeded random trace-zero elements.

    The random elements are drawn on a fixed small grid so the same
    elements appear for every working radius.
    """
    modes = [TorusElement.monomial(grid, theta, n) for n in grid.points[1:]]
    small = LatticeGrid(grid.d, min(RANDOM_SUPPORT, grid.R), grid.max_dimension)
    streams = np.random.SeedSequence(seed).spawn(n_random)
    rand = [TorusElement.random(small, theta, np.random.default_rng(ss), decay=2.0).extend(grid) for ss in streams]
    return CandidatePool(modes + rand, pad)


def _as_pool(pool) -> CandidatePool:
    return pool if isinstance(pool, CandidatePool) else CandidatePool(list(pool))


def lip_constant_estimate(grid: LatticeGrid, pool) -> LipReport:
    """``K_hat = max ||M(a)||_op / L(a)`` over the pool."""
    pool = _as_pool(pool)
    if len(pool) == 0:
        raise EmptyPool("no candidate with positive Lip-norm")
    if pool.grid != grid:
        raise GridMismatch("pool lives on a different grid")
    ratios = pool.op / pool.lip
    i = int(np.argmax(ratios))
    return LipReport(float(ratios[i]), len(pool), i)


def pairing_functional(X: np.ndarray, grid: LatticeGrid, theta: ThetaMatrix) -> np.ndarray:
    """``g_k = Tr(M(U^k) X)``, so that ``Tr(M(a) X) = sum_k a_k g_k``."""
    pts = grid.points
    diff = pts[:, None, :] - pts[None, :, :]
    k = grid.lookup(diff)
    phase = np.exp(2j * np.pi * np.einsum("mnj,jk,nk->mn", diff.astype(float), theta.lower, pts.astype(float)))
    w = (phase * X.T)[k >= 0]
    kk = k[k >= 0]
    return np.bincount(kk, weights=w.real, minlength=grid.size) + 1j * np.bincount(
        kk, weights=w.imag, minlength=grid.size
    )


def _data_candidates(X: np.ndarray, grid, theta) -> list:
    """Elements aligned with ``X`` and with its extreme eigenvector pair."""
    vals, vecs = np.linalg.eigh(0.5 * (X + X.conj().T))
    hi, lo = vecs[:, -1], vecs[:, 0]
    pair = np.outer(hi, hi.conj()) - np.outer(lo, lo.conj())
    out = []
    for Y in (X, pair):
        g = pairing_functional(Y, grid, theta)
        if np.any(np.abs(g[1:]) > 1e-14):
            out.append(TorusElement(grid, theta, g.conj()))
    return out


def _check_pair(rho: DensityOperator, sigma: DensityOperator):
    if rho.grid != sigma.grid:
        raise GridMismatch("states live on different grids")


def _pairings(pool: CandidatePool, X: np.ndarray) -> np.ndarray:
    theta = pool.elements[0].theta
    g = pairing_functional(X, pool.grid, theta)
    return np.abs(pool.coeff_matrix @ g) / pool.grid.size


def spectral_distance_lower(rho: DensityOperator, sigma: DensityOperator, pool, data_adapted: bool = True) -> float:
    """Largest ``|tau(a (rho - sigma))| / L(a)`` over the candidates."""
    _check_pair(rho, sigma)
    pool = _as_pool(pool)
    if len(pool) == 0:
        raise EmptyPool("pool is empty")
    if pool.grid != rho.grid:
        raise GridMismatch("pool and states live on different grids")
    X = rho.matrix.entries - sigma.matrix.entries
    if data_adapted:
        pool = pool.extended(_data_candidates(X, pool.grid, pool.elements[0].theta))
    return float(np.max(_pairings(pool, X) / pool.lip))


def transport_check(rho: DensityOperator, sigma: DensityOperator, phi: YoungFunction,
                    pool: Union[CandidatePool, Sequence[TorusElement], None] = None,
                    theta: Optional[ThetaMatrix] = None, seed: int = 0) -> Verdict:
    """Check ``d_L(rho, sigma) <= K_hat * c_Phi * ||rho - sigma||_{S_Phi}`` term by term.

    For each candidate ``a`` the chain
    ``|tau(aX)| <= ||a|| ||X/N||_1 <= ||a|| c_Phi ||X/N||_Phi <= K_hat L(a) c_Phi ||X/N||_Phi``
    is verified; ``K_hat`` is taken over the same candidates, which stands in
    for the cb norm of the Lip-norm.
    """
    _check_pair(rho, sigma)
    grid = rho.grid
    if pool is None:
        pool = default_pool(grid, theta if theta is not None else ThetaMatrix.zero(grid.d), seed)
    pool = _as_pool(pool)
    if len(pool) == 0:
        raise EmptyPool("pool is empty")
    X = rho.matrix.entries - sigma.matrix.entries
    pool = pool.extended(_data_candidates(X, grid, pool.elements[0].theta))
    N = grid.size
    K_hat = float(np.max(pool.op / pool.lip))
    c_phi = inclusion_constant(phi, N)
    s1 = float(np.sum(singular_values(X).values)) / N
    sphi = orlicz_schatten_norm(X, phi) / N

    t1 = _pairings(pool, X)
    t2 = pool.op * s1
    t3 = pool.op * c_phi * sphi
    t4 = K_hat * pool.lip * c_phi * sphi
    slack = np.minimum.reduce([t2 - t1, t3 - t2, t4 - t3])
    worst = int(np.argmin(slack))
    d_lower = float(np.max(t1 / pool.lip))
    bound = K_hat * c_phi * sphi
    notes = {
        "d_lower": d_lower,
        "bound": bound,
        "K_hat": K_hat,
        "c_phi": c_phi,
        "s1_norm": s1,
        "sphi_norm": sphi,
        "candidates": len(pool),
        "min_chain_slack": float(slack[worst]),
        "cb_surrogate": "K_hat",
    }
    if slack[worst] < -CHAIN_TOL or d_lower > bound + CHAIN_TOL:
        witness = {
            "candidate": worst,
            "terms": [float(t1[worst]), float(t2[worst]), float(t3[worst]), float(t4[worst])],
            "element": pool.elements[worst].to_json(),
        }
        return Verdict.fails(witness, **notes)
    return Verdict.holds(margin=bound - d_lower, **notes)

