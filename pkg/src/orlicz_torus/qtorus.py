"""Truncated quantum torus.

Elements are finite Fourier tables ``a = sum_n a_n U^n`` over the cube
``|n|_inf <= R`` of ``Z^d``. Monomials multiply by

    U^m U^n = exp(2 pi i phi(m, n)) U^(m+n),   phi(m, n) = sum_{j>k} m_j n_k theta_jk,

which reproduces ``U_j U_k = exp(2 pi i theta_jk) U_k U_j`` for the generators.
The Laplacian is taken with the positive sign, eigenvalue ``4 pi^2 |n|^2`` on
``U^n``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import GridMismatch, InvalidParameter

MAX_DIMENSION = 4
FOUR_PI_SQ = 4.0 * np.pi**2


@dataclass(frozen=True)
class ThetaMatrix:
    """Real skew-symmetric deformation matrix, stored by its strict upper triangle."""

    d: int
    upper: tuple = ()

    def __post_init__(self):
        if self.d < 1:
            raise InvalidParameter("dimension must be >= 1")
        upper = tuple(float(x) for x in self.upper)
        if not upper:
            upper = (0.0,) * (self.d * (self.d - 1) // 2)
        if len(upper) != self.d * (self.d - 1) // 2:
            raise InvalidParameter(f"theta for d={self.d} needs {self.d * (self.d - 1) // 2} entries")
        object.__setattr__(self, "upper", upper)

    @classmethod
    def zero(cls, d):
        return cls(d)

    @cached_property
    def entries(self) -> np.ndarray:
        m = np.zeros((self.d, self.d))
        m[np.triu_indices(self.d, 1)] = self.upper
        m = m - m.T
        m.setflags(write=False)
        return m

    @cached_property
    def lower(self) -> np.ndarray:
        """``tril(theta, -1)`` so that ``phi(m, n) = m @ lower @ n``."""
        low = np.tril(self.entries, -1)
        low.setflags(write=False)
        return low


@dataclass(frozen=True)
class LatticeGrid:
    """The cube ``|n|_inf <= R`` in ``Z^d``, ordered by ``|n|^2`` then lexicographically."""

    d: int
    R: int
    max_dimension: int = field(default=MAX_DIMENSION, compare=False, repr=False)

    def __post_init__(self):
        if self.d < 1 or self.R < 0:
            raise InvalidParameter("need d >= 1 and R >= 0")
        if self.d > self.max_dimension:
            raise InvalidParameter(f"d={self.d} exceeds the configured maximum {self.max_dimension}")

    @property
    def points(self) -> np.ndarray:
        return _grid_points(self.d, self.R)

    @property
    def size(self) -> int:
        return (2 * self.R + 1) ** self.d

    def __len__(self):
        return self.size

    def index(self, n) -> int:
        """Position of lattice point ``n`` in the enumeration, or -1 if outside."""
        n = np.asarray(n, dtype=np.int64)
        if n.shape != (self.d,) or np.any(np.abs(n) > self.R):
            return -1
        return int(_grid_lookup(self.d, self.R)[tuple(n + self.R)])

    def lookup(self, pts: np.ndarray) -> np.ndarray:
        """Vectorised ``index`` over the last axis of ``pts``; -1 outside the cube."""
        pts = np.asarray(pts, dtype=np.int64)
        inside = np.all(np.abs(pts) <= self.R, axis=-1)
        clipped = np.clip(pts, -self.R, self.R) + self.R
        table = _grid_lookup(self.d, self.R)
        idx = table[tuple(np.moveaxis(clipped, -1, 0))]
        return np.where(inside, idx, -1)

    @property
    def norms_sq(self) -> np.ndarray:
        return _grid_norms_sq(self.d, self.R)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Laplacian eigenvalues ``4 pi^2 |n|^2`` in grid order (already sorted)."""
        return FOUR_PI_SQ * self.norms_sq

    def sobolev_weights(self, s: float) -> np.ndarray:
        return np.power(1.0 + self.eigenvalues, s / 2.0)

    def padded(self, pad: Optional[int] = None) -> "LatticeGrid":
        return LatticeGrid(self.d, self.R + (self.R if pad is None else pad), self.max_dimension)


@lru_cache(maxsize=64)
def _grid_points(d, R):
    rng = range(-R, R + 1)
    pts = np.array(list(itertools.product(rng, repeat=d)), dtype=np.int64).reshape(-1, d)
    # lexsort keys are read last-to-first: primary |n|^2, then coordinates in order
    keys = [pts[:, j] for j in range(d - 1, -1, -1)] + [np.sum(pts**2, axis=1)]
    pts = pts[np.lexsort(keys)]
    pts.setflags(write=False)
    return pts


@lru_cache(maxsize=64)
def _grid_lookup(d, R):
    table = np.full((2 * R + 1,) * d, -1, dtype=np.int64)
    pts = _grid_points(d, R)
    table[tuple((pts + R).T)] = np.arange(len(pts))
    table.setflags(write=False)
    return table


@lru_cache(maxsize=64)
def _grid_norms_sq(d, R):
    out = np.sum(_grid_points(d, R) ** 2, axis=1).astype(float)
    out.setflags(write=False)
    return out


def twisted_phase(m, n, theta: ThetaMatrix) -> float:
    """Phase ``phi(m, n)`` in turns with ``U^m U^n = exp(2 pi i phi) U^(m+n)``."""
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    return float(m @ theta.lower @ n)


def laplace_eigenvalue(n) -> float:
    n = np.asarray(n, dtype=float)
    return float(FOUR_PI_SQ * np.dot(n, n))


def sobolev_weight(n, s: float) -> float:
    return float((1.0 + laplace_eigenvalue(n)) ** (s / 2.0))


@dataclass(frozen=True, eq=False)
class TorusElement:
    """Element ``sum_n coeffs[i] U^{n_i}`` of the truncated algebra.

    ``dropped_mass`` records the total ``sum |a_m b_n|`` of product terms that
    fell outside the grid when the element was produced by ``multiply``.
    """

    grid: LatticeGrid
    theta: ThetaMatrix
    coeffs: np.ndarray
    dropped_mass: float = 0.0

    def __post_init__(self):
        if self.theta.d != self.grid.d:
            raise GridMismatch("theta and grid dimensions differ")
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.size,):
            raise InvalidParameter(f"expected {self.grid.size} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # constructors -------------------------------------------------------
    @classmethod
    def zeros(cls, grid, theta):
        return cls(grid, theta, np.zeros(grid.size, dtype=complex))

    @classmethod
    def from_modes(cls, grid, theta, modes: Mapping[Sequence[int], complex]):
        c = np.zeros(grid.size, dtype=complex)
        for n, value in modes.items():
            i = grid.index(n)
            if i < 0:
                raise InvalidParameter(f"mode {tuple(n)} lies outside the grid")
            c[i] += value
        return cls(grid, theta, c)

    @classmethod
    def unit(cls, grid, theta, value=1.0):
        return cls.from_modes(grid, theta, {(0,) * grid.d: value})

    @classmethod
    def monomial(cls, grid, theta, n, value=1.0):
        return cls.from_modes(grid, theta, {tuple(n): value})

    @classmethod
    def random(cls, grid, theta, rng: np.random.Generator, decay: float = 0.0, support: Optional[int] = None):
        """Complex Gaussian coefficients scaled by ``(1 + |n|^2)^(-decay/2)``."""
        c = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        c *= np.power(1.0 + grid.norms_sq, -decay / 2.0)
        if support is not None:
            c[np.max(np.abs(grid.points), axis=1) > support] = 0.0
        return cls(grid, theta, c)

    # basic structure ----------------------------------------------------
    def coefficient(self, n) -> complex:
        i = self.grid.index(n)
        return complex(self.coeffs[i]) if i >= 0 else 0j

    def with_coeffs(self, coeffs, dropped_mass=0.0):
        return TorusElement(self.grid, self.theta, coeffs, dropped_mass)

    def __add__(self, other):
        _check_same(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, TorusElement):
            return multiply(self, scalar)
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return multiply(self, other)

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)

    def extend(self, grid: LatticeGrid) -> "TorusElement":
        """Same element viewed on a grid that contains its support."""
        if grid.d != self.grid.d:
            raise GridMismatch("dimension mismatch")
        idx = grid.lookup(self.grid.points)
        nz = self.coeffs != 0
        if np.any(idx[nz] < 0):
            raise GridMismatch("support does not fit in the target grid")
        c = np.zeros(grid.size, dtype=complex)
        c[idx[idx >= 0]] = self.coeffs[idx >= 0]
        return TorusElement(grid, self.theta, c, self.dropped_mass)

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def is_selfadjoint(self, tol=1e-12) -> bool:
        return bool(np.max(np.abs(adjoint(self).coeffs - self.coeffs), initial=0.0) <= tol)

    def to_json(self) -> dict:
        upper = list(self.theta.upper)
        rows = []
        for n, c in zip(self.grid.points, self.coeffs):
            if c != 0:
                rows.append([int(x) for x in n] + [float(c.real), float(c.imag)])
        return {"d": self.grid.d, "R": self.grid.R, "theta": upper, "coeffs": rows}

    @classmethod
    def from_json(cls, obj) -> "TorusElement":
        if isinstance(obj, str):
            obj = json.loads(obj)
        d, R = int(obj["d"]), int(obj["R"])
        grid = LatticeGrid(d, R)
        theta = ThetaMatrix(d, tuple(obj.get("theta", ())))
        modes = {}
        for row in obj.get("coeffs", []):
            if len(row) != d + 2:
                raise InvalidParameter(f"coefficient row {row!r} should have {d + 2} entries")
            n = tuple(int(x) for x in row[:d])
            modes[n] = modes.get(n, 0) + complex(row[d], row[d + 1])
        return cls.from_modes(grid, theta, modes)

    def __eq__(self, other):
        if not isinstance(other, TorusElement):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.theta == other.theta
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None


def _check_same(a: TorusElement, b: TorusElement):
    if a.grid != b.grid or a.theta != b.theta:
        raise GridMismatch("elements live on different grids or deformations")


def _phase_table(grid: LatticeGrid, theta: ThetaMatrix) -> np.ndarray:
    pts = grid.points.astype(float)
    return pts @ theta.lower @ pts.T


def multiply(a: TorusElement, b: TorusElement) -> TorusElement:
    """Truncated twisted convolution; mass of products leaving the grid is reported."""
    _check_same(a, b)
    grid = a.grid
    ia = np.nonzero(a.coeffs)[0]
    ib = np.nonzero(b.coeffs)[0]
    out = np.zeros(grid.size, dtype=complex)
    if ia.size == 0 or ib.size == 0:
        return a.with_coeffs(out)
    pts = grid.points
    target = grid.lookup(pts[ia][:, None, :] + pts[ib][None, :, :])
    phase = pts[ia].astype(float) @ a.theta.lower @ pts[ib].T.astype(float)
    terms = np.outer(a.coeffs[ia], b.coeffs[ib]) * np.exp(2j * np.pi * phase)
    keep = target >= 0
    dropped = float(np.sum(np.abs(np.outer(a.coeffs[ia], b.coeffs[ib]))[~keep]))
    tgt = target[keep]
    vals = terms[keep]
    out = np.bincount(tgt, weights=vals.real, minlength=grid.size) + 1j * np.bincount(
        tgt, weights=vals.imag, minlength=grid.size
    )
    return a.with_coeffs(out, dropped_mass=dropped)


def adjoint(a: TorusElement) -> TorusElement:
    """``(U^n)^* = exp(2 pi i n.L.n) U^(-n)`` extended antilinearly."""
    grid = a.grid
    pts = grid.points
    neg = grid.lookup(-pts)
    self_phase = np.einsum("ij,jk,ik->i", pts.astype(float), a.theta.lower, pts.astype(float))
    out = np.zeros(grid.size, dtype=complex)
    out[neg] = np.conj(a.coeffs) * np.exp(2j * np.pi * self_phase)
    return a.with_coeffs(out)


def trace(a: TorusElement) -> complex:
    """Canonical trace: the coefficient of ``U^0`` (index 0 of the grid)."""
    return complex(a.coeffs[0])


@dataclass(frozen=True, eq=False)
class MatrixRep:
    """Dense operator on span{U^n : n in grid} in the grid's enumeration order."""

    grid: LatticeGrid
    entries: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        n = self.grid.size
        if m.shape != (n, n):
            raise InvalidParameter(f"expected a {n}x{n} matrix, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidParameter("matrix entries must be finite")
        if self.hermitian and np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise InvalidParameter("matrix flagged hermitian is not")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def H(self) -> "MatrixRep":
        return MatrixRep(self.grid, self.entries.conj().T, self.hermitian)

    def __matmul__(self, other):
        if isinstance(other, MatrixRep):
            if other.grid != self.grid:
                raise GridMismatch("operators act on different grids")
            return MatrixRep(self.grid, self.entries @ other.entries)
        return self.entries @ other

    @classmethod
    def diagonal(cls, grid, values):
        values = np.asarray(values)
        return cls(grid, np.diag(values.astype(complex)), hermitian=bool(np.all(np.isreal(values))))

    def to_json(self) -> dict:
        return {
            "d": self.grid.d,
            "R": self.grid.R,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj) -> "MatrixRep":
        if isinstance(obj, str):
            obj = json.loads(obj)
        grid = LatticeGrid(int(obj["d"]), int(obj["R"]))
        return cls(grid, np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float))


def as_array(A) -> np.ndarray:
    return A.entries if isinstance(A, MatrixRep) else np.asarray(A)


def matrix_rep(a: TorusElement, grid: Optional[LatticeGrid] = None) -> MatrixRep:
    """Left multiplication ``M(a)[m, n] = a_{m-n} exp(2 pi i phi(m-n, n))``.

    With ``grid`` given, the matrix is built on that (usually padded) grid,
    which must contain the support of ``a``.
    """
    if grid is not None and grid != a.grid:
        a = a.extend(grid)
    grid = a.grid
    pts = grid.points
    diff = pts[:, None, :] - pts[None, :, :]
    k = grid.lookup(diff)
    phase = np.einsum("mnj,jk,nk->mn", diff.astype(float), a.theta.lower, pts.astype(float))
    vals = np.where(k >= 0, a.coeffs[np.maximum(k, 0)], 0.0)
    return MatrixRep(grid, vals * np.exp(2j * np.pi * phase))


def element_dump(a: TorusElement) -> str:
    return json.dumps(a.to_json())
