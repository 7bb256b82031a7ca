"""Singular values, Schatten and Orlicz-Schatten norms, Weyl counting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gamma

from .errors import InvalidParameter, NoConvergence, TruncationTooSmall
from .qtorus import FOUR_PI_SQ, LatticeGrid, MatrixRep, as_array
from .young import TailEnvelope, YoungFunction, luxemburg_norm

MAX_GRID = 4096


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    values: np.ndarray
    tail: Optional[TailEnvelope] = None

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InvalidParameter("singular values must be a finite nonnegative vector")
        if np.any(np.diff(v) > 0):
            raise InvalidParameter("singular values must be sorted nonincreasing")
        if self.tail is not None:
            TailEnvelope(self.tail.c, self.tail.exponent, self.tail.start_index, values=tuple(v))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class WeylFit:
    d: int
    C_hat: float
    fit_window: tuple
    residual: float

    def to_json(self) -> dict:
        return {"d": self.d, "C_hat": self.C_hat, "window": list(self.fit_window), "residual": self.residual}


def singular_values(A) -> SingularSpectrum:
    """All singular values of ``A``, largest first (LAPACK divide and conquer)."""
    m = as_array(A)
    if not np.all(np.isfinite(m)):
        raise InvalidParameter("matrix has non-finite entries")
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"SVD did not converge: {exc}") from exc
    return SingularSpectrum(np.sort(np.maximum(s, 0.0))[::-1])


def _values(mu):
    return mu.values if isinstance(mu, SingularSpectrum) else np.asarray(mu, dtype=float)


def schatten_norm(mu, p: float) -> float:
    if p < 1:
        raise InvalidParameter("Schatten exponent must be >= 1")
    v = _values(mu)
    top = float(np.max(v, initial=0.0))
    if top == 0.0:
        return 0.0
    if math.isinf(p):
        return top
    return top * float(np.sum((v / top) ** p)) ** (1.0 / p)


def operator_norm(A) -> float:
    return float(singular_values(A).values[0]) if as_array(A).size else 0.0


def orlicz_schatten_norm(A, phi: YoungFunction) -> float:
    """Luxemburg norm of the singular values of ``A``."""
    return luxemburg_norm(singular_values(A).values, phi)


def _max_valid_lambda(grid: LatticeGrid) -> float:
    # the ball 4 pi^2 |n|^2 <= lam lies in the cube iff |n| <= R
    return FOUR_PI_SQ * grid.R**2


def counting_function(grid: LatticeGrid, lam: float) -> int:
    """``#{n in grid : 4 pi^2 |n|^2 <= lam}``; the ball must fit in the grid."""
    if lam < 0:
        raise InvalidParameter("lambda must be >= 0")
    if lam > _max_valid_lambda(grid) * (1 + 1e-12):
        raise TruncationTooSmall(f"lambda={lam:.6g} exceeds the largest resolved value {_max_valid_lambda(grid):.6g}")
    bound = lam / FOUR_PI_SQ * (1 + 1e-12)
    return int(np.count_nonzero(grid.norms_sq <= bound))


def weyl_constant(d: int) -> float:
    """Asymptotic ``N(lam) / lam^(d/2)``: unit-ball volume over ``(2 pi)^d``."""
    return math.pi ** (d / 2) / gamma(d / 2 + 1) / (2 * math.pi) ** d


def weyl_fit(grid: LatticeGrid, window_fraction: float = 0.1) -> WeylFit:
    """Least-squares fit ``N(lam) ~ C lam^(d/2)`` over ``[0.1 lam_max, lam_max]``.

    ``N`` is piecewise constant, so the ratio ``N / lam^(d/2)`` attains its
    extremes at the jumps; both one-sided limits at every jump inside the
    window (and the window ends) are used, which makes ``residual`` a bound
    valid for every ``lam`` in the window.
    """
    if grid.R < 10:
        raise TruncationTooSmall(f"Weyl fit needs R >= 10, got R={grid.R}")
    lam_max = _max_valid_lambda(grid)
    lam_min = window_fraction * lam_max
    eig = grid.eigenvalues
    levels, mult = np.unique(eig[eig <= lam_max * (1 + 1e-12)], return_counts=True)
    cum = np.cumsum(mult)
    inside = (levels >= lam_min) & (levels <= lam_max)
    lam = np.concatenate([levels[inside], levels[inside], [lam_min, lam_max]])
    counts = np.concatenate(
        [
            cum[inside],
            cum[inside] - mult[inside],
            [np.sum(eig <= lam_min), np.sum(eig <= lam_max * (1 + 1e-12))],
        ]
    ).astype(float)
    x = lam ** (grid.d / 2.0)
    C_hat = float(np.dot(counts, x) / np.dot(x, x))
    residual = float(np.max(np.abs(counts / x - C_hat)) / C_hat)
    return WeylFit(grid.d, C_hat, (float(lam_min), float(lam_max)), residual)


def ls_values(grid: LatticeGrid, s: float) -> np.ndarray:
    """``(1 + lam_n)^(-s/2)`` in grid order, which is already nonincreasing."""
    if s <= 0:
        raise InvalidParameter("s must be > 0")
    return np.power(1.0 + grid.eigenvalues, -s / 2.0)


def resolved_rank(grid: LatticeGrid) -> int:
    """Number of leading ranks whose values equal those of the untruncated operator."""
    return int(np.count_nonzero(grid.norms_sq <= grid.R**2))


def ls_spectrum(grid: LatticeGrid, s: float, weyl: Optional[WeylFit] = None) -> SingularSpectrum:
    """Singular values of ``(1 + Delta)^(-s/2)`` on the grid with a tail envelope.

    The envelope has exponent ``s/d`` and starts after the resolved ranks. Its
    amplitude is the larger of ``C^(s/d)`` (fitted Weyl constant when
    ``R >= 10``, analytic otherwise) and the smallest value dominating the
    upper three quarters of the resolved ranks.
    """
    vals = ls_values(grid, s)
    if weyl is None:
        C = weyl_fit(grid).C_hat if grid.R >= 10 else weyl_constant(grid.d)
    else:
        C = weyl.C_hat
    r = s / grid.d
    n_valid = resolved_rank(grid)
    env = TailEnvelope.dominating(
        vals, r, c_min=C**r, start_index=n_valid + 1, fit_from=max(1, n_valid // 4)
    )
    return SingularSpectrum(vals, env)


def ls_operator(grid: LatticeGrid, s: float) -> MatrixRep:
    return MatrixRep.diagonal(grid, ls_values(grid, s))


def heat_bound_factor(grid: LatticeGrid, t: float, phi: YoungFunction) -> float:
    """``max_n exp(-t lam_(n)) / phi^{-1}(n)`` over the ranks of the grid."""
    if t <= 0:
        raise InvalidParameter("t must be > 0")
    ranks = np.arange(1, grid.size + 1, dtype=float)
    return float(np.max(np.exp(-t * grid.eigenvalues) / phi.inverse(ranks)))


def export_csv(values, path=None) -> str:
    lines = ["rank,value"] + [f"{i},{v:.15g}" for i, v in enumerate(_values(values), start=1)]
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
