"""States, ensembles and entropic functionals.

All entropies are reported in bits. Operators may be subnormalized
(``0 <= Tr A <= 1``); for those both extensions of the von Neumann entropy
are available, ``S(A) = -Tr A log A`` and ``H(A) = S(A) + Tr A log Tr A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

LN2 = np.log(2.0)

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
SUPPORT_CUTOFF = 1e-12
ZERO_EIG = 1e-14


class InvalidOperatorError(ValueError):
    """Raised when a matrix is not a valid (subnormalized) state."""


class DomainError(ValueError):
    pass


def _check_operator(mat: np.ndarray, *, unit_trace: bool) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidOperatorError(f"expected a square matrix, got shape {mat.shape}")
    if np.linalg.norm(mat - mat.conj().T) > max(HERMITIAN_TOL, 1e-12 * np.linalg.norm(mat)):
        raise InvalidOperatorError("operator is not Hermitian")
    mat = (mat + mat.conj().T) / 2
    if np.linalg.eigvalsh(mat).min(initial=0.0) < -PSD_TOL:
        raise InvalidOperatorError("operator has a negative eigenvalue")
    tr = np.trace(mat).real
    if unit_trace and abs(tr - 1) > TRACE_TOL:
        raise InvalidOperatorError(f"trace is {tr}, expected 1")
    if not unit_trace and tr > 1 + TRACE_TOL:
        raise InvalidOperatorError(f"trace is {tr}, expected at most 1")
    return mat


@dataclass(frozen=True)
class DensityMatrix:
    """A quantum state: Hermitian, positive semidefinite, unit trace."""

    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", _check_operator(self.mat, unit_trace=True))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        vec = np.asarray(vec, dtype=complex).ravel()
        vec = vec / np.linalg.norm(vec)
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)


@dataclass(frozen=True)
class SubnormalizedOperator:
    """Positive operator with trace at most one."""

    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", _check_operator(self.mat, unit_trace=False))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


OperatorLike = Union[DensityMatrix, SubnormalizedOperator, np.ndarray]


def as_matrix(a: OperatorLike) -> np.ndarray:
    if isinstance(a, (DensityMatrix, SubnormalizedOperator)):
        return a.mat
    return np.asarray(a, dtype=complex)


def _validated(a: OperatorLike) -> np.ndarray:
    if isinstance(a, (DensityMatrix, SubnormalizedOperator)):
        return a.mat
    return _check_operator(a, unit_trace=False)


@dataclass(frozen=True)
class Ensemble:
    """Finite ensemble ``{p_i, rho_i}`` of states with equal dimensions."""

    weights: np.ndarray
    states: tuple = field(default_factory=tuple)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        states = tuple(s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in self.states)
        if len(weights) != len(states) or not states:
            raise InvalidOperatorError("weights and states must be non-empty and of equal length")
        if (weights < -1e-12).any() or abs(weights.sum() - 1) > 1e-10:
            raise InvalidOperatorError("weights must be a probability vector")
        if len({s.dim for s in states}) != 1:
            raise InvalidOperatorError("ensemble states must share one dimension")
        object.__setattr__(self, "weights", np.clip(weights, 0.0, None))
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self):
        return len(self.states)

    @classmethod
    def from_vectors(cls, weights, vectors) -> "Ensemble":
        return cls(weights, tuple(DensityMatrix.pure(v) for v in vectors))

    def matrices(self) -> list[np.ndarray]:
        return [s.mat for s in self.states]


@dataclass(frozen=True)
class OutputEnsemble:
    """Ensemble whose elements are images under a quantum operation.

    Elements may have trace below one; ``weights`` remain a probability vector.
    """

    weights: np.ndarray
    elements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        elements = tuple(
            e if isinstance(e, SubnormalizedOperator) else SubnormalizedOperator(e) for e in self.elements
        )
        if len(weights) != len(elements) or not elements:
            raise InvalidOperatorError("weights and elements must be non-empty and of equal length")
        if (weights < -1e-12).any() or abs(weights.sum() - 1) > 1e-10:
            raise InvalidOperatorError("weights must be a probability vector")
        object.__setattr__(self, "weights", np.clip(weights, 0.0, None))
        object.__setattr__(self, "elements", elements)

    def matrices(self) -> list[np.ndarray]:
        return [e.mat for e in self.elements]


def _eigvals(mat: np.ndarray) -> np.ndarray:
    vals = np.linalg.eigvalsh((mat + mat.conj().T) / 2)
    if vals.min(initial=0.0) < -PSD_TOL:
        raise InvalidOperatorError("operator has a negative eigenvalue")
    return np.clip(vals, 0.0, None)


def _xlogx(vals: np.ndarray) -> float:
    vals = vals[vals > ZERO_EIG]
    return float(np.sum(vals * np.log(vals)))


def entropy(a: OperatorLike, kind: str = "H") -> float:
    """Entropy of a (subnormalized) positive operator, in bits.

    ``kind="S"`` gives ``-Tr A log A``; ``kind="H"`` adds ``Tr A log Tr A``
    so that ``H(cA) = c H(A)``. Both agree with the von Neumann entropy on
    states.
    """
    if kind not in ("H", "S"):
        raise ValueError(f"unknown entropy kind {kind!r}")
    vals = _eigvals(_validated(a))
    s = -_xlogx(vals)
    if kind == "H":
        tr = vals.sum()
        if tr > ZERO_EIG:
            s += tr * np.log(tr)
    return max(s / LN2, 0.0)


def relative_entropy(a: OperatorLike, b: OperatorLike) -> float:
    """Extended relative entropy ``Tr(A log A - A log B + B - A)`` in bits.

    Returns ``inf`` when the support of ``a`` is not contained in that of ``b``.
    """
    a = _validated(a)
    b = _validated(b)
    if a.shape != b.shape:
        raise InvalidOperatorError("relative entropy needs operators of equal dimension")
    va, ua = np.linalg.eigh(a)
    vb, ub = np.linalg.eigh(b)
    va = np.clip(va, 0.0, None)
    vb = np.clip(vb, 0.0, None)
    supp_b = vb > SUPPORT_CUTOFF
    # weight of each eigenvector of a outside supp(b)
    overlap = np.abs(ua.conj().T @ ub) ** 2
    leak = overlap[:, ~supp_b].sum(axis=1)
    if np.any((va > SUPPORT_CUTOFF) & (leak > 1e-10)):
        return float("inf")
    log_b = np.zeros_like(vb)
    log_b[supp_b] = np.log(vb[supp_b])
    a_log_b = float(np.sum(va[:, None] * overlap * log_b[None, :]))
    val = _xlogx(va) - a_log_b + vb.sum() - va.sum()
    return max(val / LN2, 0.0)


def average(e: Ensemble) -> DensityMatrix:
    """Barycenter ``sum_i p_i rho_i`` of an ensemble."""
    mats = np.array(e.matrices())
    return DensityMatrix(np.einsum("i,ijk->jk", e.weights, mats))


def chi_quantity(e: Union[Ensemble, OutputEnsemble]) -> float:
    """Holevo quantity ``sum_i p_i D(rho_i || rho_bar)`` in bits."""
    mats = e.matrices()
    bar = np.einsum("i,ijk->jk", e.weights, np.array(mats))
    total = 0.0
    for w, m in zip(e.weights, mats):
        if w > 0:
            total += w * relative_entropy(m, bar)
    return total


def chi_quantity_entropic(e: Union[Ensemble, OutputEnsemble]) -> float:
    """Entropy-difference form of the Holevo quantity, using ``S``.

    Equal to :func:`chi_quantity` whenever all entropies are finite.
    """
    mats = e.matrices()
    bar = np.einsum("i,ijk->jk", e.weights, np.array(mats))
    return entropy(bar, "S") - sum(w * entropy(m, "S") for w, m in zip(e.weights, mats))


def f_correction(x: float) -> float:
    """``f(x) = -2x log x - (1-x) log(1-x)`` in bits, with ``0 log 0 = 0``."""
    if not 0.0 <= x <= 1.0:
        if -1e-12 <= x < 0.0 or 1.0 < x <= 1 + 1e-12:
            x = min(max(x, 0.0), 1.0)
        else:
            raise DomainError(f"f_correction needs x in [0, 1], got {x}")
    val = 0.0
    if x > 0:
        val -= 2 * x * np.log2(x)
    if x < 1:
        val -= (1 - x) * np.log2(1 - x)
    return float(val)


def partial_trace(mat: np.ndarray, dims: Sequence[int], keep: int) -> np.ndarray:
    """Partial trace of a bipartite operator on ``dims[0] x dims[1]``, keeping ``keep``."""
    d0, d1 = dims
    t = mat.reshape(d0, d1, d0, d1)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def random_pure_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random mixed state from the induced (Hilbert-Schmidt for full rank) measure."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
