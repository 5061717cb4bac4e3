"""Channel representations and constructions.

A :class:`Channel` is held as a list of Kraus operators ``W_i`` (shape
``dim_out x dim_in``).  Stinespring isometry and Choi matrix are derived
eagerly at construction so instances can be shared freely.

Environment ordering: the Stinespring isometry is ``V|psi> = sum_i
W_i|psi> (x) |i>_E``, so the complementary map is
``rho -> [Tr W_i rho W_j^*]_{ij}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .qcore import InvalidOperatorError, partial_trace

KRAUS_TOL = 1e-10
CHOI_RANK_CUTOFF = 1e-10


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class StinespringIsometry:
    dim_in: int
    dim_out: int
    dim_env: int
    v: np.ndarray  # (dim_out * dim_env) x dim_in, output index major


@dataclass(frozen=True)
class ChoiMatrix:
    dim_in: int
    dim_out: int
    mat: np.ndarray  # sum_ij |i><j| (x) Phi(|i><j|), input factor first


@dataclass(frozen=True)
class CqStructure:
    """Witness of ``Phi(rho) = sum_k <k|rho|k> sigma_k``."""

    basis: np.ndarray  # columns are the vectors |k>
    sigmas: tuple
    residual: float


class Channel:
    """Completely positive map given by Kraus operators.

    Parameters
    ----------
    kraus : sequence of arrays
        Kraus operators, all of shape ``(dim_out, dim_in)``.
    trace_preserving : bool
        ``False`` marks a trace non-increasing quantum operation.
    name : str, optional
        Free-form label carried into reports.
    """

    def __init__(self, kraus, trace_preserving: bool = True, name: str = ""):
        ops = np.array([np.asarray(k, dtype=complex) for k in kraus])
        if ops.ndim != 3 or len(ops) == 0:
            raise InvalidOperatorError("need a non-empty list of equally shaped Kraus matrices")
        self.kraus = ops
        self.kraus.setflags(write=False)
        self.dim_out, self.dim_in = ops.shape[1:]
        self.trace_preserving = trace_preserving
        self.name = name

        gram = np.einsum("kji,kjl->il", ops.conj(), ops)
        eye = np.eye(self.dim_in)
        if trace_preserving:
            if np.abs(gram - eye).max() > KRAUS_TOL:
                raise InvalidOperatorError("Kraus operators are not trace preserving")
        elif np.linalg.eigvalsh(eye - gram).min() < -KRAUS_TOL:
            raise InvalidOperatorError("Kraus operators are not trace non-increasing")

        self.stinespring = to_stinespring(self)
        self.choi = to_choi(self)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Channel{label} {self.dim_in}->{self.dim_out}, {len(self.kraus)} Kraus>"

    @property
    def num_kraus(self) -> int:
        return len(self.kraus)

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)


def apply(c: Channel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("kij,jl,kml->im", c.kraus, rho, c.kraus.conj())


def apply_many(c: Channel, rhos: np.ndarray) -> np.ndarray:
    """Apply to a stack of operators of shape ``(n, dim_in, dim_in)``."""
    return np.einsum("kij,njl,kml->nim", c.kraus, rhos, c.kraus.conj(), optimize=True)


def apply_vectors(c: Channel, vecs: np.ndarray) -> np.ndarray:
    """Images of rank-one operators ``|v><v|`` for rows ``v`` of ``vecs``."""
    kv = np.einsum("kij,nj->nki", c.kraus, vecs)
    return np.einsum("nki,nkj->nij", kv, kv.conj())


def to_stinespring(c: Channel) -> StinespringIsometry:
    k, dout, din = c.kraus.shape
    # rows ordered (output, env)
    v = np.transpose(c.kraus, (1, 0, 2)).reshape(dout * k, din)
    return StinespringIsometry(din, dout, k, v)


def to_choi(c: Channel) -> ChoiMatrix:
    k, dout, din = c.kraus.shape
    # vec of each Kraus on (input, output): sum_i |i> (x) W|i>
    vecs = np.transpose(c.kraus, (0, 2, 1)).reshape(k, din * dout)
    mat = vecs.T @ vecs.conj()
    return ChoiMatrix(din, dout, mat)


def from_stinespring(v: np.ndarray, dim_out: int, trace_preserving: bool = True) -> Channel:
    v = np.asarray(v, dtype=complex)
    k = v.shape[0] // dim_out
    kraus = np.transpose(v.reshape(dim_out, k, v.shape[1]), (1, 0, 2))
    return Channel(kraus, trace_preserving)


def from_choi(mat: np.ndarray, dim_in: int, dim_out: int, trace_preserving: bool = True,
              cutoff: float = CHOI_RANK_CUTOFF) -> Channel:
    mat = (np.asarray(mat, dtype=complex) + np.asarray(mat, dtype=complex).conj().T) / 2
    vals, vecs = np.linalg.eigh(mat)
    keep = vals > cutoff
    if not keep.any():
        keep = vals >= vals.max()
    kraus = [
        np.sqrt(max(val, 0.0)) * vec.reshape(dim_in, dim_out).T
        for val, vec in zip(vals[keep], vecs[:, keep].T)
    ]
    return Channel(kraus, trace_preserving)


def stinespring_output(iso: StinespringIsometry, rho) -> np.ndarray:
    """``Tr_E V rho V^*`` computed from the isometry alone."""
    big = iso.v @ np.asarray(rho, dtype=complex) @ iso.v.conj().T
    return partial_trace(big, (iso.dim_out, iso.dim_env), keep=0)


def minimal_kraus(c: Channel, cutoff: float = CHOI_RANK_CUTOFF) -> np.ndarray:
    """Kraus operators trimmed to the Choi rank.

    The result is related to ``c.kraus`` by an isometry on the Kraus index.
    """
    k, dout, din = c.kraus.shape
    flat = c.kraus.reshape(k, dout * din)
    _, s, vh = np.linalg.svd(flat, full_matrices=False)
    keep = s > np.sqrt(cutoff)
    if not keep.any():
        keep[0] = True
    return (s[keep, None] * vh[keep]).reshape(-1, dout, din)


def complementary(c: Channel, trim: bool = True) -> Channel:
    """Complementary channel ``rho -> Tr_B V rho V^*``.

    With ``trim`` the environment is first reduced to the Choi rank of ``c``;
    without it the environment index is the Kraus index of ``c`` as given.
    """
    ops = minimal_kraus(c) if trim else c.kraus
    k, dout, din = ops.shape
    # R_b = sum_i |i><b| W_i  -> (R_b)[i, :] = W_i[b, :]
    comp = np.transpose(ops, (1, 0, 2))
    return Channel(comp, c.trace_preserving, name=f"complementary({c.name})" if c.name else "")


def adjoint_map(c: Channel, x) -> np.ndarray:
    """Heisenberg-picture dual ``X -> sum_i W_i^* X W_i``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (c.dim_out, c.dim_out):
        raise DimensionError(f"adjoint needs a {c.dim_out}x{c.dim_out} operator, got {x.shape}")
    return np.einsum("kji,jl,klm->im", c.kraus.conj(), x, c.kraus)


def compose(outer: Channel, inner: Channel) -> Channel:
    """``outer o inner``; Kraus set is all products."""
    if inner.dim_out != outer.dim_in:
        raise DimensionError(f"cannot compose {outer.dim_in}-input after {inner.dim_out}-output map")
    ops = np.einsum("aij,bjk->abik", outer.kraus, inner.kraus).reshape(
        -1, outer.dim_out, inner.dim_in
    )
    return Channel(ops, outer.trace_preserving and inner.trace_preserving)


def _check_orthonormal(basis: np.ndarray, what: str = "basis") -> np.ndarray:
    basis = np.asarray(basis, dtype=complex)
    if basis.ndim != 2:
        raise InvalidOperatorError(f"{what} must be a matrix of column vectors")
    gram = basis.conj().T @ basis
    if np.abs(gram - np.eye(gram.shape[0])).max() > 1e-10:
        raise InvalidOperatorError(f"{what} columns are not orthonormal")
    return basis


def pinching(basis) -> Channel:
    """Complete dephasing in the orthonormal basis given by the columns of ``basis``."""
    basis = _check_orthonormal(basis)
    if basis.shape[0] != basis.shape[1]:
        raise InvalidOperatorError("pinching needs a complete basis")
    return Channel([np.outer(b, b.conj()) for b in basis.T], name="pinching")


def identity_channel(dim: int) -> Channel:
    return Channel([np.eye(dim)], name="identity")


def truncate(c: Channel, p) -> Channel:
    """Quantum operation ``rho -> P Phi(rho) P`` for an output projector ``P``."""
    p = np.asarray(p, dtype=complex)
    if p.shape != (c.dim_out, c.dim_out):
        raise DimensionError("projector must act on the output space")
    if np.abs(p - p.conj().T).max() > 1e-10 or np.abs(p @ p - p).max() > 1e-10:
        raise InvalidOperatorError("p is not a Hermitian projector")
    is_identity = np.abs(p - np.eye(c.dim_out)).max() <= 1e-10
    ops = np.einsum("ij,kjl->kil", p, c.kraus)
    return Channel(ops, trace_preserving=c.trace_preserving and is_identity)


def truncated_pair(c: Channel, p) -> tuple[Channel, Channel, Channel]:
    """Return ``(Phi_n, complement of Phi, complement of Phi_n)`` on a shared environment.

    Both complements use the minimal Kraus set of ``c`` so that
    ``comp_n(rho) <= comp(rho)`` can be compared entrywise.
    """
    base = Channel(minimal_kraus(c), c.trace_preserving)
    trunc = truncate(base, p)
    return trunc, complementary(base, trim=False), complementary(trunc, trim=False)


def restrict_input(c: Channel, s) -> Channel:
    """Restriction of ``c`` to states supported on the span of the columns of ``s``."""
    s = np.asarray(s, dtype=complex)
    if s.ndim == 1:
        s = s[:, None]
    if s.shape[0] != c.dim_in:
        raise DimensionError("subspace columns must live in the input space")
    if np.linalg.matrix_rank(s, tol=1e-10) < s.shape[1]:
        raise InvalidOperatorError("subspace columns are rank deficient")
    _check_orthonormal(s, "subspace")
    ops = np.einsum("kij,jl->kil", c.kraus, s)
    return Channel(ops, c.trace_preserving, name=f"{c.name}|restricted" if c.name else "")


def matrix_units(dim: int) -> np.ndarray:
    units = np.zeros((dim * dim, dim, dim), dtype=complex)
    for idx in range(dim * dim):
        units[idx].flat[idx] = 1.0
    return units


@dataclass
class EquivalenceResult:
    accepted: bool
    w: Optional[np.ndarray]
    residual: float


def isometric_equivalence(a: Channel, b: Channel, tol: float = 1e-8, seed: int = 0) -> EquivalenceResult:
    """Search for a partial isometry ``W`` with ``b = W a W^*`` and ``a = W^* b W``.

    Any such ``W`` intertwines the outputs, ``b(X) W = W a(X)``, which is
    linear in ``W``.  The intertwiner space is found by least squares (null
    space of the stacked relation over matrix units); a generic element of it
    is projected to its polar part, which is again an intertwiner, and both
    relations are then checked directly.
    """
    if a.dim_in != b.dim_in:
        raise DimensionError("channels must share the input dimension")
    units = matrix_units(a.dim_in)
    outs_a = apply_many(a, units)
    outs_b = apply_many(b, units)
    da, db = a.dim_out, b.dim_out
    # vec(B W - W A) = (I (x) B - A^T (x) I) vec(W), column-major vec
    rows = [np.kron(np.eye(da), ob) - np.kron(oa.T, np.eye(db)) for oa, ob in zip(outs_a, outs_b)]
    system = np.vstack(rows)
    _, s, vh = np.linalg.svd(system)
    scale = max(1.0, s[0] if len(s) else 1.0)
    null_mask = np.zeros(vh.shape[0], dtype=bool)
    null_mask[len(s):] = True
    null_mask[: len(s)] = s <= np.sqrt(tol) * scale
    null = vh[null_mask].conj()
    if len(null) == 0:
        null = vh[-1:].conj()

    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(len(null)) + 1j * rng.standard_normal(len(null))
    w = (coeffs @ null).reshape(da, db).T
    u, sv, wh = np.linalg.svd(w)
    r = int(np.sum(sv > 1e-8 * max(sv.max(initial=0.0), 1e-300)))
    w = u[:, :r] @ wh[:r]

    res1 = np.abs(outs_b - np.einsum("ij,njk,lk->nil", w, outs_a, w.conj())).max()
    res2 = np.abs(outs_a - np.einsum("ji,njk,kl->nil", w.conj(), outs_b, w)).max()
    residual = float(max(res1, res2))
    return EquivalenceResult(residual <= tol, w, residual)


def hermitian_basis(dim: int) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of Hermitian ``dim x dim`` matrices."""
    out = []
    for i in range(dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[i, i] = 1
        out.append(m)
    for i in range(dim):
        for j in range(i + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = m[j, i] = 1 / np.sqrt(2)
            out.append(m)
            m = np.zeros((dim, dim), dtype=complex)
            m[i, j] = -1j / np.sqrt(2)
            m[j, i] = 1j / np.sqrt(2)
            out.append(m)
    return np.array(out)


def kraus_from_isometry_mix(c: Channel, u: np.ndarray) -> Channel:
    """Another Kraus decomposition ``W'_j = sum_i u_{ji} W_i`` for an isometry ``u``."""
    u = np.asarray(u, dtype=complex)
    if np.abs(u.conj().T @ u - np.eye(u.shape[1])).max() > 1e-10:
        raise InvalidOperatorError("mixing matrix must be an isometry")
    return Channel(np.einsum("ji,ikl->jkl", u, c.kraus), c.trace_preserving, name=c.name)


def cq_channel(basis, sigmas: Sequence) -> Channel:
    """Channel ``rho -> sum_k <k|rho|k> sigma_k`` with Kraus ``|psi_ki><k|``.

    ``sigma_k = sum_i |psi_ki><psi_ki|`` uses the full eigendecomposition, so
    there are ``dim_in * dim_out`` Kraus operators, ordered k-major.
    """
    basis = _check_orthonormal(basis)
    ops = []
    for k, sigma in enumerate(sigmas):
        for psi in cq_vectors(sigma):
            ops.append(np.outer(psi, basis[:, k].conj()))
    return Channel(ops, name="cq")


def cq_vectors(sigma) -> np.ndarray:
    """Rows ``psi_i`` with ``sigma = sum_i |psi_i><psi_i|`` (scaled eigenvectors)."""
    sigma = np.asarray(sigma, dtype=complex)
    vals, vecs = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)).T


def cq_complementary_output(basis, sigmas: Sequence, rho) -> np.ndarray:
    """Complementary output of a c-q channel from its closed form.

    ``sum_{k,l} <k|rho|l> |k><l| (x) sum_{i,j} <psi_lj|psi_ki> |i><j|``
    on ``H_A (x) H_B``.
    """
    basis = np.asarray(basis, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    psis = np.array([cq_vectors(s) for s in sigmas])  # (k, i, out)
    coeff = basis.conj().T @ rho @ basis  # <k|rho|l>
    # overlaps[k, i, l, j] = <psi_lj | psi_ki>
    overlaps = np.einsum("ljm,kim->kilj", psis.conj(), psis)
    d_a = len(sigmas)
    d_b = psis.shape[1]
    out = np.einsum("kl,kilj->kilj", coeff, overlaps)
    return out.reshape(d_a * d_b, d_a * d_b)
