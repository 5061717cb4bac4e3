"""Structural tests on channels: c-q form, degradability, orthogonal supports."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channels import (
    Channel,
    CqStructure,
    adjoint_map,
    apply,
    apply_many,
    complementary,
    from_choi,
    hermitian_basis,
    matrix_units,
)
from .qcore import SUPPORT_CUTOFF, DensityMatrix

CQ_TOL = 1e-8
DEGRADABLE_TOL = 1e-6
GAP_CUTOFF = 1e-8
MAX_RETRIES = 5


def _clusters(vals: np.ndarray, gap: float) -> list[np.ndarray]:
    order = np.argsort(vals)
    groups, current = [], [order[0]]
    for prev, idx in zip(order[:-1], order[1:]):
        if vals[idx] - vals[prev] < gap:
            current.append(idx)
        else:
            groups.append(np.array(current))
            current = [idx]
    groups.append(np.array(current))
    return groups


def jacobi_joint_diagonalize(mats: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Unitary that approximately diagonalizes a family of Hermitian matrices.

    Complex Jacobi rotations chosen pairwise to minimize the summed squared
    off-diagonal mass (Cardoso & Souloumiac).
    """
    mats = np.array(mats, dtype=complex)
    n = mats.shape[1]
    u = np.eye(n, dtype=complex)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = np.array([
                    mats[:, p, p] - mats[:, q, q],
                    mats[:, p, q] + mats[:, q, p],
                    1j * (mats[:, q, p] - mats[:, p, q]),
                ])
                gram = np.real(g @ g.conj().T)
                _, vecs = np.linalg.eigh(gram)
                x, y, z = vecs[:, -1]
                if x < 0:
                    x, y, z = -x, -y, -z
                c = np.sqrt((x + 1) / 2)
                s = (y - 1j * z) / np.sqrt(2 * (x + 1))
                if abs(s) <= tol:
                    continue
                rotated = True
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[p, q] = -np.conj(s)
                rot[q, p] = s
                rot[q, q] = c
                mats = rot.conj().T @ mats @ rot
                u = u @ rot
        if not rotated:
            break
    return u


def simultaneous_diagonalize(mats: Sequence[np.ndarray], rng: Optional[np.random.Generator] = None,
                             gap: float = GAP_CUTOFF) -> np.ndarray:
    """Common eigenbasis (as columns of a unitary) of commuting Hermitian matrices.

    A random real combination is diagonalized; clusters of nearly equal
    eigenvalues are refined recursively on the restricted family.  If a
    cluster cannot be split after :data:`MAX_RETRIES` fresh combinations
    while the restricted family is not scalar, Jacobi joint diagonalization
    finishes the job.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    mats = np.array(mats, dtype=complex)
    n = mats.shape[1]
    scale = max(np.abs(mats).max(initial=0.0), 1e-300)
    return _refine(mats / scale, np.eye(n, dtype=complex), rng, gap)


def _is_scalar_family(mats: np.ndarray, tol: float) -> bool:
    n = mats.shape[1]
    diag_mean = np.einsum("kii->k", mats) / n
    return np.abs(mats - diag_mean[:, None, None] * np.eye(n)).max() <= tol


def _refine(mats: np.ndarray, frame: np.ndarray, rng: np.random.Generator, gap: float) -> np.ndarray:
    local = np.einsum("ji,kjl,lm->kim", frame.conj(), mats, frame)
    if local.shape[1] == 1 or _is_scalar_family(local, gap):
        return frame
    for _ in range(MAX_RETRIES):
        coeffs = rng.standard_normal(len(local))
        combo = np.einsum("k,kij->ij", coeffs, local)
        vals, vecs = np.linalg.eigh((combo + combo.conj().T) / 2)
        groups = _clusters(vals, gap)
        if len(groups) > 1:
            cols = [_refine(mats, frame @ vecs[:, g], rng, gap) for g in groups]
            return np.hstack(cols)
    return frame @ jacobi_joint_diagonalize(local)


def detect_cq(c: Channel, tol: float = CQ_TOL, seed: int = 0,
              extra: Sequence[np.ndarray] = ()) -> Optional[CqStructure]:
    """Find a basis in which ``c`` acts as ``rho -> sum_k <k|rho|k> sigma_k``.

    The dual images of a Hermitian operator basis must commute; their joint
    eigenbasis is the candidate, accepted when every off-diagonal matrix
    unit is mapped to (numerically) zero.

    Parameters
    ----------
    extra : sequence of Hermitian input operators, optional
        Operators that must also be diagonal in the returned basis.  Useful
        when a c-q basis is not unique and one diagonalizing a given state
        is wanted.
    """
    duals = [adjoint_map(c, b) for b in hermitian_basis(c.dim_out)]
    duals += [np.asarray(x, dtype=complex) for x in extra]
    duals = np.array(duals)
    comm = np.einsum("aij,bjk->abik", duals, duals)
    comm = comm - np.transpose(comm, (1, 0, 2, 3))
    if np.sqrt((np.abs(comm) ** 2).sum(axis=(2, 3))).max(initial=0.0) > tol:
        return None
    basis = simultaneous_diagonalize(duals, np.random.default_rng(seed))
    return cq_witness(c, basis, tol)


def cq_witness(c: Channel, basis: np.ndarray, tol: float = CQ_TOL) -> Optional[CqStructure]:
    """Check a candidate basis and build the witness, or return ``None``."""
    residual = 0.0
    d = c.dim_in
    for k in range(d):
        for l in range(d):
            if k != l:
                img = apply(c, np.outer(basis[:, k], basis[:, l].conj()))
                residual = max(residual, float(np.linalg.norm(img)))
    if residual > tol:
        return None
    sigmas = []
    for k in range(d):
        s = apply(c, np.outer(basis[:, k], basis[:, k].conj()))
        s = (s + s.conj().T) / 2
        sigmas.append(DensityMatrix(s / np.trace(s).real))
    return CqStructure(basis, tuple(sigmas), residual)


def support_projector(mat: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    vals, vecs = np.linalg.eigh((mat + mat.conj().T) / 2)
    sup = vecs[:, vals > cutoff]
    return sup @ sup.conj().T


def orthogonal_supports(sigmas: Sequence, tol: float = 1e-8) -> bool:
    """True iff the states have pairwise orthogonal supports."""
    mats = [s.mat if isinstance(s, DensityMatrix) else np.asarray(s, dtype=complex) for s in sigmas]
    if len({m.shape for m in mats}) > 1:
        raise ValueError("states must share one dimension")
    projs = [support_projector(m) for m in mats]
    for i in range(len(projs)):
        for j in range(i + 1, len(projs)):
            if np.linalg.norm(projs[i] @ projs[j], 2) > tol:
                return False
    return True


class DegradabilityStatus(str, enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    INCONCLUSIVE = "inconclusive"


@dataclass
class DegradabilityResult:
    status: DegradabilityStatus
    degrading_map: Optional[Channel]
    residual: float
    iterations: int
    history: list = field(default_factory=list, repr=False)

    @property
    def accepted(self) -> bool:
        return self.status is DegradabilityStatus.ACCEPTED


def _degrading_constraints(c: Channel, comp: Channel) -> tuple[np.ndarray, np.ndarray, int, int]:
    """Linear system ``M vec(J) = b`` for the Choi matrix ``J`` of ``Psi: B -> E``.

    Rows encode ``Psi(Phi(E_ij)) = comp(E_ij)`` for all input matrix units and
    trace preservation ``Tr_E J = I_B``.  ``J`` uses the same layout as
    :func:`qcapacity.channels.to_choi` (input factor first), flattened row major.
    """
    db, de = c.dim_out, comp.dim_out
    n = db * de
    units = matrix_units(c.dim_in)
    outs = apply_many(c, units)
    targets = apply_many(comp, units)
    # Psi(X)[e, f] = sum_{b, b'} X[b, b'] J[(b, e), (b', f)]
    rows, rhs = [], []
    for x, t in zip(outs, targets):
        for e in range(de):
            for f in range(de):
                coeff = np.zeros((db, de, db, de), dtype=complex)
                coeff[:, e, :, f] = x
                rows.append(coeff.reshape(-1))
                rhs.append(t[e, f])
    for b in range(db):
        for b2 in range(db):
            coeff = np.zeros((db, de, db, de), dtype=complex)
            for e in range(de):
                coeff[b, e, b2, e] = 1.0
            rows.append(coeff.reshape(-1))
            rhs.append(1.0 if b == b2 else 0.0)
    m = np.array(rows).reshape(len(rows), n * n)
    return m, np.array(rhs, dtype=complex), db, de


def _psd_projection(j: np.ndarray) -> np.ndarray:
    j = (j + j.conj().T) / 2
    vals, vecs = np.linalg.eigh(j)
    return (vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T


def is_degradable(c: Channel, tol: float = DEGRADABLE_TOL, max_iters: int = 20_000,
                  plateau: float = 1e-12) -> DegradabilityResult:
    """Search for a channel ``Psi`` with ``complementary(c) = Psi o c``.

    Dykstra alternating projections between the affine set of Choi matrices
    satisfying the linear constraints (least-squares projection, so an
    inconsistent system is handled) and the PSD cone.  Accepted when the
    constraint residual at the PSD iterate is at most ``tol`` (Frobenius
    norm over all constraints); rejected when the residual plateaus above
    ``tol``; inconclusive when the iteration budget runs out while still
    decreasing.
    """
    comp = complementary(c)
    m, rhs, db, de = _degrading_constraints(c, comp)
    n = db * de
    pinv = np.linalg.pinv(m, rcond=1e-12)

    def project_affine(x):
        flat = x.reshape(-1)
        flat = flat - pinv @ (m @ flat - rhs)
        y = flat.reshape(n, n)
        return (y + y.conj().T) / 2

    def residual_of(x):
        return float(np.linalg.norm(m @ x.reshape(-1) - rhs))

    x = np.eye(n, dtype=complex) / de
    p_inc = np.zeros_like(x)
    q_inc = np.zeros_like(x)
    history = []
    best = np.inf
    stall = 0
    status = DegradabilityStatus.INCONCLUSIVE
    it = 0
    psd = _psd_projection(x)
    for it in range(1, max_iters + 1):
        y = project_affine(x + p_inc)
        p_inc = x + p_inc - y
        psd = _psd_projection(y + q_inc)
        q_inc = y + q_inc - psd
        x = psd
        res = residual_of(psd)
        history.append(res)
        if res <= tol:
            status = DegradabilityStatus.ACCEPTED
            break
        if res < best * (1 - plateau):
            best = res
            stall = 0
        else:
            stall += 1
            if stall >= 50:
                status = DegradabilityStatus.REJECTED
                break
        if it >= 200 and len(history) > 100:
            # clearly separated sets: the distance has converged well above tol
            recent = history[-100]
            if recent - res <= 1e-6 * recent and res > 100 * tol:
                status = DegradabilityStatus.REJECTED
                break

    psi = None
    if status is DegradabilityStatus.ACCEPTED:
        psi = from_choi(_make_trace_preserving(psd, db, de), db, de)
    return DegradabilityResult(status, psi, res, it, history)


def _make_trace_preserving(j: np.ndarray, db: int, de: int) -> np.ndarray:
    """Congruence by ``T^{-1/2} (x) I`` with ``T = Tr_E J``; keeps ``J`` PSD."""
    t = np.einsum("aebe->ab", j.reshape(db, de, db, de))
    vals, vecs = np.linalg.eigh((t + t.conj().T) / 2)
    inv_sqrt = (vecs / np.sqrt(np.clip(vals, 1e-15, None))) @ vecs.conj().T
    k = np.kron(inv_sqrt, np.eye(de))
    return k @ j @ k.conj().T
