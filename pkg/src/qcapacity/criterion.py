"""End-to-end checks of the coincidence criterion ``C = C_ea`` on concrete channels.

Every check returns a verdict with a :class:`Status`.  Solver trouble makes a
verdict *inconclusive*; *inconsistent* is reserved for results that would
contradict a proved statement while every solver reports convergence, and
therefore signals a bug.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .capacity import (
    EnergyConstraint,
    ParameterError,
    chi_essential_subspace,
    constrained_capacities,
    constrained_holevo,
    ea_capacity,
    holevo_capacity,
    mutual_information,
)
from .channels import Channel, apply, complementary, restrict_input
from .config import DEFAULT_CONFIG, SolverConfig
from .qcore import (
    SUPPORT_CUTOFF,
    DensityMatrix,
    Ensemble,
    OutputEnsemble,
    average,
    chi_quantity,
    entropy,
)
from .structure import detect_cq, is_degradable, orthogonal_supports

DIAGONAL_TOL = 1e-8
PURITY_TOL = 1e-10


class Status(str, enum.Enum):
    CONSISTENT = "consistent"
    INCONCLUSIVE = "inconclusive"
    INCONSISTENT = "inconsistent"
    SKIPPED = "skipped"

    @property
    def exit_code(self) -> int:
        return {"consistent": 0, "inconclusive": 2, "skipped": 2, "inconsistent": 4}[self.value]


def _status(consistent: bool, converged: bool) -> Status:
    if consistent:
        return Status.CONSISTENT
    return Status.INCONSISTENT if converged else Status.INCONCLUSIVE


class _Verdict:
    def as_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status.value
        return out

    @property
    def exit_code(self) -> int:
        return self.status.exit_code


def _check_dims(c: Channel, config: SolverConfig):
    if max(c.dim_in, c.dim_out) > config.dim_cap:
        raise ParameterError(
            f"channel dimensions {c.dim_in}->{c.dim_out} exceed the configured cap {config.dim_cap}"
        )


def _offdiagonal_norm(mat: np.ndarray, basis: np.ndarray) -> float:
    m = basis.conj().T @ mat @ basis
    return float(np.linalg.norm(m - np.diag(np.diag(m))))


def _support(rho: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2)
    return vecs[:, vals > cutoff]


@dataclass
class CriterionVerdict(_Verdict):
    """Outcome of checking both directions of the criterion on one channel."""

    channel: str
    c_holevo: float
    c_ea: float
    gap: float
    chi_subspace_dim: int
    cq_on_essential: bool
    cq_detected: bool
    residuals: dict
    consistent_with_theorem1: bool
    converged: bool
    status: Status


def check_theorem1(c: Channel, gap_tol: Optional[float] = None,
                   config: SolverConfig = DEFAULT_CONFIG) -> CriterionVerdict:
    """Compare both capacities with the c-q structure of the channel and of its essential part.

    Direction A: if ``c`` is c-q the gap closes.  Direction B: if the gap
    closes, the restriction to the χ-essential subspace is c-q.
    """
    _check_dims(c, config)
    gap_tol = config.gap_tol if gap_tol is None else gap_tol
    holevo = holevo_capacity(c, config)
    ea = ea_capacity(c, config)
    gap = ea.value - holevo.value
    subspace = chi_essential_subspace(c, config=config, report=holevo)
    essential = detect_cq(restrict_input(c, subspace), config.cq_tol, config.seed)
    full = detect_cq(c, config.cq_tol, config.seed)
    direction_a = full is None or gap <= gap_tol
    direction_b = gap > gap_tol or essential is not None
    consistent = direction_a and direction_b
    converged = holevo.converged and ea.converged and gap >= -1e-4
    return CriterionVerdict(
        channel=c.name,
        c_holevo=holevo.value,
        c_ea=ea.value,
        gap=gap,
        chi_subspace_dim=int(subspace.shape[1]),
        cq_on_essential=essential is not None,
        cq_detected=full is not None,
        residuals={
            "holevo_certificate": holevo.certificate_residual,
            "ea_certificate": ea.certificate_residual,
            "cq_essential": None if essential is None else essential.residual,
            "cq_full": None if full is None else full.residual,
        },
        consistent_with_theorem1=consistent,
        converged=converged,
        status=_status(consistent, converged),
    )


@dataclass
class Corollary1Verdict(_Verdict):
    channel: str
    hypothesis_met: bool
    chi_subspace_dim: int
    c_holevo: float
    c_ea: float
    gap: float
    gap_closed: bool
    cq_detected: bool
    consistent: bool
    converged: bool
    status: Status


def check_corollary1(c: Channel, gap_tol: Optional[float] = None,
                     config: SolverConfig = DEFAULT_CONFIG) -> Corollary1Verdict:
    """When an optimal ensemble has a full-rank average, gap closure and c-q form coincide."""
    _check_dims(c, config)
    gap_tol = config.gap_tol if gap_tol is None else gap_tol
    holevo = holevo_capacity(c, config)
    subspace = chi_essential_subspace(c, config=config, report=holevo)
    hypothesis = subspace.shape[1] == c.dim_in
    ea = ea_capacity(c, config) if hypothesis else None
    c_ea = ea.value if ea is not None else float("nan")
    gap = c_ea - holevo.value
    closed = bool(gap <= gap_tol)
    cq = detect_cq(c, config.cq_tol, config.seed) is not None
    converged = holevo.converged and (ea is None or ea.converged)
    if not hypothesis:
        status = Status.SKIPPED
        consistent = True
    else:
        consistent = closed == cq
        status = _status(consistent, converged)
    return Corollary1Verdict(
        channel=c.name,
        hypothesis_met=hypothesis,
        chi_subspace_dim=int(subspace.shape[1]),
        c_holevo=holevo.value,
        c_ea=c_ea,
        gap=gap,
        gap_closed=closed if hypothesis else False,
        cq_detected=cq,
        consistent=consistent,
        converged=converged,
        status=status,
    )


@dataclass
class Proposition1Verdict(_Verdict):
    """The three statements that must agree for a degradable channel."""

    channel: str
    degradability: str
    degradability_residual: float
    c_holevo: Optional[float] = None
    c_ea: Optional[float] = None
    gap_closed: Optional[bool] = None
    maximal_capacities: Optional[bool] = None
    cq_orthogonal: Optional[bool] = None
    consistent: bool = True
    converged: bool = False
    status: Status = Status.SKIPPED


def check_proposition1(c: Channel, gap_tol: Optional[float] = None,
                       config: SolverConfig = DEFAULT_CONFIG) -> Proposition1Verdict:
    """For a degradable channel: gap closes ⟺ both capacities equal ``log2 d`` ⟺ c-q with orthogonal outputs."""
    _check_dims(c, config)
    gap_tol = config.gap_tol if gap_tol is None else gap_tol
    degr = is_degradable(c, config.degradable_tol)
    verdict = Proposition1Verdict(c.name, degr.status.value, degr.residual)
    if not degr.accepted:
        return verdict
    holevo = holevo_capacity(c, config)
    ea = ea_capacity(c, config)
    log_d = float(np.log2(c.dim_in))
    structure = detect_cq(c, config.cq_tol, config.seed)
    verdict.c_holevo = holevo.value
    verdict.c_ea = ea.value
    verdict.gap_closed = bool(ea.value - holevo.value <= gap_tol)
    verdict.maximal_capacities = bool(abs(holevo.value - log_d) <= gap_tol and abs(ea.value - log_d) <= gap_tol)
    verdict.cq_orthogonal = structure is not None and orthogonal_supports(structure.sigmas)
    verdict.consistent = verdict.gap_closed == verdict.maximal_capacities == verdict.cq_orthogonal
    verdict.converged = holevo.converged and ea.converged
    verdict.status = _status(verdict.consistent, verdict.converged)
    return verdict


@dataclass
class StateCriterionVerdict(_Verdict):
    """Coincidence test at a fixed input state."""

    rho: np.ndarray = field(repr=False)
    holevo_at_rho: float
    mi_at_rho: float
    equality: bool
    restriction_is_cq: bool
    basis_diagonal_ok: bool
    consistent: bool
    converged: bool
    status: Status

    def as_dict(self) -> dict:
        out = super().as_dict()
        out["rho"] = self.rho
        return out


def check_state_criterion(c: Channel, rho, eq_tol: Optional[float] = None,
                          config: SolverConfig = DEFAULT_CONFIG) -> StateCriterionVerdict:
    """Check ``C(Phi, rho) = I(Phi, rho)`` against the c-q structure on ``supp rho``.

    If the restriction to the support is c-q in an eigenbasis of ``rho`` the
    two quantities must agree; if they agree the restriction must be c-q.
    """
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(np.asarray(rho, dtype=complex))
    _check_dims(c, config)
    eq_tol = config.gap_tol if eq_tol is None else eq_tol
    holevo = constrained_holevo(c, rho.mat, config=config)
    mi = mutual_information(c, rho.mat)
    support = _support(rho.mat)
    restricted = restrict_input(c, support)
    local_rho = support.conj().T @ rho.mat @ support
    # a c-q basis is not unique when output states repeat, so ask for one
    # that also diagonalizes rho before concluding it does not exist
    structure = detect_cq(restricted, config.cq_tol, config.seed, extra=[local_rho])
    diagonal_ok = structure is not None and _offdiagonal_norm(local_rho, structure.basis) <= DIAGONAL_TOL
    if structure is None:
        structure = detect_cq(restricted, config.cq_tol, config.seed)
    is_cq = structure is not None
    equality = bool(abs(mi - holevo.value) <= eq_tol)
    consistent = (not (is_cq and diagonal_ok) or equality) and (not equality or is_cq)
    converged = holevo.converged
    return StateCriterionVerdict(
        rho=rho.mat,
        holevo_at_rho=holevo.value,
        mi_at_rho=mi,
        equality=equality,
        restriction_is_cq=is_cq,
        basis_diagonal_ok=bool(diagonal_ok),
        consistent=consistent,
        converged=converged,
        status=_status(consistent, converged),
    )


def _pure_vectors(mu: Ensemble) -> np.ndarray:
    rows = []
    for s in mu.states:
        vals, vecs = np.linalg.eigh(s.mat)
        if vals[-1] < 1 - PURITY_TOL or vals[:-1].sum() > PURITY_TOL:
            raise ParameterError("every ensemble member must be a pure state")
        rows.append(vecs[:, -1])
    return np.array(rows)


def lemma1_sides(c: Channel, mu: Ensemble) -> tuple[float, float]:
    """``(chi(Phi(mu)) - chi(comp(mu)), I(Phi, avg) - H(avg))`` for a pure ensemble ``mu``."""
    _pure_vectors(mu)
    comp = complementary(c)
    outputs = OutputEnsemble(mu.weights, [apply(c, s.mat) for s in mu.states])
    env = OutputEnsemble(mu.weights, [apply(comp, s.mat) for s in mu.states])
    rho = average(mu)
    lhs = chi_quantity(outputs) - chi_quantity(env)
    rhs = mutual_information(c, rho.mat) - entropy(rho.mat)
    return float(lhs), float(rhs)


def check_lemma1(c: Channel, mu: Ensemble) -> float:
    """Residual of ``chi(Phi(mu)) - chi(comp(mu)) = I(Phi, avg) - H(avg)`` in bits."""
    lhs, rhs = lemma1_sides(c, mu)
    return abs(lhs - rhs)


@dataclass
class Corollary2Verdict(_Verdict):
    channel: str
    h_bound: float
    c_holevo: float
    c_ea: float
    gap: float
    cq_detected: bool
    h_diagonal_in_cq_basis: bool
    assertion_a: Optional[bool]
    restriction_is_cq: Optional[bool]
    support_dim: int
    consistent: bool
    converged: bool
    status: Status


def check_corollary2(c: Channel, k: EnergyConstraint, gap_tol: Optional[float] = None,
                     config: SolverConfig = DEFAULT_CONFIG) -> Corollary2Verdict:
    """Energy-constrained version of the criterion.

    A: a c-q channel whose basis also diagonalizes ``H`` has equal
    constrained capacities.  B: when they agree, the restriction to the
    support of the optimal average state is c-q.
    """
    _check_dims(c, config)
    if k.h_operator.shape != (c.dim_in, c.dim_in):
        raise ParameterError("H must act on the channel input")
    gap_tol = config.gap_tol if gap_tol is None else gap_tol
    holevo, ea = constrained_capacities(c, k, config)
    gap = ea.value - holevo.value
    plain = detect_cq(c, config.cq_tol, config.seed)
    with_h = detect_cq(c, config.cq_tol, config.seed, extra=[k.h_operator]) if plain is not None else None
    h_diag = False
    if with_h is not None:
        projs = [np.outer(b, b.conj()) for b in with_h.basis.T]
        h_diag = all(np.linalg.norm(k.h_operator @ p - p @ k.h_operator) <= DIAGONAL_TOL for p in projs)
    assertion_a = bool(gap <= gap_tol) if h_diag else None
    support = _support(average(holevo.witness).mat, 1e-9)
    restriction_cq = None
    if gap <= gap_tol:
        restriction_cq = detect_cq(restrict_input(c, support), config.cq_tol, config.seed) is not None
    consistent = assertion_a is not False and restriction_cq is not False
    converged = holevo.converged and ea.converged
    return Corollary2Verdict(
        channel=c.name,
        h_bound=k.bound,
        c_holevo=holevo.value,
        c_ea=ea.value,
        gap=gap,
        cq_detected=plain is not None,
        h_diagonal_in_cq_basis=h_diag,
        assertion_a=assertion_a,
        restriction_is_cq=restriction_cq,
        support_dim=int(support.shape[1]),
        consistent=consistent,
        converged=converged,
        status=_status(consistent, converged),
    )
