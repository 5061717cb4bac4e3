"""Capacity functionals of finite-dimensional channels.

Internally everything is computed in natural-log units and converted to
bits on the way out.  Solvers are deterministic given ``SolverConfig.seed``;
restarts run in index order and the best result wins (ties keep the lowest
index).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import Channel, adjoint_map, apply, apply_vectors, complementary
from .config import DEFAULT_CONFIG, SolverConfig
from .qcore import LN2, DensityMatrix, Ensemble, entropy, random_pure_vector

LOG_FLOOR = 1e-16
RANK_CUTOFF = 1e-12


class ParameterError(ValueError):
    pass


@dataclass
class CapacityReport:
    value: float
    witness: Union[Ensemble, DensityMatrix, None]
    certificate_residual: float
    restarts_used: int
    converged: bool
    details: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class EnergyConstraint:
    """Input constraint ``Tr H rho <= bound`` for a PSD ``H``."""

    h_operator: np.ndarray
    bound: float

    def __post_init__(self):
        h = np.asarray(self.h_operator, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ParameterError("H must be a square matrix")
        if np.abs(h - h.conj().T).max() > 1e-10:
            raise ParameterError("H must be Hermitian")
        h = (h + h.conj().T) / 2
        if np.linalg.eigvalsh(h).min() < -1e-10:
            raise ParameterError("H must be positive semidefinite")
        if not self.bound > 0:
            raise ParameterError("the energy bound must be positive")
        object.__setattr__(self, "h_operator", h)
        if np.linalg.eigvalsh(h).min() > self.bound + 1e-12:
            raise ParameterError("no state satisfies the energy constraint")

    def energy(self, rho) -> float:
        return float(np.real(np.trace(self.h_operator @ rho)))


# ---------------------------------------------------------------------------
# spectral helpers (natural log)


def _eigh_batch(mats: np.ndarray):
    mats = (mats + np.swapaxes(mats, -1, -2).conj()) / 2
    vals, vecs = np.linalg.eigh(mats)
    return np.clip(vals, 0.0, None), vecs


def _entropy_nat(mats: np.ndarray) -> np.ndarray:
    """``-Tr A log A`` for a stack (or single) PSD matrix."""
    vals, _ = _eigh_batch(mats)
    safe = np.where(vals > 1e-300, vals, 1.0)
    return -np.sum(vals * np.log(safe), axis=-1)


def _log_psd(mats: np.ndarray, floor: float = LOG_FLOOR) -> np.ndarray:
    vals, vecs = _eigh_batch(mats)
    logs = np.log(np.maximum(vals, floor))
    return np.einsum("...ij,...j,...kj->...ik", vecs, logs, vecs.conj())


def _adjoint_many(c: Channel, xs: np.ndarray) -> np.ndarray:
    return np.einsum("kji,njl,klm->nim", c.kraus.conj(), xs, c.kraus, optimize=True)


def _as_state(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.mat
    return DensityMatrix(rho).mat


def _bits(x):
    return x / LN2


def _rng(config: SolverConfig, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng([config.seed, salt])


# ---------------------------------------------------------------------------
# exact quantities


def mutual_information(c: Channel, rho) -> float:
    """``H(rho) + H(Phi(rho)) - H(comp(rho))`` in bits."""
    rho = _as_state(rho)
    comp = complementary(c)
    val = _entropy_nat(rho) + _entropy_nat(apply(c, rho)) - _entropy_nat(apply(comp, rho))
    return float(max(_bits(val), 0.0))


def coherent_information(c: Channel, rho) -> float:
    rho = _as_state(rho)
    return mutual_information(c, rho) - entropy(rho)


def output_chi(c: Channel, ens: Ensemble) -> float:
    """Holevo quantity of the image ensemble ``{p_i, Phi(rho_i)}`` in bits."""
    outs = np.array([apply(c, s) for s in ens.matrices()])
    bar = np.einsum("i,ijk->jk", ens.weights, outs)
    return float(_bits(_entropy_nat(bar) - np.dot(ens.weights, _entropy_nat(outs))))


# ---------------------------------------------------------------------------
# convex roof of the output entropy


def _roof_objective(c: Channel, a: np.ndarray, t: np.ndarray, with_grad: bool = True):
    """Average output entropy of the decomposition ``psi_i = A t_i`` (nats)."""
    psis = (a @ t).T  # rows are unnormalized members
    pis = np.real(np.einsum("ij,ij->i", psis.conj(), psis))
    outs = apply_vectors(c, psis)
    live = pis > 1e-300
    safe_pi = np.where(live, pis, 1.0)
    val = float(np.sum(_entropy_nat(outs)) + np.sum(np.where(live, pis * np.log(safe_pi), 0.0)))
    if not with_grad:
        return val, None
    normed = outs / safe_pi[:, None, None]
    ms = -_adjoint_many(c, _log_psd(normed))
    ms[~live] = 0.0
    grad_cols = 2 * np.einsum("ji,njk,nk->in", a.conj(), ms, psis)
    return val, grad_cols


def _stiefel_rows(t: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(t, full_matrices=False)
    return u @ vh


def _tangent(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    s = g @ t.conj().T
    return g - (s + s.conj().T) / 2 @ t


def _riemannian_descent(fun, t0: np.ndarray, max_iters: int, grad_tol: float = 1e-10):
    """Armijo-backtracked Riemannian gradient descent on ``{T : T T^* = I}``."""
    t = t0
    val, g = fun(t, True)
    step = 1.0
    gnorm = np.inf
    it = 0
    stall = 0
    for it in range(1, max_iters + 1):
        d = -_tangent(t, g)
        gnorm = float(np.linalg.norm(d))
        if gnorm < grad_tol:
            break
        step = min(step * 2.0, 1e3)
        while True:
            cand = _stiefel_rows(t + step * d)
            cval, _ = fun(cand, False)
            if cval <= val - 1e-4 * step * gnorm**2 or step < 1e-14:
                break
            step *= 0.5
        if step < 1e-14:
            break
        improvement = val - cval
        t = cand
        val, g = fun(t, True)
        stall = stall + 1 if improvement < 1e-14 * max(1.0, abs(val)) else 0
        if stall >= 10:
            break
    return t, val, gnorm, it


def _decomposition_factor(rho: np.ndarray):
    vals, vecs = np.linalg.eigh(rho)
    keep = vals > RANK_CUTOFF
    return vecs[:, keep] * np.sqrt(vals[keep])


def _decomposition_ensemble(a: np.ndarray, t: np.ndarray) -> Ensemble:
    psis = (a @ t).T
    pis = np.real(np.einsum("ij,ij->i", psis.conj(), psis))
    keep = pis > 1e-15
    return Ensemble.from_vectors(pis[keep] / pis[keep].sum(), psis[keep])


def roof_output_entropy(c: Channel, rho, m: Optional[int] = None,
                        config: SolverConfig = DEFAULT_CONFIG) -> CapacityReport:
    """Minimal average output entropy over pure decompositions of ``rho``.

    Decompositions of size ``m`` are ``psi_i = sqrt(rho) t_i`` with
    ``T T^* = I_r``; the average output entropy is minimized over that
    manifold from ``config.restarts`` starting points (the eigen-decomposition
    first, then Haar-random frames).
    """
    rho = _as_state(rho)
    a = _decomposition_factor(rho)
    r = a.shape[1]
    m = r * r if m is None else m
    if m < r:
        raise ParameterError(f"ensemble size {m} is below the rank {r} of rho")
    out_entropy = _bits(_entropy_nat(apply(c, rho)))

    def fun(t, with_grad):
        return _roof_objective(c, a, t, with_grad)

    rng = _rng(config, salt=11)
    best = None
    for restart in range(max(config.restarts, 1)):
        if restart == 0:
            t0 = np.zeros((r, m), dtype=complex)
            t0[:, :r] = np.eye(r)
        else:
            z = rng.standard_normal((r, m)) + 1j * rng.standard_normal((r, m))
            t0 = _stiefel_rows(z)
        if r == 1 and m == 1:
            t, val, gnorm, its = t0, fun(t0, False)[0], 0.0, 0
        else:
            t, val, gnorm, its = _riemannian_descent(fun, t0, config.roof_max_iters)
        if best is None or val < best[1] - 1e-13:
            best = (t, val, gnorm, its, restart)
    t, val, gnorm, its, idx = best
    value = float(min(max(_bits(val), 0.0), out_entropy))
    grad_bits = float(_bits(gnorm))
    return CapacityReport(
        value=value,
        witness=_decomposition_ensemble(a, t),
        certificate_residual=grad_bits,
        restarts_used=max(config.restarts, 1),
        converged=grad_bits <= max(config.cert_tol, 1e-6) or its < config.roof_max_iters,
        details={"best_restart": idx, "iterations": its, "ensemble_size": m},
    )


def constrained_holevo(c: Channel, rho, m: Optional[int] = None,
                       config: SolverConfig = DEFAULT_CONFIG) -> CapacityReport:
    """Holevo capacity at a fixed average state: ``H(Phi(rho)) - roof(rho)``."""
    rho = _as_state(rho)
    roof = roof_output_entropy(c, rho, m, config)
    h_out = _bits(_entropy_nat(apply(c, rho)))
    value = float(min(max(h_out - roof.value, 0.0), h_out))
    return CapacityReport(
        value=value,
        witness=roof.witness,
        certificate_residual=roof.certificate_residual,
        restarts_used=roof.restarts_used,
        converged=roof.converged,
        details={**roof.details, "roof": roof.value, "output_entropy": float(h_out)},
    )


def delta_gap(c: Channel, rho, config: SolverConfig = DEFAULT_CONFIG) -> CapacityReport:
    """``H(rho) - C(comp, rho)``; also checks ``I = C(Phi, rho) + Delta``."""
    rho = _as_state(rho)
    comp_holevo = constrained_holevo(complementary(c), rho, config=config)
    holevo = constrained_holevo(c, rho, config=config)
    mi = mutual_information(c, rho)
    delta = max(entropy(rho) - comp_holevo.value, 0.0)
    identity_residual = abs(mi - holevo.value - delta)
    return CapacityReport(
        value=float(delta),
        witness=comp_holevo.witness,
        certificate_residual=float(identity_residual),
        restarts_used=comp_holevo.restarts_used,
        converged=comp_holevo.converged and holevo.converged,
        details={"mutual_information": mi, "holevo_at_rho": holevo.value,
                 "complementary_holevo_at_rho": comp_holevo.value},
    )


# ---------------------------------------------------------------------------
# Holevo capacity


def _divergences(c: Channel, vecs: np.ndarray, log_bar: np.ndarray):
    """``D(Phi(v v^*) || bar)`` in nats for unit rows ``v``, plus the outputs."""
    outs = apply_vectors(c, vecs)
    ent = _entropy_nat(outs)
    cross = np.real(np.einsum("nij,ji->n", outs, log_bar))
    return -ent - cross, outs


def _chi_of(c: Channel, vecs: np.ndarray, p: np.ndarray, energies=None, nu: float = 0.0):
    outs = apply_vectors(c, vecs)
    bar = np.einsum("n,nij->ij", p, outs)
    chi = float(_entropy_nat(bar) - np.dot(p, _entropy_nat(outs)))
    if energies is not None and nu:
        chi -= nu * float(np.dot(p, energies))
    return chi, outs, bar


def _energies(vecs: np.ndarray, h_op) -> np.ndarray:
    if h_op is None:
        return np.zeros(len(vecs))
    return np.real(np.einsum("ni,ij,nj->n", vecs.conj(), h_op, vecs))


def _normalize_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _holevo_run(c: Channel, vecs: np.ndarray, p: np.ndarray, max_iters: int,
                h_op=None, nu: float = 0.0):
    """Alternating weight (Blahut-Arimoto) and state (sphere gradient) updates.

    Maximizes ``chi - nu * sum_i p_i <psi_i|H|psi_i>``.
    """
    energies = _energies(vecs, h_op)
    obj, outs, bar = _chi_of(c, vecs, p, energies, nu)
    step = 0.5
    stall = 0
    it = 0
    for it in range(1, max_iters + 1):
        prev = obj
        # weight update
        log_bar = _log_psd(bar)
        div, _ = _divergences(c, vecs, log_bar)
        expo = div - nu * energies
        expo -= expo.max()
        p = p * np.exp(expo)
        p /= p.sum()
        p[p < 1e-15] = 0.0
        p /= p.sum()
        obj, outs, bar = _chi_of(c, vecs, p, energies, nu)

        # state update: ascend D(Phi(psi_i) || bar) - nu <psi_i|H|psi_i>
        log_bar = _log_psd(bar)
        log_outs = _log_psd(outs)
        ops = _adjoint_many(c, log_outs - log_bar[None])
        if h_op is not None and nu:
            ops = ops - nu * h_op[None]
        g = np.einsum("nij,nj->ni", ops, vecs)
        g = g - np.real(np.einsum("ni,ni->n", vecs.conj(), g))[:, None] * vecs
        g[p == 0] = 0.0
        gnorm2 = float(np.real(np.vdot(g, g)))
        if gnorm2 > 1e-30:
            step = min(step * 2.0, 10.0)
            while step > 1e-12:
                cand = _normalize_rows(vecs + step * g)
                cand_e = _energies(cand, h_op)
                cobj, couts, cbar = _chi_of(c, cand, p, cand_e, nu)
                if cobj >= obj:
                    vecs, energies, obj, outs, bar = cand, cand_e, cobj, couts, cbar
                    break
                step *= 0.5
        # chi is flat to second order around an optimum, so stalling of the
        # objective alone stops too early; the state gradient must vanish too
        if obj - prev < 1e-13 and gnorm2 < 1e-20:
            stall += 1
            if stall >= 20:
                break
        else:
            stall = 0
    return vecs, p, obj, it


def _max_divergence(c: Channel, log_bar: np.ndarray, starts: np.ndarray, h_op=None,
                    nu: float = 0.0, iters: int = 200):
    """Locally maximize ``D(Phi(phi) || bar) - nu <phi|H|phi>`` from several starts (nats)."""
    vecs = starts.copy()

    def score(v):
        d, _ = _divergences(c, v, log_bar)
        return d - nu * _energies(v, h_op)

    vals = score(vecs)
    steps = np.full(len(vecs), 0.5)
    for _ in range(iters):
        outs = apply_vectors(c, vecs)
        ops = _adjoint_many(c, _log_psd(outs) - log_bar[None])
        if h_op is not None and nu:
            ops = ops - nu * h_op[None]
        g = np.einsum("nij,nj->ni", ops, vecs)
        g = g - np.real(np.einsum("ni,ni->n", vecs.conj(), g))[:, None] * vecs
        if np.abs(g).max() < 1e-12:
            break
        steps = np.minimum(steps * 2, 10.0)
        moved = np.zeros(len(vecs), dtype=bool)
        for _ in range(40):
            cand = _normalize_rows(vecs + steps[:, None] * g)
            cvals = score(cand)
            ok = (cvals >= vals) & ~moved
            vecs[ok] = cand[ok]
            vals[ok] = cvals[ok]
            moved |= ok
            steps[~moved] *= 0.5
            if moved.all():
                break
    return vecs, vals


def _holevo_certificate(c: Channel, vecs: np.ndarray, p: np.ndarray, value_nat: float,
                        config: SolverConfig, h_op=None, nu: float = 0.0, bound: float = 0.0):
    """Upper bound minus value, from the maximal-divergence condition (bits).

    For any average ``bar`` and ``nu >= 0`` the constrained capacity is at
    most ``max_phi [D(Phi(phi)||Phi(bar)) - nu <phi|H|phi>] + nu * bound``.
    The maximum is estimated over Haar-random probes plus the ensemble
    members, then locally refined from the best candidates.
    """
    outs = apply_vectors(c, vecs)
    bar = np.einsum("n,nij->ij", p, outs)
    log_bar = _log_psd(bar)
    rng = _rng(config, salt=23)
    probes = rng.standard_normal((config.probe_count, c.dim_in)) + 1j * rng.standard_normal(
        (config.probe_count, c.dim_in)
    )
    probes = np.vstack([_normalize_rows(probes), vecs[p > 0]])
    div, pouts = _divergences(c, probes, log_bar)
    # support leakage of a probe output means an infinite divergence
    vals_bar, vecs_bar = _eigh_batch(bar)
    kernel = vecs_bar[:, vals_bar <= RANK_CUTOFF]
    if kernel.shape[1]:
        leak = np.real(np.einsum("ia,nij,ja->n", kernel.conj(), pouts, kernel))
        if leak.max() > 1e-9:
            return float("inf")
    score = div - nu * _energies(probes, h_op)
    top = probes[np.argsort(score)[-8:]]
    _, refined = _max_divergence(c, log_bar, top, h_op, nu)
    upper = max(score.max(), refined.max()) + nu * bound
    return float(_bits(upper - value_nat))


def _initial_ensembles(c: Channel, config: SolverConfig, size: int, rng):
    d = c.dim_in
    for restart in range(max(config.restarts, 1)):
        if restart == 0:
            vecs = np.zeros((size, d), dtype=complex)
            for i in range(size):
                if i < d:
                    vecs[i, i] = 1.0
                else:
                    vecs[i] = random_pure_vector(d, rng)
        else:
            vecs = np.array([random_pure_vector(d, rng) for _ in range(size)])
        yield vecs, np.full(size, 1.0 / size)


def _to_ensemble(vecs: np.ndarray, p: np.ndarray) -> Ensemble:
    keep = p > 0
    return Ensemble.from_vectors(p[keep] / p[keep].sum(), vecs[keep])


def holevo_capacity(c: Channel, config: SolverConfig = DEFAULT_CONFIG,
                    ensemble_size: Optional[int] = None) -> CapacityReport:
    """Maximal output Holevo quantity over input ensembles of pure states.

    ``details["ensembles"]`` keeps the final ``(chi, Ensemble)`` of every
    restart, which :func:`chi_essential_subspace` uses.
    """
    size = ensemble_size or max(c.dim_in**2, 2)
    rng = _rng(config, salt=5)
    runs = []
    for vecs, p in _initial_ensembles(c, config, size, rng):
        vecs, p, obj, its = _holevo_run(c, vecs, p, config.holevo_max_iters)
        runs.append((obj, vecs, p, its))
    best_idx = max(range(len(runs)), key=lambda i: (runs[i][0], -i))
    obj, vecs, p, its = runs[best_idx]
    cert = _holevo_certificate(c, vecs, p, obj, config)
    value = max(float(_bits(obj)), 0.0)
    return CapacityReport(
        value=value,
        witness=_to_ensemble(vecs, p),
        certificate_residual=cert,
        restarts_used=len(runs),
        converged=cert <= config.cert_tol,
        details={
            "best_restart": best_idx,
            "iterations": its,
            "ensembles": [(float(_bits(o)), _to_ensemble(v, q)) for o, v, q, _ in runs],
        },
    )


def chi_essential_subspace(c: Channel, eps: Optional[float] = None,
                           config: SolverConfig = DEFAULT_CONFIG,
                           report: Optional[CapacityReport] = None,
                           cutoff: Optional[float] = None, weight_cutoff: float = 1e-6) -> np.ndarray:
    """Orthonormal basis (columns) of the span of near-optimal ensemble members.

    Every restart ensemble is pruned of members with weight below
    ``weight_cutoff`` (these are remnants the weight iteration has not yet
    driven to zero).  Pruned ensembles with ``chi >= C - eps`` contribute
    their members, scaled by the square roots of their weights, and the
    span is read off an SVD.  A squared singular value is the total
    probability mass the ensembles put along that direction, so the default
    ``cutoff = sqrt(eps)`` discards directions carrying less than ``eps``.
    """
    eps = config.essential_eps if eps is None else eps
    cutoff = np.sqrt(eps) if cutoff is None else cutoff
    report = holevo_capacity(c, config) if report is None else report
    rows = []
    for _, ens in report.details["ensembles"]:
        keep = ens.weights >= weight_cutoff
        if not keep.any():
            continue
        pruned = Ensemble(ens.weights[keep] / ens.weights[keep].sum(),
                          [s for s, k in zip(ens.states, keep) if k])
        if output_chi(c, pruned) < report.value - eps:
            continue
        for w, s in zip(pruned.weights, pruned.states):
            vals, vecs = np.linalg.eigh(s.mat)
            rows.append(np.sqrt(w) * vecs[:, -1] * np.sqrt(max(vals[-1], 0.0)))
    if not rows:
        raise RuntimeError("no near-optimal ensemble survived pruning; lower weight_cutoff")
    u, sv, _ = np.linalg.svd(np.array(rows).T, full_matrices=False)
    return u[:, sv > cutoff]


def essential_subspace_sweep(c: Channel, eps_values, config: SolverConfig = DEFAULT_CONFIG) -> dict:
    """Dimension of the essential subspace for each ``eps`` (stability check)."""
    report = holevo_capacity(c, config)
    return {float(e): chi_essential_subspace(c, e, config, report).shape[1] for e in eps_values}


# ---------------------------------------------------------------------------
# entanglement-assisted capacity (Frank-Wolfe)


def _mi_nat(c: Channel, comp: Channel, rho: np.ndarray) -> float:
    return float(_entropy_nat(rho) + _entropy_nat(apply(c, rho)) - _entropy_nat(apply(comp, rho)))


def mi_gradient(c: Channel, comp: Channel, rho: np.ndarray) -> np.ndarray:
    """Gradient of ``rho -> I(Phi, rho)`` (nats) as a Hermitian matrix.

    ``-log rho - Phi^*(log Phi(rho)) + comp^*(log comp(rho)) - I``.
    """
    g = (
        -_log_psd(rho)
        - adjoint_map(c, _log_psd(apply(c, rho)))
        + adjoint_map(comp, _log_psd(apply(comp, rho)))
        - np.eye(len(rho))
    )
    return (g + g.conj().T) / 2


def _top_state(g: np.ndarray):
    vals, vecs = np.linalg.eigh(g)
    v = vecs[:, -1]
    return np.outer(v, v.conj()), float(vals[-1])


def _constrained_top_state(g: np.ndarray, k: EnergyConstraint, iters: int = 80):
    """Maximize ``Tr G s`` over states with ``Tr H s <= h``.

    Returns the maximizer (a mixture of at most two pure states) and the
    Lagrangian upper bound ``min_nu lambda_max(G - nu H) + nu h``.
    """
    h_op, h = k.h_operator, k.bound

    def top(nu):
        vals, vecs = np.linalg.eigh(g - nu * h_op)
        v = vecs[:, -1]
        return v, float(vals[-1]), float(np.real(v.conj() @ h_op @ v))

    v0, lam0, e0 = top(0.0)
    if e0 <= h:
        return np.outer(v0, v0.conj()), lam0
    upper = lam0
    lo, hi = 0.0, 1.0
    v_lo, e_lo = v0, e0
    while True:
        v_hi, lam_hi, e_hi = top(hi)
        upper = min(upper, lam_hi + hi * h)
        if e_hi <= h or hi > 1e12:
            break
        lo, v_lo, e_lo = hi, v_hi, e_hi
        hi *= 2.0
    for _ in range(iters):
        mid = (lo + hi) / 2
        v, lam, e = top(mid)
        upper = min(upper, lam + mid * h)
        if e > h:
            lo, v_lo, e_lo = mid, v, e
        else:
            hi, v_hi, e_hi = mid, v, e
    if e_lo - e_hi <= 1e-15:
        t = 0.0
    else:
        t = (h - e_hi) / (e_lo - e_hi)
    t = min(max(t, 0.0), 1.0)
    s = t * np.outer(v_lo, v_lo.conj()) + (1 - t) * np.outer(v_hi, v_hi.conj())
    return s, upper


def _feasible_start(d: int, k: Optional[EnergyConstraint]) -> np.ndarray:
    mixed = np.eye(d, dtype=complex) / d
    if k is None or k.energy(mixed) <= k.bound:
        return mixed
    vals, vecs = np.linalg.eigh(k.h_operator)
    ground = np.outer(vecs[:, 0], vecs[:, 0].conj())
    e_mixed, e_ground = k.energy(mixed), float(vals[0])
    target = (k.bound + e_ground) / 2
    t = (target - e_ground) / (e_mixed - e_ground)
    return t * mixed + (1 - t) * ground


def _away_direction(g: np.ndarray, rho: np.ndarray, k: Optional[EnergyConstraint]):
    """Away step on the spectral atoms of ``rho``.

    Moving mass off the eigenvector with the worst gradient value lets the
    iterate reach the boundary exactly, which plain Frank-Wolfe only
    approaches at a sublinear rate.
    """
    vals, vecs = np.linalg.eigh(rho)
    support = vals > 1e-12
    if support.sum() < 2:
        return None
    scores = np.real(np.einsum("ij,ik,kj->j", vecs.conj(), g, vecs))
    scores = np.where(support, scores, np.inf)
    i = int(np.argmin(scores))
    lam, v = float(vals[i]), vecs[:, i]
    atom = np.outer(v, v.conj())
    # stop just short of the face: the gradient is only reliable in the interior
    gamma_max = (1.0 - 1e-6) * lam / (1.0 - lam)
    if k is not None:
        e_rho, e_atom = k.energy(rho), k.energy(atom)
        if e_rho > e_atom:
            gamma_max = min(gamma_max, max(k.bound - e_rho, 0.0) / (e_rho - e_atom))
    gain = float(np.real(np.trace(g @ rho))) - scores[i]
    return rho - atom, gamma_max, gain


def _frank_wolfe_mi(c: Channel, config: SolverConfig, k: Optional[EnergyConstraint] = None):
    comp = complementary(c)
    rho = _feasible_start(c.dim_in, k)
    val = _mi_nat(c, comp, rho)
    gap = np.inf
    it = 0
    for it in range(1, config.fw_max_iters + 1):
        g = mi_gradient(c, comp, rho)
        if k is None:
            s, upper = _top_state(g)
        else:
            s, upper = _constrained_top_state(g, k)
        current = float(np.real(np.trace(g @ rho)))
        gap = upper - current
        if _bits(gap) <= config.cert_tol * 0.1:
            break
        direction, gamma_max = s - rho, 1.0
        away = _away_direction(g, rho, k)
        if away is not None and away[2] > float(np.real(np.trace(g @ direction))) and away[1] > 0:
            direction, gamma_max = away[0], away[1]

        def neg(gamma):
            return -_mi_nat(c, comp, rho + gamma * direction)

        res = minimize_scalar(neg, bounds=(0.0, gamma_max), method="bounded", options={"xatol": 1e-10})
        gamma = float(res.x)
        cand_val = -float(res.fun)
        end_val = -neg(gamma_max)
        if end_val >= cand_val:
            gamma, cand_val = gamma_max, end_val
        if cand_val < val:
            gamma = gamma_max * 2.0 / (it + 2.0)
            cand_val = _mi_nat(c, comp, rho + gamma * direction)
            if cand_val < val:
                break
        rho = rho + gamma * direction
        rho = (rho + rho.conj().T) / 2
        val = cand_val
    # final gap at the returned iterate
    g = mi_gradient(c, comp, rho)
    upper = _top_state(g)[1] if k is None else _constrained_top_state(g, k)[1]
    gap = upper - float(np.real(np.trace(g @ rho)))
    return rho, val, max(float(_bits(gap)), 0.0), it


def ea_capacity(c: Channel, config: SolverConfig = DEFAULT_CONFIG) -> CapacityReport:
    """Maximal quantum mutual information over input states (Frank-Wolfe with away steps)."""
    rho, val, gap, its = _frank_wolfe_mi(c, config)
    return CapacityReport(
        value=max(float(_bits(val)), 0.0),
        witness=DensityMatrix(rho / np.trace(rho).real),
        certificate_residual=gap,
        restarts_used=1,
        converged=gap <= config.cert_tol,
        details={"iterations": its},
    )


# ---------------------------------------------------------------------------
# energy-constrained capacities


def _merge(vecs_a, p_a, vecs_b, p_b, t):
    vecs = np.vstack([vecs_a, vecs_b])
    p = np.concatenate([t * p_a, (1 - t) * p_b])
    keep = p > 0
    return vecs[keep], p[keep]


def _penalized_holevo(c: Channel, nu: float, h_op, config: SolverConfig, warm=None,
                      fresh: bool = True):
    size = max(c.dim_in**2, 2)
    rng = _rng(config, salt=31)
    best = None
    starts = list(warm or [])
    if fresh or not starts:
        starts += list(_initial_ensembles(c, config.replace(restarts=max(config.restarts // 4, 1)), size, rng))
    for vecs, p in starts:
        vecs, p, obj, _ = _holevo_run(c, vecs, p, config.holevo_max_iters, h_op, nu)
        if best is None or obj > best[2] + 1e-13:
            best = (vecs, p, obj)
    vecs, p, obj = best
    return vecs, p, float(np.dot(p, _energies(vecs, h_op)))


def constrained_holevo_capacity(c: Channel, k: EnergyConstraint,
                                config: SolverConfig = DEFAULT_CONFIG) -> CapacityReport:
    """Holevo capacity over ensembles whose average obeys ``Tr H rho <= h``.

    Lagrangian relaxation: for a multiplier ``nu`` the penalized objective
    ``chi - nu Tr H rho`` is maximized by the alternating solver; ``nu`` is
    bisected until the average energy meets the bound, and the two bracketing
    ensembles are merged so the energy is met exactly.
    """
    h_op, h = k.h_operator, k.bound
    vecs, p, e = _penalized_holevo(c, 0.0, h_op, config)
    nus = [0.0]
    if e > h + 1e-12:
        lo, hi = (vecs, p, e, 0.0), None
        nu = 1.0
        while hi is None:
            v, q, en = _penalized_holevo(c, nu, h_op, config, warm=[(lo[0], lo[1])])
            if en <= h:
                hi = (v, q, en, nu)
            else:
                lo = (v, q, en, nu)
                nu *= 2.0
                if nu > 1e8:
                    raise RuntimeError("could not bracket the energy multiplier")
        # inside the bracket, warm starts from both ends replace fresh
        # restarts; the final certificate guards this shortcut
        for _ in range(30):
            if hi[3] - lo[3] <= 1e-4 * max(1.0, hi[3]):
                break
            mid = (lo[3] + hi[3]) / 2
            v, q, en = _penalized_holevo(c, mid, h_op, config, warm=[(lo[0], lo[1]), (hi[0], hi[1])], fresh=False)
            if en <= h:
                hi = (v, q, en, mid)
            else:
                lo = (v, q, en, mid)
        t = 0.0 if lo[2] - hi[2] <= 1e-15 else (h - hi[2]) / (lo[2] - hi[2])
        t = min(max(t, 0.0), 1.0)
        vecs, p = _merge(lo[0], lo[1], hi[0], hi[1], t)
        nus = [lo[3], hi[3]]
    chi, _, _ = _chi_of(c, vecs, p)
    certs = [_holevo_certificate(c, vecs, p, chi, config, h_op, nu, h) for nu in nus]
    cert = min(certs)
    ens = _to_ensemble(vecs, p)
    return CapacityReport(
        value=max(float(_bits(chi)), 0.0),
        witness=ens,
        certificate_residual=cert,
        restarts_used=config.restarts,
        converged=cert <= max(config.cert_tol, 1e-3),
        details={"multipliers": nus, "average_energy": float(np.dot(p, _energies(vecs, h_op)))},
    )


def constrained_ea_capacity(c: Channel, k: EnergyConstraint,
                            config: SolverConfig = DEFAULT_CONFIG) -> CapacityReport:
    rho, val, gap, its = _frank_wolfe_mi(c, config, k)
    return CapacityReport(
        value=max(float(_bits(val)), 0.0),
        witness=DensityMatrix(rho / np.trace(rho).real),
        certificate_residual=gap,
        restarts_used=1,
        converged=gap <= config.cert_tol,
        details={"iterations": its, "average_energy": k.energy(rho)},
    )


def constrained_capacities(c: Channel, k: EnergyConstraint,
                           config: SolverConfig = DEFAULT_CONFIG) -> tuple[CapacityReport, CapacityReport]:
    """``(Holevo, entanglement-assisted)`` capacities under ``Tr H rho <= h``."""
    if k.h_operator.shape != (c.dim_in, c.dim_in):
        raise ParameterError("H must act on the channel input")
    return constrained_holevo_capacity(c, k, config), constrained_ea_capacity(c, k, config)
