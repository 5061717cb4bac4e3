"""Brute-force reference computations, written without the package under test.

Used to produce the frozen reference values in the test suite and, where
cheap, to cross-check solver output live.  Everything here is in bits.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize, minimize_scalar


def vn_entropy(rho) -> float:
    vals = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    vals = vals[vals > 1e-15]
    return float(-(vals * np.log2(vals)).sum())


def h2(x: float) -> float:
    return vn_entropy(np.diag([x, 1 - x]))


def depolarize(rho, p):
    return (1 - p) * rho + p * np.trace(rho) * np.eye(2) / 2


def damp(rho, gamma):
    out = np.zeros((2, 2), dtype=complex)
    out[0, 0] = rho[0, 0] + gamma * rho[1, 1]
    out[1, 1] = (1 - gamma) * rho[1, 1]
    out[0, 1] = np.sqrt(1 - gamma) * rho[0, 1]
    out[1, 0] = np.conj(out[0, 1])
    return out


def bloch_state(theta, phi):
    v = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    return np.outer(v, v.conj())


def min_output_entropy_grid(channel, n: int = 181) -> float:
    """Minimum output entropy over a Bloch-sphere grid of pure qubit inputs."""
    best = np.inf
    for theta in np.linspace(0, np.pi, n):
        for phi in np.linspace(0, 2 * np.pi, max(2 * n // 3, 4), endpoint=False):
            best = min(best, vn_entropy(channel(bloch_state(theta, phi))))
    return best


def unital_qubit_holevo(channel, n: int = 181) -> float:
    """For a unital qubit channel the capacity is ``1 - min output entropy``."""
    return 1.0 - min_output_entropy_grid(channel, n)


def joint_output_entropy(kraus, rho) -> float:
    """Entropy of ``(Phi (x) id)(|psi><psi|)`` for a purification ``psi`` of ``rho``.

    Equals the entropy of the complementary output, computed here without
    building a complementary channel.
    """
    vals, vecs = np.linalg.eigh(rho)
    d = len(rho)
    psi = sum(np.sqrt(max(v, 0)) * np.kron(vecs[:, i], np.eye(d)[i]) for i, v in enumerate(vals))
    joint = np.outer(psi, psi.conj())
    dout = kraus[0].shape[0]
    out = sum(np.kron(k, np.eye(d)) @ joint @ np.kron(k, np.eye(d)).conj().T for k in kraus)
    assert out.shape == (dout * d, dout * d)
    return vn_entropy(out)


def mutual_information(kraus, rho) -> float:
    out = sum(k @ rho @ k.conj().T for k in kraus)
    return vn_entropy(rho) + vn_entropy(out) - joint_output_entropy(kraus, rho)


def diagonal_scan(fun, lo: float = 0.0, hi: float = 1.0) -> tuple[float, float]:
    """Maximize ``fun(t)`` over ``[lo, hi]`` (dense grid, then bounded refinement)."""
    grid = np.linspace(lo, hi, 2001)
    vals = [fun(t) for t in grid]
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda t: -fun(t), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12})
    if -res.fun >= vals[i]:
        return float(-res.fun), float(res.x)
    return float(vals[i]), float(grid[i])


def general_state_max(fun, d: int, starts: int = 20, seed: int = 0) -> float:
    """Maximize ``fun(rho)`` over all states via ``rho = A A^* / Tr`` (multi-start BFGS)."""
    rng = np.random.default_rng(seed)

    def unpack(x):
        a = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
        r = a @ a.conj().T
        return r / np.trace(r).real

    best = -np.inf
    for _ in range(starts):
        x0 = rng.standard_normal(2 * d * d)
        res = minimize(lambda x: -fun(unpack(x)), x0, method="BFGS", options={"gtol": 1e-10})
        best = max(best, -res.fun)
    return float(best)


def cq_holevo(sigmas, starts: int = 20, seed: int = 0) -> float:
    """``max_p H(sum p_k sigma_k) - sum p_k H(sigma_k)`` over the simplex (softmax, multi-start)."""
    rng = np.random.default_rng(seed)
    ent = np.array([vn_entropy(s) for s in sigmas])

    def chi(z):
        p = np.exp(z - z.max())
        p /= p.sum()
        return vn_entropy(sum(pk * s for pk, s in zip(p, sigmas))) - p @ ent

    best = -np.inf
    for i in range(starts):
        z0 = np.zeros(len(sigmas)) if i == 0 else rng.standard_normal(len(sigmas))
        res = minimize(lambda z: -chi(z), z0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 20000})
        best = max(best, -res.fun)
    return float(best)


def two_state_holevo(channel, starts: int = 30, seed: int = 0) -> float:
    """Best output chi over two-member pure qubit ensembles (enough for qubit channels
    with an optimal pair, e.g. amplitude damping)."""
    rng = np.random.default_rng(seed)

    def chi(x):
        t1, f1, t2, f2, w = x
        q = 1 / (1 + np.exp(-w))
        o1, o2 = channel(bloch_state(t1, f1)), channel(bloch_state(t2, f2))
        return vn_entropy(q * o1 + (1 - q) * o2) - q * vn_entropy(o1) - (1 - q) * vn_entropy(o2)

    best = -np.inf
    for _ in range(starts):
        x0 = np.concatenate([rng.uniform(0, np.pi, 1), rng.uniform(0, 2 * np.pi, 1),
                             rng.uniform(0, np.pi, 1), rng.uniform(0, 2 * np.pi, 1), [0.0]])
        res = minimize(lambda x: -chi(x), x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
        best = max(best, -res.fun)
    return float(best)
