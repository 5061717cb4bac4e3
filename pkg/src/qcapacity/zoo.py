"""Named example channels."""

from __future__ import annotations

import numpy as np

from .channels import Channel, cq_channel, identity_channel, pinching
from .qcore import random_density_matrix, random_unitary


class UnknownChannelError(KeyError):
    pass


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def depolarizing(p: float) -> Channel:
    """Qubit depolarizing channel ``rho -> (1 - p) rho + p I/2``."""
    if not 0 <= p <= 4 / 3:
        raise ValueError("depolarizing parameter must lie in [0, 4/3]")
    ops = [np.sqrt(1 - 3 * p / 4) * PAULI["I"]] + [np.sqrt(p / 4) * PAULI[s] for s in "XYZ"]
    return Channel(ops, name=f"depolarizing(p={p})")


def amplitude_damping(gamma: float) -> Channel:
    if not 0 <= gamma <= 1:
        raise ValueError("damping parameter must lie in [0, 1]")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return Channel([k0, k1], name=f"amplitude_damping(gamma={gamma})")


def cq_random(d: int, seed: int = 0, d_out: int | None = None) -> Channel:
    """c-q channel in the computational basis with random full-rank output states."""
    rng = np.random.default_rng(seed)
    d_out = d if d_out is None else d_out
    sigmas = [random_density_matrix(d_out, rng) for _ in range(d)]
    c = cq_channel(np.eye(d), sigmas)
    c.name = f"cq_random(d={d}, seed={seed})"
    return c


def cq_orthogonal(d: int) -> Channel:
    """c-q channel whose output states are mixed with pairwise orthogonal supports.

    ``sigma_k = 0.7 |2k><2k| + 0.3 |2k+1><2k+1|`` on a ``2d``-dimensional output.
    """
    sigmas = []
    for k in range(d):
        s = np.zeros((2 * d, 2 * d))
        s[2 * k, 2 * k] = 0.7
        s[2 * k + 1, 2 * k + 1] = 0.3
        sigmas.append(s)
    c = cq_channel(np.eye(d), sigmas)
    c.name = f"cq_orthogonal(d={d})"
    return c


def blocksum(d1: int = 2, d2: int = 1, mix: float = 1.0) -> Channel:
    """Noiseless classical ``d1``-symbol channel plus ``d2`` inputs with a constant mixed output.

    Stinespring isometry into ``C^{d1} (x) C^{d_E}``: ``|k> -> |k>|k>`` for
    ``k < d1`` and, for the extra inputs,
    ``|d1 + j> -> a (|1>|e_j> + |0>|f_j>) + b (|1>|g_j> + |0>|h_j>)`` with
    ``a = mix / 2`` and ``2a^2 + 2b^2 = 1``.  The first extra input shares
    ``e_0 = |0>``, ``f_0 = |1>`` with the noiseless block, so coherences
    between the blocks survive and the whole channel is not c-q.  Every
    extra input is sent to ``I/2`` on the two lowest output levels, and a
    pure input leaking into the extra block gets a mixed output at second
    order in the leak, so only the noiseless block carries optimal
    ensembles.
    """
    if d1 < 2 or d2 < 1:
        raise ValueError("blocksum needs d1 >= 2 and d2 >= 1")
    if not 0 < mix < np.sqrt(2):
        raise ValueError("mix must lie in (0, sqrt(2))")
    a = mix / 2
    b = np.sqrt(0.5 - a * a)
    d_env = d1 + 4 * d2
    d_in = d1 + d2
    v = np.zeros((d1, d_env, d_in), dtype=complex)
    for k in range(d1):
        v[k, k, k] = 1.0
    for j in range(d2):
        col = d1 + j
        base = d1 + 4 * j
        e_j, f_j = (0, 1) if j == 0 else (base + 2, base + 3)
        v[1, e_j, col] += a
        v[0, f_j, col] += a
        v[1, base, col] += b
        v[0, base + 1, col] += b
    kraus = np.transpose(v, (1, 0, 2))
    return Channel(kraus, name=f"blocksum(d1={d1}, d2={d2})")


def qc_measurement(povm: str = "trine") -> Channel:
    """Measure a qubit with a rank-one POVM and write the outcome classically."""
    if povm == "trine":
        angles = [0, 2 * np.pi / 3, 4 * np.pi / 3]
        vecs = [np.sqrt(2 / 3) * np.array([np.cos(t / 2), np.sin(t / 2)]) for t in angles]
    elif povm == "bb84":
        s = 1 / np.sqrt(2)
        vecs = [s * np.array(v, dtype=complex) for v in ([1, 0], [0, 1], [s, s], [s, -s])]
    elif povm == "tetrahedral":
        vecs = []
        for n in ([1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]):
            n = np.array(n) / np.sqrt(3)
            theta, phi = np.arccos(n[2]), np.arctan2(n[1], n[0])
            vecs.append(np.sqrt(1 / 2) * np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)]))
    else:
        raise ValueError(f"unknown POVM {povm!r}")
    n = len(vecs)
    ops = []
    for j, m in enumerate(vecs):
        op = np.zeros((n, 2), dtype=complex)
        op[j] = np.conj(m)
        ops.append(op)
    return Channel(ops, name=f"qc_measurement({povm})")


def unitary_conjugated(inner: Channel, u: np.ndarray) -> Channel:
    """``rho -> inner(U rho U^*)``."""
    u = np.asarray(u, dtype=complex)
    return Channel(np.einsum("kij,jl->kil", inner.kraus, u), name=f"unitary_conjugated({inner.name})")


def _unitary_conjugated(inner: str = "cq_random", d: int = 2, seed: int = 0, **inner_params) -> Channel:
    base = zoo(inner, d=d, seed=seed, **inner_params) if inner in ("cq_random",) else zoo(inner, d=d, **inner_params)
    u = random_unitary(base.dim_in, np.random.default_rng(seed + 1000))
    return unitary_conjugated(base, u)


_BUILDERS = {
    "identity": (lambda d=2: identity_channel(int(d)), {"d": 2}),
    "pinching": (lambda d=2: pinching(np.eye(int(d))), {"d": 2}),
    "cq_random": (lambda d=2, seed=0: cq_random(int(d), int(seed)), {"d": 2, "seed": 0}),
    "cq_orthogonal": (lambda d=2: cq_orthogonal(int(d)), {"d": 2}),
    "depolarizing": (lambda p=0.5: depolarizing(float(p)), {"p": 0.5}),
    "amplitude_damping": (lambda gamma=0.2: amplitude_damping(float(gamma)), {"gamma": 0.2}),
    "blocksum": (lambda d1=2, d2=1: blocksum(int(d1), int(d2)), {"d1": 2, "d2": 1}),
    "qc_measurement": (lambda povm="trine": qc_measurement(str(povm)), {"povm": "trine"}),
    "unitary_conjugated": (
        lambda inner="cq_random", d=2, seed=0: _unitary_conjugated(str(inner), int(d), int(seed)),
        {"inner": "cq_random", "d": 2, "seed": 0},
    ),
}


def zoo_names() -> list[str]:
    return sorted(_BUILDERS)


def zoo_defaults(name: str) -> dict:
    if name not in _BUILDERS:
        raise UnknownChannelError(name)
    return dict(_BUILDERS[name][1])


def zoo(name: str, **params) -> Channel:
    """Build a named channel; unknown names or parameters raise."""
    if name not in _BUILDERS:
        raise UnknownChannelError(f"unknown channel {name!r}; known: {', '.join(zoo_names())}")
    builder, defaults = _BUILDERS[name]
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
    c = builder(**params)
    label = ", ".join(f"{k}={v}" for k, v in {**defaults, **params}.items())
    c.name = f"{name}({label})"
    return c


# default sweep used by the global consistency check
ZOO_SWEEP = [
    ("identity", {"d": 2}),
    ("identity", {"d": 3}),
    ("pinching", {"d": 2}),
    ("pinching", {"d": 3}),
    ("cq_random", {"d": 2, "seed": 1}),
    ("cq_random", {"d": 3, "seed": 2}),
    ("cq_orthogonal", {"d": 2}),
    ("depolarizing", {"p": 0.5}),
    ("amplitude_damping", {"gamma": 0.2}),
    ("blocksum", {"d1": 2, "d2": 1}),
    ("qc_measurement", {"povm": "trine"}),
    ("qc_measurement", {"povm": "bb84"}),
    ("unitary_conjugated", {"inner": "cq_random", "d": 2, "seed": 3}),
]
