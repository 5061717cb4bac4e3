"""JSON encodings of matrices, channels, states and results."""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Any

import numpy as np

from .channels import Channel, CqStructure
from .qcore import DensityMatrix, Ensemble
from .zoo import zoo


class SpecError(ValueError):
    """Malformed channel, state or operator description."""


COMPLETENESS_TOL = 1e-8


def matrix_to_json(m) -> list:
    """Nested lists with every entry written as an ``[re, im]`` pair."""
    m = np.asarray(m, dtype=complex)
    return np.stack([m.real, m.imag], axis=-1).tolist()


def matrix_from_json(obj, ndim: int = 2) -> np.ndarray:
    """Decode an array given as ``[re, im]`` pairs, as ``{"re": ..., "im": ...}``,
    or as plain real numbers."""
    try:
        if isinstance(obj, dict):
            if "re" not in obj:
                raise SpecError("complex arrays need an 're' field")
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise SpecError("'re' and 'im' parts differ in shape")
            out = re + 1j * im
        else:
            raw = np.asarray(obj, dtype=float)
            if raw.ndim == ndim + 1 and raw.shape[-1] == 2:
                out = raw[..., 0] + 1j * raw[..., 1]
            else:
                out = raw.astype(complex)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"not a numeric array: {exc}") from exc
    if out.ndim != ndim:
        raise SpecError(f"expected a {ndim}-dimensional array, got shape {out.shape}")
    return out


def channel_to_spec(c: Channel) -> dict:
    return {
        "name": c.name,
        "dim_in": c.dim_in,
        "dim_out": c.dim_out,
        "trace_preserving": c.trace_preserving,
        "kraus": [matrix_to_json(k) for k in c.kraus],
    }


def channel_from_spec(spec: dict) -> Channel:
    """Build a channel from ``{"kraus": [...]}`` or ``{"zoo": name, "params": {...}}``.

    Kraus sets whose completeness relation is off by at most
    :data:`COMPLETENESS_TOL` are renormalized; larger violations are rejected
    with the residual in the message.
    """
    if not isinstance(spec, dict):
        raise SpecError("a channel description must be a JSON object")
    if ("kraus" in spec) == ("zoo" in spec):
        raise SpecError("give exactly one of 'kraus' or 'zoo'")
    if "zoo" in spec:
        try:
            return zoo(spec["zoo"], **(spec.get("params") or {}))
        except KeyError as exc:
            raise SpecError(str(exc.args[0]) if exc.args else str(exc)) from exc
    kraus = spec["kraus"]
    if not isinstance(kraus, list) or not kraus:
        raise SpecError("'kraus' must be a non-empty list of matrices")
    ops = [matrix_from_json(k) for k in kraus]
    if len({k.shape for k in ops}) != 1:
        raise SpecError("Kraus operators must share one shape")
    ops = np.array(ops)
    dim_out, dim_in = ops.shape[1:]
    for key, actual in (("dim_in", dim_in), ("dim_out", dim_out)):
        if key in spec and spec[key] != actual:
            raise SpecError(f"{key} = {spec[key]} does not match the Kraus operators ({actual})")
    tp = bool(spec.get("trace_preserving", True))
    gram = np.einsum("kji,kjl->il", ops.conj(), ops)
    if tp:
        residual = float(np.linalg.norm(gram - np.eye(dim_in)))
        if residual > COMPLETENESS_TOL:
            raise SpecError(f"completeness residual {residual:.3e} exceeds {COMPLETENESS_TOL:g}")
        vals, vecs = np.linalg.eigh(gram)
        ops = ops @ ((vecs / np.sqrt(vals)) @ vecs.conj().T)
    elif np.linalg.eigvalsh(gram).max() > 1 + COMPLETENESS_TOL:
        raise SpecError("Kraus operators increase the trace")
    return Channel(ops, trace_preserving=tp, name=spec.get("name", "custom"))


def ensemble_from_spec(spec: dict) -> Ensemble:
    """``{"weights": [...], "vectors": [vector, ...]}`` with vectors encoded like matrices."""
    try:
        weights = np.asarray(spec["weights"], dtype=float)
        vectors = [matrix_from_json(v, ndim=1) for v in spec["vectors"]]
    except (KeyError, TypeError) as exc:
        raise SpecError("an ensemble needs 'weights' and 'vectors'") from exc
    return Ensemble.from_vectors(weights, vectors)


def to_jsonable(obj: Any) -> Any:
    """Recursively convert results into JSON-compatible values."""
    if hasattr(obj, "as_dict") and not isinstance(obj, type):
        return to_jsonable(obj.as_dict())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, DensityMatrix):
        return matrix_to_json(obj.mat)
    if isinstance(obj, Ensemble):
        return {"weights": obj.weights.tolist(), "states": [matrix_to_json(s.mat) for s in obj.states]}
    if isinstance(obj, CqStructure):
        return {"basis": matrix_to_json(obj.basis), "sigmas": [matrix_to_json(s.mat) for s in obj.sigmas],
                "residual": obj.residual}
    if isinstance(obj, Channel):
        return channel_to_spec(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return matrix_to_json(obj)
        return obj.tolist()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        # JSON has no infinities or NaN
        return value if math.isfinite(value) else str(value)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj
