"""HTTP service exposing the capacity solvers and the criterion checks.

The handler functions (``run_*``) take and return pydantic models and work
in-process; the FastAPI routes are thin wrappers that map invalid input to
HTTP 422.  The command-line client calls the same handlers directly or
posts the same models to a running server.
"""

from __future__ import annotations

import time
from typing import Any, Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .capacity import EnergyConstraint, ea_capacity, holevo_capacity
from .channels import complementary
from .config import DEFAULT_CONFIG, SolverConfig
from .criterion import (
    check_corollary1,
    check_corollary2,
    check_lemma1,
    check_proposition1,
    check_state_criterion,
    check_theorem1,
    lemma1_sides,
)
from .serialize import (
    SpecError,
    channel_from_spec,
    channel_to_spec,
    ensemble_from_spec,
    matrix_from_json,
    to_jsonable,
)
from .structure import detect_cq
from .zoo import zoo, zoo_defaults, zoo_names

LEMMA1_TOL = 1e-8
CHECKS = ("theorem1", "corollary1", "proposition1", "corollary2", "lemma1", "state")


class InvalidRequest(ValueError):
    """Request that cannot be evaluated (maps to HTTP 422 and CLI exit code 3)."""


class ChannelSpec(BaseModel):
    """Either explicit Kraus operators or a zoo entry."""

    kraus: Optional[list[Any]] = None
    zoo: Optional[str] = None
    params: dict[str, Any] = Field(default_factory=dict)
    name: Optional[str] = None
    trace_preserving: bool = True

    @model_validator(mode="after")
    def _one_source(self):
        if (self.kraus is None) == (self.zoo is None):
            raise ValueError("give exactly one of 'kraus' or 'zoo'")
        return self


class SolverOptions(BaseModel):
    seed: Optional[int] = None
    restarts: Optional[int] = Field(default=None, ge=1)
    cert_tol: Optional[float] = Field(default=None, gt=0)
    gap_tol: Optional[float] = Field(default=None, gt=0)
    dim_cap: Optional[int] = Field(default=None, ge=1)
    base: dict[str, Any] = Field(default_factory=dict, description="settings read from a config file")

    def config(self) -> SolverConfig:
        cfg = SolverConfig.from_mapping(self.base) if self.base else DEFAULT_CONFIG
        return cfg.replace(seed=self.seed, restarts=self.restarts, cert_tol=self.cert_tol,
                           gap_tol=self.gap_tol, dim_cap=self.dim_cap)


class ChannelRequest(BaseModel):
    channel: ChannelSpec
    options: SolverOptions = Field(default_factory=SolverOptions)


class CapacityResponse(BaseModel):
    channel: str
    quantity: Literal["holevo", "entanglement_assisted"]
    value: float
    certificate_residual: float
    converged: bool
    restarts_used: int
    witness: Any
    config: dict[str, Any]
    elapsed_seconds: float


class ComplementaryResponse(BaseModel):
    channel: dict[str, Any]
    dim_env: int


class DetectCqResponse(BaseModel):
    channel: str
    accepted: bool
    structure: Optional[dict[str, Any]] = None


class CheckRequest(ChannelRequest):
    gap_tol: Optional[float] = Field(default=None, gt=0)
    h_operator: Optional[Any] = None
    h_bound: Optional[float] = None
    ensemble: Optional[dict[str, Any]] = None
    state: Optional[Any] = None


class CheckResponse(BaseModel):
    check: str
    status: str
    exit_code: int
    verdict: dict[str, Any]
    config: dict[str, Any]
    elapsed_seconds: float


class ZooEntry(BaseModel):
    name: str
    defaults: dict[str, Any]


def _channel(spec: ChannelSpec):
    try:
        return channel_from_spec(spec.model_dump(exclude_none=True))
    except (SpecError, ValueError) as exc:
        raise InvalidRequest(str(exc)) from exc


def _config(options: SolverOptions) -> SolverConfig:
    try:
        return options.config()
    except (TypeError, ValueError) as exc:
        raise InvalidRequest(str(exc)) from exc


def run_capacity(req: ChannelRequest, entanglement_assisted: bool = False) -> CapacityResponse:
    c = _channel(req.channel)
    cfg = _config(req.options)
    start = time.perf_counter()
    solver = ea_capacity if entanglement_assisted else holevo_capacity
    report = solver(c, cfg)
    return CapacityResponse(
        channel=c.name,
        quantity="entanglement_assisted" if entanglement_assisted else "holevo",
        value=report.value,
        certificate_residual=to_jsonable(report.certificate_residual),
        converged=report.converged,
        restarts_used=report.restarts_used,
        witness=to_jsonable(report.witness),
        config=cfg.as_dict(),
        elapsed_seconds=time.perf_counter() - start,
    )


def run_complementary(req: ChannelRequest) -> ComplementaryResponse:
    comp = complementary(_channel(req.channel))
    return ComplementaryResponse(channel=to_jsonable(channel_to_spec(comp)), dim_env=comp.dim_out)


def run_detect_cq(req: ChannelRequest) -> DetectCqResponse:
    c = _channel(req.channel)
    cfg = _config(req.options)
    found = detect_cq(c, cfg.cq_tol, cfg.seed)
    return DetectCqResponse(channel=c.name, accepted=found is not None,
                            structure=None if found is None else to_jsonable(found))


def _constraint(req: CheckRequest) -> EnergyConstraint:
    if req.h_operator is None or req.h_bound is None:
        raise InvalidRequest("this check needs 'h_operator' and 'h_bound'")
    try:
        return EnergyConstraint(matrix_from_json(req.h_operator), req.h_bound)
    except ValueError as exc:
        raise InvalidRequest(str(exc)) from exc


def run_check(name: str, req: CheckRequest) -> CheckResponse:
    if name not in CHECKS:
        raise InvalidRequest(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
    c = _channel(req.channel)
    cfg = _config(req.options)
    start = time.perf_counter()
    try:
        if name == "theorem1":
            verdict = check_theorem1(c, req.gap_tol, cfg)
        elif name == "corollary1":
            verdict = check_corollary1(c, req.gap_tol, cfg)
        elif name == "proposition1":
            verdict = check_proposition1(c, req.gap_tol, cfg)
        elif name == "corollary2":
            verdict = check_corollary2(c, _constraint(req), req.gap_tol, cfg)
        elif name == "state":
            if req.state is None:
                raise InvalidRequest("this check needs 'state'")
            verdict = check_state_criterion(c, matrix_from_json(req.state), req.gap_tol, cfg)
        else:
            if req.ensemble is None:
                raise InvalidRequest("this check needs 'ensemble'")
            mu = ensemble_from_spec(req.ensemble)
            lhs, rhs = lemma1_sides(c, mu)
            residual = check_lemma1(c, mu)
            ok = residual <= LEMMA1_TOL
            verdict = {"channel": c.name, "lhs": lhs, "rhs": rhs, "residual": residual,
                       "status": "consistent" if ok else "inconsistent"}
    except InvalidRequest:
        raise
    except ValueError as exc:
        raise InvalidRequest(str(exc)) from exc
    if isinstance(verdict, dict):
        status, code = verdict["status"], 0 if verdict["status"] == "consistent" else 4
    else:
        status, code = verdict.status.value, verdict.exit_code
    return CheckResponse(
        check=name,
        status=status,
        exit_code=code,
        verdict=to_jsonable(verdict),
        config=cfg.as_dict(),
        elapsed_seconds=time.perf_counter() - start,
    )


def run_zoo_list() -> list[ZooEntry]:
    return [ZooEntry(name=n, defaults=zoo_defaults(n)) for n in zoo_names()]


def run_zoo_emit(name: str, params: dict[str, Any]) -> dict[str, Any]:
    try:
        c = zoo(name, **params)
    except KeyError as exc:
        raise InvalidRequest(str(exc.args[0])) from exc
    except (TypeError, ValueError) as exc:
        raise InvalidRequest(str(exc)) from exc
    return to_jsonable(channel_to_spec(c))


app = FastAPI(title="qcapacity", version=__version__)


def _guard(fn, *args):
    try:
        return fn(*args)
    except InvalidRequest as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/capacity", response_model=CapacityResponse)
def capacity_route(req: ChannelRequest):
    return _guard(run_capacity, req, False)


@app.post("/ea-capacity", response_model=CapacityResponse)
def ea_capacity_route(req: ChannelRequest):
    return _guard(run_capacity, req, True)


@app.post("/complementary", response_model=ComplementaryResponse)
def complementary_route(req: ChannelRequest):
    return _guard(run_complementary, req)


@app.post("/detect-cq", response_model=DetectCqResponse)
def detect_cq_route(req: ChannelRequest):
    return _guard(run_detect_cq, req)


@app.post("/check/{name}", response_model=CheckResponse)
def check_route(name: str, req: CheckRequest):
    return _guard(run_check, name, req)


@app.get("/zoo", response_model=list[ZooEntry])
def zoo_list_route():
    return run_zoo_list()


@app.post("/zoo/{name}")
def zoo_emit_route(name: str, params: dict[str, Any] | None = None):
    return _guard(run_zoo_emit, name, params or {})
