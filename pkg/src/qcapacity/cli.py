"""Command-line client.

Requests are built as the service's pydantic models and either evaluated
in-process or posted to a running server (``--server URL``).  Exit codes:
0 success or consistent, 2 inconclusive, 3 invalid input, 4 a result that
contradicts a proved statement.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path
from typing import Any, Optional

import click
import httpx
from pydantic import BaseModel, ValidationError

from . import service
from .config import SolverConfig

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_INCONSISTENT = 0, 2, 3, 4


class Backend:
    """Evaluates requests in-process."""

    def capacity(self, req, ea: bool):
        return service.run_capacity(req, ea)

    def complementary(self, req):
        return service.run_complementary(req)

    def detect_cq(self, req):
        return service.run_detect_cq(req)

    def check(self, name, req):
        return service.run_check(name, req)

    def zoo_list(self):
        return [e.model_dump() for e in service.run_zoo_list()]

    def zoo_emit(self, name, params):
        return service.run_zoo_emit(name, params)


class RemoteBackend(Backend):
    """Posts the same requests to a running service."""

    def __init__(self, url: str, timeout: float = 600.0):
        self.client = httpx.Client(base_url=url.rstrip("/"), timeout=timeout)

    def _call(self, method: str, path: str, body: Any = None, model: Optional[type[BaseModel]] = None):
        if isinstance(body, BaseModel):
            body = body.model_dump(mode="json")
        try:
            resp = self.client.request(method, path, json=body)
        except httpx.HTTPError as exc:
            raise click.ClickException(f"cannot reach server: {exc}") from exc
        if resp.status_code == 422:
            raise service.InvalidRequest(json.dumps(resp.json().get("detail")))
        resp.raise_for_status()
        data = resp.json()
        return model.model_validate(data) if model else data

    def capacity(self, req, ea: bool):
        return self._call("POST", "/ea-capacity" if ea else "/capacity", req, service.CapacityResponse)

    def complementary(self, req):
        return self._call("POST", "/complementary", req, service.ComplementaryResponse)

    def detect_cq(self, req):
        return self._call("POST", "/detect-cq", req, service.DetectCqResponse)

    def check(self, name, req):
        return self._call("POST", f"/check/{name}", req, service.CheckResponse)

    def zoo_list(self):
        return self._call("GET", "/zoo")

    def zoo_emit(self, name, params):
        return self._call("POST", f"/zoo/{name}", params)


class Context:
    def __init__(self, options: service.SolverOptions, report: Optional[Path], backend: Backend):
        self.options = options
        self.report = report
        self.backend = backend
        self.started = time.perf_counter()


def _load_json(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise service.InvalidRequest(f"cannot read {path}: {exc}") from exc


def _split_spec(doc: Any) -> tuple[dict, dict]:
    """A spec file is either a bare channel or ``{"channel": ..., extras}``."""
    if isinstance(doc, dict) and "channel" in doc:
        extras = {k: v for k, v in doc.items() if k != "channel"}
        return doc["channel"], extras
    return doc, {}


def _emit(ctx: Context, payload: Any, code: int = EXIT_OK):
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    click.echo(json.dumps(payload, indent=2))
    if ctx.report is not None:
        body = payload if isinstance(payload, dict) else {"result": payload}
        report = {
            **body,
            "config": body.get("config", ctx.options.config().as_dict()),
            "timings": {"wall_seconds": time.perf_counter() - ctx.started},
            "exit_code": code,
        }
        ctx.report.write_text(json.dumps(report, indent=2))
    sys.exit(code)


def _run(ctx: Context, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (service.InvalidRequest, ValidationError, ValueError) as exc:
        click.echo(f"invalid input: {exc}", err=True)
        sys.exit(EXIT_INVALID)


@click.group()
@click.option("--seed", type=int, default=None, help="Seed for every randomized step.")
@click.option("--restarts", type=int, default=None, help="Random restarts per optimization.")
@click.option("--tol", type=float, default=None, help="Certificate tolerance (bits) for convergence.")
@click.option("--gap-tol", type=float, default=None, help="Tolerance (bits) for calling two capacities equal.")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="File of 'key = value' solver settings; flags override it.")
@click.option("--report", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Write a JSON report with results, config echo and timings.")
@click.option("--server", default=None, help="Send requests to a running service instead of computing locally.")
@click.pass_context
def main(click_ctx, seed, restarts, tol, gap_tol, config_file, report, server):
    """Capacities of quantum channels and checks of the c-q coincidence criterion."""
    base = {}
    if config_file:
        try:
            base = SolverConfig.from_file(config_file).as_dict()
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint="--config")
    try:
        options = service.SolverOptions(seed=seed, restarts=restarts, cert_tol=tol, gap_tol=gap_tol, base=base)
    except ValidationError as exc:
        raise click.BadParameter(str(exc))
    backend = RemoteBackend(server) if server else Backend()
    click_ctx.obj = Context(options, report, backend)


def _channel_request(ctx: Context, spec_path: str, cls=service.ChannelRequest, **extra):
    channel, extras = _split_spec(_load_json(spec_path))
    extras.pop("options", None)
    fields = {k: v for k, v in {**extras, **extra}.items() if k in cls.model_fields}
    return cls(channel=channel, options=ctx.options, **fields)


@main.command()
@click.argument("spec")
@click.pass_obj
def capacity(ctx: Context, spec):
    """Holevo capacity of the channel in SPEC (JSON file, '-' for stdin)."""
    req = _run(ctx, _channel_request, ctx, spec)
    res = _run(ctx, ctx.backend.capacity, req, False)
    _emit(ctx, res, EXIT_OK if res.converged else EXIT_INCONCLUSIVE)


@main.command("ea-capacity")
@click.argument("spec")
@click.pass_obj
def ea_capacity_cmd(ctx: Context, spec):
    """Entanglement-assisted capacity of the channel in SPEC."""
    req = _run(ctx, _channel_request, ctx, spec)
    res = _run(ctx, ctx.backend.capacity, req, True)
    _emit(ctx, res, EXIT_OK if res.converged else EXIT_INCONCLUSIVE)


@main.command()
@click.argument("spec")
@click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="Where to write the complementary channel (Kraus JSON).")
@click.pass_obj
def complementary(ctx: Context, spec, output):
    """Complementary channel of SPEC, written as a channel spec."""
    req = _run(ctx, _channel_request, ctx, spec)
    res = _run(ctx, ctx.backend.complementary, req)
    output.write_text(json.dumps(res.channel, indent=2))
    _emit(ctx, {"output": str(output), "dim_env": res.dim_env})


@main.command("detect-cq")
@click.argument("spec")
@click.pass_obj
def detect_cq_cmd(ctx: Context, spec):
    """Search for a c-q representation of the channel in SPEC."""
    req = _run(ctx, _channel_request, ctx, spec)
    _emit(ctx, _run(ctx, ctx.backend.detect_cq, req))


@main.command()
@click.argument("name", type=click.Choice(service.CHECKS))
@click.argument("spec")
@click.option("--h-operator", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON matrix of the input energy operator (corollary2).")
@click.option("--h-bound", type=float, default=None, help="Energy bound (corollary2).")
@click.pass_obj
def check(ctx: Context, name, spec, h_operator, h_bound):
    """Run one of the criterion checks on the channel in SPEC.

    SPEC may carry 'ensemble' (lemma1), 'state' (state), or 'h_operator' and
    'h_bound' (corollary2) next to 'channel'.
    """
    extra = {}
    if h_operator is not None:
        extra["h_operator"] = _run(ctx, _load_json, h_operator)
    if h_bound is not None:
        extra["h_bound"] = h_bound
    if ctx.options.gap_tol is not None:
        extra["gap_tol"] = ctx.options.gap_tol
    req = _run(ctx, _channel_request, ctx, spec, service.CheckRequest, **extra)
    res = _run(ctx, ctx.backend.check, name, req)
    _emit(ctx, res, res.exit_code)


@main.group("zoo")
def zoo_group():
    """Named example channels."""


@zoo_group.command("list")
@click.pass_obj
def zoo_list(ctx: Context):
    _emit(ctx, ctx.backend.zoo_list())


def _parse_param(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise service.InvalidRequest(f"parameters look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


@zoo_group.command("emit")
@click.argument("name")
@click.argument("params", nargs=-1)
@click.pass_obj
def zoo_emit(ctx: Context, name, params):
    """Print the Kraus form of zoo channel NAME with key=value PARAMS."""
    parsed = dict(_run(ctx, lambda: [_parse_param(p) for p in params]))
    _emit(ctx, _run(ctx, ctx.backend.zoo_emit, name, parsed))


if __name__ == "__main__":
    main()
