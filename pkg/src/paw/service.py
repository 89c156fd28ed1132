"""HTTP/WebSocket service wrapping the workbench: REST endpoints for each
pipeline step and a WebSocket endpoint speaking the simulator protocol.

``paw sim --serve`` binds the service to one specification (connecting a
client immediately opens a session on it); ``paw serve`` starts the service
unbound, and a client's first WebSocket message ``{"type": "load", ...}``
supplies the specification.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import __version__
from .diagnostics import PawError
from .equiv import VerdictReport, rooted_weak_bisim, strong_bisim, weak_trace_included
from .flatten import check_levels, flatten
from .kernel import Bounds, Lts, build_lts
from .levels import builtin_levels
from .parser import parse_mapping
from .refine import vertical_check
from .constrain import horizontal_check
from .scriptgen import gen_script, parse_tools_config, to_iterable
from .sim import SimSession
from .workbench import (
    constrain_spec,
    default_root,
    flatten_spec,
    gen_env_spec,
    load_spec,
    refine_spec,
)


class SpecRequest(BaseModel):
    source: str
    root: str | None = None


class CheckResponse(BaseModel):
    ok: bool
    root: str
    entry: str
    modules: list[str]
    diagnostics: list[str]


class LtsRequest(BaseModel):
    source: str
    root: str | None = None
    entry: str | None = None
    max_states: int = Field(default=100_000, alias="maxStates")

    model_config = {"populate_by_name": True}


class LtsResponse(BaseModel):
    lts: str
    states: int
    transitions: int


class RefineRequest(BaseModel):
    source: str
    mapping: str
    module: str | None = None
    name: str | None = None


class SourceResponse(BaseModel):
    source: str
    warnings: list[str] = []


class VerticalRequest(BaseModel):
    abstract_source: str = Field(alias="abstractSource")
    concrete_source: str = Field(alias="concreteSource")
    mapping: str
    abstract: str | None = None
    concrete: str | None = None
    abstract_root: str | None = Field(default=None, alias="abstractRoot")
    concrete_root: str | None = Field(default=None, alias="concreteRoot")

    model_config = {"populate_by_name": True}


class HorizontalRequest(BaseModel):
    spec_source: str = Field(alias="specSource")
    impl_source: str = Field(alias="implSource")
    spec: str | None = None
    impl: str | None = None
    hide: list[str] = []
    relation: str = "trace"
    constraint: str | None = None

    model_config = {"populate_by_name": True}


class ConstrainRequest(BaseModel):
    source: str
    with_source: str = Field(alias="withSource")
    proc: str | None = None
    constraint: str | None = None
    name: str | None = None

    model_config = {"populate_by_name": True}


class GenEnvRequest(BaseModel):
    source: str
    level: str
    module: str | None = None
    name: str | None = None


class ScriptRequest(BaseModel):
    source: str
    tools: str
    processes: list[str] = []
    root: str | None = None


class EquivRequest(BaseModel):
    lts1: str
    lts2: str
    relation: str = "strong"


class VerdictResponse(BaseModel):
    related: bool
    relation: str
    summary: str
    counterexample: list[str] | None = None
    warnings: list[str] = []
    details: dict = {}


def _verdict_response(v: VerdictReport, extra_details: dict | None = None) -> VerdictResponse:
    details = dict(extra_details or {})
    return VerdictResponse(
        related=v.related,
        relation=v.relation,
        summary=v.summary(),
        counterexample=v.counterexample[1] if v.counterexample else None,
        warnings=v.warnings,
        details=details,
    )


_FALLBACK_PAGE = """<!doctype html>
<html><head><title>paw simulator</title></head>
<body>
<h1>paw</h1>
<p>The browser viewer is not built. Run <code>npm install &amp;&amp; npm run build</code>
in <code>frontend/</code>, or talk to the WebSocket endpoint at <code>/ws</code>
directly (JSON messages, one per frame).</p>
</body></html>
"""


def create_app(session_factory=None, ui_dir: str | Path | None = None) -> FastAPI:
    """Build the service.  ``session_factory`` (when given) creates a
    SimSession per WebSocket connection for the server-bound specification."""
    app = FastAPI(title="paw", version=__version__)
    ws_lock = asyncio.Lock()

    @app.exception_handler(PawError)
    async def _paw_error(_, exc: PawError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.get("/api/levels")
    def levels() -> dict:
        return {"levels": sorted(builtin_levels())}

    @app.post("/api/check", response_model=CheckResponse)
    def check(req: SpecRequest) -> CheckResponse:
        ms = load_spec(req.source, "<request>")
        root = req.root or default_root(ms)
        fs = flatten(ms, root)
        diags = check_levels(ms, fs)
        return CheckResponse(
            ok=not diags,
            root=root,
            entry=fs.entry,
            modules=[m.name for m in ms.modules],
            diagnostics=diags,
        )

    @app.post("/api/lts", response_model=LtsResponse)
    def lts(req: LtsRequest) -> LtsResponse:
        ms = load_spec(req.source, "<request>")
        fs = flatten_spec(ms, req.root)
        built = build_lts(fs, req.entry or None, Bounds(max_states=req.max_states))
        return LtsResponse(
            lts=built.serialize(), states=built.n_states, transitions=len(built.transitions)
        )

    @app.post("/api/refine", response_model=SourceResponse)
    def refine(req: RefineRequest) -> SourceResponse:
        ms = load_spec(req.source, "<request>")
        mapping = parse_mapping(req.mapping, "<mapping>")
        result = refine_spec(ms, mapping, module=req.module, name=req.name)
        return SourceResponse(source=result.source, warnings=result.warnings)

    @app.post("/api/constrain", response_model=SourceResponse)
    def constrain_(req: ConstrainRequest) -> SourceResponse:
        ms = load_spec(req.source, "<request>")
        with_ms = load_spec(req.with_source, "<constraint>")
        result = constrain_spec(ms, with_ms, req.proc, req.constraint, req.name)
        return SourceResponse(source=result.source)

    @app.post("/api/gen-env", response_model=SourceResponse)
    def gen_env_(req: GenEnvRequest) -> SourceResponse:
        ms = load_spec(req.source, "<request>")
        result = gen_env_spec(ms, req.level, req.module, req.name)
        return SourceResponse(source=result.source)

    @app.post("/api/verify/vertical", response_model=VerdictResponse)
    def verify_vertical(req: VerticalRequest) -> VerdictResponse:
        ms_abs = load_spec(req.abstract_source, "<abstract>")
        ms_conc = load_spec(req.concrete_source, "<concrete>")
        mapping = parse_mapping(req.mapping, "<mapping>")
        fs_abs = flatten_spec(ms_abs, req.abstract_root)
        fs_conc = flatten_spec(ms_conc, req.concrete_root)
        abstract = req.abstract or next(
            (old for old, _ in mapping.process_renames), fs_abs.entry
        )
        concrete = req.concrete or next(
            (new for _, new in mapping.process_renames), fs_conc.entry
        )
        verdict = vertical_check(fs_abs, abstract, fs_conc, concrete, mapping)
        extra = {
            "sPrime": verdict.details["s_prime"].serialize(),
            "iPrime": verdict.details["i_prime"].serialize(),
            "sPrimeTau": verdict.details["s_prime"].tau_count(),
            "iPrimeTau": verdict.details["i_prime"].tau_count(),
        }
        return _verdict_response(verdict, extra)

    @app.post("/api/verify/horizontal", response_model=VerdictResponse)
    def verify_horizontal(req: HorizontalRequest) -> VerdictResponse:
        ms_spec = load_spec(req.spec_source, "<spec>")
        ms_impl = load_spec(req.impl_source, "<impl>")
        fs_spec = flatten_spec(ms_spec)
        fs_impl = flatten_spec(ms_impl)
        verdict = horizontal_check(
            fs_spec,
            req.spec or fs_spec.entry,
            fs_impl,
            req.impl or fs_impl.entry,
            hidden=set(req.hide),
            relation=req.relation,
            constraint=req.constraint,
        )
        return _verdict_response(verdict)

    @app.post("/api/script")
    def script(req: ScriptRequest) -> dict:
        ms = load_spec(req.source, "<request>")
        fs = flatten_spec(ms, req.root)
        cfg = parse_tools_config(req.tools)
        names = req.processes or sorted(fs.exported)
        forms = [to_iterable(fs.defs[n], fs, cfg.bindings) for n in names]
        return {"script": gen_script(forms, cfg)}

    @app.post("/api/equiv", response_model=VerdictResponse)
    def equiv(req: EquivRequest) -> VerdictResponse:
        l1 = Lts.parse(req.lts1)
        l2 = Lts.parse(req.lts2)
        if req.relation == "strong":
            verdict = strong_bisim(l1, l2)
        elif req.relation == "rooted-weak":
            verdict = rooted_weak_bisim(l1, l2)
        elif req.relation == "trace":
            verdict = weak_trace_included(l1, l2)
        else:
            raise PawError(f"unknown relation {req.relation!r}")
        return _verdict_response(verdict)

    @app.websocket("/ws")
    async def ws_sim(socket: WebSocket):
        await socket.accept()
        if ws_lock.locked():
            await socket.send_text(
                json.dumps({"type": "error", "message": "another session is active"})
            )
            await socket.close()
            return
        async with ws_lock:
            try:
                session: SimSession | None = (
                    session_factory() if session_factory is not None else None
                )
                if session is None:
                    first = json.loads(await socket.receive_text())
                    if first.get("type") != "load":
                        await socket.send_text(
                            json.dumps(
                                {
                                    "type": "error",
                                    "message": "no specification bound; send a 'load' message first",
                                }
                            )
                        )
                        await socket.close()
                        return
                    ms = load_spec(first.get("source", ""), "<ws>")
                    fs = flatten_spec(ms, first.get("root"))
                    session = SimSession(fs, first.get("entry") or fs.entry)
                for message in session.initial_messages():
                    await socket.send_text(json.dumps(message))
                while True:
                    raw = await socket.receive_text()
                    try:
                        msg = json.loads(raw)
                    except json.JSONDecodeError as err:
                        await socket.send_text(
                            json.dumps({"type": "error", "message": f"bad JSON: {err}"})
                        )
                        continue
                    for message in session.handle(msg):
                        await socket.send_text(json.dumps(message))
            except WebSocketDisconnect:
                return
            except PawError as err:
                await socket.send_text(
                    json.dumps({"type": "error", "message": str(err)})
                )
                await socket.close()

    ui_path = Path(ui_dir) if ui_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_path.is_dir():
        app.mount("/", StaticFiles(directory=str(ui_path), html=True), name="ui")
    else:
        @app.get("/")
        def index() -> HTMLResponse:
            return HTMLResponse(_FALLBACK_PAGE)

    return app
