"""Interactive simulation: stepping configurations, reproducible random runs,
the animation model (nested encapsulation boxes, process ellipses, potential
communication edges), and the session protocol the viewer speaks.

Protocol messages are JSON objects, one per line on a pipe or one per
WebSocket frame.  Server to client: ``model``, ``state``, ``event``,
``error``; client to server: ``step`` {idx}, ``reset`` {}, ``auto``
{steps, seed}.
"""

from __future__ import annotations

import json
import random
import sys
from dataclasses import dataclass, field, replace

from .diagnostics import SimError
from .flatten import FlatSpec
from .kernel import Bounds, DEFAULT_BOUNDS, Transition, enabled
from .process import (
    Call,
    Encaps,
    Hide,
    Par,
    ProcessExpr,
    Rename,
    Scope,
    Terminated,
    atoms_used,
    normalize,
)
from .refine import _reachable_defs


@dataclass(frozen=True)
class TraceEntry:
    step_no: int
    choice: int
    label: str
    participants: tuple[str, ...]


@dataclass
class SimState:
    fs: FlatSpec
    entry: str
    current: ProcessExpr
    trace: tuple[TraceEntry, ...] = ()
    rng_seed: int = 0
    bounds: Bounds = DEFAULT_BOUNDS

    @property
    def step_no(self) -> int:
        return len(self.trace)

    def enabled(self) -> list[Transition]:
        if isinstance(self.current, Terminated):
            return []
        return enabled(self.current, self.fs, self.bounds)

    @property
    def terminated(self) -> bool:
        return isinstance(self.current, Terminated)

    @property
    def deadlocked(self) -> bool:
        return not self.terminated and not self.enabled()


def init_sim(fs: FlatSpec, entry: str | None = None, seed: int = 0,
             bounds: Bounds = DEFAULT_BOUNDS) -> SimState:
    entry = entry or fs.entry
    if entry not in fs.defs:
        raise SimError(f"unknown entry process {entry!r}")
    return SimState(fs, entry, normalize(Call(entry)), rng_seed=seed, bounds=bounds)


def step(s: SimState, choice: int) -> tuple[SimState, TraceEntry]:
    options = s.enabled()
    if not options:
        raise SimError(
            "terminated" if s.terminated else "deadlocked: no enabled action"
        )
    if not 0 <= choice < len(options):
        raise SimError(f"choice {choice} out of range (0..{len(options) - 1})")
    t = options[choice]
    target = Terminated() if t.label.is_shutdown else t.target
    entry = TraceEntry(s.step_no, choice, t.label.text(), t.participants)
    return replace(s, current=target, trace=s.trace + (entry,)), entry


def replay(s: SimState) -> SimState:
    """Re-run the recorded trace from the initial configuration."""
    out = init_sim(s.fs, s.entry, s.rng_seed, s.bounds)
    for entry in s.trace:
        out, _ = step(out, entry.choice)
    return out


def run_random(s: SimState, n: int, seed: int | None = None) -> tuple[SimState, list[TraceEntry]]:
    """Take ``n`` uniformly random enabled steps (stopping at deadlock or
    termination); identical seeds give identical traces."""
    rng = random.Random(s.rng_seed if seed is None else seed)
    events: list[TraceEntry] = []
    for _ in range(n):
        options = s.enabled()
        if not options:
            break
        s, entry = step(s, rng.randrange(len(options)))
        events.append(entry)
    return s, events


# --------------------------------------------------------- animation model ----


@dataclass
class AnimModel:
    boxes: list[dict] = field(default_factory=list)  # {id, label, parent}
    nodes: list[dict] = field(default_factory=list)  # {id, label, box}
    edges: list[dict] = field(default_factory=list)  # {source, target}

    def to_message(self) -> dict:
        return {
            "type": "model",
            "boxes": self.boxes,
            "nodes": self.nodes,
            "edges": self.edges,
        }


def _strip(e: ProcessExpr) -> ProcessExpr:
    while isinstance(e, (Hide, Rename, Scope)):
        e = e.body
    return e


def anim_model(fs: FlatSpec, entry: str | None = None) -> AnimModel:
    """Topological animation model: one box per encapsulation scope or named
    parallel composite, one ellipse per leaf process instance."""
    entry = entry or fs.entry
    model = AnimModel()
    visited: set[str] = set()

    def new_box(label: str, parent: str | None) -> str:
        box_id = f"b{len(model.boxes)}"
        model.boxes.append({"id": box_id, "label": label, "parent": parent})
        return box_id

    def add_node(name: str, box: str | None):
        if not any(n["id"] == name for n in model.nodes):
            model.nodes.append({"id": name, "label": name, "box": box})

    def walk_expr(e: ProcessExpr, box: str | None, label: str | None):
        e = _strip(e)
        if isinstance(e, Encaps):
            inner = new_box(label or "encapsulation", box)
            walk_expr(e.body, inner, None)
        elif isinstance(e, Par):
            if label is not None:
                box = new_box(label, box)
            for o in e.operands:
                walk_expr(o, box, None)
        elif isinstance(e, Call):
            walk_call(e.name, box)
        else:
            add_node(label or str(e), box)

    def walk_call(name: str, box: str | None):
        if name in visited:
            return
        visited.add(name)
        d = fs.defs.get(name)
        if d is None:
            add_node(name, box)
            return
        body = _strip(d.body)
        if isinstance(body, (Encaps, Par)):
            walk_expr(body, box, name)
        else:
            add_node(name, box)

    walk_call(entry, None)

    alphabet: dict[str, set[str]] = {}
    for node in model.nodes:
        name = node["id"]
        if name in fs.defs:
            acts: set[str] = set()
            for d in _reachable_defs(fs, name).values():
                acts |= atoms_used(d.body)
            alphabet[name] = acts
    names = [n["id"] for n in model.nodes]
    seen_edges: set[tuple[str, str]] = set()
    for rule in fs.comm_rules:
        for a in names:
            for b in names:
                if a >= b:
                    continue
                pair_ok = (
                    rule.left.name in alphabet.get(a, ())
                    and rule.right.name in alphabet.get(b, ())
                ) or (
                    rule.left.name in alphabet.get(b, ())
                    and rule.right.name in alphabet.get(a, ())
                )
                if pair_ok and (a, b) not in seen_edges:
                    seen_edges.add((a, b))
                    model.edges.append({"source": a, "target": b})
    return model


# ----------------------------------------------------------------- session ----


class SimSession:
    """One operator session: strictly serialized message handling."""

    def __init__(self, fs: FlatSpec, entry: str | None = None,
                 bounds: Bounds = DEFAULT_BOUNDS):
        self.fs = fs
        self.entry = entry or fs.entry
        self.bounds = bounds
        self.state = init_sim(fs, self.entry, bounds=bounds)
        self.model = anim_model(fs, self.entry)

    def initial_messages(self) -> list[dict]:
        return [self.model.to_message(), self.state_message()]

    def state_message(self) -> dict:
        options = self.state.enabled()
        enabled_msg = [
            {
                "idx": i,
                "label": t.label.text(),
                "participants": list(t.participants),
            }
            for i, t in enumerate(options)
        ]
        highlighted = sorted({p for t in options for p in t.participants})
        return {
            "type": "state",
            "stepNo": self.state.step_no,
            "enabled": enabled_msg,
            "highlighted": highlighted,
            "terminated": self.state.terminated,
        }

    def handle(self, msg: dict) -> list[dict]:
        kind = msg.get("type")
        if kind == "step":
            try:
                idx = int(msg.get("idx", -1))
                self.state, entry = step(self.state, idx)
            except (SimError, ValueError, TypeError) as err:
                return [{"type": "error", "message": str(err)}]
            return [
                {
                    "type": "event",
                    "label": entry.label,
                    "participants": list(entry.participants),
                },
                self.state_message(),
            ]
        if kind == "reset":
            self.state = init_sim(self.fs, self.entry, bounds=self.bounds)
            return [self.state_message()]
        if kind == "auto":
            try:
                steps = int(msg.get("steps", 0))
                seed = int(msg.get("seed", 0))
            except (ValueError, TypeError):
                return [{"type": "error", "message": "auto requires integer steps/seed"}]
            out: list[dict] = []
            rng = random.Random(seed)
            for _ in range(steps):
                options = self.state.enabled()
                if not options:
                    break
                self.state, entry = step(self.state, rng.randrange(len(options)))
                out.append(
                    {
                        "type": "event",
                        "label": entry.label,
                        "participants": list(entry.participants),
                    }
                )
                out.append(self.state_message())
            if not out:
                out.append(self.state_message())
            return out
        return [{"type": "error", "message": f"unknown message type {kind!r}"}]


def run_pipe(fs: FlatSpec, entry: str | None = None,
             stdin=None, stdout=None, bounds: Bounds = DEFAULT_BOUNDS) -> None:
    """Serve one session over newline-delimited JSON on standard streams."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = SimSession(fs, entry, bounds)

    def send(messages: list[dict]):
        for m in messages:
            stdout.write(json.dumps(m) + "\n")
        stdout.flush()

    send(session.initial_messages())
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as err:
            send([{"type": "error", "message": f"bad JSON: {err}"}])
            continue
        send(session.handle(msg))
