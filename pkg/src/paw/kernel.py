"""Structural operational semantics and labelled transition system construction.

Configurations are canonical process expressions.  The merge is interleaving
plus binary synchronous communication via the communication table; ``skip``
fires as the silent step and ``shutdown`` disrupts the whole configuration
into the single terminated state.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import BudgetExceeded, FlattenError, ParseError
from .flatten import FlatSpec
from .modules import CommRule
from .process import (
    Alt,
    Atom,
    Call,
    Deadlock,
    Encaps,
    Hide,
    Par,
    ProcessExpr,
    Rename,
    SHUTDOWN_ATOM,
    Scope,
    Seq,
    Sum,
    TAU_ATOM,
    Terminated,
    normalize,
    subst_data,
)
from .terms import Term, enumerate_sort, match, render_term, rewrite, subst, term_vars


@dataclass(frozen=True)
class ActionLabel:
    """A transition label: named action with ground data arguments, the
    silent step, or a shutdown-class action."""

    name: str
    args: tuple[Term, ...] = ()
    is_tau: bool = False
    is_shutdown: bool = False

    @staticmethod
    def tau() -> "ActionLabel":
        return ActionLabel("", (), True, False)

    @staticmethod
    def of(name: str, args: tuple[Term, ...] = ()) -> "ActionLabel":
        if name == TAU_ATOM:
            return ActionLabel.tau()
        return ActionLabel(name, args, False, name == SHUTDOWN_ATOM)

    def text(self) -> str:
        if self.is_tau:
            return "tau"
        if self.args:
            return f"{self.name}({', '.join(render_term(a) for a in self.args)})"
        return self.name

    def sort_key(self):
        return (self.is_tau, self.name, tuple(a.key() for a in self.args))

    @staticmethod
    def from_text(text: str) -> "ActionLabel":
        from .parser import TokenStream, parse_atom_term, tokenize

        text = text.strip()
        if text == "tau":
            return ActionLabel.tau()
        ts = TokenStream(tokenize(text, "<label>"))
        atom = parse_atom_term(ts)
        if not ts.at("eof"):
            raise ParseError(f"trailing input in label {text!r}", ts.cur.pos)
        return ActionLabel.of(atom.name, atom.args)


@dataclass(frozen=True)
class Transition:
    label: ActionLabel
    target: ProcessExpr
    participants: tuple[str, ...] = ()


@dataclass(frozen=True)
class Bounds:
    max_states: int = 100_000
    max_rewrite_steps: int = 10_000
    max_unfold_depth: int = 5_000
    max_sum_terms: int = 4_096


DEFAULT_BOUNDS = Bounds()


class CommTable:
    """Symmetric communication function over action patterns."""

    def __init__(self, rules: tuple[CommRule, ...]):
        self.rules = rules
        self._by_names: dict[frozenset[str], list[CommRule]] = {}
        for r in rules:
            self._by_names.setdefault(frozenset((r.left.name, r.right.name)), []).append(r)

    def communicate(self, a: ActionLabel, b: ActionLabel) -> ActionLabel | None:
        if a.is_tau or b.is_tau:
            return None
        for rule in self._by_names.get(frozenset((a.name, b.name)), []):
            for first, second in ((a, b), (b, a)):
                if rule.left.name != first.name or rule.right.name != second.name:
                    continue
                if len(rule.left.args) != len(first.args):
                    continue
                if len(rule.right.args) != len(second.args):
                    continue
                binding: dict[str, Term] = {}
                ok = all(
                    match(p, v, binding)
                    for p, v in zip(rule.left.args, first.args)
                ) and all(
                    match(p, v, binding)
                    for p, v in zip(rule.right.args, second.args)
                )
                if not ok:
                    continue
                args = tuple(subst(t, binding) for t in rule.result.args)
                if any(term_vars(t) for t in args):
                    continue  # result not fully instantiated by the operands
                return ActionLabel.of(rule.result.name, args)
        return None

    def action_names(self) -> frozenset[str]:
        names = set()
        for r in self.rules:
            names.add(r.left.name)
            names.add(r.right.name)
        return frozenset(names)


def _rewrite_args(args: tuple, fs: FlatSpec, bounds: Bounds) -> tuple[Term, ...]:
    out = []
    for a in args:
        free = term_vars(a)
        if free:
            raise FlattenError(
                f"action argument {render_term(a)} has unbound variables {sorted(free)}"
            )
        out.append(rewrite(a, fs.equations, bounds.max_rewrite_steps))
    return tuple(out)


def enabled(
    cfg: ProcessExpr, fs: FlatSpec, bounds: Bounds = DEFAULT_BOUNDS
) -> list[Transition]:
    """Complete successor set of a configuration, deterministically ordered."""
    comm = CommTable(fs.comm_rules)
    raw = _step(cfg, fs, comm, bounds, 0)
    merged: dict[tuple, Transition] = {}
    for t in raw:
        target = normalize(t.target)
        key = (t.label.sort_key(), target.key())
        prev = merged.get(key)
        if prev is None:
            merged[key] = Transition(t.label, target, tuple(sorted(set(t.participants))))
        else:
            parts = tuple(sorted(set(prev.participants) | set(t.participants)))
            merged[key] = Transition(t.label, target, parts)
    return [merged[k] for k in sorted(merged)]


def _step(
    cfg: ProcessExpr, fs: FlatSpec, comm: CommTable, bounds: Bounds, depth: int
) -> list[Transition]:
    if depth > bounds.max_unfold_depth:
        raise BudgetExceeded(
            f"unfold depth {bounds.max_unfold_depth} exceeded (unguarded recursion?)"
        )
    if isinstance(cfg, (Deadlock, Terminated)):
        return []
    if isinstance(cfg, Atom):
        label = ActionLabel.of(cfg.name, _rewrite_args(cfg.args, fs, bounds))
        return [Transition(label, Terminated())]
    if isinstance(cfg, Seq):
        out = []
        for t in _step(cfg.left, fs, comm, bounds, depth):
            target = cfg.right if isinstance(t.target, Terminated) else Seq(t.target, cfg.right)
            out.append(Transition(t.label, target, t.participants))
        return out
    if isinstance(cfg, Alt):
        out = []
        for o in cfg.operands:
            out.extend(_step(o, fs, comm, bounds, depth))
        return out
    if isinstance(cfg, Par):
        ops = cfg.operands
        per_operand = [_step(o, fs, comm, bounds, depth) for o in ops]
        out = []
        for i, transitions in enumerate(per_operand):
            for t in transitions:
                rest = ops[:i] + (t.target,) + ops[i + 1 :]
                out.append(Transition(t.label, Par(rest), t.participants))
        for i in range(len(ops)):
            for j in range(i + 1, len(ops)):
                for ti in per_operand[i]:
                    for tj in per_operand[j]:
                        label = comm.communicate(ti.label, tj.label)
                        if label is None:
                            continue
                        rest = list(ops)
                        rest[i] = ti.target
                        rest[j] = tj.target
                        out.append(
                            Transition(
                                label,
                                Par(tuple(rest)),
                                ti.participants + tj.participants,
                            )
                        )
        return out
    if isinstance(cfg, Encaps):
        assert isinstance(cfg.actions, frozenset)
        out = []
        for t in _step(cfg.body, fs, comm, bounds, depth):
            if not t.label.is_tau and t.label.name in cfg.actions:
                continue
            out.append(Transition(t.label, Encaps(cfg.actions, t.target), t.participants))
        return out
    if isinstance(cfg, Hide):
        assert isinstance(cfg.actions, frozenset)
        out = []
        for t in _step(cfg.body, fs, comm, bounds, depth):
            label = t.label
            if not label.is_tau and label.name in cfg.actions:
                label = ActionLabel.tau()
            out.append(Transition(label, Hide(cfg.actions, t.target), t.participants))
        return out
    if isinstance(cfg, Rename):
        out = []
        for t in _step(cfg.body, fs, comm, bounds, depth):
            out.append(
                Transition(apply_rename(cfg.rules, t.label), Rename(cfg.rules, t.target), t.participants)
            )
        return out
    if isinstance(cfg, Call):
        d = fs.defs.get(cfg.name)
        if d is None:
            raise FlattenError(f"unknown process {cfg.name!r}")
        args = _rewrite_args(cfg.args, fs, bounds)
        body = subst_data(d.body, dict(zip(d.params, args)))
        inner = _step(body, fs, comm, bounds, depth + 1)
        return [
            Transition(t.label, Scope(cfg.name, t.target), t.participants or (cfg.name,))
            for t in inner
        ]
    if isinstance(cfg, Sum):
        out = []
        for term in enumerate_sort(fs.sig, cfg.sort, bounds.max_sum_terms):
            inst = subst_data(cfg.body, {cfg.var: term})
            out.extend(_step(inst, fs, comm, bounds, depth))
        return out
    if isinstance(cfg, Scope):
        inner = _step(cfg.body, fs, comm, bounds, depth)
        return [
            Transition(t.label, Scope(cfg.name, t.target), t.participants or (cfg.name,))
            for t in inner
        ]
    raise FlattenError(f"cannot step configuration {cfg!r}")


def apply_rename(rules: tuple[tuple[Atom, Atom], ...], label: ActionLabel) -> ActionLabel:
    if label.is_tau:
        return label
    for pattern, replacement in rules:
        if pattern.name != label.name or len(pattern.args) != len(label.args):
            continue
        binding: dict[str, Term] = {}
        if all(match(p, v, binding) for p, v in zip(pattern.args, label.args)):
            args = tuple(subst(t, binding) for t in replacement.args)
            if any(term_vars(t) for t in args):
                continue
            return ActionLabel.of(replacement.name, args)
    return label


@dataclass
class Lts:
    """Finite labelled transition system with canonical state order."""

    initial: int
    transitions: tuple[tuple[int, ActionLabel, int], ...]
    terminating: frozenset[int]
    n_states: int
    state_text: tuple[str, ...] = ()

    def successors(self) -> list[list[tuple[ActionLabel, int]]]:
        out: list[list[tuple[ActionLabel, int]]] = [[] for _ in range(self.n_states)]
        for src, label, dst in self.transitions:
            out[src].append((label, dst))
        return out

    def labels(self) -> set[str]:
        return {label.text() for _, label, _ in self.transitions if not label.is_tau}

    def tau_count(self) -> int:
        return sum(1 for _, label, _ in self.transitions if label.is_tau)

    def serialize(self) -> str:
        lines = [
            "lts 1",
            f"states {self.n_states}",
            f"initial {self.initial}",
            f"transitions {len(self.transitions)}",
            "terminating " + " ".join(str(i) for i in sorted(self.terminating)),
        ]
        for i in range(self.n_states):
            text = self.state_text[i] if i < len(self.state_text) else ""
            lines.append(f"state {i} {text}".rstrip())
        for src, label, dst in self.transitions:
            lines.append(f"trans {src} {dst} {label.text()}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> "Lts":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].split() != ["lts", "1"]:
            raise ParseError("not an LTS file (missing 'lts 1' header)")
        n_states = initial = None
        terminating: frozenset[int] = frozenset()
        transitions: list[tuple[int, ActionLabel, int]] = []
        state_text: dict[int, str] = {}
        for ln in lines[1:]:
            parts = ln.split(None, 1)
            head, rest = parts[0], (parts[1] if len(parts) > 1 else "")
            if head == "states":
                n_states = int(rest)
            elif head == "initial":
                initial = int(rest)
            elif head == "transitions":
                continue
            elif head == "terminating":
                terminating = frozenset(int(x) for x in rest.split())
            elif head == "state":
                bits = rest.split(None, 1)
                state_text[int(bits[0])] = bits[1] if len(bits) > 1 else ""
            elif head == "trans":
                bits = rest.split(None, 2)
                transitions.append(
                    (int(bits[0]), ActionLabel.from_text(bits[2]), int(bits[1]))
                )
            else:
                raise ParseError(f"unknown LTS line {ln!r}")
        if n_states is None or initial is None:
            raise ParseError("LTS file lacks states/initial header lines")
        texts = tuple(state_text.get(i, "") for i in range(n_states))
        return Lts(initial, tuple(transitions), terminating, n_states, texts)


def build_lts(
    fs: FlatSpec,
    entry: str | ProcessExpr | None = None,
    bounds: Bounds = DEFAULT_BOUNDS,
) -> Lts:
    """Breadth-first closure of ``enabled`` from the entry configuration."""
    if entry is None:
        entry = fs.entry
    if isinstance(entry, str):
        if entry not in fs.defs:
            raise FlattenError(f"unknown entry process {entry!r}")
        if fs.proc_decls.get(entry, ()):
            raise FlattenError(f"entry process {entry!r} requires data arguments")
        start: ProcessExpr = Call(entry)
    else:
        start = entry
    start = normalize(start)

    ids: dict[tuple, int] = {start.key(): 0}
    texts: list[str] = [str(start)]
    queue: list[ProcessExpr] = [start]
    transitions: list[tuple[int, ActionLabel, int]] = []
    terminating: set[int] = set()
    if isinstance(start, Terminated):
        terminating.add(0)

    head = 0
    terminated_id: int | None = 0 if isinstance(start, Terminated) else None

    def intern(expr: ProcessExpr) -> int:
        nonlocal terminated_id
        key = expr.key()
        sid = ids.get(key)
        if sid is None:
            sid = len(ids)
            if sid >= bounds.max_states:
                raise BudgetExceeded(
                    f"state budget {bounds.max_states} exceeded "
                    f"(frontier size {len(queue) - head})"
                )
            ids[key] = sid
            texts.append(str(expr))
            queue.append(expr)
            if isinstance(expr, Terminated):
                terminating.add(sid)
                terminated_id = sid
        return sid

    while head < len(queue):
        cfg = queue[head]
        src = head
        head += 1
        if isinstance(cfg, Terminated):
            continue
        for t in enabled(cfg, fs, bounds):
            if t.label.is_shutdown:
                dst = intern(Terminated())
            else:
                dst = intern(t.target)
            transitions.append((src, t.label, dst))

    return Lts(
        initial=0,
        transitions=tuple(transitions),
        terminating=frozenset(terminating),
        n_states=len(ids),
        state_text=tuple(texts),
    )
