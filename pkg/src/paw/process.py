"""Process terms: atoms, deadlock, sequence, choice, merge, encapsulation,
hiding, renaming, recursion, and finite sums.

Expressions are immutable; ``normalize`` gives the canonical form used for
state identity (AC-sorted choice/merge, deadlock units removed).
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import Term, Var, subst

TAU_ATOM = "skip"  # reserved atom name: fires as the silent step
SHUTDOWN_ATOM = "shutdown"  # reserved atom name: disrupts the whole system


class ProcessExpr:
    def key(self) -> tuple:
        raise NotImplementedError

    def __str__(self):
        from .printer import render_expr

        return render_expr(self)


@dataclass(frozen=True)
class Atom(ProcessExpr):
    name: str
    args: tuple[Term | Var, ...] = ()

    def key(self):
        return ("atom", self.name) + tuple(a.key() for a in self.args)


@dataclass(frozen=True)
class Deadlock(ProcessExpr):
    def key(self):
        return ("delta",)


@dataclass(frozen=True)
class Terminated(ProcessExpr):
    """Successful termination; only appears as a configuration, never in source."""

    def key(self):
        return ("check",)


@dataclass(frozen=True)
class Ref(ProcessExpr):
    """A name that is either an atom or a process call; resolved by flatten."""

    name: str
    args: tuple[Term | Var, ...] = ()

    def key(self):
        return ("ref", self.name) + tuple(a.key() for a in self.args)


@dataclass(frozen=True)
class Seq(ProcessExpr):
    left: ProcessExpr
    right: ProcessExpr

    def key(self):
        return ("seq", self.left.key(), self.right.key())


@dataclass(frozen=True)
class Alt(ProcessExpr):
    operands: tuple[ProcessExpr, ...]

    def key(self):
        return ("alt",) + tuple(o.key() for o in self.operands)


@dataclass(frozen=True)
class Par(ProcessExpr):
    operands: tuple[ProcessExpr, ...]

    def key(self):
        return ("par",) + tuple(o.key() for o in self.operands)


@dataclass(frozen=True)
class Encaps(ProcessExpr):
    actions: frozenset[str] | str  # str: a named set, resolved by flatten
    body: ProcessExpr

    def key(self):
        acts = self.actions if isinstance(self.actions, str) else tuple(sorted(self.actions))
        return ("encaps", acts, self.body.key())


@dataclass(frozen=True)
class Hide(ProcessExpr):
    actions: frozenset[str] | str
    body: ProcessExpr

    def key(self):
        acts = self.actions if isinstance(self.actions, str) else tuple(sorted(self.actions))
        return ("hide", acts, self.body.key())


@dataclass(frozen=True)
class Rename(ProcessExpr):
    """Applies (pattern atom -> replacement atom) rules to fired labels."""

    rules: tuple[tuple[Atom, Atom], ...]
    body: ProcessExpr

    def key(self):
        return (
            "rename",
            tuple((p.key(), r.key()) for p, r in self.rules),
            self.body.key(),
        )


@dataclass(frozen=True)
class Call(ProcessExpr):
    name: str
    args: tuple[Term | Var, ...] = ()

    def key(self):
        return ("call", self.name) + tuple(a.key() for a in self.args)


@dataclass(frozen=True)
class Sum(ProcessExpr):
    var: str
    sort: str
    body: ProcessExpr

    def key(self):
        return ("sum", self.var, self.sort, self.body.key())


@dataclass(frozen=True)
class Scope(ProcessExpr):
    """Marks the unfolded body of a named process; carries the instance name
    used for animation participants.  Semantically transparent."""

    name: str
    body: ProcessExpr

    def key(self):
        return ("scope", self.name, self.body.key())


def alt(*operands: ProcessExpr) -> ProcessExpr:
    flat: list[ProcessExpr] = []
    for o in operands:
        if isinstance(o, Alt):
            flat.extend(o.operands)
        else:
            flat.append(o)
    if len(flat) == 1:
        return flat[0]
    return Alt(tuple(flat))


def par(*operands: ProcessExpr) -> ProcessExpr:
    flat: list[ProcessExpr] = []
    for o in operands:
        if isinstance(o, Par):
            flat.extend(o.operands)
        else:
            flat.append(o)
    if len(flat) == 1:
        return flat[0]
    return Par(tuple(flat))


def seq(*operands: ProcessExpr) -> ProcessExpr:
    out = operands[-1]
    for o in reversed(operands[:-1]):
        out = Seq(o, out)
    return out


def normalize(e: ProcessExpr) -> ProcessExpr:
    """Canonical form: flatten + AC-sort choice and merge, drop deadlock
    alternatives (x + delta = x), collapse markers around termination.
    Idempotent."""
    if isinstance(e, (Atom, Deadlock, Terminated, Call, Ref)):
        return e
    if isinstance(e, Seq):
        left = normalize(e.left)
        right = normalize(e.right)
        if isinstance(left, Terminated):
            return right
        if isinstance(left, Seq):  # (x . y) . z = x . (y . z)
            return normalize(Seq(left.left, Seq(left.right, right)))
        return Seq(left, right)
    if isinstance(e, Alt):
        ops: list[ProcessExpr] = []
        for o in e.operands:
            n = normalize(o)
            if isinstance(n, Alt):
                ops.extend(n.operands)
            elif isinstance(n, Deadlock):
                continue
            else:
                ops.append(n)
        uniq = {o.key(): o for o in ops}
        ops = [uniq[k] for k in sorted(uniq)]
        if not ops:
            return Deadlock()
        if len(ops) == 1:
            return ops[0]
        return Alt(tuple(ops))
    if isinstance(e, Par):
        ops = []
        for o in e.operands:
            n = normalize(o)
            if isinstance(n, Par):
                ops.extend(n.operands)
            elif isinstance(n, Terminated):
                continue
            else:
                ops.append(n)
        ops.sort(key=lambda o: o.key())
        if not ops:
            return Terminated()
        if len(ops) == 1:
            return ops[0]
        return Par(tuple(ops))
    if isinstance(e, Encaps):
        body = normalize(e.body)
        if isinstance(body, Terminated):
            return body
        return Encaps(e.actions, body)
    if isinstance(e, Hide):
        body = normalize(e.body)
        if isinstance(body, Terminated):
            return body
        return Hide(e.actions, body)
    if isinstance(e, Rename):
        body = normalize(e.body)
        if isinstance(body, Terminated):
            return body
        return Rename(e.rules, body)
    if isinstance(e, Sum):
        return Sum(e.var, e.sort, normalize(e.body))
    if isinstance(e, Scope):
        body = normalize(e.body)
        if isinstance(body, Terminated):
            return body
        if isinstance(body, Scope) and body.name == e.name:
            return body
        return Scope(e.name, body)
    raise TypeError(f"not a process expression: {e!r}")


def subst_data(e: ProcessExpr, binding: dict[str, Term]) -> ProcessExpr:
    """Substitute data variables throughout an expression."""
    if isinstance(e, (Atom, Ref)):
        return type(e)(e.name, tuple(subst(a, binding) for a in e.args))
    if isinstance(e, (Deadlock, Terminated)):
        return e
    if isinstance(e, Seq):
        return Seq(subst_data(e.left, binding), subst_data(e.right, binding))
    if isinstance(e, Alt):
        return Alt(tuple(subst_data(o, binding) for o in e.operands))
    if isinstance(e, Par):
        return Par(tuple(subst_data(o, binding) for o in e.operands))
    if isinstance(e, Encaps):
        return Encaps(e.actions, subst_data(e.body, binding))
    if isinstance(e, Hide):
        return Hide(e.actions, subst_data(e.body, binding))
    if isinstance(e, Rename):
        return Rename(e.rules, subst_data(e.body, binding))
    if isinstance(e, Call):
        return Call(e.name, tuple(subst(a, binding) for a in e.args))
    if isinstance(e, Sum):
        inner = {k: v for k, v in binding.items() if k != e.var}
        return Sum(e.var, e.sort, subst_data(e.body, inner))
    if isinstance(e, Scope):
        return Scope(e.name, subst_data(e.body, binding))
    raise TypeError(f"not a process expression: {e!r}")


def atoms_used(e: ProcessExpr) -> set[str]:
    """Names of all atoms occurring syntactically in the expression."""
    if isinstance(e, Atom):
        return {e.name}
    if isinstance(e, Ref):
        return {e.name}
    if isinstance(e, (Deadlock, Terminated, Call)):
        return set()
    if isinstance(e, Seq):
        return atoms_used(e.left) | atoms_used(e.right)
    if isinstance(e, (Alt, Par)):
        out: set[str] = set()
        for o in e.operands:
            out |= atoms_used(o)
        return out
    if isinstance(e, (Encaps, Hide, Rename, Sum, Scope)):
        return atoms_used(e.body)
    raise TypeError(f"not a process expression: {e!r}")


def calls_used(e: ProcessExpr) -> set[str]:
    """Names of all processes called in the expression."""
    if isinstance(e, Call):
        return {e.name}
    if isinstance(e, (Atom, Deadlock, Terminated)):
        return set()
    if isinstance(e, Seq):
        return calls_used(e.left) | calls_used(e.right)
    if isinstance(e, (Alt, Par)):
        out: set[str] = set()
        for o in e.operands:
            out |= calls_used(o)
        return out
    if isinstance(e, (Encaps, Hide, Rename, Sum, Scope)):
        return calls_used(e.body)
    raise TypeError(f"not a process expression: {e!r}")
