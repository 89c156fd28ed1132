"""Algebraic data terms: construction, matching, rewriting, and sort enumeration.

Terms are free constructor applications plus variables.  Equality of ground
terms is syntactic equality of rewrite normal forms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import BudgetExceeded, FlattenError


@dataclass(frozen=True)
class Term:
    """Function application ``name(args)``; a constant has no args."""

    name: str
    args: tuple["Term | Var", ...] = ()

    def key(self):
        return ("t", self.name) + tuple(a.key() for a in self.args)

    def __str__(self):
        return render_term(self)


@dataclass(frozen=True)
class Var:
    """A term variable, bound by an equation, a sum, or a mapping pattern."""

    name: str

    def key(self):
        return ("v", self.name)

    def __str__(self):
        return self.name


def render_term(t: Term | Var) -> str:
    if isinstance(t, Var):
        return t.name
    if not t.args:
        return t.name
    # binary constructors with symbolic names print infix (the connection `>>`)
    if len(t.args) == 2 and not t.name[0].isalpha():
        return f"{render_term(t.args[0])} {t.name} {render_term(t.args[1])}"
    return f"{t.name}({', '.join(render_term(a) for a in t.args)})"


def term_vars(t: Term | Var) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    out: set[str] = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def subst(t: Term | Var, binding: dict[str, Term]) -> Term | Var:
    if isinstance(t, Var):
        return binding.get(t.name, t)
    if not t.args:
        return t
    return Term(t.name, tuple(subst(a, binding) for a in t.args))


def match(pattern: Term | Var, value: Term, binding: dict[str, Term]) -> bool:
    """One-way matching: extends ``binding`` in place, returns success."""
    if isinstance(pattern, Var):
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = value
            return True
        return bound == value
    if isinstance(value, Var) or pattern.name != value.name:
        return False
    if len(pattern.args) != len(value.args):
        return False
    return all(match(p, v, binding) for p, v in zip(pattern.args, value.args))


@dataclass(frozen=True)
class Equation:
    """Oriented rewrite rule lhs -> rhs; variables of rhs occur in lhs."""

    lhs: Term
    rhs: Term | Var
    label: str = ""


@dataclass
class Signature:
    """Function declarations name -> (argument sorts, result sort)."""

    functions: dict[str, tuple[tuple[str, ...], str]] = field(default_factory=dict)

    def declare(self, name: str, arg_sorts: tuple[str, ...], result: str, pos=None):
        prev = self.functions.get(name)
        if prev is not None and prev != (arg_sorts, result):
            raise FlattenError(f"conflicting declarations for function '{name}'", pos)
        self.functions[name] = (arg_sorts, result)

    def sorts(self) -> set[str]:
        out: set[str] = set()
        for args, res in self.functions.values():
            out.update(args)
            out.add(res)
        return out

    def constructors_of(self, sort: str) -> list[tuple[str, tuple[str, ...]]]:
        return sorted(
            (name, args)
            for name, (args, res) in self.functions.items()
            if res == sort
        )

    def sort_of(self, t: Term | Var, env: dict[str, str] | None = None) -> str:
        """Sort of a term; variables are looked up in ``env``."""
        if isinstance(t, Var):
            if env and t.name in env:
                return env[t.name]
            raise FlattenError(f"unbound term variable '{t.name}'")
        decl = self.functions.get(t.name)
        if decl is None:
            raise FlattenError(f"undeclared function '{t.name}'")
        arg_sorts, result = decl
        if len(arg_sorts) != len(t.args):
            raise FlattenError(
                f"function '{t.name}' expects {len(arg_sorts)} arguments, got {len(t.args)}"
            )
        for a, expected in zip(t.args, arg_sorts):
            actual = self.sort_of(a, env)
            if actual != expected:
                raise FlattenError(
                    f"argument of '{t.name}' has sort {actual}, expected {expected}"
                )
        return result


def rewrite(
    t: Term | Var,
    equations: tuple[Equation, ...],
    max_steps: int = 10_000,
) -> Term | Var:
    """Normal form of ``t`` under leftmost-innermost application of equations."""
    steps = 0

    def norm(u: Term | Var) -> Term | Var:
        nonlocal steps
        if isinstance(u, Var):
            return u
        u = Term(u.name, tuple(norm(a) for a in u.args))
        while True:
            for eq in equations:
                binding: dict[str, Term] = {}
                if match(eq.lhs, u, binding):
                    steps += 1
                    if steps > max_steps:
                        raise BudgetExceeded(
                            f"rewrite budget of {max_steps} steps exceeded "
                            f"(possible non-termination)"
                        )
                    u = subst(eq.rhs, binding)
                    if isinstance(u, Var):
                        return u
                    u = Term(u.name, tuple(norm(a) for a in u.args))
                    break
            else:
                return u

    return norm(t)


def enumerate_sort(sig: Signature, sort: str, max_terms: int = 4096) -> tuple[Term, ...]:
    """All ground constructor terms of ``sort``, in deterministic order.

    Raises when the sort has no constructors or is not finitely generated
    within the budget (recursive constructors).
    """
    ctors = {s: sig.constructors_of(s) for s in sig.sorts()}
    if not ctors.get(sort):
        raise FlattenError(f"sort '{sort}' has no constructors; cannot enumerate")
    known: dict[str, list[Term]] = {s: [] for s in ctors}
    changed = True
    while changed:
        changed = False
        for s, cs in ctors.items():
            have = {t for t in known[s]}
            for name, arg_sorts in cs:
                if not arg_sorts:
                    candidates = [Term(name)]
                else:
                    pools = [known[a] for a in arg_sorts]
                    if any(not p for p in pools):
                        continue
                    candidates = []
                    idx = [0] * len(pools)
                    while True:
                        candidates.append(
                            Term(name, tuple(pools[i][idx[i]] for i in range(len(pools))))
                        )
                        for i in reversed(range(len(pools))):
                            idx[i] += 1
                            if idx[i] < len(pools[i]):
                                break
                            idx[i] = 0
                        else:
                            break
                for c in candidates:
                    if c not in have:
                        have.add(c)
                        known[s].append(c)
                        changed = True
                        if len(known[s]) > max_terms:
                            raise BudgetExceeded(
                                f"sort '{s}' generates more than {max_terms} terms; "
                                f"unbounded data detected"
                            )
    return tuple(sorted(known[sort], key=lambda t: t.key()))
