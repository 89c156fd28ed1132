"""Vertical implementation: apply action refinements to process definitions
and verify vertical bisimilarity.

The verdict combines two rooted-weak-bisimulation checks:

* the hide/rename construction: the renamed abstract process with refined
  actions hidden, against the concrete process with all refinement-body
  actions hidden;
* the refinement-structure check: the mechanically refined abstract process
  against the concrete one, which rejects implementations that permute
  actions across the hidden/visible boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import MappingError
from .flatten import FlatSpec, adhoc_spec
from .kernel import Bounds, DEFAULT_BOUNDS, build_lts
from .equiv import VerdictReport, rooted_weak_bisim
from .modules import Mapping, ProcDef
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
    Scope,
    Seq,
    Sum,
    Terminated,
    atoms_used,
    calls_used,
    normalize,
    seq,
)
from .terms import Term, Var, match, subst, term_vars


def classify_mapping(m: Mapping, known_functions: set[str]) -> Mapping:
    """Interpret undeclared identifiers in mapping patterns as variables.

    Patterns must be linear; replacement variables must occur in the pattern.
    """

    def conv(t, bound: set[str]):
        if isinstance(t, Var):
            return t
        if not t.args and t.name not in known_functions:
            return Var(t.name)
        return Term(t.name, tuple(conv(a, bound) for a in t.args))

    def conv_atom(a: Atom) -> Atom:
        return Atom(a.name, tuple(conv(arg, set()) for arg in a.args))

    def check_linear(a: Atom):
        seen: set[str] = set()
        for arg in a.args:
            for v in sorted(term_vars(arg)):
                if v in seen:
                    raise MappingError(f"pattern {a} is not linear in variable {v!r}")
                seen.add(v)

    refinements = []
    for pattern, body in m.refinements:
        p = conv_atom(pattern)
        check_linear(p)
        pv = set().union(*[term_vars(arg) for arg in p.args]) if p.args else set()
        new_body = tuple(conv_atom(b) for b in body)
        for b in new_body:
            for arg in b.args:
                extra = term_vars(conv(arg, set())) - pv
                if extra:
                    raise MappingError(
                        f"refinement body {b} uses variables {sorted(extra)} "
                        f"not bound by pattern {p}"
                    )
        refinements.append((p, new_body))
    renamings = []
    for pattern, repl in m.renamings:
        p = conv_atom(pattern)
        check_linear(p)
        pv = set().union(*[term_vars(arg) for arg in p.args]) if p.args else set()
        r = conv_atom(repl)
        for arg in r.args:
            extra = term_vars(arg) - pv
            if extra:
                raise MappingError(
                    f"renaming target {r} uses variables {sorted(extra)} "
                    f"not bound by pattern {p}"
                )
        renamings.append((p, r))
    return Mapping(tuple(refinements), tuple(renamings), m.process_renames)


def _match_atom(pattern: Atom, atom: Atom) -> dict[str, Term] | None:
    if pattern.name != atom.name or len(pattern.args) != len(atom.args):
        return None
    binding: dict[str, Term] = {}
    for p, v in zip(pattern.args, atom.args):
        if isinstance(v, Var) or not match(p, v, binding):
            return None
    return binding


@dataclass
class MappingApplication:
    defs: dict[str, ProcDef]
    passthrough: tuple[str, ...]  # atoms no rule matched

    @property
    def warnings(self) -> list[str]:
        return [f"atom {a!r} passed through unmapped" for a in self.passthrough]


def apply_mapping(
    defs: dict[str, ProcDef] | list[ProcDef], m: Mapping
) -> MappingApplication:
    """Substitute refinement sequences and renamings; rename processes.

    ``m`` should already be classified (`classify_mapping`) when patterns
    contain variables.
    """
    if isinstance(defs, list):
        defs = {d.name: d for d in defs}
    renames = dict(m.process_renames)
    passthrough: set[str] = set()

    def map_atom(atom: Atom) -> ProcessExpr:
        hits: list[ProcessExpr] = []
        for pattern, body in m.refinements:
            binding = _match_atom(pattern, atom)
            if binding is not None:
                inst = [
                    Atom(b.name, tuple(subst(arg, binding) for arg in b.args))
                    for b in body
                ]
                hits.append(seq(*inst) if len(inst) > 1 else inst[0])
        for pattern, repl in m.renamings:
            binding = _match_atom(pattern, atom)
            if binding is not None:
                hits.append(Atom(repl.name, tuple(subst(arg, binding) for arg in repl.args)))
        if len(hits) > 1:
            raise MappingError(f"ambiguous mapping: several rules match atom {atom}")
        if not hits:
            passthrough.add(atom.name)
            return atom
        return hits[0]

    def walk(e: ProcessExpr) -> ProcessExpr:
        if isinstance(e, Atom):
            return map_atom(e)
        if isinstance(e, (Deadlock, Terminated)):
            return e
        if isinstance(e, Seq):
            return Seq(walk(e.left), walk(e.right))
        if isinstance(e, Alt):
            return Alt(tuple(walk(o) for o in e.operands))
        if isinstance(e, Par):
            return Par(tuple(walk(o) for o in e.operands))
        if isinstance(e, Encaps):
            return Encaps(e.actions, walk(e.body))
        if isinstance(e, Hide):
            return Hide(e.actions, walk(e.body))
        if isinstance(e, Rename):
            return Rename(e.rules, walk(e.body))
        if isinstance(e, Call):
            return Call(renames.get(e.name, e.name), e.args)
        if isinstance(e, Sum):
            return Sum(e.var, e.sort, walk(e.body))
        if isinstance(e, Scope):
            return Scope(e.name, walk(e.body))
        raise MappingError(f"cannot map node {e!r}")

    out: dict[str, ProcDef] = {}
    for name, d in defs.items():
        new_name = renames.get(name, name)
        out[new_name] = ProcDef(new_name, d.params, normalize(walk(d.body)))
    return MappingApplication(out, tuple(sorted(passthrough)))


def _reachable_defs(fs: FlatSpec, entry: str) -> dict[str, ProcDef]:
    out: dict[str, ProcDef] = {}
    stack = [entry]
    while stack:
        name = stack.pop()
        if name in out:
            continue
        d = fs.defs[name]
        out[name] = d
        stack.extend(c for c in calls_used(d.body) if c not in out)
    return out


def vertical_check(
    fs_abs: FlatSpec,
    abstract: str,
    fs_conc: FlatSpec,
    concrete: str,
    m: Mapping,
    bounds: Bounds = DEFAULT_BOUNDS,
) -> VerdictReport:
    """Vertical bisimilarity of ``abstract`` and ``concrete`` under mapping ``m``."""
    known = set(fs_abs.sig.functions) | set(fs_conc.sig.functions)
    cm = classify_mapping(m, known)

    refined_names = frozenset(p.name for p, _ in cm.refinements)
    body_names = frozenset(b.name for _, body in cm.refinements for b in body)

    s_expr: ProcessExpr = Call(abstract)
    if cm.renamings:
        s_expr = Rename(tuple(cm.renamings), s_expr)
    if refined_names:
        s_expr = Hide(refined_names, s_expr)
    i_expr: ProcessExpr = Call(concrete)
    if body_names:
        i_expr = Hide(body_names, i_expr)

    s_prime = build_lts(fs_abs, s_expr, bounds)
    i_prime = build_lts(fs_conc, i_expr, bounds)
    interface = rooted_weak_bisim(s_prime, i_prime)

    abs_defs = _reachable_defs(fs_abs, abstract)
    application = apply_mapping(abs_defs, cm)
    mapped_entry = dict(cm.process_renames).get(abstract, abstract)
    mapped_fs = adhoc_spec(
        application.defs,
        comm_rules=fs_conc.comm_rules,
        entry=mapped_entry,
        sig=fs_conc.sig,
        equations=fs_conc.equations,
    )
    structure = rooted_weak_bisim(
        build_lts(mapped_fs, mapped_entry, bounds),
        build_lts(fs_conc, concrete, bounds),
    )

    warnings = list(application.warnings)
    abs_alphabet = set()
    for d in abs_defs.values():
        abs_alphabet |= atoms_used(d.body)
    overlap = sorted(abs_alphabet & set(body_names))
    if overlap:
        warnings.append(
            f"abstract alphabet overlaps refinement bodies: {', '.join(overlap)}"
        )

    related = interface.related and structure.related
    counterexample = None
    if not interface.related:
        counterexample = interface.counterexample
    elif not structure.related:
        counterexample = structure.counterexample
    return VerdictReport(
        related,
        "vertical",
        witness=interface.witness if related else None,
        counterexample=counterexample,
        warnings=warnings,
        details={
            "s_prime": s_prime,
            "i_prime": i_prime,
            "interface": interface,
            "structure": structure,
        },
    )
