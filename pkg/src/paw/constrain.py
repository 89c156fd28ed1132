"""Horizontal implementation by superimposition: constrain a process with a
tool/adapter process and check the implementation relation.

Constraining yields ``encaps(H, proc || constraint)`` with H the actions the
communication rules pair.  The implementation check hides constraint-local
behaviour, renames communication results back to the constrained actions, and
requires weak trace inclusion into the specification (rooted weak
bisimilarity selectable for a stronger verdict).
"""

from __future__ import annotations

from .diagnostics import FlattenError
from .equiv import VerdictReport, rooted_weak_bisim, weak_trace_included
from .flatten import FlatSpec
from .kernel import ActionLabel, Bounds, DEFAULT_BOUNDS, Lts, apply_rename, build_lts
from .modules import CommRule, ProcDef
from .process import Atom, Call, Encaps, atoms_used, par
from .refine import _reachable_defs


def constrain(
    proc: str,
    constraint: str,
    comms: tuple[CommRule, ...],
    fs: FlatSpec,
    name: str | None = None,
) -> ProcDef:
    """Superimpose ``constraint`` on ``proc``: encapsulate the paired actions
    around their parallel composition.  Both processes must be defined in
    ``fs``; every comm rule must touch the operands."""
    for p in (proc, constraint):
        if p not in fs.defs:
            raise FlattenError(f"unknown process {p!r}")
    alphabet: set[str] = set()
    for d in _reachable_defs(fs, proc).values():
        alphabet |= atoms_used(d.body)
    for d in _reachable_defs(fs, constraint).values():
        alphabet |= atoms_used(d.body)
    enforced: set[str] = set()
    for rule in comms:
        for action in (rule.left.name, rule.right.name):
            if action not in alphabet:
                raise FlattenError(
                    f"communication rule {rule.left.name} | {rule.right.name} "
                    f"references action {action!r} absent from both operands"
                )
            enforced.add(action)
    if name is None:
        name = f"Constrained{proc}"
    body = Encaps(frozenset(enforced), par(Call(constraint), Call(proc)))
    return ProcDef(name, (), body)


def rules_touching(comm_rules: tuple[CommRule, ...], actions: set[str]) -> tuple[CommRule, ...]:
    """The communication rules whose operands intersect the given actions."""
    return tuple(
        r for r in comm_rules if r.left.name in actions or r.right.name in actions
    )


def relabel_lts(lts: Lts, rules: tuple[tuple[Atom, Atom], ...]) -> Lts:
    """Apply rename rules to every transition label."""
    transitions = tuple(
        (src, apply_rename(rules, label), dst) for src, label, dst in lts.transitions
    )
    return Lts(lts.initial, transitions, lts.terminating, lts.n_states, lts.state_text)


def hide_labels(lts: Lts, names: set[str]) -> Lts:
    transitions = tuple(
        (src, ActionLabel.tau() if (not label.is_tau and label.name in names) else label, dst)
        for src, label, dst in lts.transitions
    )
    return Lts(lts.initial, transitions, lts.terminating, lts.n_states, lts.state_text)


def derive_result_renames(
    comm_rules: tuple[CommRule, ...], spec_alphabet: set[str]
) -> tuple[tuple[tuple[Atom, Atom], ...], set[str], list[str]]:
    """Rename communication results back to the constrained process's action.

    For a rule a|b=c with exactly one of a,b in the specification alphabet,
    c maps back to that action.  Returns (rules, renamed result names,
    warnings for ambiguous rules)."""
    renames: list[tuple[Atom, Atom]] = []
    renamed: set[str] = set()
    warnings: list[str] = []
    for rule in comm_rules:
        left_in = rule.left.name in spec_alphabet
        right_in = rule.right.name in spec_alphabet
        if left_in == right_in:
            if left_in:
                warnings.append(
                    f"communication {rule.left.name} | {rule.right.name}: both sides "
                    f"belong to the specification alphabet; result left as is"
                )
            continue
        back = rule.left if left_in else rule.right
        renames.append((rule.result, back))
        renamed.add(rule.result.name)
    return tuple(renames), renamed, warnings


def horizontal_check(
    fs_spec: FlatSpec,
    spec: str,
    fs_impl: FlatSpec,
    impl: str,
    hidden: set[str] | frozenset[str] = frozenset(),
    bounds: Bounds = DEFAULT_BOUNDS,
    relation: str = "trace",
    constraint: str | None = None,
) -> VerdictReport:
    """Is ``impl`` (a constrained composite) an implementation of ``spec``?"""
    spec_alphabet: set[str] = set()
    for d in _reachable_defs(fs_spec, spec).values():
        spec_alphabet |= atoms_used(d.body)

    spec_lts = build_lts(fs_spec, spec, bounds)
    impl_lts = build_lts(fs_impl, impl, bounds)

    renames, renamed_names, warnings = derive_result_renames(
        fs_impl.comm_rules, spec_alphabet
    )
    renamed = relabel_lts(impl_lts, renames)
    foreign = {
        label.name
        for _, label, _ in renamed.transitions
        if not label.is_tau and label.name not in spec_alphabet
    }
    impl_prime = hide_labels(renamed, foreign | set(hidden))

    if constraint is not None and constraint in fs_impl.defs:
        c_alpha: set[str] = set()
        for d in _reachable_defs(fs_impl, constraint).values():
            c_alpha |= atoms_used(d.body)
        direct = sorted((c_alpha & spec_alphabet))
        if direct:
            warnings.append(
                f"constraint {constraint!r} shares actions {', '.join(direct)} with "
                f"the specification outside the declared communication interface"
            )

    if relation == "rooted-weak":
        verdict = rooted_weak_bisim(impl_prime, spec_lts)
    else:
        verdict = weak_trace_included(impl_prime, spec_lts, bounds.max_states)
    verdict = VerdictReport(
        verdict.related,
        f"horizontal ({verdict.relation})",
        witness=verdict.witness,
        counterexample=verdict.counterexample,
        warnings=warnings + verdict.warnings,
        details={"impl_prime": impl_prime, "spec": spec_lts},
    )
    return verdict
