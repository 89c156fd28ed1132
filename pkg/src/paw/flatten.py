"""Import resolution: turns a ModuleSet into a single flat specification.

Bindings substitute formal parameter processes by actual ones, renamings
rename the imported module's processes, and all declarations merge into one
namespace.  Reserved atoms: ``skip`` (silent step) and ``shutdown`` (system
disrupt) are always available.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import FlattenError, UnknownNameError
from .modules import (
    AtomDecl,
    CommRule,
    DataModule,
    FuncDecl,
    ImportRef,
    Module,
    ModuleSet,
    ProcDecl,
    ProcDef,
    ProcessModule,
)
from .process import (
    Alt,
    Atom,
    Call,
    Deadlock,
    Encaps,
    Hide,
    Par,
    ProcessExpr,
    Ref,
    Rename,
    SHUTDOWN_ATOM,
    Scope,
    Seq,
    Sum,
    TAU_ATOM,
    Terminated,
)
from .terms import Equation, Signature, Var

RESERVED_ATOMS = {TAU_ATOM: (), SHUTDOWN_ATOM: ()}


@dataclass
class FlatSpec:
    """Import-resolved specification: one namespace, resolved definitions."""

    sig: Signature = field(default_factory=Signature)
    equations: tuple[Equation, ...] = ()
    atoms: dict[str, tuple[str, ...]] = field(default_factory=dict)
    proc_decls: dict[str, tuple[str, ...]] = field(default_factory=dict)
    defs: dict[str, ProcDef] = field(default_factory=dict)
    comm_rules: tuple[CommRule, ...] = ()
    entry: str = ""
    exported: tuple[str, ...] = ()
    def_origin: dict[str, str] = field(default_factory=dict)
    atom_origin: dict[str, str] = field(default_factory=dict)

    def structural_key(self):
        return (
            tuple(sorted(self.sig.functions.items())),
            tuple((e.lhs.key(), e.rhs.key()) for e in self.equations),
            tuple(sorted(self.atoms.items())),
            tuple(sorted(self.proc_decls.items())),
            tuple(sorted((n, d.params, d.body.key()) for n, d in self.defs.items())),
            tuple(
                (r.left.key(), r.right.key(), r.result.key(), r.vars)
                for r in self.comm_rules
            ),
            self.entry,
        )

    def to_modules(self) -> ModuleSet:
        """Render back to a two-module set that reflattens to this spec."""
        entry = self.entry or "Main"
        data = DataModule(
            name=f"{entry}FlatData",
            functions=[
                FuncDecl(n, a, r) for n, (a, r) in sorted(self.sig.functions.items())
            ],
            equations=list(self.equations),
        )
        data.exported_functions = [f.name for f in data.functions]
        # re-derive the variables appearing in equations so they reparse
        for eq in self.equations:
            for v in _equation_vars(eq):
                data.variables.setdefault(v, _guess_var_sort(self.sig, eq, v))
        proc = ProcessModule(
            name=f"{entry}Flat",
            imports=[ImportRef(data.name)],
            exported_processes=[entry] if entry else [],
            atoms=[
                AtomDecl(n, s)
                for n, s in sorted(self.atoms.items())
                if n not in RESERVED_ATOMS
            ],
            processes=[ProcDecl(n, self.proc_decls[n]) for n in sorted(self.proc_decls)],
            communications=list(self.comm_rules),
            definitions=[self.defs[n] for n in sorted(self.defs)],
        )
        return ModuleSet([data, proc])


def _equation_vars(eq: Equation) -> set[str]:
    from .terms import term_vars

    return term_vars(eq.lhs) | term_vars(eq.rhs)


def _guess_var_sort(sig: Signature, eq: Equation, var: str) -> str:
    """Find the sort of an equation variable from its position in the lhs."""

    def walk(t) -> str | None:
        if isinstance(t, Var):
            return None
        decl = sig.functions.get(t.name)
        for i, a in enumerate(t.args):
            if isinstance(a, Var) and a.name == var and decl:
                return decl[0][i]
            found = walk(a)
            if found:
                return found
        return None

    return walk(eq.lhs) or "DATA"


def builtin_libraries() -> dict[str, Module]:
    from .levels import builtin_modules

    return builtin_modules()


def flatten(ms: ModuleSet, root: str, libraries: dict[str, Module] | None = None) -> FlatSpec:
    """Resolve imports from ``root`` and merge everything into a FlatSpec."""
    if libraries is None:
        libraries = builtin_libraries()
    by_name = dict(libraries)
    by_name.update(ms.by_name())  # user modules shadow libraries
    if root not in by_name:
        raise FlattenError(f"root module {root!r} not found")

    fs = FlatSpec()
    for name, args in RESERVED_ATOMS.items():
        fs.atoms[name] = args
        fs.atom_origin[name] = "<builtin>"

    instantiated: set[tuple] = set()
    visiting: list[str] = []

    def load(name: str, subst_procs: dict[str, str], pos) -> None:
        mod = by_name.get(name)
        if mod is None:
            raise FlattenError(f"unresolved import {name!r}", pos)
        key = (name, tuple(sorted(subst_procs.items())))
        if key in instantiated:
            return
        if name in visiting:
            cycle = " -> ".join(visiting + [name])
            raise FlattenError(f"import cycle: {cycle}", pos)
        visiting.append(name)
        try:
            for imp in mod.imports:
                inner_subst: dict[str, str] = {}
                target = by_name.get(imp.module)
                if imp.actuals_from and imp.actuals_from not in visiting:
                    # `bound by [...] to M` imports M as the source of actuals
                    load(imp.actuals_from, {}, mod.pos)
                if imp.bindings:
                    if not isinstance(target, ProcessModule):
                        raise FlattenError(
                            f"import {imp.module!r} is not a process module "
                            f"but is imported with a binding",
                            mod.pos,
                        )
                    formals = set(target.parameters)
                    for formal, actual in imp.bindings:
                        if formal not in formals:
                            raise FlattenError(
                                f"module {imp.module!r} has no parameter {formal!r}",
                                mod.pos,
                            )
                        inner_subst[formal] = subst_procs.get(actual, actual)
                for old, new in imp.renamings:
                    inner_subst[old] = subst_procs.get(new, new)
                load(imp.module, inner_subst, mod.pos)
            _merge(fs, mod, subst_procs)
            instantiated.add(key)
        finally:
            visiting.pop()

    load(root, {}, None)
    _resolve_defs(fs)
    fs.exported = _root_exports(by_name[root])
    fs.entry = _designated_entry(by_name[root], fs)
    _validate(fs)
    return fs


def _root_exports(mod: Module) -> tuple[str, ...]:
    if isinstance(mod, ProcessModule):
        return tuple(mod.exported_processes)
    return ()


def _designated_entry(mod: Module, fs: FlatSpec) -> str:
    if not isinstance(mod, ProcessModule):
        return ""
    if mod.name in fs.defs:
        return mod.name
    renamed = [imp for imp in mod.imports for old, new in imp.renamings if new in fs.defs]
    if isinstance(mod, ProcessModule) and len(mod.exported_processes) == 1:
        return mod.exported_processes[0]
    if renamed:
        for imp in mod.imports:
            for _old, new in imp.renamings:
                if new in fs.defs:
                    return new
    if len(fs.defs) == 1:
        return next(iter(fs.defs))
    return ""


def _rename_expr(e: ProcessExpr, subst_procs: dict[str, str]) -> ProcessExpr:
    """Rename process references (Ref/Call names) per the substitution."""
    if isinstance(e, (Ref, Call)):
        return type(e)(subst_procs.get(e.name, e.name), e.args)
    if isinstance(e, (Atom, Deadlock, Terminated)):
        return e
    if isinstance(e, Seq):
        return Seq(_rename_expr(e.left, subst_procs), _rename_expr(e.right, subst_procs))
    if isinstance(e, Alt):
        return Alt(tuple(_rename_expr(o, subst_procs) for o in e.operands))
    if isinstance(e, Par):
        return Par(tuple(_rename_expr(o, subst_procs) for o in e.operands))
    if isinstance(e, Encaps):
        return Encaps(e.actions, _rename_expr(e.body, subst_procs))
    if isinstance(e, Hide):
        return Hide(e.actions, _rename_expr(e.body, subst_procs))
    if isinstance(e, Rename):
        return Rename(e.rules, _rename_expr(e.body, subst_procs))
    if isinstance(e, Sum):
        return Sum(e.var, e.sort, _rename_expr(e.body, subst_procs))
    if isinstance(e, Scope):
        return Scope(e.name, _rename_expr(e.body, subst_procs))
    raise FlattenError(f"unexpected node {e!r}")


def _merge(fs: FlatSpec, mod: Module, subst_procs: dict[str, str]) -> None:
    if isinstance(mod, DataModule):
        for f in mod.functions:
            fs.sig.declare(f.name, f.arg_sorts, f.result, mod.pos)
        fs.equations = fs.equations + tuple(mod.equations)
        return

    for a in mod.atoms:
        prev = fs.atoms.get(a.name)
        if prev is not None and prev != a.arg_sorts:
            raise FlattenError(
                f"atom {a.name!r} redeclared with different arity "
                f"(in module {mod.name!r} and {fs.atom_origin.get(a.name)!r})",
                mod.pos,
            )
        fs.atoms[a.name] = a.arg_sorts
        fs.atom_origin.setdefault(a.name, mod.name)

    rename = dict(subst_procs)
    for p in mod.processes:
        new = rename.get(p.name, p.name)
        prev_decl = fs.proc_decls.get(new)
        if prev_decl is not None and prev_decl != p.arg_sorts:
            raise FlattenError(
                f"process {new!r} redeclared with different parameters", mod.pos
            )
        fs.proc_decls[new] = p.arg_sorts

    local_sets = mod.sets

    for d in mod.definitions:
        new_name = rename.get(d.name, d.name)
        body = _rename_expr(d.body, rename)
        body = _resolve_sets(body, local_sets, mod)
        if new_name in fs.defs:
            prev = fs.defs[new_name]
            if (prev.params, prev.body.key()) != (d.params, body.key()):
                raise FlattenError(
                    f"conflicting definitions for process {new_name!r} "
                    f"(modules {fs.def_origin[new_name]!r} and {mod.name!r})",
                    mod.pos,
                )
            continue
        fs.defs[new_name] = ProcDef(new_name, d.params, body)
        fs.def_origin[new_name] = mod.name
        fs.proc_decls.setdefault(new_name, fs.proc_decls.get(d.name, ()))

    for rule in mod.communications:
        fs.comm_rules = fs.comm_rules + (rule,)


def _resolve_sets(e: ProcessExpr, sets: dict[str, frozenset[str]], mod: Module) -> ProcessExpr:
    if isinstance(e, (Atom, Ref, Call, Deadlock, Terminated)):
        return e
    if isinstance(e, Seq):
        return Seq(_resolve_sets(e.left, sets, mod), _resolve_sets(e.right, sets, mod))
    if isinstance(e, Alt):
        return Alt(tuple(_resolve_sets(o, sets, mod) for o in e.operands))
    if isinstance(e, Par):
        return Par(tuple(_resolve_sets(o, sets, mod) for o in e.operands))
    if isinstance(e, (Encaps, Hide)):
        actions = e.actions
        if isinstance(actions, str):
            if actions not in sets:
                raise FlattenError(
                    f"unknown action set {actions!r} in module {mod.name!r}", mod.pos
                )
            actions = sets[actions]
        return type(e)(actions, _resolve_sets(e.body, sets, mod))
    if isinstance(e, Rename):
        return Rename(e.rules, _resolve_sets(e.body, sets, mod))
    if isinstance(e, Sum):
        return Sum(e.var, e.sort, _resolve_sets(e.body, sets, mod))
    if isinstance(e, Scope):
        return Scope(e.name, _resolve_sets(e.body, sets, mod))
    raise FlattenError(f"unexpected node {e!r}")


def _resolve_defs(fs: FlatSpec) -> None:
    """Turn Ref nodes into Atom or Call and check arities."""
    for name in list(fs.defs):
        d = fs.defs[name]
        params = d.params
        declared = fs.proc_decls.get(name, ())
        if len(params) != len(declared):
            if params and not declared:
                raise FlattenError(
                    f"process {name!r} is defined with parameters but declared without"
                )
            if len(params) != len(declared):
                raise FlattenError(
                    f"process {name!r}: definition has {len(params)} parameters, "
                    f"declaration has {len(declared)}"
                )
        env = dict(zip(params, declared))
        body = _resolve_refs(fs, d.body, env, name)
        fs.defs[name] = ProcDef(name, params, body)


def _resolve_refs(
    fs: FlatSpec, e: ProcessExpr, env: dict[str, str], where: str
) -> ProcessExpr:
    if isinstance(e, Ref):
        if e.name in fs.atoms:
            expected = fs.atoms[e.name]
            if len(e.args) != len(expected):
                raise FlattenError(
                    f"atom {e.name!r} expects {len(expected)} arguments, "
                    f"got {len(e.args)} (in {where})"
                )
            for arg, sort in zip(e.args, expected):
                actual = fs.sig.sort_of(arg, env)
                if actual != sort:
                    raise FlattenError(
                        f"argument of atom {e.name!r} has sort {actual}, "
                        f"expected {sort} (in {where})"
                    )
            return Atom(e.name, e.args)
        if e.name in fs.defs or e.name in fs.proc_decls:
            expected = fs.proc_decls.get(e.name, ())
            if len(e.args) != len(expected):
                raise FlattenError(
                    f"process {e.name!r} expects {len(expected)} arguments, "
                    f"got {len(e.args)} (in {where})"
                )
            for arg, sort in zip(e.args, expected):
                actual = fs.sig.sort_of(arg, env)
                if actual != sort:
                    raise FlattenError(
                        f"argument of process {e.name!r} has sort {actual}, "
                        f"expected {sort} (in {where})"
                    )
            return Call(e.name, e.args)
        raise UnknownNameError(
            e.name, f"{e.name!r} is neither a declared atom nor a process (in {where})"
        )
    if isinstance(e, Atom):
        return e
    if isinstance(e, (Deadlock, Terminated, Call)):
        return e
    if isinstance(e, Seq):
        return Seq(_resolve_refs(fs, e.left, env, where), _resolve_refs(fs, e.right, env, where))
    if isinstance(e, Alt):
        return Alt(tuple(_resolve_refs(fs, o, env, where) for o in e.operands))
    if isinstance(e, Par):
        return Par(tuple(_resolve_refs(fs, o, env, where) for o in e.operands))
    if isinstance(e, (Encaps, Hide)):
        if isinstance(e.actions, str):
            raise FlattenError(f"unresolved action set {e.actions!r} (in {where})")
        return type(e)(e.actions, _resolve_refs(fs, e.body, env, where))
    if isinstance(e, Rename):
        return Rename(e.rules, _resolve_refs(fs, e.body, env, where))
    if isinstance(e, Sum):
        inner = dict(env)
        inner[e.var] = e.sort
        return Sum(e.var, e.sort, _resolve_refs(fs, e.body, inner, where))
    if isinstance(e, Scope):
        return Scope(e.name, _resolve_refs(fs, e.body, env, where))
    raise FlattenError(f"unexpected node {e!r}")


def _validate(fs: FlatSpec) -> None:
    from .process import calls_used

    for name, d in fs.defs.items():
        for callee in calls_used(d.body):
            if callee not in fs.defs:
                raise FlattenError(
                    f"process {name!r} refers to undefined process {callee!r} "
                    f"(unbound parameter?)"
                )
    if fs.entry and fs.entry not in fs.defs:
        raise FlattenError(f"entry process {fs.entry!r} is not defined")


def adhoc_spec(
    defs: dict[str, ProcDef] | list[ProcDef],
    comm_rules: tuple[CommRule, ...] = (),
    entry: str | None = None,
    sig: Signature | None = None,
    equations: tuple[Equation, ...] = (),
) -> FlatSpec:
    """Build a FlatSpec directly from resolved definitions (no parsing).

    Atom declarations are inferred from use; intended for programmatic
    construction where sort checking already happened or does not apply.
    """
    from .process import atoms_used

    if isinstance(defs, list):
        defs = {d.name: d for d in defs}
    fs = FlatSpec(sig=sig or Signature(), equations=equations, comm_rules=tuple(comm_rules))
    fs.defs = dict(defs)
    for name, args in RESERVED_ATOMS.items():
        fs.atoms[name] = args
    for name, d in defs.items():
        fs.proc_decls[name] = tuple("" for _ in d.params)
        for a in atoms_used(d.body):
            fs.atoms.setdefault(a, ())
        fs.def_origin[name] = "<adhoc>"
    fs.entry = entry if entry is not None else (next(iter(defs)) if defs else "")
    return fs


def resolve_expr(fs: FlatSpec, e: ProcessExpr, env: dict[str, str] | None = None) -> ProcessExpr:
    """Resolve Ref nodes of a parsed expression against an existing FlatSpec."""
    return _resolve_refs(fs, e, env or {}, "<expr>")


def check_levels(ms: ModuleSet, fs: FlatSpec) -> list[str]:
    """Per-module level validation: a component module may use a level's
    primitives only when it imports that level's library directly (its own
    atom declarations may shadow primitive names).  Returns diagnostics."""
    from .levels import builtin_levels
    from .process import atoms_used

    owner: dict[str, str] = {}
    for lvl in builtin_levels().values():
        for a in lvl.primitives:
            owner[a.name] = lvl.name

    diagnostics: list[str] = []
    for mod in ms.process_modules():
        direct = {imp.module for imp in mod.imports}
        local = {a.name for a in mod.atoms} | set(RESERVED_ATOMS)
        for d in mod.definitions:
            for atom in sorted(atoms_used(d.body)):
                if atom in local:
                    continue
                lvl = owner.get(atom)
                if lvl is not None and f"{lvl}Primitives" not in direct:
                    diagnostics.append(
                        f"module {mod.name!r}: process {d.name!r} uses "
                        f"{lvl}-level primitive {atom!r} without importing "
                        f"{lvl}Primitives"
                    )
    return diagnostics
