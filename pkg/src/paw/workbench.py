"""Pipeline steps shared by the command line and the service layer: each one
consumes and produces source text plus parsed artefacts, so the chain
architecture -> refine -> constrain -> generate environment -> generate script
can be driven mechanically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constrain import constrain, rules_touching
from .diagnostics import FlattenError, MappingError
from .flatten import FlatSpec, flatten
from .levels import builtin_levels, builtin_modules, gen_env, load_level_def
from .modules import (
    AtomDecl,
    ImportRef,
    Mapping,
    ModuleSet,
    ProcDecl,
    ProcessModule,
)
from .parser import parse_spec
from .printer import render_module_set
from .process import atoms_used, calls_used
from .refine import MappingApplication, apply_mapping, classify_mapping


def default_root(ms: ModuleSet) -> str:
    """The last process module in the file is the designated root."""
    procs = ms.process_modules()
    if not procs:
        raise FlattenError("specification contains no process module")
    return procs[-1].name


def load_spec(text: str, source: str = "<input>") -> ModuleSet:
    return parse_spec(text, source)


def flatten_spec(ms: ModuleSet, root: str | None = None) -> FlatSpec:
    return flatten(ms, root or default_root(ms))


@dataclass
class RefineResult:
    module: ProcessModule
    module_set: ModuleSet  # inputs + refined module
    application: MappingApplication
    warnings: list[str] = field(default_factory=list)

    @property
    def source(self) -> str:
        return render_module_set(self.module_set)


def _mapping_target_module(ms: ModuleSet, fs: FlatSpec, m: Mapping) -> str:
    if m.process_renames:
        sources = {old for old, _ in m.process_renames}
        for mod in ms.process_modules():
            if sources & {d.name for d in mod.definitions}:
                return mod.name
        raise MappingError(
            f"no module defines the mapped processes {sorted(sources)}"
        )
    return default_root(ms)


def _level_imports_for(atom_names: set[str]) -> list[str]:
    out = []
    for level in builtin_levels().values():
        if atom_names & set(level.primitive_names()):
            for suffix in ("Types", "Primitives"):
                name = f"{level.env_name}{suffix}"
                if name not in out:
                    out.append(name)
    return out


def refine_spec(
    ms: ModuleSet,
    mapping: Mapping,
    module: str | None = None,
    name: str | None = None,
    extra_imports: tuple[str, ...] = (),
) -> RefineResult:
    """Apply a refinement mapping to a component module's definitions and
    assemble the refined process module."""
    libraries = builtin_modules()
    known: set[str] = set()
    for lib in libraries.values():
        if hasattr(lib, "functions"):
            known |= {f.name for f in lib.functions}
    for dm in ms.data_modules():
        known |= {f.name for f in dm.functions}
    fs = flatten(ms, module or default_root(ms))
    known |= set(fs.sig.functions)

    cm = classify_mapping(mapping, known)
    target_name = module or _mapping_target_module(ms, fs, mapping)
    if target_name not in ms.by_name():
        raise FlattenError(f"module {target_name!r} not found")
    fs = flatten(ms, target_name)
    own = {n: d for n, d in fs.defs.items() if fs.def_origin.get(n) == target_name}
    application = apply_mapping(own, cm)

    defs = application.defs
    if cm.process_renames:
        keep: set[str] = set()
        stack = [new for _, new in cm.process_renames if new in defs]
        while stack:
            n = stack.pop()
            if n in keep:
                continue
            keep.add(n)
            stack.extend(c for c in calls_used(defs[n].body) if c in defs and c not in keep)
        defs = {n: d for n, d in defs.items() if n in keep}

    used: set[str] = set()
    for d in defs.values():
        used |= atoms_used(d.body)

    target = ms.by_name()[target_name]
    assert isinstance(target, ProcessModule)
    level_mods = _level_imports_for(used)
    level_owned: set[str] = set()
    for lvl in builtin_levels().values():
        level_owned |= set(lvl.primitive_names())
    drop = {
        f"{lvl.env_name}Primitives" for lvl in builtin_levels().values()
    } | {f"{lvl.env_name}Types" for lvl in builtin_levels().values()}
    imports = [imp.module for imp in target.imports if imp.module not in drop]
    side_data = tuple(
        dm.name for dm in ms.data_modules() if dm.name not in imports
    )
    for extra in (*level_mods, *side_data, *extra_imports):
        if extra not in imports:
            imports.append(extra)

    local_atoms = [
        AtomDecl(a, fs.atoms[a])
        for a in sorted(used)
        if a in fs.atoms and a not in level_owned and fs.atom_origin.get(a) == target_name
    ]
    mod_name = name or f"{target_name}Refined"
    refined = ProcessModule(
        name=mod_name,
        imports=[ImportRef(i) for i in imports],
        exported_processes=sorted(defs),
        atoms=local_atoms,
        processes=[ProcDecl(n, ()) for n in sorted(defs)],
        definitions=[defs[n] for n in sorted(defs)],
    )
    # the refined file carries the data context but not the abstract processes
    out_ms = ModuleSet(
        [m for m in ms.data_modules() if m.name != mod_name] + [refined]
    )
    return RefineResult(refined, out_ms, application, list(application.warnings))


@dataclass
class ConstrainResult:
    module: ProcessModule
    module_set: ModuleSet

    @property
    def source(self) -> str:
        return render_module_set(self.module_set)


def constrain_spec(
    ms: ModuleSet,
    with_ms: ModuleSet,
    proc: str | None = None,
    constraint: str | None = None,
    name: str | None = None,
) -> ConstrainResult:
    """Superimpose the constraint bundle's designated process on ``proc``."""
    combined = ModuleSet(
        list(ms.modules)
        + [m for m in with_ms.modules if m.name not in ms.by_name()]
    )
    bundle_root = default_root(with_ms)
    bundle = with_ms.by_name()[bundle_root]
    assert isinstance(bundle, ProcessModule)
    if constraint is None:
        if bundle.exported_processes:
            constraint = bundle.exported_processes[-1]
        elif bundle.definitions:
            constraint = bundle.definitions[-1].name
        else:
            raise FlattenError(f"constraint module {bundle_root!r} defines no process")

    host_root = default_root(ms)
    if proc is None:
        host = ms.by_name()[host_root]
        assert isinstance(host, ProcessModule)
        if len(host.exported_processes) == 1:
            proc = host.exported_processes[0]
        else:
            raise FlattenError("ambiguous constrained process; pass --proc")

    glue_name = name or f"P{constraint}"
    glue = ProcessModule(
        name=f"{glue_name}Module",
        imports=[ImportRef(host_root), ImportRef(bundle_root)],
    )
    work = ModuleSet(list(combined.modules) + [glue])
    fs = flatten(work, glue.name)

    constraint_alpha: set[str] = set()
    from .refine import _reachable_defs

    for d in _reachable_defs(fs, constraint).values():
        constraint_alpha |= atoms_used(d.body)
    comms = rules_touching(fs.comm_rules, constraint_alpha)
    composite = constrain(proc, constraint, comms, fs, glue_name)
    glue.definitions = [composite]
    glue.exported_processes = [glue_name]
    glue.processes = [ProcDecl(glue_name, ())]
    fs2 = flatten(work, glue.name)
    assert glue_name in fs2.defs
    return ConstrainResult(glue, work)


@dataclass
class GenEnvResult:
    module_set: ModuleSet
    flat: FlatSpec
    app_name: str

    @property
    def source(self) -> str:
        return render_module_set(self.module_set)


def gen_env_spec(
    ms: ModuleSet,
    level_name: str,
    module: str | None = None,
    app_name: str | None = None,
) -> GenEnvResult:
    level = load_level_def(level_name)
    out_ms, fs = gen_env(level, ms, module, app_name)
    return GenEnvResult(out_ms, fs, fs.entry)
