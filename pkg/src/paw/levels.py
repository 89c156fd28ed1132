"""Built-in design levels (architecture, ToolBus) and environment generation.

A level contributes three library modules: ``<Level>Types`` (data), sorts and
``<Level>Primitives`` (the communication actions), and ``<Level>`` (the
environment: encapsulation wrapper plus control/shutdown processes with a
``System`` parameter).  The environment generators wrap user components the
same way the worked examples wire them by hand.
"""

from __future__ import annotations

import os

from .diagnostics import FlattenError, LevelError, UnknownNameError
from .flatten import FlatSpec, flatten
from .modules import (
    DataModule,
    ImportRef,
    LevelDef,
    Module,
    ModuleSet,
    ProcDecl,
    ProcDef,
    ProcessModule,
)
from .process import Ref, atoms_used, calls_used, par

ARCHITECTURE_LEVEL = """\
level Architecture
begin
    types
        >> : ID # ID -> CONN
    primitives
        snd : CONN # DATA
        rec : CONN # DATA
        snd-quit
    control
        rec-quit
        snd-shutdown
        rec-shutdown
    communications
        snd(c, d) | rec(c, d) = comm(c, d) for c in CONN, d in DATA
        snd-quit | rec-quit = comm-quit
        snd-shutdown | rec-shutdown = comm-shutdown
    definitions
        ArchitectureControl = rec-quit . snd-shutdown . ArchitectureControl
        ArchitectureShutdown = rec-shutdown . shutdown
    trigger
        snd-quit
end Architecture
"""

TOOLBUS_LEVEL = """\
level ToolBus
begin
    types
        tbterm : DATA -> TBTERM
        eval : DATA -> TBTERM
        value : DATA -> TBTERM
    primitives
        tb-snd-msg : PID # PID # TBTERM
        tb-rec-msg : PID # PID # TBTERM
        tb-rec-event : TID # TBTERM
        tb-snd-ack-event : TID # TBTERM
        tb-snd-do : TID # TBTERM
        tb-snd-eval : TID # TBTERM
        tb-rec-value : TID # TBTERM
        tooltb-snd-event : TBTERM
        tooltb-rec-ack-event : TBTERM
        tooltb-rec : TBTERM
        tooltb-snd-value : TBTERM
        snd-tb-shutdown
    control
        rec-tb-shutdown
        snd-shutdown
        rec-shutdown
    communications
        tb-snd-msg(s, r, t) | tb-rec-msg(s, r, t) = comm-msg(s, r, t) for s in PID, r in PID, t in TBTERM
        tooltb-snd-event(t) | tb-rec-event(T, t) = comm-event(T, t) for T in TID, t in TBTERM
        tb-snd-ack-event(T, t) | tooltb-rec-ack-event(t) = comm-ack-event(T, t) for T in TID, t in TBTERM
        tb-snd-do(T, t) | tooltb-rec(t) = comm-do(T, t) for T in TID, t in TBTERM
        tb-snd-eval(T, t) | tooltb-rec(t) = comm-eval(T, t) for T in TID, t in TBTERM
        tooltb-snd-value(t) | tb-rec-value(T, t) = comm-value(T, t) for T in TID, t in TBTERM
        snd-tb-shutdown | rec-tb-shutdown = comm-tb-shutdown
        snd-shutdown | rec-shutdown = comm-shutdown
    definitions
        ToolBusControl = rec-tb-shutdown . snd-shutdown . ToolBusControl
        ToolBusShutdown = rec-shutdown . shutdown
    trigger
        snd-tb-shutdown
end ToolBus
"""

_BUILTIN_TEXTS = {"arch": ARCHITECTURE_LEVEL, "toolbus": TOOLBUS_LEVEL}
_ALIASES = {
    "arch": "arch",
    "architecture": "arch",
    "tb": "toolbus",
    "toolbus": "toolbus",
}


def builtin_levels() -> dict[str, LevelDef]:
    from .parser import parse_level

    return {
        key: parse_level(text, f"<builtin:{key}>") for key, text in _BUILTIN_TEXTS.items()
    }


def load_level_def(name_or_path: str) -> LevelDef:
    """Resolve a builtin level name, a ``.lvl`` file path, or level source text."""
    from .parser import parse_level

    alias = _ALIASES.get(name_or_path.lower())
    if alias is not None:
        return builtin_levels()[alias]
    if "\n" in name_or_path or name_or_path.lstrip().startswith("level"):
        return parse_level(name_or_path)
    if os.path.exists(name_or_path):
        with open(name_or_path, encoding="utf-8") as fh:
            return parse_level(fh.read(), name_or_path)
    raise LevelError(
        f"unknown level {name_or_path!r} (not a builtin name, file, or level source)"
    )


def level_modules(level: LevelDef) -> list[Module]:
    """The three library modules a level contributes."""
    types = DataModule(
        name=f"{level.env_name}Types",
        functions=list(level.types),
        exported_functions=[f.name for f in level.types],
    )
    prims = ProcessModule(
        name=f"{level.env_name}Primitives",
        imports=[ImportRef(types.name)],
        atoms=list(level.primitives),
    )
    control_names = [d.name for d in level.control_defs]
    env = ProcessModule(
        name=level.env_name,
        imports=[ImportRef(prims.name)],
        exported_processes=[level.env_name],
        parameters=["System"],
        atoms=list(level.control_atoms),
        processes=[ProcDecl(level.env_name, ()), ProcDecl("System", ())]
        + [ProcDecl(n, ()) for n in control_names],
        communications=list(level.communications),
        definitions=list(level.control_defs)
        + [
            ProcDef(
                level.env_name,
                (),
                _env_body(level, control_names),
            )
        ],
    )
    env.exported_processes = [level.env_name]
    return [types, prims, env]


def _env_body(level: LevelDef, control_names: list[str]):
    from .process import Encaps

    inner = par(Ref("System"), *[Ref(n) for n in control_names])
    return Encaps(level.encaps_set(), inner)


def builtin_modules() -> dict[str, Module]:
    out: dict[str, Module] = {}
    for level in builtin_levels().values():
        for mod in level_modules(level):
            out[mod.name] = mod
    return out


def validate_level_usage(level: LevelDef, fs: FlatSpec, def_names: set[str]) -> None:
    """Components may use their own atoms and this level's primitives only.

    An atom counts as foreign when it resolved to another level's primitives
    module; a component's own atom may reuse a primitive's name."""
    foreign_mods = {
        f"{other.env_name}Primitives": other.name
        for other in builtin_levels().values()
        if other.name != level.name
    }
    for name in sorted(def_names):
        for atom in sorted(atoms_used(fs.defs[name].body)):
            origin = fs.atom_origin.get(atom, "")
            if origin in foreign_mods:
                raise LevelError(
                    f"process {name!r} uses {foreign_mods[origin]}-level primitive "
                    f"{atom!r}; components at level {level.name!r} may not"
                )


def gen_env(
    level: LevelDef,
    components: ModuleSet,
    comp_module: str | None = None,
    app_name: str | None = None,
) -> tuple[ModuleSet, FlatSpec]:
    """Wrap component definitions in the level's generated environment.

    The system is the parallel composition of the component roots: the
    definitions (across the given modules) that no other definition calls.
    Returns the extended module set (components + generated system/application
    modules) and its flattening, rooted at the application module.
    """
    libraries = builtin_modules()
    for mod in level_modules(level):
        libraries.setdefault(mod.name, mod)

    user_mods = [m.name for m in components.process_modules() if m.definitions]
    if comp_module is not None:
        if comp_module not in user_mods:
            raise FlattenError(f"module {comp_module!r} defines no processes")
        user_mods = [comp_module]
    if not user_mods:
        raise FlattenError("no component process definitions to wrap")

    probe = ProcessModule(name="GenEnvProbe", imports=[ImportRef(n) for n in user_mods])
    try:
        fs = flatten(ModuleSet(list(components.modules) + [probe]), probe.name, libraries)
    except UnknownNameError as err:
        for other in builtin_levels().values():
            if other.name != level.name and err.name in other.primitive_names():
                raise LevelError(
                    f"component uses {other.name}-level primitive {err.name!r}; "
                    f"components at level {level.name!r} may not"
                ) from err
        raise
    user_defs = {n for n in fs.defs if fs.def_origin.get(n) in set(user_mods)}
    validate_level_usage(level, fs, user_defs)

    referenced: set[str] = set()
    for n in user_defs:
        referenced |= {c for c in calls_used(fs.defs[n].body) if c != n}
    roots = sorted(n for n in user_defs if n not in referenced)
    if not roots:
        raise FlattenError("no root component definition to wrap")

    target = user_mods[-1]
    modules = list(components.modules)
    if len(roots) == 1:
        system_proc = roots[0]
        system_module = fs.def_origin[system_proc]
    else:
        system_proc = f"{target}System"
        system_module = f"{target}SystemModule"
        modules.append(
            ProcessModule(
                name=system_module,
                imports=[ImportRef(n) for n in user_mods],
                exported_processes=[system_proc],
                processes=[ProcDecl(system_proc, ())],
                definitions=[ProcDef(system_proc, (), par(*[Ref(r) for r in roots]))],
            )
        )

    if app_name is None:
        app_name = f"{target}App"
    app = ProcessModule(
        name=app_name,
        imports=[
            ImportRef(
                level.env_name,
                bindings=(("System", system_proc),),
                actuals_from=system_module,
                renamings=((level.env_name, app_name),),
            )
        ],
    )
    modules.append(app)
    ms = ModuleSet(modules)
    fs = flatten(ms, app_name, libraries)
    return ms, fs


def gen_arch_env(
    components: ModuleSet, comp_module: str | None = None, app_name: str | None = None
) -> tuple[ModuleSet, FlatSpec]:
    return gen_env(builtin_levels()["arch"], components, comp_module, app_name)


def gen_tb_env(
    components: ModuleSet, comp_module: str | None = None, app_name: str | None = None
) -> tuple[ModuleSet, FlatSpec]:
    return gen_env(builtin_levels()["toolbus"], components, comp_module, app_name)
