"""Module-level AST: what a parsed source file contains before flattening."""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Pos
from .process import Atom, ProcessExpr
from .terms import Equation


@dataclass(frozen=True)
class FuncDecl:
    name: str
    arg_sorts: tuple[str, ...]
    result: str


@dataclass(frozen=True)
class AtomDecl:
    name: str
    arg_sorts: tuple[str, ...]


@dataclass(frozen=True)
class ProcDecl:
    name: str
    arg_sorts: tuple[str, ...]


@dataclass(frozen=True)
class ProcDef:
    name: str
    params: tuple[str, ...]
    body: ProcessExpr


@dataclass(frozen=True)
class CommRule:
    """gamma(left, right) = result; ``vars`` binds pattern variables to sorts."""

    left: Atom
    right: Atom
    result: Atom
    vars: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class ImportRef:
    module: str
    bindings: tuple[tuple[str, str], ...] = ()  # formal process -> actual process
    actuals_from: str = ""  # module supplying the actuals, "" when no binding
    renamings: tuple[tuple[str, str], ...] = ()  # exported name -> new name


@dataclass
class DataModule:
    name: str
    functions: list[FuncDecl] = field(default_factory=list)
    exported_functions: list[str] = field(default_factory=list)
    imports: list[ImportRef] = field(default_factory=list)
    variables: dict[str, str] = field(default_factory=dict)  # var -> sort
    equations: list[Equation] = field(default_factory=list)
    pos: Pos | None = None


@dataclass
class ProcessModule:
    name: str
    imports: list[ImportRef] = field(default_factory=list)
    exported_processes: list[str] = field(default_factory=list)
    parameters: list[str] = field(default_factory=list)  # formal process names
    atoms: list[AtomDecl] = field(default_factory=list)
    processes: list[ProcDecl] = field(default_factory=list)
    sets: dict[str, frozenset[str]] = field(default_factory=dict)
    communications: list[CommRule] = field(default_factory=list)
    variables: dict[str, str] = field(default_factory=dict)
    definitions: list[ProcDef] = field(default_factory=list)
    pos: Pos | None = None


Module = DataModule | ProcessModule


@dataclass
class ModuleSet:
    modules: list[Module] = field(default_factory=list)

    def by_name(self) -> dict[str, Module]:
        return {m.name: m for m in self.modules}

    def data_modules(self) -> list[DataModule]:
        return [m for m in self.modules if isinstance(m, DataModule)]

    def process_modules(self) -> list[ProcessModule]:
        return [m for m in self.modules if isinstance(m, ProcessModule)]


@dataclass
class LevelDef:
    """A design level: primitive actions, environment communications, and the
    control processes the generated environment runs next to the system."""

    name: str
    types: list[FuncDecl] = field(default_factory=list)
    primitives: list[AtomDecl] = field(default_factory=list)
    control_atoms: list[AtomDecl] = field(default_factory=list)
    communications: list[CommRule] = field(default_factory=list)
    control_defs: list[ProcDef] = field(default_factory=list)
    trigger: str = ""

    @property
    def env_name(self) -> str:
        """The generated environment module/process share the level's name."""
        return self.name

    def encaps_set(self) -> frozenset[str]:
        """All action names the generated environment encapsulates."""
        names = set()
        for rule in self.communications:
            names.add(rule.left.name)
            names.add(rule.right.name)
        return frozenset(names)

    def primitive_names(self) -> frozenset[str]:
        return frozenset(a.name for a in self.primitives)


@dataclass(frozen=True)
class Mapping:
    """Action refinement rules plus local-action renamings and process renames."""

    refinements: tuple[tuple[Atom, tuple[Atom, ...]], ...] = ()
    renamings: tuple[tuple[Atom, Atom], ...] = ()
    process_renames: tuple[tuple[str, str], ...] = ()
