"""Lexer and recursive-descent parser for ``.psf`` specifications, ``.lvl``
level files, and ``.map`` refinement mappings.

Lexical conventions shared by all three: identifiers may contain ``-`` between
alphanumerics (``tb-snd-msg``), ``--`` starts a comment running to end of
line, and ``>>`` is an infix term constructor.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import ParseError, Pos
from .modules import (
    AtomDecl,
    CommRule,
    DataModule,
    FuncDecl,
    ImportRef,
    LevelDef,
    Mapping,
    Module,
    ModuleSet,
    ProcDecl,
    ProcDef,
    ProcessModule,
)
from .process import (
    Alt,
    Atom,
    Deadlock,
    Encaps,
    Hide,
    Par,
    ProcessExpr,
    Ref,
    Rename,
    Seq,
    Sum,
    alt,
    par,
    seq,
)
from .terms import Equation, Term, Var

SYMBOLS = ("||", "->", ">>", "(", ")", "{", "}", "[", "]", ",", ":", ".", "+", "|", "=", "#", "*", "?")

SECTION_WORDS = {
    "exports",
    "imports",
    "functions",
    "variables",
    "equations",
    "atoms",
    "processes",
    "sets",
    "communications",
    "definitions",
    "parameters",
    "end",
    "begin",
    # level-file sections share the declaration parsers
    "types",
    "primitives",
    "control",
    "trigger",
}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "symbol" | "string" | "eof"
    value: str
    pos: Pos


def tokenize(text: str, source: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)

    def here() -> Pos:
        return Pos(line, col, source)

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == '"':
            start = here()
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string literal", start)
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal", start)
            tokens.append(Token("string", text[i + 1 : j], start))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isalpha() or c == "_":
            start = here()
            j = i
            while j < n:
                ch = text[j]
                if ch.isalnum() or ch == "_" or ch == "'":
                    j += 1
                elif ch == "-" and j + 1 < n and (text[j + 1].isalnum() or text[j + 1] == "_"):
                    j += 2
                else:
                    break
            tokens.append(Token("ident", text[i:j], start))
            col += j - i
            i = j
            continue
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token("symbol", sym, here()))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", here())
    tokens.append(Token("eof", "", Pos(line, col, source)))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.i]

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.cur
        return t.kind == kind and (value is None or t.value == value)

    def at_word(self, *words: str) -> bool:
        return self.cur.kind == "ident" and self.cur.value in words

    def advance(self) -> Token:
        t = self.cur
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, kind: str, value: str | None = None) -> Token:
        if not self.at(kind, value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {self.cur.value or 'end of input'!r}", self.cur.pos)
        return self.advance()

    def expect_word(self, word: str) -> Token:
        if not self.at_word(word):
            raise ParseError(f"expected keyword {word!r}, found {self.cur.value or 'end of input'!r}", self.cur.pos)
        return self.advance()

    def take_ident(self, what: str = "identifier") -> Token:
        if self.cur.kind != "ident":
            raise ParseError(f"expected {what}, found {self.cur.value or 'end of input'!r}", self.cur.pos)
        return self.advance()


# ---------------------------------------------------------------- terms ----


def parse_term(ts: TokenStream) -> Term:
    left = _parse_term_primary(ts)
    while ts.at("symbol", ">>"):
        ts.advance()
        right = _parse_term_primary(ts)
        left = Term(">>", (left, right))
    return left


def _parse_term_primary(ts: TokenStream) -> Term:
    if ts.at("symbol", "("):
        ts.advance()
        t = parse_term(ts)
        ts.expect("symbol", ")")
        return t
    name = ts.take_ident("data term").value
    args: list[Term] = []
    if ts.at("symbol", "("):
        ts.advance()
        if not ts.at("symbol", ")"):
            args.append(parse_term(ts))
            while ts.at("symbol", ","):
                ts.advance()
                args.append(parse_term(ts))
        ts.expect("symbol", ")")
    return Term(name, tuple(args))


def resolve_vars(t: Term | Var, var_names: set[str]) -> Term | Var:
    """Turn parsed constants whose names are declared variables into Vars."""
    if isinstance(t, Var):
        return t
    if not t.args and t.name in var_names:
        return Var(t.name)
    return Term(t.name, tuple(resolve_vars(a, var_names) for a in t.args))


def parse_atom_term(ts: TokenStream) -> Atom:
    """An action pattern: name with optional data arguments."""
    name = ts.take_ident("action").value
    args: list[Term] = []
    if ts.at("symbol", "("):
        ts.advance()
        if not ts.at("symbol", ")"):
            args.append(parse_term(ts))
            while ts.at("symbol", ","):
                ts.advance()
                args.append(parse_term(ts))
        ts.expect("symbol", ")")
    return Atom(name, tuple(args))


# ---------------------------------------------------- process expressions ----


def parse_pexpr(ts: TokenStream) -> ProcessExpr:
    operands = [_parse_par(ts)]
    while ts.at("symbol", "+"):
        ts.advance()
        operands.append(_parse_par(ts))
    return alt(*operands)


def _parse_par(ts: TokenStream) -> ProcessExpr:
    operands = [_parse_seq(ts)]
    while ts.at("symbol", "||"):
        ts.advance()
        operands.append(_parse_seq(ts))
    return par(*operands)


def _parse_seq(ts: TokenStream) -> ProcessExpr:
    operands = [_parse_prefix(ts)]
    while ts.at("symbol", "."):
        ts.advance()
        operands.append(_parse_prefix(ts))
    return seq(*operands)


def _parse_action_set(ts: TokenStream) -> frozenset[str] | str:
    if ts.at("symbol", "{"):
        ts.advance()
        names: list[str] = []
        if not ts.at("symbol", "}"):
            names.append(ts.take_ident("action name").value)
            while ts.at("symbol", ","):
                ts.advance()
                names.append(ts.take_ident("action name").value)
        ts.expect("symbol", "}")
        return frozenset(names)
    return ts.take_ident("set name").value


def _parse_prefix(ts: TokenStream) -> ProcessExpr:
    t = ts.cur
    if ts.at("symbol", "("):
        ts.advance()
        e = parse_pexpr(ts)
        ts.expect("symbol", ")")
        return e
    if t.kind != "ident":
        raise ParseError(f"expected a process expression, found {t.value!r}", t.pos)
    if t.value == "delta":
        ts.advance()
        return Deadlock()
    if t.value == "sum":
        ts.advance()
        ts.expect("symbol", "(")
        var = ts.take_ident("sum variable").value
        ts.expect_word("in")
        sort = ts.take_ident("sort name").value
        ts.expect("symbol", ",")
        body = parse_pexpr(ts)
        ts.expect("symbol", ")")
        return Sum(var, sort, body)
    if t.value in ("encaps", "hide"):
        ts.advance()
        ts.expect("symbol", "(")
        actions = _parse_action_set(ts)
        ts.expect("symbol", ",")
        body = parse_pexpr(ts)
        ts.expect("symbol", ")")
        return (Encaps if t.value == "encaps" else Hide)(actions, body)
    if t.value == "rename":
        ts.advance()
        ts.expect("symbol", "(")
        ts.expect("symbol", "[")
        rules: list[tuple[Atom, Atom]] = []
        if not ts.at("symbol", "]"):
            rules.append(_parse_rename_rule(ts))
            while ts.at("symbol", ","):
                ts.advance()
                rules.append(_parse_rename_rule(ts))
        ts.expect("symbol", "]")
        ts.expect("symbol", ",")
        body = parse_pexpr(ts)
        ts.expect("symbol", ")")
        return Rename(tuple(rules), body)
    name = ts.advance().value
    args: list[Term] = []
    if ts.at("symbol", "("):
        ts.advance()
        if not ts.at("symbol", ")"):
            args.append(parse_term(ts))
            while ts.at("symbol", ","):
                ts.advance()
                args.append(parse_term(ts))
        ts.expect("symbol", ")")
    return Ref(name, tuple(args))


def _parse_rename_rule(ts: TokenStream) -> tuple[Atom, Atom]:
    frm = parse_atom_term(ts)
    ts.expect("symbol", "->")
    to = parse_atom_term(ts)
    return frm, to


# ----------------------------------------------------------- declarations ----


def _parse_name_list(ts: TokenStream) -> list[str]:
    """Names on one conceptual declaration: ``a, b, c`` (``>>`` allowed)."""
    names = [_parse_decl_name(ts)]
    while ts.at("symbol", ","):
        ts.advance()
        names.append(_parse_decl_name(ts))
    return names


def _parse_decl_name(ts: TokenStream) -> str:
    if ts.at("symbol", ">>"):
        ts.advance()
        return ">>"
    return ts.take_ident("name").value


def _parse_sort_list(ts: TokenStream) -> tuple[str, ...]:
    sorts = [ts.take_ident("sort name").value]
    while ts.at("symbol", "#"):
        ts.advance()
        sorts.append(ts.take_ident("sort name").value)
    return tuple(sorts)


def _at_decl_start(ts: TokenStream) -> bool:
    if ts.at("symbol", ">>"):
        return True
    if ts.cur.kind != "ident":
        return False
    return ts.cur.value not in SECTION_WORDS


def _parse_func_decls(ts: TokenStream) -> list[FuncDecl]:
    decls: list[FuncDecl] = []
    while _at_decl_start(ts):
        names = _parse_name_list(ts)
        ts.expect("symbol", ":")
        arg_sorts: tuple[str, ...] = ()
        if not ts.at("symbol", "->"):
            arg_sorts = _parse_sort_list(ts)
        ts.expect("symbol", "->")
        result = ts.take_ident("result sort").value
        decls.extend(FuncDecl(n, arg_sorts, result) for n in names)
    return decls


def _parse_atom_decls(ts: TokenStream) -> list[AtomDecl]:
    decls: list[AtomDecl] = []
    while _at_decl_start(ts):
        names = _parse_name_list(ts)
        arg_sorts: tuple[str, ...] = ()
        if ts.at("symbol", ":"):
            ts.advance()
            arg_sorts = _parse_sort_list(ts)
        decls.extend(AtomDecl(n, arg_sorts) for n in names)
    return decls


def _parse_proc_decls(ts: TokenStream) -> list[ProcDecl]:
    decls: list[ProcDecl] = []
    while _at_decl_start(ts):
        names = _parse_name_list(ts)
        arg_sorts: tuple[str, ...] = ()
        if ts.at("symbol", ":"):
            ts.advance()
            arg_sorts = _parse_sort_list(ts)
        decls.extend(ProcDecl(n, arg_sorts) for n in names)
    return decls


def _parse_var_decls(ts: TokenStream) -> dict[str, str]:
    out: dict[str, str] = {}
    while _at_decl_start(ts):
        names = _parse_name_list(ts)
        ts.expect("symbol", ":")
        if ts.at("symbol", "->"):
            ts.advance()
        sort = ts.take_ident("sort name").value
        for n in names:
            out[n] = sort
    return out


def _parse_equations(ts: TokenStream, var_names: set[str]) -> list[Equation]:
    eqs: list[Equation] = []
    while ts.at("symbol", "[") or _at_decl_start(ts) or ts.at("symbol", "("):
        label = ""
        if ts.at("symbol", "["):
            ts.advance()
            label = ts.take_ident("equation label").value
            ts.expect("symbol", "]")
        pos = ts.cur.pos
        lhs = resolve_vars(parse_term(ts), var_names)
        ts.expect("symbol", "=")
        rhs = resolve_vars(parse_term(ts), var_names)
        if isinstance(lhs, Var):
            raise ParseError("equation left-hand side cannot be a bare variable", pos)
        eqs.append(Equation(lhs, rhs, label))
    return eqs


def _parse_comm_rules(ts: TokenStream) -> list[CommRule]:
    rules: list[CommRule] = []
    while _at_decl_start(ts):
        left = parse_atom_term(ts)
        ts.expect("symbol", "|")
        right = parse_atom_term(ts)
        ts.expect("symbol", "=")
        result = parse_atom_term(ts)
        bindings: list[tuple[str, str]] = []
        if ts.at_word("for"):
            ts.advance()
            while True:
                v = ts.take_ident("variable").value
                ts.expect_word("in")
                s = ts.take_ident("sort name").value
                bindings.append((v, s))
                if ts.at("symbol", ","):
                    ts.advance()
                else:
                    break
        var_names = {v for v, _ in bindings}

        def rv(a: Atom) -> Atom:
            return Atom(a.name, tuple(resolve_vars(arg, var_names) for arg in a.args))

        rules.append(CommRule(rv(left), rv(right), rv(result), tuple(bindings)))
    return rules


def _parse_proc_defs(ts: TokenStream, var_names: set[str]) -> list[ProcDef]:
    defs: list[ProcDef] = []
    while _at_decl_start(ts):
        name = ts.take_ident("process name").value
        params: list[str] = []
        if ts.at("symbol", "("):
            ts.advance()
            params.append(ts.take_ident("parameter").value)
            while ts.at("symbol", ","):
                ts.advance()
                params.append(ts.take_ident("parameter").value)
            ts.expect("symbol", ")")
        ts.expect("symbol", "=")
        body = parse_pexpr(ts)
        body = _resolve_expr_vars(body, var_names | set(params))
        defs.append(ProcDef(name, tuple(params), body))
    return defs


def _resolve_expr_vars(e: ProcessExpr, var_names: set[str]) -> ProcessExpr:
    if isinstance(e, (Atom, Ref)):
        cls = type(e)
        return cls(e.name, tuple(resolve_vars(a, var_names) for a in e.args))
    if isinstance(e, Deadlock):
        return e
    if isinstance(e, Seq):
        return Seq(_resolve_expr_vars(e.left, var_names), _resolve_expr_vars(e.right, var_names))
    if isinstance(e, Alt):
        return Alt(tuple(_resolve_expr_vars(o, var_names) for o in e.operands))
    if isinstance(e, Par):
        return Par(tuple(_resolve_expr_vars(o, var_names) for o in e.operands))
    if isinstance(e, Encaps):
        return Encaps(e.actions, _resolve_expr_vars(e.body, var_names))
    if isinstance(e, Hide):
        return Hide(e.actions, _resolve_expr_vars(e.body, var_names))
    if isinstance(e, Rename):
        return Rename(e.rules, _resolve_expr_vars(e.body, var_names))
    if isinstance(e, Sum):
        return Sum(e.var, e.sort, _resolve_expr_vars(e.body, var_names | {e.var}))
    raise ParseError(f"unexpected node in definition body: {e!r}")


# ---------------------------------------------------------------- modules ----


def _parse_imports(ts: TokenStream) -> list[ImportRef]:
    imports: list[ImportRef] = []
    while True:
        name = ts.take_ident("module name").value
        bindings: list[tuple[str, str]] = []
        actuals_from = ""
        renamings: list[tuple[str, str]] = []
        if ts.at("symbol", "{"):
            ts.advance()
            while not ts.at("symbol", "}"):
                if ts.at_word("renamed"):
                    ts.advance()
                    ts.expect_word("by")
                    ts.expect("symbol", "[")
                    renamings.append(_parse_name_arrow(ts))
                    while ts.at("symbol", ","):
                        ts.advance()
                        renamings.append(_parse_name_arrow(ts))
                    ts.expect("symbol", "]")
                else:
                    formal = ts.take_ident("parameter name").value
                    ts.expect_word("bound")
                    ts.expect_word("by")
                    ts.expect("symbol", "[")
                    bindings.append(_parse_name_arrow(ts))
                    while ts.at("symbol", ","):
                        ts.advance()
                        bindings.append(_parse_name_arrow(ts))
                    ts.expect("symbol", "]")
                    ts.expect_word("to")
                    actuals_from = ts.take_ident("module name").value
                    del formal  # the arrow pairs already carry formal names
            ts.expect("symbol", "}")
        imports.append(ImportRef(name, tuple(bindings), actuals_from, tuple(renamings)))
        if ts.at("symbol", ","):
            ts.advance()
        else:
            break
    return imports


def _parse_name_arrow(ts: TokenStream) -> tuple[str, str]:
    frm = ts.take_ident("name").value
    ts.expect("symbol", "->")
    to = ts.take_ident("name").value
    return frm, to


def _parse_data_module(ts: TokenStream) -> DataModule:
    pos = ts.cur.pos
    ts.expect_word("data")
    ts.expect_word("module")
    name = ts.take_ident("module name").value
    mod = DataModule(name, pos=pos)
    ts.expect_word("begin")
    while not ts.at_word("end"):
        if ts.at_word("exports"):
            ts.advance()
            ts.expect_word("begin")
            while not ts.at_word("end"):
                ts.expect_word("functions")
                decls = _parse_func_decls(ts)
                mod.functions.extend(decls)
                mod.exported_functions.extend(d.name for d in decls)
            ts.expect_word("end")
        elif ts.at_word("imports"):
            ts.advance()
            mod.imports.extend(_parse_imports(ts))
        elif ts.at_word("functions"):
            ts.advance()
            mod.functions.extend(_parse_func_decls(ts))
        elif ts.at_word("variables"):
            ts.advance()
            mod.variables.update(_parse_var_decls(ts))
        elif ts.at_word("equations"):
            ts.advance()
            mod.equations.extend(_parse_equations(ts, set(mod.variables)))
        else:
            raise ParseError(f"unknown section {ts.cur.value!r} in data module", ts.cur.pos)
    ts.expect_word("end")
    closing = ts.take_ident("module name").value
    if closing != name:
        raise ParseError(f"module {name!r} closed by 'end {closing}'", ts.cur.pos)
    return mod


def _parse_process_module(ts: TokenStream) -> ProcessModule:
    pos = ts.cur.pos
    ts.expect_word("process")
    ts.expect_word("module")
    name = ts.take_ident("module name").value
    mod = ProcessModule(name, pos=pos)
    ts.expect_word("begin")
    while not ts.at_word("end"):
        if ts.at_word("exports"):
            ts.advance()
            ts.expect_word("begin")
            while not ts.at_word("end"):
                if ts.at_word("processes"):
                    ts.advance()
                    decls = _parse_proc_decls(ts)
                    mod.processes.extend(decls)
                    mod.exported_processes.extend(d.name for d in decls)
                elif ts.at_word("atoms"):
                    ts.advance()
                    mod.atoms.extend(_parse_atom_decls(ts))
                else:
                    raise ParseError(
                        f"unknown export section {ts.cur.value!r}", ts.cur.pos
                    )
            ts.expect_word("end")
        elif ts.at_word("imports"):
            ts.advance()
            mod.imports.extend(_parse_imports(ts))
        elif ts.at_word("parameters"):
            ts.advance()
            ts.expect_word("processes")
            mod.parameters.extend(_parse_name_list(ts))
        elif ts.at_word("atoms"):
            ts.advance()
            mod.atoms.extend(_parse_atom_decls(ts))
        elif ts.at_word("processes"):
            ts.advance()
            mod.processes.extend(_parse_proc_decls(ts))
        elif ts.at_word("sets"):
            ts.advance()
            ts.expect_word("of")
            ts.expect_word("atoms")
            while _at_decl_start(ts):
                set_name = ts.take_ident("set name").value
                ts.expect("symbol", "=")
                names = _parse_action_set(ts)
                if isinstance(names, str):
                    raise ParseError("set definition requires a brace list", ts.cur.pos)
                mod.sets[set_name] = names
        elif ts.at_word("communications"):
            ts.advance()
            mod.communications.extend(_parse_comm_rules(ts))
        elif ts.at_word("variables"):
            ts.advance()
            mod.variables.update(_parse_var_decls(ts))
        elif ts.at_word("definitions"):
            ts.advance()
            mod.definitions.extend(_parse_proc_defs(ts, set(mod.variables)))
        else:
            raise ParseError(f"unknown section {ts.cur.value!r} in process module", ts.cur.pos)
    ts.expect_word("end")
    closing = ts.take_ident("module name").value
    if closing != name:
        raise ParseError(f"module {name!r} closed by 'end {closing}'", ts.cur.pos)
    return mod


def parse_spec(text: str, source: str = "<input>") -> ModuleSet:
    """Parse a specification source into its modules."""
    ts = TokenStream(tokenize(text, source))
    modules: list[Module] = []
    seen: dict[str, Pos] = {}
    while not ts.at("eof"):
        if ts.at_word("data"):
            mod: Module = _parse_data_module(ts)
        elif ts.at_word("process"):
            mod = _parse_process_module(ts)
        else:
            raise ParseError(
                f"expected 'data module' or 'process module', found {ts.cur.value!r}",
                ts.cur.pos,
            )
        if mod.name in seen:
            raise ParseError(f"duplicate module name {mod.name!r}", mod.pos)
        seen[mod.name] = mod.pos
        _check_duplicate_defs(mod)
        modules.append(mod)
    return ModuleSet(modules)


def _check_duplicate_defs(mod: Module) -> None:
    if isinstance(mod, ProcessModule):
        names: set[str] = set()
        for d in mod.definitions:
            if d.name in names:
                raise ParseError(
                    f"duplicate definition of process {d.name!r} in module {mod.name!r}",
                    mod.pos,
                )
            names.add(d.name)


# ----------------------------------------------------------------- levels ----


def parse_level(text: str, source: str = "<level>") -> LevelDef:
    """Parse a ``.lvl`` level definition."""
    ts = TokenStream(tokenize(text, source))
    ts.expect_word("level")
    name = ts.take_ident("level name").value
    level = LevelDef(name)
    ts.expect_word("begin")
    while not ts.at_word("end"):
        if ts.at_word("types"):
            ts.advance()
            level.types.extend(_parse_func_decls(ts))
        elif ts.at_word("primitives"):
            ts.advance()
            level.primitives.extend(_parse_atom_decls(ts))
        elif ts.at_word("control"):
            ts.advance()
            level.control_atoms.extend(_parse_atom_decls(ts))
        elif ts.at_word("communications"):
            ts.advance()
            level.communications.extend(_parse_comm_rules(ts))
        elif ts.at_word("definitions"):
            ts.advance()
            level.control_defs.extend(_parse_proc_defs(ts, set()))
        elif ts.at_word("trigger"):
            ts.advance()
            level.trigger = ts.take_ident("trigger action").value
        else:
            raise ParseError(f"unknown section {ts.cur.value!r} in level file", ts.cur.pos)
    ts.expect_word("end")
    closing = ts.take_ident("level name").value
    if closing != name:
        raise ParseError(f"level {name!r} closed by 'end {closing}'", ts.cur.pos)
    _validate_level(level, source)
    return level


def _validate_level(level: LevelDef, source: str) -> None:
    from .diagnostics import LevelError
    from .process import SHUTDOWN_ATOM, atoms_used

    where = Pos(1, 1, source)
    declared = {a.name for a in level.primitives} | {a.name for a in level.control_atoms}
    for rule in level.communications:
        for a in (rule.left, rule.right):
            if a.name not in declared:
                raise LevelError(f"communication rule uses undeclared action {a.name!r}", where)
    if not level.trigger:
        raise LevelError("level file lacks a 'trigger' section naming the shutdown trigger", where)
    if level.trigger not in declared:
        raise LevelError(f"shutdown trigger {level.trigger!r} is not a declared action", where)
    if not any(SHUTDOWN_ATOM in atoms_used(d.body) for d in level.control_defs):
        raise LevelError(
            "control definitions never perform the distinguished 'shutdown' action", where
        )


# ------------------------------------------------------------------- maps ----


def parse_mapping(text: str, source: str = "<mapping>") -> Mapping:
    """Parse a ``.map`` refinement mapping with refine/rename/process sections."""
    from .diagnostics import MappingError

    ts = TokenStream(tokenize(text, source))
    refinements: list[tuple[Atom, tuple[Atom, ...]]] = []
    renamings: list[tuple[Atom, Atom]] = []
    process_renames: list[tuple[str, str]] = []
    section = ""
    while not ts.at("eof"):
        if ts.at_word("refine"):
            ts.advance()
            section = "refine"
            continue
        if ts.at_word("rename"):
            ts.advance()
            section = "rename"
            continue
        if ts.at_word("process"):
            ts.advance()
            section = "process"
            continue
        if not section:
            raise ParseError(
                "mapping entries must appear under a 'refine', 'rename' or 'process' header",
                ts.cur.pos,
            )
        pos = ts.cur.pos
        if section == "process":
            process_renames.append(_parse_name_arrow(ts))
            continue
        pattern = parse_atom_term(ts)
        ts.expect("symbol", "->")
        replacement = [parse_atom_term(ts)]
        while ts.at("symbol", "."):
            ts.advance()
            replacement.append(parse_atom_term(ts))
        if section == "refine":
            refinements.append((pattern, tuple(replacement)))
        else:
            if len(replacement) != 1:
                raise MappingError(
                    "a renaming maps one action to exactly one action", pos
                )
            renamings.append((pattern, replacement[0]))

    refine_dom = {p.key() for p, _ in refinements}
    rename_dom = {p.key() for p, _ in renamings}
    overlap = refine_dom & rename_dom
    if overlap:
        raise MappingError(
            "refine and rename sections overlap on the same action pattern", None
        )
    for p, body in refinements:
        if not body:
            raise MappingError(f"empty refinement sequence for {p}", None)
    return Mapping(tuple(refinements), tuple(renamings), tuple(process_renames))
