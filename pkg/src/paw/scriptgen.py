"""Coordination-script generation from ToolBus-level process definitions.

Tail-recursive definitions become iteration (``( ... ) * delta``); the
tool-side prefix ``execute(tool, Var?)`` is added per tool variable.  The
fragment handled is exactly the tail-recursive one: state-bearing parameters,
mid-sequence recursion, and nested choice are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import FlattenError, ParseError
from .flatten import FlatSpec
from .modules import ProcDef
from .process import Alt, Atom, Call, ProcessExpr, Seq, normalize, seq
from .terms import Term, Var, render_term

SCRIPT_SHUTDOWN = 'shutdown("")'
_TB_PREFIX = "tb-"
_SHUTDOWN_TRIGGER = "snd-tb-shutdown"


@dataclass(frozen=True)
class IterableForm:
    """A process in the shape the script language can express."""

    process_name: str
    tool_vars: tuple[tuple[str, str], ...]  # (variable, tool name)
    prefix: tuple[str, ...]  # execute actions
    loop_alternatives: tuple[tuple[str, ...], ...]

    def is_terminal(self, alternative: tuple[str, ...]) -> bool:
        return bool(alternative) and alternative[-1] == SCRIPT_SHUTDOWN


@dataclass
class ToolConfig:
    commands: dict[str, str] = field(default_factory=dict)
    bindings: dict[str, str] = field(default_factory=dict)  # tool var -> tool name


def parse_tools_config(text: str) -> ToolConfig:
    """``tool <name> = "<command>"`` lines plus ``<var> -> <toolname>`` bindings."""
    cfg = ToolConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("--")[0].strip()
        if not line:
            continue
        if line.startswith("tool "):
            rest = line[5:]
            if "=" not in rest:
                raise ParseError(f"tools config line {lineno}: expected 'tool <name> = \"<command>\"'")
            name, cmd = rest.split("=", 1)
            cmd = cmd.strip()
            if not (cmd.startswith('"') and cmd.endswith('"') and len(cmd) >= 2):
                raise ParseError(f"tools config line {lineno}: command must be quoted")
            cfg.commands[name.strip()] = cmd[1:-1]
        elif "->" in line:
            var, tool = line.split("->", 1)
            cfg.bindings[var.strip()] = tool.strip()
        else:
            raise ParseError(f"tools config line {lineno}: unrecognized entry {line!r}")
    return cfg


def _script_term(t: Term | Var, fs: FlatSpec) -> str:
    """Render a data argument for the script: the ToolBus-term wrapper is
    dropped, other constructors print as-is."""
    if isinstance(t, Term) and t.name == "tbterm" and len(t.args) == 1:
        return render_term(t.args[0])
    return render_term(t)


def _script_action(atom: Atom, fs: FlatSpec) -> str:
    if atom.name == _SHUTDOWN_TRIGGER:
        return SCRIPT_SHUTDOWN
    name = atom.name
    if name.startswith(_TB_PREFIX):
        name = name[len(_TB_PREFIX):]
    if not atom.args:
        return name
    return f"{name}({', '.join(_script_term(a, fs) for a in atom.args)})"


def _tool_id_vars(atoms: list[Atom], fs: FlatSpec) -> list[str]:
    """Constants of sort TID used as first arguments of tool-directed actions."""
    out: list[str] = []
    for a in atoms:
        if not a.args:
            continue
        first = a.args[0]
        if not isinstance(first, Term) or first.args:
            continue
        decl = fs.sig.functions.get(first.name)
        if decl and decl[1] == "TID" and first.name not in out:
            out.append(first.name)
    return out


def _branches(e: ProcessExpr) -> list[list[ProcessExpr]]:
    e = normalize(e)
    alts = e.operands if isinstance(e, Alt) else (e,)
    out = []
    for branch in alts:
        items: list[ProcessExpr] = []
        cur = branch
        while isinstance(cur, Seq):
            items.append(cur.left)
            cur = cur.right
        items.append(cur)
        out.append(items)
    return out


def to_iterable(
    d: ProcDef, fs: FlatSpec, bindings: dict[str, str] | None = None
) -> IterableForm:
    """Convert a tail-recursive ToolBus process definition to iteration form."""
    if d.params:
        raise FlattenError(
            f"process {d.name!r} carries state in parameter(s) "
            f"{', '.join(d.params)}; scripts keep state in variables, "
            f"recursion with arguments cannot be translated"
        )
    bindings = bindings or {}
    alternatives: list[tuple[str, ...]] = []
    used_atoms: list[Atom] = []
    for items in _branches(d.body):
        actions: list[str] = []
        for i, item in enumerate(items):
            last = i == len(items) - 1
            if isinstance(item, Atom):
                used_atoms.append(item)
                actions.append(_script_action(item, fs))
                if last and actions[-1] != SCRIPT_SHUTDOWN:
                    raise FlattenError(
                        f"process {d.name!r}: alternative ends in action "
                        f"{item.name!r}; it must either recurse or shut down"
                    )
                continue
            if isinstance(item, Call):
                if not last:
                    raise FlattenError(
                        f"process {d.name!r}: call to {item.name!r} in the middle "
                        f"of an alternative; only tail recursion is iterable"
                    )
                if item.name != d.name:
                    raise FlattenError(
                        f"process {d.name!r}: tail call to a different process "
                        f"{item.name!r} cannot become iteration"
                    )
                continue
            raise FlattenError(
                f"process {d.name!r}: construct {type(item).__name__} is not "
                f"expressible in the script language"
            )
        alternatives.append(tuple(actions))
    tool_vars = tuple(
        (v, bindings.get(v, "")) for v in _tool_id_vars(used_atoms, fs)
    )
    prefix = tuple(
        f"execute({tool or var.lower()}, {var}?)" for var, tool in tool_vars
    )
    return IterableForm(d.name, tool_vars, prefix, tuple(alternatives))


def gen_script(forms: list[IterableForm], cfg: ToolConfig) -> str:
    """Emit the coordination script: process blocks, tool blocks, start line."""
    if not forms:
        raise FlattenError("no processes to coordinate")
    lines: list[str] = []
    tools_used: list[str] = []
    for form in forms:
        for var, tool in form.tool_vars:
            tool = tool or cfg.bindings.get(var, "")
            if not tool:
                raise FlattenError(
                    f"process {form.process_name!r}: no tool bound to variable {var!r}"
                )
            if tool not in cfg.commands:
                raise FlattenError(f"missing tool command for {tool!r}")
            if tool not in tools_used:
                tools_used.append(tool)
        lines.append(f"process {form.process_name} is")
        resolved = [(v, t or cfg.bindings.get(v, "")) for v, t in form.tool_vars]
        if resolved:
            lines.append("let")
            for var, tool in resolved:
                lines.append(f"    {var}: {tool}")
            lines.append("in")
        indent = "    "
        for var, tool in resolved:
            lines.append(f"{indent}execute({tool}, {var}?) .")
        lines.append(f"{indent}(")
        for i, alternative in enumerate(form.loop_alternatives):
            if i:
                lines.append(f"{indent}+")
            for j, action in enumerate(alternative):
                sep = "" if j == len(alternative) - 1 else " ."
                lines.append(f"{indent}    {action}{sep}")
        lines.append(f"{indent}) * delta")
        if resolved:
            lines.append("endlet")
        lines.append("")
    for tool in tools_used:
        lines.append(f'tool {tool} is {{ command = "{cfg.commands[tool]}" }}')
    lines.append("")
    lines.append(f"toolbus({', '.join(f.process_name for f in forms)})")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------- back-translation ----


def script_to_defs(text: str, fs: FlatSpec) -> dict[str, ProcDef]:
    """Parse an emitted script and convert iteration back to recursion.

    Used to validate generation: the result must be strongly bisimilar to the
    definitions the script was generated from.
    """
    from .parser import TokenStream, tokenize

    ts = TokenStream(tokenize(text, "<script>"))
    defs: dict[str, ProcDef] = {}
    while not ts.at("eof"):
        if ts.at_word("process"):
            ts.advance()
            name = ts.take_ident("process name").value
            ts.expect_word("is")
            if ts.at_word("let"):
                ts.advance()
                while not ts.at_word("in"):
                    ts.take_ident("variable")
                    ts.expect("symbol", ":")
                    ts.take_ident("tool name")
                ts.expect_word("in")
            body = _parse_script_seq(ts, name, fs)
            if ts.at_word("endlet"):
                ts.advance()
            defs[name] = ProcDef(name, (), normalize(body))
        elif ts.at_word("tool"):
            ts.advance()
            ts.take_ident("tool name")
            ts.expect_word("is")
            ts.expect("symbol", "{")
            while not ts.at("symbol", "}"):
                ts.advance()
            ts.expect("symbol", "}")
        elif ts.at_word("toolbus"):
            ts.advance()
            ts.expect("symbol", "(")
            while not ts.at("symbol", ")"):
                ts.advance()
            ts.expect("symbol", ")")
        else:
            raise ParseError(f"unexpected token {ts.cur.value!r} in script", ts.cur.pos)
    return defs


def _parse_script_seq(ts, self_name: str, fs: FlatSpec) -> ProcessExpr:
    items: list = []
    while True:
        items.append(_parse_script_item(ts, self_name, fs))
        if ts.at("symbol", "."):
            ts.advance()
            continue
        break
    parts = [i for i in items if i is not None]
    if not parts:
        raise ParseError("empty script sequence", ts.cur.pos)
    return seq(*parts) if len(parts) > 1 else parts[0]


def _parse_script_item(ts, self_name: str, fs: FlatSpec):
    from .parser import parse_term

    if ts.at("symbol", "("):
        ts.advance()
        branches = [_parse_script_seq(ts, self_name, fs)]
        while ts.at("symbol", "+"):
            ts.advance()
            branches.append(_parse_script_seq(ts, self_name, fs))
        ts.expect("symbol", ")")
        ts.expect("symbol", "*")
        ts.expect_word("delta")
        # iteration: every non-terminal branch loops back to the process
        from .process import alt

        looped = []
        for b in branches:
            if _ends_in_shutdown(b):
                looped.append(b)
            else:
                looped.append(seq(b, Call(self_name)))
        return alt(*looped)
    name_tok = ts.take_ident("script action")
    name = name_tok.value
    if name == "execute":  # tool start-up, not part of the process behaviour
        ts.expect("symbol", "(")
        depth = 1
        while depth:
            if ts.at("symbol", "("):
                depth += 1
            elif ts.at("symbol", ")"):
                depth -= 1
            ts.advance()
        return None
    args: list = []
    if ts.at("symbol", "("):
        ts.advance()
        if ts.at("string"):
            ts.advance()  # shutdown("")
        elif not ts.at("symbol", ")"):
            args.append(parse_term(ts))
            while ts.at("symbol", ","):
                ts.advance()
                args.append(parse_term(ts))
        ts.expect("symbol", ")")
    if name == "shutdown":
        return Atom(_SHUTDOWN_TRIGGER)
    tb_name = _TB_PREFIX + name
    if tb_name not in fs.atoms:
        raise ParseError(f"script action {name!r} has no ToolBus counterpart", name_tok.pos)
    expected = fs.atoms[tb_name]
    wrapped = []
    for arg, sort in zip(args, expected):
        actual = fs.sig.sort_of(arg, {})
        if sort == "TBTERM" and actual != "TBTERM":
            arg = Term("tbterm", (arg,))
        wrapped.append(arg)
    return Atom(tb_name, tuple(wrapped))


def _ends_in_shutdown(e: ProcessExpr) -> bool:
    cur = e
    while isinstance(cur, Seq):
        cur = cur.right
    return isinstance(cur, Atom) and cur.name == _SHUTDOWN_TRIGGER
