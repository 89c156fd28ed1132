"""Deterministic pretty-printing for modules, flat specs, and process terms.

Output reparses to a structurally equal value; layout is fixed so repeated
prints are byte-identical.
"""

from __future__ import annotations

from .modules import (
    CommRule,
    DataModule,
    FuncDecl,
    ImportRef,
    Module,
    ModuleSet,
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
    Scope,
    Seq,
    Sum,
    Terminated,
)
from .terms import render_term

_ALT, _PAR, _SEQ, _PRIM = 0, 1, 2, 3


def render_expr(e: ProcessExpr, level: int = _ALT) -> str:
    if isinstance(e, Deadlock):
        return "delta"
    if isinstance(e, Terminated):
        return "<done>"
    if isinstance(e, (Atom, Call, Ref)):
        if e.args:
            return f"{e.name}({', '.join(render_term(a) for a in e.args)})"
        return e.name
    if isinstance(e, Sum):
        return f"sum({e.var} in {e.sort}, {render_expr(e.body)})"
    if isinstance(e, Encaps):
        return f"encaps({_render_action_set(e.actions)}, {render_expr(e.body)})"
    if isinstance(e, Hide):
        return f"hide({_render_action_set(e.actions)}, {render_expr(e.body)})"
    if isinstance(e, Rename):
        rules = ", ".join(f"{render_expr(p)} -> {render_expr(r)}" for p, r in e.rules)
        return f"rename([{rules}], {render_expr(e.body)})"
    if isinstance(e, Scope):
        return f"@{e.name}[{render_expr(e.body)}]"
    if isinstance(e, Seq):
        parts = []
        cur: ProcessExpr = e
        while isinstance(cur, Seq):
            parts.append(render_expr(cur.left, _PRIM if isinstance(cur.left, Seq) else _SEQ + 0))
            cur = cur.right
        parts.append(render_expr(cur, _SEQ))
        text = " . ".join(parts)
        return f"({text})" if level > _SEQ else text
    if isinstance(e, Par):
        text = " || ".join(render_expr(o, _SEQ) for o in e.operands)
        return f"({text})" if level > _PAR else text
    if isinstance(e, Alt):
        text = " + ".join(render_expr(o, _PAR) for o in e.operands)
        return f"({text})" if level > _ALT else text
    raise TypeError(f"cannot render {e!r}")


def _render_action_set(actions: frozenset[str] | str) -> str:
    if isinstance(actions, str):
        return actions
    return "{" + ", ".join(sorted(actions)) + "}"


def _render_sig(arg_sorts: tuple[str, ...], result: str | None) -> str:
    args = " # ".join(arg_sorts)
    if result is None:
        return f" : {args}" if args else ""
    return f" : {args} -> {result}" if args else f" : -> {result}"


def _render_func_decls(decls: list[FuncDecl], indent: str) -> list[str]:
    return [f"{indent}{d.name}{_render_sig(d.arg_sorts, d.result)}" for d in decls]


def _render_atom_decls(decls, indent: str) -> list[str]:
    return [f"{indent}{d.name}{_render_sig(d.arg_sorts, None)}" for d in decls]


def _render_import(imp: ImportRef) -> str:
    if not imp.bindings and not imp.renamings:
        return imp.module
    inner = []
    if imp.bindings:
        pairs = ", ".join(f"{f} -> {a}" for f, a in imp.bindings)
        inner.append(f"{imp.bindings[0][0]} bound by [ {pairs} ] to {imp.actuals_from}")
    if imp.renamings:
        pairs = ", ".join(f"{f} -> {a}" for f, a in imp.renamings)
        inner.append(f"renamed by [ {pairs} ]")
    body = "\n".join("            " + part for part in inner)
    return imp.module + " {\n" + body + "\n        }"


def _render_comm_rule(rule: CommRule, indent: str) -> str:
    line = (
        f"{indent}{render_expr(rule.left)} | {render_expr(rule.right)}"
        f" = {render_expr(rule.result)}"
    )
    if rule.vars:
        line += " for " + ", ".join(f"{v} in {s}" for v, s in rule.vars)
    return line


def _render_def(d: ProcDef, indent: str) -> str:
    head = d.name
    if d.params:
        head += f"({', '.join(d.params)})"
    return f"{indent}{head} = {render_expr(d.body)}"


def render_data_module(mod: DataModule) -> str:
    lines = [f"data module {mod.name}", "begin"]
    exported = [f for f in mod.functions if f.name in set(mod.exported_functions)]
    local = [f for f in mod.functions if f.name not in set(mod.exported_functions)]
    if exported:
        lines += ["    exports", "    begin", "        functions"]
        lines += _render_func_decls(exported, "            ")
        lines += ["    end"]
    if mod.imports:
        lines.append("    imports")
        lines.append("        " + ",\n        ".join(_render_import(i) for i in mod.imports))
    if local:
        lines.append("    functions")
        lines += _render_func_decls(local, "        ")
    if mod.variables:
        lines.append("    variables")
        lines += [f"        {v} : -> {s}" for v, s in mod.variables.items()]
    if mod.equations:
        lines.append("    equations")
        for eq in mod.equations:
            label = f"[{eq.label}] " if eq.label else ""
            lines.append(f"        {label}{render_term(eq.lhs)} = {render_term(eq.rhs)}")
    lines.append(f"end {mod.name}")
    return "\n".join(lines)


def render_process_module(mod: ProcessModule) -> str:
    lines = [f"process module {mod.name}", "begin"]
    exported = set(mod.exported_processes)
    exp_decls = [p for p in mod.processes if p.name in exported]
    local_decls = [p for p in mod.processes if p.name not in exported]
    if exp_decls:
        lines += ["    exports", "    begin", "        processes"]
        lines += _render_atom_decls(exp_decls, "            ")
        lines += ["    end"]
    if mod.imports:
        lines.append("    imports")
        lines.append("        " + ",\n        ".join(_render_import(i) for i in mod.imports))
    if mod.parameters:
        lines.append("    parameters")
        lines.append("        processes")
        lines += [f"            {p}" for p in mod.parameters]
    if mod.atoms:
        lines.append("    atoms")
        lines += _render_atom_decls(mod.atoms, "        ")
    if local_decls:
        lines.append("    processes")
        lines += _render_atom_decls(local_decls, "        ")
    if mod.sets:
        lines += ["    sets", "        of atoms"]
        for name in mod.sets:
            members = ", ".join(sorted(mod.sets[name]))
            lines.append(f"            {name} = {{ {members} }}")
    if mod.communications:
        lines.append("    communications")
        lines += [_render_comm_rule(r, "        ") for r in mod.communications]
    if mod.variables:
        lines.append("    variables")
        lines += [f"        {v} : -> {s}" for v, s in mod.variables.items()]
    if mod.definitions:
        lines.append("    definitions")
        lines += [_render_def(d, "        ") for d in mod.definitions]
    lines.append(f"end {mod.name}")
    return "\n".join(lines)


def render_module(mod: Module) -> str:
    if isinstance(mod, DataModule):
        return render_data_module(mod)
    return render_process_module(mod)


def render_module_set(ms: ModuleSet) -> str:
    return "\n\n".join(render_module(m) for m in ms.modules) + "\n"


def pretty_print(obj) -> str:
    """Render a ModuleSet, module, FlatSpec, or process expression as source text."""
    from .flatten import FlatSpec

    if isinstance(obj, ModuleSet):
        return render_module_set(obj)
    if isinstance(obj, (DataModule, ProcessModule)):
        return render_module(obj) + "\n"
    if isinstance(obj, FlatSpec):
        return render_module_set(obj.to_modules())
    if isinstance(obj, ProcessExpr):
        return render_expr(obj)
    raise TypeError(f"cannot pretty-print {type(obj).__name__}")
