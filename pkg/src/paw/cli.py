"""Command-line driver for the workbench pipeline.

Exit codes: 0 success / relation holds, 1 relation fails or the input is
invalid, 2 usage or I/O errors.  PAW_MAX_STATES overrides the state budget.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import __version__
from .diagnostics import PawError
from .equiv import rooted_weak_bisim, strong_bisim, weak_trace_included
from .flatten import check_levels, flatten
from .kernel import Bounds, Lts, build_lts
from .modules import ModuleSet
from .parser import parse_mapping
from .refine import vertical_check
from .constrain import horizontal_check
from .scriptgen import gen_script, parse_tools_config, to_iterable
from .sim import SimSession, anim_model, init_sim, run_random, run_pipe
from .workbench import (
    constrain_spec,
    default_root,
    flatten_spec,
    gen_env_spec,
    load_spec,
    refine_spec,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _bounds(max_states: int | None = None) -> Bounds:
    env = os.environ.get("PAW_MAX_STATES")
    if max_states is None and env:
        max_states = int(env)
    if max_states is None:
        return Bounds()
    return Bounds(max_states=max_states)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as err:
        click.echo(f"paw: cannot read {path}: {err.strerror}", err=True)
        sys.exit(EXIT_USAGE)


def _load_specs(paths: tuple[str, ...]) -> ModuleSet:
    modules = []
    seen = set()
    for p in paths:
        for mod in load_spec(_read(p), p).modules:
            if mod.name in seen:
                continue
            seen.add(mod.name)
            modules.append(mod)
    return ModuleSet(modules)


def _write_out(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _fail(err: PawError):
    click.echo(f"paw: {err}", err=True)
    sys.exit(EXIT_FAIL)


@click.group()
@click.version_option(__version__, prog_name="paw")
def main():
    """Process-algebra workbench: specifications to transition systems,
    refinement, constraining, verification, script generation, simulation."""


@main.command()
@click.argument("specs", nargs=-1, required=True, type=click.Path())
@click.option("--root", default=None, help="Root module (default: last in file).")
def check(specs, root):
    """Parse, flatten, and validate level usage."""
    try:
        ms = _load_specs(specs)
        root = root or default_root(ms)
        fs = flatten(ms, root)
        diags = check_levels(ms, fs)
    except PawError as err:
        _fail(err)
    for d in diags:
        click.echo(f"level: {d}", err=True)
    if diags:
        sys.exit(EXIT_FAIL)
    click.echo(
        f"ok: root {root}, entry {fs.entry or '(none)'}, "
        f"{len(fs.defs)} processes, {len(fs.atoms)} atoms"
    )


@main.command()
@click.argument("specs", nargs=-1, required=True, type=click.Path())
@click.option("--entry", default=None, help="Entry process (default: root's designated).")
@click.option("--root", default=None)
@click.option("--max-states", type=int, default=None)
@click.option("-o", "--output", default=None, type=click.Path())
def lts(specs, entry, root, max_states, output):
    """Build and serialize the labelled transition system."""
    try:
        fs = flatten_spec(_load_specs(specs), root)
        built = build_lts(fs, entry or None, _bounds(max_states))
    except PawError as err:
        _fail(err)
    _write_out(built.serialize(), output)


@main.command("gen-env")
@click.argument("specs", nargs=-1, required=True, type=click.Path())
@click.option("--level", required=True, help="arch, toolbus, or a .lvl file.")
@click.option("--module", default=None, help="Component module to wrap.")
@click.option("--name", default=None, help="Generated application module name.")
@click.option("-o", "--output", default=None, type=click.Path())
def gen_env_cmd(specs, level, module, name, output):
    """Wrap components in a generated level environment."""
    try:
        result = gen_env_spec(_load_specs(specs), level, module, name)
    except PawError as err:
        _fail(err)
    _write_out(result.source, output)
    click.echo(f"-- entry: {result.app_name}", err=True)


@main.command()
@click.argument("specs", nargs=-1, required=True, type=click.Path())
@click.option("--map", "map_path", required=True, type=click.Path(), help="Mapping file.")
@click.option("--module", default=None, help="Component module to refine.")
@click.option("--name", default=None, help="Name for the refined module.")
@click.option("-o", "--output", default=None, type=click.Path())
def refine(specs, map_path, module, name, output):
    """Apply a refinement mapping, emitting the concrete components."""
    try:
        mapping = parse_mapping(_read(map_path), map_path)
        result = refine_spec(_load_specs(specs), mapping, module=module, name=name)
    except PawError as err:
        _fail(err)
    for w in result.warnings:
        click.echo(f"warning: {w}", err=True)
    _write_out(result.source, output)


@main.command("verify-vertical")
@click.argument("abstract_spec", type=click.Path())
@click.argument("concrete_spec", type=click.Path())
@click.option("--map", "map_path", required=True, type=click.Path())
@click.option("--abstract", default=None, help="Abstract process name.")
@click.option("--concrete", default=None, help="Concrete process name.")
@click.option("--abstract-root", default=None)
@click.option("--concrete-root", default=None)
@click.option("--max-states", type=int, default=None)
def verify_vertical(abstract_spec, concrete_spec, map_path, abstract, concrete,
                    abstract_root, concrete_root, max_states):
    """Check vertical bisimilarity of an abstract and a concrete process."""
    try:
        mapping = parse_mapping(_read(map_path), map_path)
        fs_abs = flatten_spec(_load_specs((abstract_spec,)), abstract_root)
        fs_conc = flatten_spec(_load_specs((concrete_spec,)), concrete_root)
        abstract = abstract or next(
            (old for old, _ in mapping.process_renames), fs_abs.entry
        )
        concrete = concrete or next(
            (new for _, new in mapping.process_renames), fs_conc.entry
        )
        verdict = vertical_check(
            fs_abs, abstract, fs_conc, concrete, mapping, _bounds(max_states)
        )
    except PawError as err:
        _fail(err)
    for w in verdict.warnings:
        click.echo(f"warning: {w}", err=True)
    s_prime = verdict.details["s_prime"]
    i_prime = verdict.details["i_prime"]
    click.echo(
        f"{abstract} vs {concrete}: "
        + ("related (rooted weak)" if verdict.related else verdict.summary())
    )
    click.echo(
        f"S': {s_prime.n_states} states, {s_prime.tau_count()} tau steps; "
        f"I': {i_prime.n_states} states, {i_prime.tau_count()} tau steps"
    )
    sys.exit(EXIT_OK if verdict.related else EXIT_FAIL)


@main.command("constrain")
@click.argument("specs", nargs=-1, required=True, type=click.Path())
@click.option("--with", "with_path", required=True, type=click.Path(),
              help="Constraint bundle (.psf with a communications section).")
@click.option("--proc", default=None, help="Process being constrained.")
@click.option("--constraint", default=None, help="Constraining process.")
@click.option("--name", default=None, help="Name of the composite process.")
@click.option("-o", "--output", default=None, type=click.Path())
def constrain_cmd(specs, with_path, proc, constraint, name, output):
    """Superimpose a constraint process (tool/adapter) on a process."""
    try:
        ms = _load_specs(specs)
        with_ms = load_spec(_read(with_path), with_path)
        result = constrain_spec(ms, with_ms, proc, constraint, name)
    except PawError as err:
        _fail(err)
    _write_out(result.source, output)


@main.command("verify-horizontal")
@click.argument("spec_file", type=click.Path())
@click.argument("impl_file", type=click.Path())
@click.option("--hide", default="", help="Comma-separated extra actions to hide.")
@click.option("--spec-proc", default=None)
@click.option("--impl-proc", default=None)
@click.option("--constraint", default=None, help="Constraint process (scope warning).")
@click.option("--relation", type=click.Choice(["trace", "rooted-weak"]), default="trace")
@click.option("--max-states", type=int, default=None)
def verify_horizontal(spec_file, impl_file, hide, spec_proc, impl_proc,
                      constraint, relation, max_states):
    """Check that a constrained composite implements its specification."""
    try:
        fs_spec = flatten_spec(_load_specs((spec_file,)))
        fs_impl = flatten_spec(_load_specs((impl_file,)))
        hidden = {h.strip() for h in hide.split(",") if h.strip()}
        verdict = horizontal_check(
            fs_spec,
            spec_proc or fs_spec.entry,
            fs_impl,
            impl_proc or fs_impl.entry,
            hidden=hidden,
            bounds=_bounds(max_states),
            relation=relation,
            constraint=constraint,
        )
    except PawError as err:
        _fail(err)
    for w in verdict.warnings:
        click.echo(f"warning: {w}", err=True)
    click.echo(verdict.summary())
    sys.exit(EXIT_OK if verdict.related else EXIT_FAIL)


@main.command("gen-script")
@click.argument("specs", nargs=-1, required=True, type=click.Path())
@click.option("--tools", "tools_path", required=True, type=click.Path(),
              help="Tool command table (tool <name> = \"<cmd>\" lines).")
@click.option("--processes", default="", help="Comma-separated process names.")
@click.option("--root", default=None)
@click.option("-o", "--output", default=None, type=click.Path())
def gen_script_cmd(specs, tools_path, processes, root, output):
    """Generate the coordination script from ToolBus-level processes."""
    try:
        fs = flatten_spec(_load_specs(specs), root)
        cfg = parse_tools_config(_read(tools_path))
        names = [p.strip() for p in processes.split(",") if p.strip()] or sorted(
            fs.exported
        )
        forms = [to_iterable(fs.defs[n], fs, cfg.bindings) for n in names]
        text = gen_script(forms, cfg)
    except PawError as err:
        _fail(err)
    except KeyError as err:
        click.echo(f"paw: unknown process {err}", err=True)
        sys.exit(EXIT_FAIL)
    _write_out(text, output)


@main.command()
@click.argument("specs", nargs=-1, required=True, type=click.Path())
@click.option("--entry", default=None)
@click.option("--root", default=None)
@click.option("--serve", is_flag=True, help="Serve the viewer protocol over WebSocket.")
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--auto", type=int, default=None, help="Run N random steps and print the trace.")
@click.option("--seed", type=int, default=0)
@click.option("--pipe", is_flag=True, help="Speak the JSON protocol on stdin/stdout.")
@click.option("--max-states", type=int, default=None)
def sim(specs, entry, root, serve, port, host, auto, seed, pipe, max_states):
    """Simulate interactively, randomly (--auto), or serve the viewer (--serve)."""
    try:
        fs = flatten_spec(_load_specs(specs), root)
        entry = entry or fs.entry
        bounds = _bounds(max_states)
        if serve:
            import uvicorn

            from .service import create_app

            app = create_app(lambda: SimSession(fs, entry, bounds))
            click.echo(f"serving simulator on http://{host}:{port}/ (ws at /ws)", err=True)
            uvicorn.run(app, host=host, port=port, log_level="warning")
            return
        if pipe:
            run_pipe(fs, entry, bounds=bounds)
            return
        state = init_sim(fs, entry, seed=seed, bounds=bounds)
        if auto is not None:
            state, events = run_random(state, auto, seed)
            for e in events:
                click.echo(f"{e.step_no:4d}  {e.label}  [{', '.join(e.participants)}]")
            status = "terminated" if state.terminated else (
                "deadlocked" if state.deadlocked else "running"
            )
            click.echo(f"-- {status} after {state.step_no} steps")
            return
        _interactive(state)
    except PawError as err:
        _fail(err)


def _interactive(state):
    click.echo(f"simulating {state.entry}; 'q' quits, 'r' resets, number fires")
    initial = state
    while True:
        options = state.enabled()
        if state.terminated:
            click.echo("** terminated")
        elif not options:
            click.echo("** deadlock")
        for i, t in enumerate(options):
            click.echo(f"  [{i}] {t.label.text()}  ({', '.join(t.participants)})")
        try:
            raw = click.prompt("step", default="q", show_default=False)
        except (click.Abort, EOFError):
            return
        if raw.strip().lower() in ("q", "quit", "exit"):
            return
        if raw.strip().lower() in ("r", "reset"):
            state = initial
            continue
        try:
            from .sim import step as sim_step

            state, fired = sim_step(state, int(raw))
            click.echo(f"fired {fired.label}")
        except (ValueError, PawError) as err:
            click.echo(f"!! {err}", err=True)


@main.command()
@click.argument("lts1", type=click.Path())
@click.argument("lts2", type=click.Path())
@click.option("--relation", type=click.Choice(["strong", "rooted-weak", "trace"]),
              default="strong")
def equiv(lts1, lts2, relation):
    """Compare two serialized LTS files."""
    try:
        l1 = Lts.parse(_read(lts1))
        l2 = Lts.parse(_read(lts2))
        if relation == "strong":
            verdict = strong_bisim(l1, l2)
        elif relation == "rooted-weak":
            verdict = rooted_weak_bisim(l1, l2)
        else:
            verdict = weak_trace_included(l1, l2)
    except PawError as err:
        _fail(err)
    click.echo(verdict.summary())
    click.echo(verdict.machine_line(), err=True)
    sys.exit(EXIT_OK if verdict.related else EXIT_FAIL)


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
def serve(port, host):
    """Start the workbench HTTP API (no bound specification)."""
    import uvicorn

    from .service import create_app

    app = create_app(None)
    click.echo(f"paw API on http://{host}:{port}/ (docs at /docs)", err=True)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.argument("specs", nargs=-1, required=True, type=click.Path())
@click.option("--entry", default=None)
@click.option("--root", default=None)
def model(specs, entry, root):
    """Print the animation model (boxes, nodes, edges) as JSON."""
    try:
        fs = flatten_spec(_load_specs(specs), root)
        m = anim_model(fs, entry or fs.entry)
    except PawError as err:
        _fail(err)
    click.echo(json.dumps(m.to_message(), indent=2))


if __name__ == "__main__":
    main()
