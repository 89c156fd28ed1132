import pytest

from paw.diagnostics import FlattenError
from paw.equiv import strong_bisim
from paw.flatten import adhoc_spec, flatten
from paw.kernel import build_lts
from paw.modules import ProcDef
from paw.parser import parse_spec
from paw.process import Atom, Call, seq
from paw.scriptgen import (
    gen_script,
    parse_tools_config,
    script_to_defs,
    to_iterable,
)
from paw.terms import Term

from conftest import read_corpus


@pytest.fixture(scope="module")
def cfg():
    return parse_tools_config(read_corpus("tools.cfg"))


@pytest.fixture(scope="module")
def forms(tb_fs, cfg):
    return [to_iterable(tb_fs.defs[n], tb_fs, cfg.bindings) for n in ("PT1", "PT2")]


@pytest.fixture(scope="module")
def script(forms, cfg):
    return gen_script(forms, cfg)


def test_tools_config(cfg):
    assert cfg.commands["tool1adapter"] == "wish-adapter -script tool1adapter.tcl"
    assert cfg.bindings == {"T1": "tool1adapter", "T2": "tool2"}


def test_pt1_iterable_form(forms):
    pt1 = forms[0]
    assert pt1.process_name == "PT1"
    assert pt1.tool_vars == (("T1", "tool1adapter"),)
    assert len(pt1.loop_alternatives) == 2
    loop, quit_branch = pt1.loop_alternatives
    assert loop == (
        "rec-event(T1, message)",
        "snd-msg(t1, t2, message)",
        "rec-msg(t2, t1, ack)",
        "snd-ack-event(T1, message)",
    )
    assert quit_branch == ("rec-event(T1, quit)", 'shutdown("")')
    assert pt1.is_terminal(quit_branch) and not pt1.is_terminal(loop)


def test_pt2_iterable_form(forms):
    pt2 = forms[1]
    (alternative,) = pt2.loop_alternatives
    assert "snd-eval(T2, eval(message))" in alternative
    assert "rec-value(T2, value(ack))" in alternative


def test_script_structure(script):
    for needle in (
        "process PT1 is",
        "let\n    T1: tool1adapter",
        "execute(tool1adapter, T1?)",
        "* delta",
        'shutdown("")',
        "endlet",
        'tool tool1adapter is { command = "wish-adapter -script tool1adapter.tcl" }',
        "toolbus(PT1, PT2)",
    ):
        assert needle in script, needle


def test_script_deterministic(forms, cfg):
    assert gen_script(forms, cfg) == gen_script(forms, cfg)


def test_empty_process_list_rejected(cfg):
    with pytest.raises(FlattenError, match="no processes"):
        gen_script([], cfg)


def test_missing_tool_command(tb_fs):
    from paw.scriptgen import ToolConfig

    cfg = ToolConfig(commands={}, bindings={"T1": "tool1adapter", "T2": "tool2"})
    form = to_iterable(tb_fs.defs["PT1"], tb_fs, cfg.bindings)
    with pytest.raises(FlattenError, match="missing tool command"):
        gen_script([form], cfg)


def test_state_bearing_recursion_rejected():
    src = """
data module Nat
begin
    exports
    begin
        functions
            zero : -> N
            s : N -> N
    end
end Nat

process module M
begin
    imports Nat
    atoms
        a
    processes
        P : N
    definitions
        P(n) = a . P(s(n))
end M
"""
    fs = flatten(parse_spec(src), "M", libraries={})
    with pytest.raises(FlattenError, match="parameter.*n|state"):
        to_iterable(fs.defs["P"], fs)


def test_mid_sequence_recursion_rejected(tb_fs):
    bad = ProcDef("P", (), seq(Call("P"), Atom("snd-tb-shutdown")))
    with pytest.raises(FlattenError, match="middle"):
        to_iterable(bad, tb_fs)


def test_plain_termination_rejected(tb_fs):
    bad = ProcDef("P", (), Atom("tb-rec-event", (Term("T1"), Term("tbterm", (Term("quit"),)))))
    with pytest.raises(FlattenError, match="recurse or shut down"):
        to_iterable(bad, tb_fs)


def test_round_trip_strongly_bisimilar(tb_fs, script):
    back = script_to_defs(script, tb_fs)
    for name in ("PT1", "PT2"):
        original = build_lts(tb_fs, name)
        fs2 = adhoc_spec(back, entry=name, sig=tb_fs.sig, equations=tb_fs.equations)
        assert strong_bisim(original, build_lts(fs2, name)).related
