import random

import pytest

from paw.diagnostics import SimError
from paw.flatten import adhoc_spec
from paw.modules import ProcDef
from paw.process import Atom, Deadlock
from paw.sim import (
    SimSession,
    anim_model,
    init_sim,
    replay,
    run_random,
    step,
)


def test_initial_architecture_sim(arch_fs):
    s = init_sim(arch_fs)
    labels = sorted(t.label.text() for t in s.enabled())
    assert labels == ["send-message", "stop"]
    assert not s.terminated and not s.deadlocked


def test_deadlock_reported():
    fs = adhoc_spec([ProcDef("P", (), Deadlock())])
    s = init_sim(fs, "P")
    assert s.deadlocked
    with pytest.raises(SimError, match="deadlock"):
        step(s, 0)


def test_toolbus_initial_actions(tb_app):
    s = init_sim(tb_app.flat)
    labels = sorted(t.label.text() for t in s.enabled())
    assert labels == [
        "comm-tooladapter-rec(message)",
        "comm-tooladapter-rec(quit)",
    ]


def test_message_acknowledgement_moment(arch_fs):
    s = init_sim(arch_fs)
    choice = [t.label.text() for t in s.enabled()].index("send-message")
    s, _ = step(s, choice)
    (only,) = s.enabled()
    assert only.label.text() == "comm(c1 >> c2, message)"
    s, _ = step(s, 0)
    labels = [t.label.text() for t in s.enabled()]
    assert labels == ["comm(c2 >> c1, ack)"]
    assert set(s.enabled()[0].participants) == {"Component1", "Component2"}


def test_stop_branch_reaches_absorbing_state(arch_fs):
    s = init_sim(arch_fs)
    choice = [t.label.text() for t in s.enabled()].index("stop")
    s, _ = step(s, choice)
    fired = []
    while not s.terminated:
        s, entry = step(s, 0)
        fired.append(entry.label)
    assert "comm-quit" in fired
    assert fired[-1] == "shutdown"
    assert s.terminated


def test_choice_out_of_range(arch_fs):
    s = init_sim(arch_fs)
    with pytest.raises(SimError, match="out of range"):
        step(s, 99)


def test_run_random_zero_steps(arch_fs):
    s = init_sim(arch_fs)
    s2, events = run_random(s, 0, seed=1)
    assert events == [] and s2.current.key() == s.current.key()


def test_run_random_deterministic(arch_fs):
    s = init_sim(arch_fs)
    _, ev1 = run_random(s, 25, seed=42)
    _, ev2 = run_random(s, 25, seed=42)
    assert [e.label for e in ev1] == [e.label for e in ev2]


def test_random_traces_are_lts_paths(arch_fs, arch_lts):
    succ = arch_lts.successors()
    for seed in range(50):
        s = init_sim(arch_fs)
        s, events = run_random(s, 12, seed=seed)
        state = arch_lts.initial
        for e in events:
            matches = [d for l, d in succ[state] if l.text() == e.label]
            assert matches, (seed, e.label)
            state = matches[0]


def test_trace_replay_determinism(arch_fs):
    for seed in range(50):
        s = init_sim(arch_fs)
        s, _ = run_random(s, 10, seed=seed)
        assert replay(s).current.key() == s.current.key()


def test_enabled_agrees_with_lts(arch_fs, arch_lts):
    succ = arch_lts.successors()
    s = init_sim(arch_fs)
    frontier = [(s, arch_lts.initial)]
    seen = set()
    while frontier:
        sim_state, lts_state = frontier.pop()
        if lts_state in seen:
            continue
        seen.add(lts_state)
        sim_labels = sorted(t.label.text() for t in sim_state.enabled())
        lts_labels = sorted(l.text() for l, _ in succ[lts_state])
        assert sim_labels == lts_labels
        for i, t in enumerate(sim_state.enabled()):
            nxt, _ = step(sim_state, i)
            dst = next(d for l, d in succ[lts_state] if l.text() == t.label.text())
            frontier.append((nxt, dst))


# ----------------------------------------------------------------- model ----


def test_arch_animation_model(arch_fs):
    m = anim_model(arch_fs)
    assert len(m.boxes) == 2
    outer = next(b for b in m.boxes if b["parent"] is None)
    inner = next(b for b in m.boxes if b["parent"] == outer["id"])
    by_box = {}
    for n in m.nodes:
        by_box.setdefault(n["box"], set()).add(n["id"])
    assert by_box[inner["id"]] == {"Component1", "Component2"}
    assert by_box[outer["id"]] == {"ArchitectureControl", "ArchitectureShutdown"}
    assert {"source": "Component1", "target": "Component2"} in m.edges


def test_single_process_model():
    fs = adhoc_spec([ProcDef("P", (), Atom("a"))])
    m = anim_model(fs, "P")
    assert len(m.boxes) == 0 or len(m.boxes) == 1
    assert [n["id"] for n in m.nodes] == ["P"]


def test_toolbus_animation_nesting(tb_app):
    m = anim_model(tb_app.flat)
    boxes = {b["id"]: b for b in m.boxes}
    nodes = {n["id"]: n for n in m.nodes}
    adapter_box = nodes["AdapterTool1"]["box"]
    assert nodes["Tool1"]["box"] == adapter_box
    # PT1 sits beside that box, inside the PTool1 composite
    ptool1_box = boxes[adapter_box]["parent"]
    assert nodes["PT1"]["box"] == ptool1_box
    assert boxes[adapter_box]["label"] == "Tool1Adapter"
    for name in ("ToolBusControl", "ToolBusShutdown"):
        assert name in nodes


# --------------------------------------------------------------- protocol ----


def test_session_handshake(arch_fs):
    session = SimSession(arch_fs)
    first, second = session.initial_messages()
    assert first["type"] == "model"
    assert second["type"] == "state"
    assert second["stepNo"] == 0
    assert [e["idx"] for e in second["enabled"]] == [0, 1]
    assert second["highlighted"] == ["Component1"]
    assert second["terminated"] is False


def test_session_step_yields_event_then_state(arch_fs):
    session = SimSession(arch_fs)
    out = session.handle({"type": "step", "idx": 0})
    assert [m["type"] for m in out] == ["event", "state"]
    assert out[1]["stepNo"] == 1


def test_session_step_error_keeps_session(arch_fs):
    fs = adhoc_spec([ProcDef("P", (), Deadlock())])
    session = SimSession(fs, "P")
    out = session.handle({"type": "step", "idx": 0})
    assert [m["type"] for m in out] == ["error"]
    # still answers afterwards
    out = session.handle({"type": "reset"})
    assert [m["type"] for m in out] == ["state"]


def test_session_every_step_is_event_state_or_error(arch_fs):
    session = SimSession(arch_fs)
    rng = random.Random(3)
    for _ in range(60):
        out = session.handle({"type": "step", "idx": rng.randrange(4)})
        kinds = [m["type"] for m in out]
        assert kinds in (["event", "state"], ["error"])


def test_session_auto_deterministic(arch_fs):
    s1 = SimSession(arch_fs)
    s2 = SimSession(arch_fs)
    out1 = s1.handle({"type": "auto", "steps": 5, "seed": 42})
    out2 = s2.handle({"type": "auto", "steps": 5, "seed": 42})
    assert [m.get("label") for m in out1] == [m.get("label") for m in out2]


def test_session_reset_restores_initial(arch_fs):
    session = SimSession(arch_fs)
    session.handle({"type": "step", "idx": 0})
    (state,) = session.handle({"type": "reset"})
    assert state == session.initial_messages()[1]


def test_session_unknown_type(arch_fs):
    session = SimSession(arch_fs)
    (err,) = session.handle({"type": "warp"})
    assert err["type"] == "error"
