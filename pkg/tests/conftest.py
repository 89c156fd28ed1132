import random
from pathlib import Path

import pytest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        return
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            name = getattr(report, "location", ("", 0, ""))[2].split("[")[0]
            if name in CRITERIA:
                outcomes[name] = status
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, description in CRITERIA.items():
        status = outcomes.get(name)
        if status is None:
            continue
        verdict = "PASS" if status == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {description}")

from paw.flatten import adhoc_spec, flatten
from paw.kernel import ActionLabel, Lts, build_lts
from paw.modules import ModuleSet, ProcDef
from paw.parser import parse_mapping, parse_spec
from paw.process import Atom, Call, Deadlock, ProcessExpr, alt, par, seq
from paw.workbench import constrain_spec, load_spec, refine_spec

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def read_corpus(name: str) -> str:
    return (CORPUS / name).read_text()


@pytest.fixture(scope="session")
def arch_ms() -> ModuleSet:
    return parse_spec(read_corpus("architecture.psf"), "architecture.psf")


@pytest.fixture(scope="session")
def arch_fs(arch_ms):
    return flatten(arch_ms, "Application")


@pytest.fixture(scope="session")
def arch_lts(arch_fs):
    return build_lts(arch_fs)


@pytest.fixture(scope="session")
def components_fs(arch_ms):
    return flatten(arch_ms, "ApplicationSystem")


@pytest.fixture(scope="session")
def example_mapping():
    return parse_mapping(read_corpus("example.map"), "example.map")


@pytest.fixture(scope="session")
def tb_processes(arch_ms, example_mapping):
    """The refined ToolBus-level module set (PT1/PT2 plus data context)."""
    tbdata = parse_spec(read_corpus("tbdata.psf"), "tbdata.psf")
    ms = ModuleSet(arch_ms.modules + tbdata.modules)
    result = refine_spec(ms, example_mapping)
    return load_spec(result.source, "tb-processes.psf")


@pytest.fixture(scope="session")
def tb_fs(tb_processes):
    return flatten(tb_processes, "ApplicationSystemRefined")


@pytest.fixture(scope="session")
def tb_app(tb_processes):
    """Full ToolBus application: PT1/PT2 constrained by both tools, wrapped."""
    from paw.workbench import gen_env_spec

    tool1 = parse_spec(read_corpus("tool1.psf"), "tool1.psf")
    tool2 = parse_spec(read_corpus("tool2.psf"), "tool2.psf")
    c1 = constrain_spec(tb_processes, tool1, proc="PT1", name="PTool1")
    s1 = load_spec(c1.source, "s1.psf")
    c2 = constrain_spec(s1, tool2, proc="PT2", name="PTool2")
    s2 = load_spec(c2.source, "s2.psf")
    return gen_env_spec(s2, "toolbus", app_name="ToolBusApplication")


# ------------------------------------------------------------- generators ----


def lts_of(expr: ProcessExpr, defs: dict[str, ProcDef] | None = None,
           name: str = "Main", comm_rules=()) -> Lts:
    all_defs = dict(defs or {})
    all_defs[name] = ProcDef(name, (), expr)
    return build_lts(adhoc_spec(all_defs, comm_rules=comm_rules, entry=name), name)


def random_lts(rng: random.Random, max_states: int = 30, labels: str = "abc",
               tau: bool = True) -> Lts:
    n = rng.randint(1, max_states)
    alphabet = [ActionLabel.of(c) for c in labels]
    if tau:
        alphabet.append(ActionLabel.tau())
    transitions = []
    for s in range(n):
        for _ in range(rng.randint(0, 3)):
            transitions.append((s, rng.choice(alphabet), rng.randrange(n)))
    terminating = frozenset(s for s in range(n) if rng.random() < 0.15)
    return Lts(0, tuple(transitions), terminating, n, tuple(f"s{i}" for i in range(n)))


def random_term(rng: random.Random, depth: int = 4, alphabet: str = "abc") -> ProcessExpr:
    """A random finite process term over the alphabet (no recursion)."""
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.1:
            return Deadlock()
        return Atom(rng.choice(alphabet))
    kind = rng.choice(("seq", "alt", "par", "atom"))
    if kind == "atom":
        return Atom(rng.choice(alphabet))
    sub = [random_term(rng, depth - 1, alphabet) for _ in range(2)]
    if kind == "seq":
        return seq(*sub)
    if kind == "alt":
        return alt(*sub)
    return par(*sub)


def random_guarded_def(rng: random.Random, name: str = "S", depth: int = 3,
                       alphabet: str = "abc") -> ProcDef:
    """A random guarded possibly-recursive definition: choice of action
    prefixes, each continuing with a subterm, recursion, or termination."""

    def cont(d: int) -> ProcessExpr:
        roll = rng.random()
        if d <= 0 or roll < 0.3:
            return Call(name) if rng.random() < 0.5 else Atom(rng.choice(alphabet))
        return seq(Atom(rng.choice(alphabet)), cont(d - 1))

    branches = [
        seq(Atom(rng.choice(alphabet)), cont(depth - 1))
        for _ in range(rng.randint(1, 3))
    ]
    return ProcDef(name, (), alt(*branches))
