"""paw: a process-algebra software engineering workbench.

Compiles PSF-style specifications to labelled transition systems and
mechanizes the pipeline: architecture specification, refinement by action
mappings, vertical-bisimulation verification, constraining by tool
specifications, coordination-script generation, and interactive simulation.
"""

__version__ = "0.1.0"

from .diagnostics import (
    BudgetExceeded,
    FlattenError,
    LevelError,
    MappingError,
    ParseError,
    PawError,
    SimError,
)
from .flatten import FlatSpec, flatten
from .kernel import ActionLabel, Bounds, Lts, build_lts, enabled
from .equiv import VerdictReport, rooted_weak_bisim, strong_bisim, weak_trace_included
from .modules import Mapping, ModuleSet
from .parser import parse_level, parse_mapping, parse_spec
from .printer import pretty_print
from .refine import apply_mapping, vertical_check
from .constrain import constrain, horizontal_check
from .levels import gen_arch_env, gen_tb_env, load_level_def
from .scriptgen import gen_script, to_iterable
from .sim import anim_model, init_sim, run_random, step

__all__ = [
    "ActionLabel",
    "Bounds",
    "BudgetExceeded",
    "FlatSpec",
    "FlattenError",
    "LevelError",
    "Lts",
    "Mapping",
    "MappingError",
    "ModuleSet",
    "ParseError",
    "PawError",
    "SimError",
    "VerdictReport",
    "anim_model",
    "apply_mapping",
    "build_lts",
    "constrain",
    "enabled",
    "flatten",
    "gen_arch_env",
    "gen_script",
    "gen_tb_env",
    "horizontal_check",
    "init_sim",
    "load_level_def",
    "parse_level",
    "parse_mapping",
    "parse_spec",
    "pretty_print",
    "rooted_weak_bisim",
    "run_random",
    "step",
    "strong_bisim",
    "to_iterable",
    "vertical_check",
    "weak_trace_included",
]
