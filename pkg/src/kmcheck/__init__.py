"""Bounded compatibility checking for communicating session automata."""
from .core import (INF, RECEIVE, SEND, Action, ActionDisabled, Automaton, Configuration, System, Violation,
                   directedness, enabled, receive, send, successor, validate_csa)
from .explore import ResourceLimit, TransitionSystem, build_full_ts, build_rts, partition, to_dot
from .checks import (KmcResult, PropertyVerdict, Witness, build_ts0, check_cibi, check_exhaustive, check_ibi,
                     check_kmc, check_obi, check_reduced_obi, check_safety, check_sibi, check_smc,
                     check_stable_bounded, depends, depends_in)
from .bisim import ProjectedLts, check_bound_agnostic, project, weak_bisim
from .traces import (InvalidTrace, ReplayError, TraceReport, analyse, causal_equiv, is_k_exchange,
                     is_k_match_bounded, is_valid, projected_equiv, replay)
from .bench import BenchSpec, generate, run_suite
from .cli import ParseError, ValidationError, load_corpus, parse_system, parse_trace

__version__ = "0.1.0"
