"""Robust single-machine scheduling with interval release and processing times."""

from .evaluate import Schedule, evaluate_sequence, robust_sequence_no_release, spt_sequence
from .model import (
    GenParams,
    Instance,
    InstanceError,
    Interval,
    Job,
    ParseError,
    Scenario,
    Sequence,
    SizeError,
    generate_instance,
    make_scenario,
    parse_instance,
    read_instance,
    serialize_instance,
    write_instance,
)
from .robustbound import LBResult, SampleSpec, robust_lower_bound
from .search import SearchConfig, SearchOutcome, exhaustive_robust, local_search, run_ils, run_vns, shake
from .worstcase import WorstCaseResult, worst_case_bruteforce, worst_case_flow

__version__ = "0.1.0"

__all__ = [
    "GenParams", "Instance", "InstanceError", "Interval", "Job", "LBResult", "ParseError", "SampleSpec",
    "Scenario", "Schedule", "SearchConfig", "SearchOutcome", "Sequence", "SizeError", "WorstCaseResult",
    "evaluate_sequence", "exhaustive_robust", "generate_instance", "local_search", "make_scenario",
    "parse_instance", "read_instance", "robust_lower_bound", "robust_sequence_no_release", "run_ils",
    "run_vns", "serialize_instance", "shake", "spt_sequence", "worst_case_bruteforce", "worst_case_flow",
    "write_instance",
]
