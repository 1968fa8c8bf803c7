from .distribute import DistributionTest, TamperModel, abort_lower_bound, distribute_and_test
from .ldp import (
    LdpTranscript,
    PartyBehavior,
    Validation,
    fake_position_trial,
    ldp_list,
    ldp_run,
    ldp_validate,
)
from .nsp import NspAssignment, conditional_completions, nsp_assign, self_assignment_rate
from .ssp import SspResult, SspRound, rotating_orders, ssp_detection_trial, ssp_run
from .table import SequenceTable, generate_table

__all__ = [
    "DistributionTest", "TamperModel", "abort_lower_bound", "distribute_and_test",
    "LdpTranscript", "PartyBehavior", "Validation", "fake_position_trial",
    "ldp_list", "ldp_run", "ldp_validate",
    "NspAssignment", "conditional_completions", "nsp_assign", "self_assignment_rate",
    "SspResult", "SspRound", "rotating_orders", "ssp_detection_trial", "ssp_run",
    "SequenceTable", "generate_table",
]
