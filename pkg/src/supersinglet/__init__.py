"""Supersinglet states and the protocols built on them."""
import json
from importlib import resources

from .bell import (
    CorrelationSpec,
    PeresObservable,
    ViolationResult,
    chsh_value,
    corr_closed_m1,
    corr_closed_m2,
    corr_exact_m2,
    correlation_bruteforce,
    maximize_violation,
    peres_operator,
)
from .dfsub import DfBasis, EfficiencyReport, df_basis, df_dimension, encoding_efficiency, noncrossing_pairings
from .errors import ConsistencyError, InvalidInputError, ResourceLimitError, SupersingletError
from .measurement import OutcomeRecord, SeededRng, measure_joint, outcome_distribution
from .qcore import (
    StateVector,
    apply_collective,
    invariance_deviation,
    make_nn_supersinglet,
    make_pair_singlet,
    make_qubit_supersinglet,
    permutation_sign,
    rotation_operator,
    spin_matrices,
)

__version__ = "0.1.0"


def load_schema(name: str) -> dict:
    """JSON schema shipped with the package, e.g. ``load_schema("bell-max")``."""
    path = resources.files(__package__) / "schemas" / f"{name.replace('-', '_')}.json"
    return json.loads(path.read_text())
