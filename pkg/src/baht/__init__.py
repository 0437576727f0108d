"""Average-Hamiltonian and exact propagator tools for pulsed spin sequences."""

from .coupling import CouplingResult, alpha_aht1, alpha_exact, alpha_exact_auto, alpha_sweep
from .echo import EchoReport, is_rapid_echo, random_echo_sequence, verify_vanishing
from .errors import BahtError, NumericalError, UsageError
from .linalg import principal_log_unitary, spin_operators, state_fidelity
from .magnus import (
    MagnusTerm,
    convergence_margin,
    hbar1,
    hbar2,
    magnus_term_combinatorial,
    magnus_terms,
    nested_integral_oracle,
)
from .propagation import PerturbationModel, exact_unitary, power_spectrum, stroboscopic_series
from .seqfile import parse_sequence_file, serialize_sequence
from .sequences import Pulse, PulseSequence, builtin, split_to_equal_tau, toggling_frames

__version__ = "0.1.0"

__all__ = [
    "BahtError", "CouplingResult", "EchoReport", "MagnusTerm", "NumericalError",
    "PerturbationModel", "Pulse", "PulseSequence", "UsageError", "alpha_aht1",
    "alpha_exact", "alpha_exact_auto", "alpha_sweep", "builtin", "convergence_margin",
    "exact_unitary", "hbar1", "hbar2", "is_rapid_echo", "magnus_term_combinatorial",
    "magnus_terms", "nested_integral_oracle", "parse_sequence_file", "power_spectrum",
    "principal_log_unitary", "random_echo_sequence", "serialize_sequence",
    "spin_operators", "split_to_equal_tau", "state_fidelity", "stroboscopic_series",
    "toggling_frames", "verify_vanishing",
]
