"""Cascade three-level emitter coupled to a single-mode resonator in the
deep-strong-coupling regime: parity-confined collapse-revival dynamics and
their switching by Gaussian control pulses."""

from .errors import ConvergenceError, NumericError, TruncationError, ValidationError
from .hilbert import EmitterLevel, HilbertSpace, build_operators, index_of, make_named_state
from .model import (
    PulseSchedule,
    PulseSpec,
    SystemParams,
    build_h0,
    build_hd,
    build_heff,
    hamiltonian_at,
    pulse_envelope,
)
from .observables import (
    WignerGrid,
    mean_photon_number,
    overlap_probability,
    photon_distribution,
    reduced_cavity_density,
    wigner,
)
from .propagate import PropagationOptions, TrajectoryRecord, expm_apply, propagate
from .scenarios import ScenarioResult, ScenarioSpec, default_spec, run_scenario, sweep_coupling
from .symmetry import ParityWeights, effective_coupling, parity_of_basis, parity_operator, parity_weights

__version__ = "0.1.0"
