"""STIRAP-based qubit rotations with counterdiabatic shortcuts.

A numpy/scipy simulation library for a 4-level Lambda system whose qubit
rotations are driven by two consecutive STIRAP sequences, plus two
shortcut-to-adiabaticity upgrades: direct counterdiabatic couplings among
the ground states (SC1) and the same correction synthesized through Raman
transitions in a 5-level system with modified pulses (SC2).
"""

from .cd import CdCouplings, CdOptions, StructuralResidualError, cd_generator, h_sc1, sqr_cd_couplings
from .evolve import EvolutionTrace, Scheme, fidelity, population_summary, run
from .harness import (
    Preset,
    ScheduleTable,
    SweepResult,
    SweepRow,
    UnknownPresetError,
    cli,
    export,
    load_sweep,
    preset,
    sample_schedule,
    sweep,
)
from .numerics import (
    EigenDecomposition,
    IntegrationError,
    IntegrationResult,
    NonHermitianError,
    eigh,
    integrate,
)
from .sqr import (
    ConfigurationError,
    GateSpec,
    PulseConfig,
    QubitState,
    dark_bright,
    h_sqr,
    make_gate,
    pulse_value,
    rotation_matrix,
    target_state,
)
from .sc2 import (
    EffectiveTargets,
    Sc2Controls,
    coupling_targets,
    envelope,
    feasibility_residual,
    h_eff_cd,
    h_eff_sc2,
    h_eff_sqr,
    h_sc2,
    solve_controls,
)

__version__ = "0.1.0"
