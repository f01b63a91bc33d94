"""Quantum dynamics of two distant 1D hydrogen atoms in shaped laser fields."""

from .errors import ConfigError, NumericsError
from .grids import (
    Grid1D,
    KineticOperator1D,
    build_equidistant_grid,
    build_hermite_grid,
    build_kinetic,
    frozen_axis,
)
from .laser import (
    GaussianEnvelope,
    LaserPulse,
    NarrowEnvelope,
    OffEnvelope,
    UniformEnvelope,
    effective_amplitudes,
    electric_field,
    interaction_potential,
    spatial_envelope,
)
from .observables import (
    AtomicEnergies,
    FluxAccumulators,
    RunRecord,
    atomic_energies_direct_product,
    atomic_energies_entangled,
    electron_density,
    expectations,
    probability_difference,
    total_energy,
    total_ionization,
)
from .potentials import (
    PhysicalParams,
    PotentialField,
    assemble_potential,
    v_ee,
    v_ep,
    v_pp,
)
from .propagator import (
    CapSpec,
    CAPField,
    PropagationSettings,
    Propagator,
    build_cap,
    run,
    step,
)
from .scenarios import (
    ScenarioConfig,
    load_config,
    preset_config,
    presets,
    run_scenario,
)
from .state import (
    InitialStateSpec,
    Wavefunction,
    load_snapshot,
    prepare_initial_state,
    relax_imaginary_time,
    save_snapshot,
    seed_initial,
)

__version__ = "0.1.0"
