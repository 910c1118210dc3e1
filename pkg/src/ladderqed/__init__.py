"""Quantum emitters coupled to a Hofstadter-ladder waveguide.

Band structure with effective spin-orbit coupling, chiral spontaneous
emission, size-modulated giant-atom bound states, and waveguide-mediated
dipole-dipole exchange, plus a reproducible experiment CLI.
"""

__version__ = "0.1.0"

from .bands import (
    BandMinima,
    BandSummary,
    band_edge_detunings,
    band_summary,
    dispersion,
    eigenmode_angle,
    find_band_minima,
    group_velocity,
    resonant_momentum,
    spin_expectation,
)
from .bound_states import (
    BoundStatePole,
    BoundStateResult,
    SizeSweepResult,
    bound_state_pole,
    self_energy_closed_form,
    self_energy_quadrature,
    size_sweep,
    steady_population,
    structure_factor,
)
from .chiral import (
    MARKOV_THRESHOLD,
    DecayRates,
    chiral_factor_closed_form,
    chiral_factor_from_rates,
    decay_rates,
    markov_validity,
)
from .config import ExperimentConfig, load_config_file, parse_config, preset, preset_names
from .dipole import (
    DipoleConfig,
    DipoleCoupling,
    RabiResult,
    effective_two_emitter_model,
    j12_closed_form,
    rabi_simulation,
)
from .dynamics import (
    AssembledSystem,
    ChiralityReport,
    EmitterSpec,
    FieldSnapshot,
    SystemState,
    assemble_system,
    dense_oracle_propagate,
    directional_intensities,
    field_snapshot,
    fit_exponential_decay,
    initial_excitation,
    propagate,
    reflection_experiment,
    trajectory_arrays,
)
from .lattice import (
    LadderParams,
    LatticeHamiltonian,
    Site,
    bloch_hamiltonian,
    build_lattice,
    index_site,
    site_index,
)
