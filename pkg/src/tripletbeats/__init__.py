"""Transport-induced decoherence of spin-entangled triplet-exciton pairs.

Pair spin Hamiltonians for a two-site herringbone crystal, stationary-state
singlet projections, exact unitary propagation and Monte Carlo ensembles of
site-hopping trajectories that predict fluorescence quantum beats.
"""

__version__ = "0.1.0"

from .analysis import (
    BeatSpectrum,
    DecayFit,
    decay_time_jackknife,
    extract_frequencies,
    fit_decay,
    steady_state_level,
)
from .hamiltonian import (
    CrystalParams,
    FieldSpec,
    PairConfiguration,
    averaged_hamiltonian,
    configuration_hamiltonian,
    rotate_site_hamiltonian,
    singlet_state,
    site_hamiltonian,
    spin_operators,
    total_hamiltonian,
    zeeman_pair_hamiltonian,
)
from .montecarlo import (
    BeatTrace,
    HopTrajectory,
    MonteCarloParams,
    ensemble_beats,
    rng_stream,
    sample_trajectory,
    trajectory_ps_trace,
)
from .propagation import propagator, static_ps_trace
from .stationary import (
    decompose,
    mixed_basis_singlet,
    projection_field_sweep,
    stationary_report,
    ab_reference_states,
)
