"""Post-selected entanglement filtering through dark states in waveguide networks."""

from darkfilter.network import (
    NetworkSpec,
    Propagator,
    SingleParticleHamiltonian,
    Topology,
    bound_state_residual,
    build_hamiltonian,
    default_bath_sites,
    propagator,
    system_block,
)
from darkfilter.effective import (
    DarkStateCertificate,
    EffectiveHamiltonian,
    apt_symmetry_check,
    dark_condition_trimer,
    dark_search,
    dark_vector_trimer,
    effective_dimer,
    effective_hamiltonian,
    effective_network,
    spectrum,
)
from darkfilter.fock import (
    DensityMatrix,
    FockBasis,
    PureState,
    enumerate_basis,
    enumerate_stacked,
    lift_matrix,
    mix,
    mode_power_state,
    permanent,
)
from darkfilter.observables import (
    EvolutionResult,
    convergence_length,
    fidelity_to_pure,
    purity,
    trace_distance,
)
from darkfilter.engines import (
    ConditionalState,
    EngineKind,
    FilteringFailure,
    evolve_exact,
    evolve_lindblad,
    evolve_markov,
    run_sweep,
)

__version__ = "0.1.0"
