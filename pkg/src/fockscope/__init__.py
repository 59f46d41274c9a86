"""Fock-space spreading in disordered spin chains.

A small numpy/scipy library for simulating quench dynamics of disordered
spin-1/2 chains and random Floquet circuits, measuring how far the wave
packet spreads over the product-state basis, and running finite-size
scaling analyses (algebraic and exponential collapse ansatz families) on
the disorder-averaged results.
"""

__version__ = "0.1.0"

from .fock import (
    BasisState,
    DisplacementValue,
    FockSpace,
    RadialDistribution,
    StateVector,
    basis_vector,
    closest_fock_state,
    displacement,
    displacement_of_state,
    hamming_distance,
    neel_basis_state,
    neel_state,
    radial_distribution,
    uniform_superposition,
)
from .models import (
    FieldRealization,
    FloquetCircuit,
    ModelSpec,
    SparseHamiltonian,
    build_hamiltonian,
    build_noninteracting,
    make_rng,
    realization_json,
    realization_manifest,
    sample_cue,
    sample_fields,
    sample_floquet_circuit,
    sample_gue,
    sample_realization,
)
from .dynamics import (
    HeisenbergFit,
    KrylovConfig,
    Spectrum,
    apply_floquet,
    dense_evolve,
    fit_heisenberg_time,
    full_spectrum,
    heisenberg_time,
    krylov_evolve,
    load_checkpoint,
    save_checkpoint,
    spectral_evolve,
)
from .ensemble import (
    AggregateSeries,
    EnsembleResult,
    PeakEstimate,
    RunConfig,
    TimeSpec,
    WindowAverage,
    aggregate_traces,
    derive_seed,
    measure_heisenberg_times,
    merge_series,
    peak_location,
    resolve_times,
    rolling_std,
    run_ensemble,
    run_realization,
    window_average,
)
from .scaling import (
    BKTAnsatz,
    CollapseResult,
    LogGrowthFit,
    PowerBetaFit,
    PowerLawAnsatz,
    ScalingDataset,
    collapsed_coordinates,
    cost_bkt,
    cost_power_law,
    estimate_width,
    fit_log_growth,
    fit_power_beta,
    interpolate_linear,
    optimize_collapse,
    xi_bkt,
)
