"""Quantum state of light pulses extracted from lossy high-Q cavities."""

from .cavity import (
    CavityParams,
    EfficiencyCurve,
    QuadratureError,
    decay_rates,
    efficiency_curve,
    eta_closed,
    eta_numeric,
    extraction_quality,
    integrate_filter_kernel,
)
from .oracle import DensityMatrix, build_state, loss_channel, wigner_from_density_matrix
from .phase_space import (
    GridSpec,
    PhaseGrid,
    QuasiDistribution,
    convert_s_order,
    evaluate_on_grid,
    extract_state,
    wigner_convolution,
)
from .states import (
    Cat,
    Explicit,
    Fock,
    cat_condition,
    cat_output_wigner,
    cat_wigner,
    fock_output_wigner,
    fock_threshold,
    fock_wigner,
    laguerre,
    parse_state,
    single_photon_mixture_weights,
)

__version__ = "0.1.0"
