"""Entanglement of several blocks in free translation-invariant fermionic chains.

Exact Renyi entropies from correlation-matrix spectra, single-interval
expansion coefficients from jump data of the symbol, and the multi-block
formulas for entropies and principal Toeplitz sub-matrix determinants.
"""

from .asymptotics import (
    AsymptoticCoefficients,
    LogDetWeight,
    RenyiWeight,
    VonNeumannWeight,
    closed_form_B_state1,
    closed_form_B_state3,
    coeff_A,
    coeff_B,
    coeff_C,
    coeff_I,
    coeff_J,
    coefficients,
    omega,
    single_interval_expansion,
    weight_for,
)
from .conjecture import (
    SingularMatrixError,
    cross_ratio_product,
    cross_ratios,
    det_conjecture_log_rhs,
    det_mutual_information_conjecture,
    det_mutual_information_numeric,
    entropy_conjecture,
    entropy_decomposition,
    log_det,
    mutual_information_conjecture,
    mutual_information_numeric,
    tripartite_information,
)
from .corrmat import (
    BlockSet,
    CorrelationMatrix,
    ModeSet,
    build_finite,
    build_thermodynamic,
    builtin_modes,
    dump_matrix,
    finite_vs_thermo_gap,
    interval,
    load_matrix,
    toeplitz_submatrix,
)
from .specfun import log_gamma_ratio, loggamma
from .spectral import VN, Spectrum, as_alpha, eigenvalues, entropy_from_spectrum, log_abs_det, renyi_entropy
from .symbol import (
    Symbol,
    SymbolKind,
    builtin_state,
    fourier_coefficient,
    fourier_coefficients,
    make_piecewise_constant,
    symbol_from_json,
    symbol_to_json,
)

__version__ = "0.1.0"
