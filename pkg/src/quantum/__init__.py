"""有损双模干涉仪的数值核心: SU(2) 特殊函数、固定光子数态、损耗信道、自旋 Wigner 相空间、计量与损耗卷积核"""

from .loss_channel import (
    LossBranch,
    LossEnsemble,
    LossModel,
    apply_conditional_loss,
    conditional_loss_map,
    full_loss_ensemble,
    kraus_oracle,
    loss_operators,
    loss_probabilities,
    loss_probability,
    oracle_branches,
)
from .loss_kernel_asymptotics import (
    KernelProfile,
    asymptotic_kernel_profile,
    convolve_loss,
    exact_kernel_profile,
    exact_kernel_value,
    fit_gaussian_width,
    full_width_half_maximum,
    gaussian_kernel_width,
    kernel_integral,
    kernel_legendre_coefficients,
    order0_kernel,
    order0_kernel_profile,
)
from .metrology import (
    OptimizerMeta,
    OptimizerOptions,
    PrecisionRecord,
    asymptotic_precision,
    branch_fisher_contributions,
    fidelity,
    lossy_superfidelity_bound,
    optimize_input_state,
    precision_record,
    qfi_lossy,
    qfi_mixed,
    qfi_pure,
    superfidelity,
    superfidelity_qfi_bound,
    sweep_grid,
    wigner_qfi_bound,
)
from .spin_space import (
    SpinDensity,
    SpinKet,
    SpinState,
    as_density,
    basis_ket,
    maximally_mixed,
    monomial_lower,
    noon_state,
    number_operator_a,
    phase_shift,
    spin_coherent_state,
    state_from_dict,
    su2_rotate,
)
from .su2_special_functions import (
    HalfInt,
    clebsch_gordan,
    log_factorial,
    spherical_harmonic,
    spherical_harmonic_basis,
    wigner_d_matrix,
    wigner_rotation_matrix,
    wigner_small_d,
)
from .wigner_phase_space import (
    SphereGrid,
    WignerField,
    azimuthal_spectrum,
    equator_cut,
    harmonic_coefficients,
    inverse_wigner,
    operator_field,
    overlap_trace,
    phi_derivative,
    synthesize_field,
    wigner_function,
    wigner_kernel_matrix,
    wigner_transform,
    wigner_values,
)

__all__ = [name for name in dir() if not name.startswith("_")]
