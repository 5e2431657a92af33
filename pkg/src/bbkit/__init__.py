"""Desk-scale numerics for Beurling-Björck spaces.

Submodules: :mod:`bbkit.funcgrid` (grids, Fourier transform, seminorms),
:mod:`bbkit.weights` (weight systems and their conditions), :mod:`bbkit.stft`,
:mod:`bbkit.kothe`, :mod:`bbkit.kernels` and the batch CLI :mod:`bbkit.cli`.
"""
from .funcgrid import (
    Grid,
    SampledFunction,
    bb_l1_seminorm,
    bb_seminorm,
    fourier_transform,
    inverse_fourier,
    l1_seminorm,
    l2_inner,
    library_function,
    reflect,
    shift,
    sup_seminorm,
)
from .kernels import (
    BivariateKernel,
    kernel_apply,
    kernel_stft_roundtrip,
    projective_bound_check,
    separable_approximation,
    tensor_embed,
)
from .kothe import (
    IndexedSequence,
    KotheSet,
    build_phi0,
    check_kothe_N,
    chi_function,
    embedding_T,
    kothe_from_system,
    l1_norm,
    linf_norm,
    sampling_S,
    verify_S_T_identity,
)
from .reports import BoundReport, ConditionReport, KernelRoundTripReport
from .stft import (
    TimeFrequencyArray,
    adjoint_stft,
    find_synthesis_translate,
    nuclearity_inequality_check,
    reconstruct,
    stft,
    synthesis_pairing,
    verify_adjoint_bound,
    verify_stft_bound,
)

__version__ = "0.1.0"
