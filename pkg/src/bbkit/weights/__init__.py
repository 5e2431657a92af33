"""Weight functions, weight function systems and their structural conditions."""
from .conditions import (
    check_alpha,
    check_condition_M,
    check_condition_N,
    check_condition_S,
    check_condition_sq,
    check_gamma,
    moderation_search,
    moderation_witness,
    ratio_tail,
)
from .expr import (
    WeightExpr,
    as_points,
    associated_function,
    exponential,
    from_config,
    gevrey,
    library,
    logpower,
    power,
    ramp,
    sequence_assoc,
    wmax,
    zero,
)
from .nachbin import (
    NachbinWeight,
    moderate_inequality_excess,
    nachbin_integrable_majorant,
    nachbin_membership,
    nachbin_moderate,
    nachbin_square_check,
)
from .systems import (
    CANDIDATE_LAMBDAS,
    DEFAULT_LAMBDAS,
    ConstantSystem,
    DilationSystem,
    ExponentialSystem,
    ReflectedSystem,
    TensorSystem,
    WeightFunction,
    WeightSystem,
    eval_weight,
    make_dilation_system,
    make_exponential_system,
    reflect_system,
    system_from_config,
    tensor_system,
)
from .tails import QuadratureSpec, SearchSpec, TailFit, box_integral, shell_fit

__all__ = [name for name in dir() if not name.startswith("_")]
