"""Mass of asymptotically Robertson-Walker spacetimes."""

from ._core import (
    ARWSpec,
    DomainError,
    InvalidArgument,
    NumericalAbort,
    ParseError,
    SAdSParams,
    UnboundVariable,
    arw_validate,
    conformal_residuals,
    custom_spec,
    einstein_tensor,
    geometric_schedule,
    graph_mass_integral,
    horizon,
    imcf_run,
    mass_from_integral,
    mass_limit,
    monotonicity_scan,
    normalize,
    oracle_mass_integral,
    r_of_x0,
    reparametrize_time,
    rescale,
    rw_family,
    sads_spec,
    slab_balance,
    slice_mass_integral,
    sphere_volume,
    tcc_check,
    x0_of_r,
)

__all__ = [name for name in dir() if not name.startswith("_")]
