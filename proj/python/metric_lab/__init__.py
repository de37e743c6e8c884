from ._core import (
    Certificate,
    ArgumentError,
    ConfigError,
    Error,
    Kernel,
    PreconditionError,
    SizeError,
    Space,
    UnboundedNormError,
    bump_field,
    certificate_summary,
    certify,
    check_doubling,
    check_thm1,
    check_thm2,
    check_thm3,
    kernel,
    lebesgue_norm,
    lorentz_norm,
    maximal_function,
    maximal_singular,
    morrey_norm,
    orlicz_norm,
    riesz_potential,
    run,
    truncated_singular,
    upper_gradient,
    varexp_norm,
)

__all__ = [name for name in dir() if not name.startswith("_")]
