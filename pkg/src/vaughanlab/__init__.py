"""Truncated Ramanujan-expansion model for the von Mangoldt function and
second-moment experiments for primes in restricted residue classes."""

__version__ = "0.1.0"

from .arith import (
    ArithTables,
    FactorSieve,
    TableRangeError,
    build_sieve,
    build_tables,
    divisors,
    factorize,
    is_squarefree,
    psi_progression,
    theta_progression,
)
from .constants import (
    ConstantSet,
    ProductKind,
    RestrictedProduct,
    TruncationExponent,
    constant_set,
    euler_gamma,
    logp_sum,
    restricted_product,
    t_of_n,
    zeta2_inv,
)
from .frmodel import (
    FRConfig,
    delta_indicator,
    delta_value,
    fr_square_progression_mean,
    fr_table_naive,
    fr_value,
    fr_value_naive,
    mobius_cr_identity,
    mu2_over_phi_sum,
    ramanujan_sum,
    ramanujan_sum_oracle,
    rho,
    rho_star,
    verify_mobius_cr_range,
)
from .variance import (
    Mode,
    Prediction,
    ProgressionAccumulator,
    RestrictionMode,
    VarianceRun,
    Weight,
    accumulate_modulus,
    bdh_variance,
    delta_sq_progression,
    theorem3_prediction,
    theorem3_refined_prediction,
    theorem4_prediction,
    theorem5_prediction,
    variance_sum,
    vaughan_prediction,
)

__all__ = [
    "__version__",
    "ArithTables",
    "FactorSieve",
    "TableRangeError",
    "build_sieve",
    "build_tables",
    "divisors",
    "factorize",
    "is_squarefree",
    "psi_progression",
    "theta_progression",
    "ConstantSet",
    "ProductKind",
    "RestrictedProduct",
    "TruncationExponent",
    "constant_set",
    "euler_gamma",
    "logp_sum",
    "restricted_product",
    "t_of_n",
    "zeta2_inv",
    "FRConfig",
    "delta_indicator",
    "delta_value",
    "fr_table_naive",
    "fr_value",
    "fr_value_naive",
    "mobius_cr_identity",
    "mu2_over_phi_sum",
    "fr_square_progression_mean",
    "ramanujan_sum",
    "ramanujan_sum_oracle",
    "rho",
    "rho_star",
    "verify_mobius_cr_range",
    "Mode",
    "Prediction",
    "ProgressionAccumulator",
    "RestrictionMode",
    "VarianceRun",
    "Weight",
    "accumulate_modulus",
    "bdh_variance",
    "delta_sq_progression",
    "theorem3_prediction",
    "theorem3_refined_prediction",
    "theorem4_prediction",
    "theorem5_prediction",
    "variance_sum",
    "vaughan_prediction",
]
