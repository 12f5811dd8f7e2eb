"""L-index in joint variables for analytic functions on the unit bidisc."""
from lindex.coefficients import CoeffTable, NormDerivGrid, expand, normalize, taylor_cauchy, taylor_closed_form
from lindex.criteria import (
    check_hayman, check_kth_max_modulus, check_local_dominance, check_modulus_ratio, check_pure_partials,
    check_tail_dominance, find_main_polynomial, index_bound_from_ratio, verify_main_polynomial,
)
from lindex.domain import (
    AnalyticFunction, BidiscPoint, CriterionReport, LogMagnitude, MultiIndex, PointGrid, PolarGrid, Radii,
    TheoremId, Verdict, degree_enumerate,
)
from lindex.errors import LIndexError
from lindex.families import function_from_spec, load_function_spec
from lindex.index import index_profile, local_index, max_modulus, maximal_term, q_constant
from lindex.weights import WeightField, comparability, lambda_bounds, scaled_weight, validate_weight

__all__ = [
    'AnalyticFunction', 'BidiscPoint', 'CoeffTable', 'CriterionReport', 'LIndexError', 'LogMagnitude',
    'MultiIndex', 'NormDerivGrid', 'PointGrid', 'PolarGrid', 'Radii', 'TheoremId', 'Verdict', 'WeightField',
    'check_hayman', 'check_kth_max_modulus', 'check_local_dominance', 'check_modulus_ratio',
    'check_pure_partials', 'check_tail_dominance', 'comparability', 'degree_enumerate', 'expand',
    'find_main_polynomial', 'function_from_spec', 'index_bound_from_ratio', 'index_profile', 'lambda_bounds',
    'load_function_spec', 'local_index', 'max_modulus', 'maximal_term', 'normalize', 'q_constant',
    'scaled_weight', 'taylor_cauchy', 'taylor_closed_form', 'validate_weight', 'verify_main_polynomial',
]
