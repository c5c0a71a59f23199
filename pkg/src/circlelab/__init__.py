"""Expanding circle maps, dual derivatives and their conjugacy invariants."""
__version__ = "0.1.0"

from .circle_map import (BudgetError, LiftMap, MapError, derivative, eval_lift, expansion_report,
                         inverse_branch, inverse_iterate, level_endpoints, lift_inverse, make_map,
                         parse_map_spec, symmetry_modulus)
from .symbolic import (SymbolWord, bounded_geometry_report, dual_metric, encode_point,
                       interval_for_word, partition_endpoints)
from .dual_deriv import (check_compatibility, check_summation, dual_derivative,
                         dual_derivative_table, dmax_distance, solenoid)
from .conjugacy import GridHomeomorphism, conjugacy_map, qs_report, vartheta_bound, zeta
from .measures import (cesaro_distribution, dual_cylinder_measure, entropy_cylinder,
                       entropy_rohlin, invariant_density, transfer_apply)
from .linear_model import delta_of, linear_model_map, reconstruct_from_dual, theta_n
from .ba_extension import beltrami_at, extend_at, skew_rho
