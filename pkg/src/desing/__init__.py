"""Exact-arithmetic resolution of singularities of marked ideals.

Chart-based blow-ups, logarithmic derivative calculus, coefficient and
companion ideals, the desingularization invariant, and test-sequence oracles,
all over exact rationals.
"""

from .algebra import (Ideal, contains_one, derivative_ideal, ideal_equal,
                      ideal_member, ideal_power, ideal_product, ideal_sum,
                      iterated_derivative, log_derivative_ideal,
                      order_along_hyperplane, order_at_point,
                      radical_membership, reduced_groebner)
from .charts import (Center, Chart, Divisor, blowup_charts, exceptional_blowup,
                     product_with_line, root_chart, shear_straighten,
                     solve_graph, transport_point)
from .invariant import (InvariantValue, MonomialMark, compare_decrease,
                        compare_inv, compare_selection, monomial_J,
                        parse_invariant, subset_compare)
from .marked import (MarkedIdeal, MonomialPart, boundary_companion, companion,
                     coefficient_ideal, coefficient_sum, cosupp_empty,
                     cosupp_member, factor_monomial, find_maximal_contact,
                     is_maximal_order, marked_product, marked_sum, max_order,
                     pullback_line, sum_marked, transform_admissible,
                     transform_exceptional, transform_projection)
from .poly import Poly, parse_poly
from .problem import ProblemFile, parse_problem
from .resolver import (ResolutionTree, RunOptions, center_from_recursion,
                       fresh_tree, hypersurface_resolve, invariant_at,
                       monotonicity_report, overlap_consistency, resolve,
                       resolve_monomial, step_I_driver, step_II_driver,
                       strict_transform_gens, tree_to_dict, tree_to_dot,
                       tree_to_json, verify_resolved)
from .testseq import (TestSequence, apply_sequence, equivalence_probe,
                      homogenized_ideal, mu_H_oracle, mu_oracle,
                      parse_sequence)

__version__ = "0.1.0"
