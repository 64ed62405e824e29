"""DC decomposition of piecewise-linear interpolants and curve-based DC criteria."""
from .criterion import (CriterionReport, c3_constant, c4_constant, criterion_records,
                        dc_statistic, turn_statistic, verdict_consistency, verify_constants)
from .curves import (Curve, FamilySpec, arclength_parametrize, derivative_variation,
                     generate_family, lift, tangent_variation, trace, trace_sampled, turn)
from .decompose import DCPair, converge, convexity_check, decompose
from .errors import (AnchorOutside, ConfigError, DCSplitError, DegenerateCurve,
                     DegenerateDomain, EvaluationFailure, NotConvexHinge, OutsideDomain)
from .fields import CATALOG, ScalarField, make_field, read_csv_field, tabulated_field
from .mesh import Domain, SimplicialMesh, box_domain, build_domain, locate, refine, triangulate
from .plfunction import PLFunction, hinges, interpolate, lipschitz_estimate
from .verdict import Thresholds

__version__ = "0.1.0"
