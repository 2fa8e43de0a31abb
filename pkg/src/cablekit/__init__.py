"""Discrete graphs, metric graphs and the correspondence between them."""

__version__ = "0.1.0"

from .correspondence import (CableSystem, IntrinsicWeight, default_intrinsic_weight, discretize,
                             extend_affine, intrinsic_size, kirchhoff_defect, realize,
                             restrict_to_vertices)
from .errors import (CablekitError, CapacityError, GraphValidationError, IntrinsicWeightError,
                     TruncationError)
from .graph import (DiscreteGraph, EdgewiseFunction, MetricEdge, MetricGraphModel, SimpleGraph,
                    Violation, degree, support_graph, validate_discrete, validate_model)
from .metrics import (Point, ball, is_intrinsic, jump_size, path_metric, quasi_isometry_check,
                      restrict_metric)
from .operators import (apply_discrete_laplacian, energy_form_discrete, energy_form_metric,
                        equilateral_correspondence_check, heat_semigroup, spectrum_discrete,
                        spectrum_metric)
