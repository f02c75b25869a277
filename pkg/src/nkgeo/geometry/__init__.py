"""Charts, metrics, curvature, forms, Hodge star, and the FD oracle."""

from .charts import AuxRule, Chart, chart, lie_bracket
from .matrices import (
    mat,
    mat_add,
    mat_comm,
    mat_eye,
    mat_mul,
    mat_scale,
    mat_sub,
    mat_trace,
    mat_transpose,
    mat_zero,
    sym_det,
    sym_inverse,
)
from .metric import Metric, covariant_derivative
from .forms import (
    Form,
    coordinate_differential,
    one_form,
    two_form_from_matrix,
    zero_form,
)
from .hodge import (
    PAIRS4,
    eps4,
    sqrt_det,
    star_matrix,
    star_two_form,
    weyl_lowered,
    weyl_pair_matrix,
    weyl_split,
)
from .fd import (
    fd_christoffel, fd_curvature, fd_curvature_oracle, metric_evaluator,
)

__all__ = [
    "AuxRule", "Chart", "chart", "lie_bracket",
    "mat", "mat_add", "mat_comm", "mat_eye", "mat_mul", "mat_scale",
    "mat_sub", "mat_trace", "mat_transpose", "mat_zero", "sym_det",
    "sym_inverse",
    "Metric", "covariant_derivative",
    "Form", "coordinate_differential", "one_form", "two_form_from_matrix",
    "zero_form",
    "PAIRS4", "eps4", "sqrt_det", "star_matrix", "star_two_form",
    "weyl_lowered", "weyl_pair_matrix", "weyl_split",
    "fd_christoffel", "fd_curvature", "fd_curvature_oracle",
    "metric_evaluator",
]
