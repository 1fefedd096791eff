"""Exception types shared across the package."""


class NCPhsError(Exception):
    """Base class for all package errors."""


class ExprError(NCPhsError):
    """Malformed expression, unknown variable, or unsupported node."""


class SingularityError(ExprError):
    """Evaluation hit a (near-)vanishing denominator."""


class SamplingError(NCPhsError):
    """A sampling plan produced no admissible points."""


class AlgebraError(NCPhsError):
    """Inconsistent Lie algebra, tensor, or subalgebra data."""


class ChartError(NCPhsError):
    """Rank-deficient chart Jacobian or invalid chart specification."""


class RewriteError(NCPhsError):
    """Non-terminating or otherwise invalid noncommutative rewriting."""


class CatalogError(NCPhsError):
    """Unknown catalog entry or malformed catalog file."""


class ConfigError(NCPhsError):
    """Invalid suite configuration or unknown suite."""


class ReportError(NCPhsError):
    """Malformed or unwritable report."""
