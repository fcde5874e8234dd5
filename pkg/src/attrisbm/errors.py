"""Exception types shared across the package."""


class ModelError(ValueError):
    """Invalid model input or violated model constraint."""


class ConstraintViolation(ModelError):
    """A documented parameter ordering or validity constraint does not hold."""


class DegenerateInput(ModelError):
    """Inputs make a formula undefined (zero denominator, empty type, ...)."""


class EqualDegreeViolation(ModelError):
    """Affinity matrix does not give every community the same average degree
    conditional on the attribute pair, so aggregated degrees are ill-defined."""


class ParseError(ValueError):
    """Malformed input file; message carries file path and line number."""


class BudgetExceeded(RuntimeError):
    """Exact or simulated computation would exceed its configured size budget."""


class NumericalDegeneracy(RuntimeError):
    """A normalizer underflowed to zero during message passing."""
