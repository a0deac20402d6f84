"""Exception types shared across the toolkit."""

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConfigError(DomainError):
    """A configuration field violates one of its constraints.

    The message always names the offending field and the violated
    constraint, e.g. ``n_points: must satisfy n_points ≥ 2 (got 1)``.
    """

    def __init__(self, field, constraint, value=None):
        self.field = field
        self.constraint = constraint
        self.value = value
        msg = f"{field}: must satisfy {constraint}"
        if value is not None:
            msg += f" (got {value!r})"
        super().__init__(msg)


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, estimate, achieved, requested):
        self.estimate = estimate
        self.achieved = achieved
        self.requested = requested
        super().__init__(
            f"quadrature did not converge: estimate={estimate!r}, "
            f"achieved error {achieved:.3g} > requested {requested:.3g}"
        )


class RootNotFoundError(ArithmeticError):
    """No sign change was found inside the search bracket."""


class DegenerateDesignError(np.linalg.LinAlgError):
    """The least-squares design matrix does not identify every parameter.

    ``null_direction`` is the unit vector in parameter space along which
    the data carry no information.
    """

    def __init__(self, message, null_direction):
        self.null_direction = np.asarray(null_direction, dtype=float)
        super().__init__(f"{message}; unidentifiable direction {self.null_direction.round(6).tolist()}")


class NotApplicableError(RuntimeError):
    """The operation does not apply to this kind of result."""


class FormatError(ValueError):
    """A data file could not be parsed."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
