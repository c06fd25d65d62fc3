"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A physical or numerical parameter is outside its valid domain."""


class ConstraintError(ValueError):
    """A measurement configuration violates a physical constraint.

    Raised for the sweep-time limit 2(d+L)/v <= T_sw, aliasing and band
    placement problems, and B > delta_f.
    """


class TooFewBitsError(ParameterError):
    pass


class ShapeMismatchError(ValueError):
    pass


class DuplicateLabelError(KeyError):
    pass


class UnknownLabelError(KeyError):
    pass


class InvalidTransition(RuntimeError):
    pass
