"""Exception hierarchy shared by all dekernel modules."""


class DekernelError(Exception):
    """Base class for all library-specific errors."""


# --- kernels ---------------------------------------------------------------

class NonPositiveBandwidth(DekernelError):
    """Bandwidth h must be strictly positive."""


class UnsupportedOrder(DekernelError):
    """Kernel moment requested beyond the stored closed forms (j > 8)."""


# --- growth model ----------------------------------------------------------

class NonPositiveState(DekernelError):
    """A growth-state value that must be > 0 was not."""


class SolutionUndefined(DekernelError):
    """Closed-form trajectory base <= 0 (decaying model past extinction)."""


class StateCollapse(DekernelError):
    """Numerical integration drove the state to a non-positive value."""


class DegreeOutOfRange(DekernelError):
    """Taylor degree k outside the supported range [1, 6]."""


# --- local fitting ---------------------------------------------------------

class InsufficientLocalData(DekernelError):
    """Too few positively-weighted distinct design points near x0."""


class SingularDesign(DekernelError):
    """Local normal-equations matrix numerically singular (cond > 1e12)."""


class EmptyGrid(DekernelError):
    """Curve evaluation requested on an empty grid."""


class IterateLeftDomain(DekernelError):
    """Linear-scale Gauss-Newton iterate forced to a non-positive value."""


class WrongAlpha(DekernelError):
    """Closed-form exponential path requires alpha == 1."""


class DegenerateDenominator(DekernelError):
    """Closed-form weighted ratio has a zero denominator."""


class EmptyBracket(DekernelError):
    """Grid-search bracket is empty (lo >= hi)."""


class NoConvergence(DekernelError):
    """Iterative solver exhausted its budget without converging."""


# --- bandwidth selection ---------------------------------------------------

class DegenerateBias(DekernelError):
    """Leading bias term vanishes; the optimal bandwidth diverges."""


class AllBandwidthsInfeasible(DekernelError):
    """No bandwidth on the grid admits every leave-one-out fit."""


# --- parameter inference ---------------------------------------------------

class NonPositiveData(DekernelError):
    """Too few strictly positive observations for a log-log regression."""


class DegenerateDesign(DekernelError):
    """All (log) design points coincide; the slope is undefined."""


class NearZeroSlope(DekernelError):
    """Log-log slope is ~0, so the growth exponent is unbounded."""


class NoFeasibleLambda(DekernelError):
    """No rate value keeps the growth-law base positive on the data."""


# --- simulation lab / CLI --------------------------------------------------

class IndexOutOfRange(DekernelError):
    """A 1-based removal index falls outside the dataset."""


class ConfigInvalid(DekernelError):
    """A scenario/check configuration failed validation."""


class ParseError(DekernelError):
    """A CSV/JSON input file could not be parsed."""
