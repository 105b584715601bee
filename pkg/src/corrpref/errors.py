"""Exception hierarchy.

Every failure raised by the library derives from :class:`CorrprefError`, so
callers (and the command-line front end) can tell computation errors apart
from programming mistakes.
"""


class CorrprefError(Exception):
    """Base class for all library errors."""


# lottery structure
class NonStochastic(CorrprefError):
    pass


class RaggedHorizon(CorrprefError):
    pass


class NegativeConsumption(CorrprefError):
    pass


class StageOutOfRange(CorrprefError):
    pass


class NotInMStar(CorrprefError):
    """Two t=1 support points share consumption but differ in continuation."""


class ParamOutOfRange(CorrprefError):
    pass


# informativeness / transformations
class DimensionMismatch(CorrprefError):
    pass


class MassOverflow(CorrprefError):
    pass


class ZeroMarginal(CorrprefError):
    pass


# evaluation
class DomainViolation(CorrprefError):
    pass


class RangeViolation(CorrprefError):
    pass


# solvers
class NoRoot(CorrprefError):
    pass


class NoBracket(CorrprefError):
    pass


class UnsupportedRho(CorrprefError):
    pass


class DegenerateQ(CorrprefError):
    pass


class NonConvergence(CorrprefError):
    pass


class NonContraction(CorrprefError):
    pass


class IterationCap(CorrprefError):
    pass


class NoWitness(CorrprefError):
    pass


class SingularIntegrand(CorrprefError):
    pass


class MalformedLottery(CorrprefError, ValueError):
    pass
