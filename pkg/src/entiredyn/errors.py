"""Exception types raised across the package."""


class DynamicsError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class MapOverflow(DynamicsError, OverflowError):
    """Direct evaluation left double range; use the BigPoint path instead."""


class Indeterminate(DynamicsError):
    """Point is beyond the precision horizon of both representations."""


class NotInDomain(DynamicsError):
    pass


class NotInTract(NotInDomain):
    pass


class OutsideDomain(DynamicsError):
    """Size function requested outside G_K minus the cut curve."""


class NoCutRay(DynamicsError):
    pass


class NoThreshold(DynamicsError):
    pass


class NoWitness(DynamicsError):
    pass


class EmptyShell(DynamicsError):
    pass


class PullbackDivergence(DynamicsError):
    def __init__(self, message, t=None, iterations=None):
        super().__init__(message)
        self.t = t
        self.iterations = iterations


class AddressInfeasible(DynamicsError):
    pass


class NotPeriodic(DynamicsError):
    pass
