"""Exception hierarchy shared by all modules."""


class SpectriplesError(Exception):
    """Base class for every error raised by the package."""


class NotHermitian(SpectriplesError):
    pass


class NotPositiveDefinite(SpectriplesError):
    pass


class SingularSystem(SpectriplesError):
    pass


class InvalidConfig(SpectriplesError, ValueError):
    pass


class DimensionMismatch(SpectriplesError, ValueError):
    pass


class DirichletEigenvalueHit(SingularSystem):
    """The spectral parameter sits on (or numerically at) a Dirichlet eigenvalue."""


class SpectrumHit(SingularSystem):
    """The spectral parameter is not in the resolvent set of a realization."""


class CalderonNotNegative(SpectriplesError):
    pass


class NotHermitianK(SpectriplesError):
    pass


class NotAGap(SpectriplesError):
    pass


class EpsilonTooLarge(SpectriplesError, ValueError):
    pass


class InvalidCombination(SpectriplesError, ValueError):
    pass


class InsufficientTail(SpectriplesError):
    pass


class UnknownKey(InvalidConfig):
    def __init__(self, key, section=None):
        self.key = key
        self.section = section
        where = f" in [{section}]" if section else ""
        super().__init__(f"unknown key {key!r}{where}")


class MissingKey(InvalidConfig):
    def __init__(self, key, section=None):
        self.key = key
        self.section = section
        where = f" in [{section}]" if section else ""
        super().__init__(f"missing required key {key!r}{where}")


class InvalidValue(InvalidConfig):
    def __init__(self, key, value, reason=""):
        self.key = key
        self.value = value
        msg = f"invalid value {value!r} for key {key!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
