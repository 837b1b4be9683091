"""Exception hierarchy shared by all deltastar modules."""


class DeltaStarError(Exception):
    """Base class for all library errors."""


class ConfigError(DeltaStarError):
    """Problems with a potential profile or its configuration text."""


class MalformedConfig(ConfigError):
    pass


class InvalidProfile(ConfigError):
    pass


class NonZeroMean(InvalidProfile):
    pass


class UnknownProfile(ConfigError):
    pass


class InvalidRange(DeltaStarError, ValueError):
    pass


class InconsistentClassification(DeltaStarError):
    """Rank test and H0 test disagree about the multiplicity of a root."""

    def __init__(self, message, sigma_ratio=None, h0_ratio=None):
        super().__init__(message)
        self.sigma_ratio = sigma_ratio
        self.h0_ratio = h0_ratio


class DegenerateCoupling(DeltaStarError):
    """Eigenfunction tip values vanish, so no coupling direction exists."""


class SingularSystem(DeltaStarError):
    """The 6x6 matching system is numerically singular."""

    def __init__(self, message, condition=None, delta=None):
        super().__init__(message)
        self.condition = condition
        self.delta = delta


class InvariantViolation(DeltaStarError):
    """A computed object failed one of its defining invariants."""


class NotResonant(DeltaStarError):
    """A resonant intensity was required but none is close enough."""

    def __init__(self, message, nearest=None):
        super().__init__(message)
        self.nearest = nearest
