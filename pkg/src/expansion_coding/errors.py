class DomainError(ValueError):
    """A parameter lies outside the domain of the formula being evaluated."""


class RangeMismatchError(ValueError):
    """Two per-level profiles were combined over different level windows."""


class InfeasibleLevelError(DomainError):
    """A per-level test channel cannot be built (e.g. distortion exceeds the
    source's probability of one at that level)."""

    def __init__(self, level, message):
        super().__init__(f"level {level}: {message}")
        self.level = level
