"""Exception types shared across the dfrf package."""


class DfrfError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(DfrfError):
    pass


class MissingSeedClass(DfrfError):
    def __init__(self, seed_class: str):
        self.seed_class = seed_class
        super().__init__(f"seed mask contains no {seed_class} pixels")


class InsufficientSamples(DfrfError):
    pass


class NonFiniteInput(DfrfError):
    pass


class InstanceTooLarge(DfrfError):
    pass


class DecodeError(DfrfError):
    pass


class CorpusError(DfrfError):
    """Raised by corpus loading; carries one message per broken entry."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(problems))
