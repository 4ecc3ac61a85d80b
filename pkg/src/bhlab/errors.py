"""Exception hierarchy shared by all bhlab modules."""


class BHLabError(Exception):
    """Base class for every error raised by bhlab."""


class OrderingImpossible(BHLabError):
    pass


class NotPrime(BHLabError, ValueError):
    pass


class Inadmissible(BHLabError):
    """Raised when some prime ``p`` kills every residue class of the product."""

    def __init__(self, p, message=None):
        self.p = p
        super().__init__(message or f"tuple is inadmissible: nu_{p} = {p}")


class DomainError(BHLabError, ValueError):
    pass


class ProfileInvalid(BHLabError, ValueError):
    pass


class KindMismatch(BHLabError, TypeError):
    pass


class RangeTooLarge(BHLabError):
    pass


class ConfigError(BHLabError):
    """Invalid run configuration; ``problems`` holds (field, message) pairs."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [("config", problems)]
        self.problems = list(problems)
        super().__init__("; ".join(f"{k}: {v}" for k, v in self.problems))
