"""Exception types shared across the package."""


class RelayerError(Exception):
    """Base class for all package errors."""


class ParseError(RelayerError):
    """Malformed model or architecture document.

    Carries a human-readable location: either line/column (for broken
    JSON) or a document path such as ``units[3].members[0]``.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)


class ValidationError(RelayerError):
    """One or more model invariants are broken.

    ``diagnostics`` holds every violation found, not just the first.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"{len(self.diagnostics)} validation problem(s): {lines}")


class EmptyModel(RelayerError):
    pass


class EmptyCluster(RelayerError):
    pass


class InconsistentInputs(RelayerError):
    """Assignment and graph disagree on the unit set."""


class NotAViolation(RelayerError):
    """Resolvability was requested for a non-violating edge."""


class NoSuchMember(RelayerError):
    pass


class NoSuchMethod(RelayerError):
    pass


class TargetIsSource(RelayerError):
    pass


class BadParamIndex(RelayerError):
    pass


class NoViolations(RelayerError):
    pass


class EmptyPopulation(RelayerError):
    pass


class ArchitectureMismatch(RelayerError):
    """Architecture does not cover exactly the model's units."""


class NotAFixture(RelayerError):
    """Violation injection needs the role-structured fixture."""


class TooLarge(RelayerError):
    """Exhaustive enumeration guard tripped."""


class BehaviorLedgerError(RelayerError):
    """A transformation broke the identity-tracked reference multiset."""
