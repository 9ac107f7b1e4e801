"""Exception types. Each carries a category used for CLI exit codes."""


class ArtifactError(Exception):
    category = "numerical"

    def __init__(self, msg, where=None):
        self.where = where
        if where:
            msg = f"[{where}] {msg}"
        super().__init__(msg)


class ValidationError(ArtifactError):
    category = "validation"


class DomainError(ValidationError):
    pass


class DegreeError(ValidationError):
    pass


class UnitCircleRootError(ValidationError):
    pass


class PairingError(ValidationError):
    pass


class DegenerateDivisorError(ValidationError):
    pass


class PhaseError(ValidationError):
    pass


class NonUnitSymPointError(ValidationError):
    pass


class ConvergenceError(ArtifactError):
    pass


class BlowupError(ArtifactError):
    pass


class FactorizationError(ArtifactError):
    pass


class ResolutionError(ArtifactError):
    pass


class BigCellError(ArtifactError):
    pass


class DegenerateError(ArtifactError):
    pass


class ResidueError(ArtifactError):
    pass


class NonConvergenceError(ArtifactError):
    pass
