"""Exception hierarchy. Every error raised on bad input derives from ToricError."""


class ToricError(ValueError):
    pass


# lattice geometry
class EmptyConfig(ToricError):
    pass


class DegenerateSpan(ToricError):
    pass


class MissingLiftValue(ToricError):
    pass


# subdivision
class ValidationError(ToricError):
    """Base for decomposition validation failures; ``faces`` names the culprits."""

    def __init__(self, message, faces=()):
        super().__init__(message)
        self.faces = tuple(faces)


class CoverageGap(ValidationError):
    pass


class OverlapViolation(ValidationError):
    pass


class BadIntersection(ValidationError):
    pass


class UnvalidatedInput(ToricError):
    pass


# patches
class OutsideDomain(ToricError):
    pass


class ZeroDegree(ToricError):
    pass


class InvalidRelation(ToricError):
    pass


# degeneration
class NonpositiveT(ToricError):
    pass


class FaceNotSubset(ToricError):
    pass


class EmptySet(ToricError):
    pass


# io
class ParseError(ToricError):
    def __init__(self, message, line=None, column=None, field=None, token=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
        self.field = field
        self.token = token


class SchemaError(ToricError):
    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class IoError(ToricError):
    pass
