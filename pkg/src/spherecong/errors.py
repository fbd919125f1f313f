"""Exception hierarchy shared by all modules."""


class SpherecongError(Exception):
    """Base class for every error raised by the package."""


# taylor kernel
class TaylorError(SpherecongError):
    pass


class DivisionNearZero(TaylorError):
    pass


class DomainError(TaylorError):
    def __init__(self, function, value):
        super().__init__(f"{function} undefined at {value!r}")
        self.function = function
        self.value = value


class OrderMismatch(TaylorError):
    pass


class OrderError(TaylorError):
    """Order out of range, or derivative beyond the jet order."""


# surface definitions
class PointOutsideDomain(SpherecongError):
    pass


class StencilOutsideDomain(PointOutsideDomain):
    pass


class ParseError(SpherecongError):
    def __init__(self, message, offset, source="", expected=()):
        self.message = message
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        head = source[:offset]
        self.line = head.count("\n") + 1
        self.column = offset - (head.rfind("\n") + 1) + 1
        text = f"{message} at line {self.line}, column {self.column} (offset {offset})"
        if self.expected:
            text += "; expected one of " + ", ".join(self.expected)
        super().__init__(text)


class UnknownIdentifier(ParseError):
    pass


class ArityError(ParseError):
    pass


# geometry
class GeometryError(SpherecongError):
    pass


class DegenerateImmersion(GeometryError):
    pass


class UmbilicPoint(GeometryError):
    pass


class MinimalPoint(GeometryError):
    pass


class DegenerateCenters(GeometryError):
    pass


class DegenerateFrame(GeometryError):
    pass


class LambdaRankError(DegenerateFrame):
    pass


class PoleHit(GeometryError):
    pass


class NonIsotropicData(GeometryError):
    pass


class NonClosedFormAntiderivative(GeometryError):
    pass


# sweeps and reports
class InsufficientSamples(SpherecongError):
    pass


class DegenerateCoverage(SpherecongError):
    def __init__(self, excluded, total):
        super().__init__(f"{excluded} of {total} grid points excluded (limit 10%)")
        self.excluded = excluded
        self.total = total


class UnknownId(SpherecongError):
    pass


class BadParams(SpherecongError):
    pass


class CertificationFailed(SpherecongError):
    def __init__(self, entry_id, violations):
        super().__init__(f"{entry_id}: " + "; ".join(violations))
        self.entry_id = entry_id
        self.violations = list(violations)
