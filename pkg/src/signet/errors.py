"""Exception hierarchy shared by every module."""


class SignetError(Exception):
    """Base class for all library errors."""


class InputError(SignetError, ValueError):
    """Malformed or invalid user input."""


class EmptyGraph(InputError):
    pass


class ZeroConductivity(InputError):
    pass


class NonpositiveLength(InputError):
    pass


class ValidationError(InputError):
    pass


class ParseError(InputError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class BadPartition(InputError):
    pass


class DegeneratePartition(InputError):
    pass


class UnsupportedTopology(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class RationalRatioSuspected(InputError):
    pass


class WrongOperator(InputError):
    pass


class WrongBasis(InputError):
    pass


class NotInSubspaceX(InputError):
    pass


class MeshTooCoarse(InputError):
    pass


class ResonanceError(SignetError):
    """Input sits on a resonant configuration."""


class ResonantNetwork(ResonanceError):
    pass


class ResonantConductivity(ResonanceError):
    pass


class IncompatibleSource(InputError):
    pass


class NumericalError(SignetError):
    """A numerical procedure failed."""


class NoSignChange(NumericalError):
    def __init__(self, bracket):
        super().__init__(f"no sign change on bracket {tuple(bracket)}")
        self.bracket = tuple(bracket)


class IllConditionedGram(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass
