"""Exception hierarchy shared by every nablacv module."""


class NablaCVError(Exception):
    """Base class for all toolkit errors."""


class EmptyTimeScale(NablaCVError, ValueError):
    pass


class BadGrid(NablaCVError, ValueError):
    pass


class NotInScale(NablaCVError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class TooSmall(NablaCVError, ValueError):
    pass


class ExpressionSyntaxError(NablaCVError, ValueError):
    """Malformed expression text; ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int, source: str = ""):
        self.message = message
        self.position = position
        self.source = source
        super().__init__(f"{message} at offset {position}")


class UnknownVariable(ExpressionSyntaxError):
    pass


class DomainError(NablaCVError, ArithmeticError):
    """Evaluation left the domain of an operation (``subexpression`` names it)."""

    def __init__(self, message: str, subexpression: str = ""):
        self.subexpression = subexpression
        text = f"{message} in '{subexpression}'" if subexpression else message
        super().__init__(text)


class DimensionMismatch(NablaCVError, ValueError):
    pass


class WrongFlavor(NablaCVError, ValueError):
    pass


class NotMonotone(NablaCVError, ValueError):
    pass


class LengthMismatch(NablaCVError, ValueError):
    pass


class CapExceeded(NablaCVError, RuntimeError):
    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"enumeration would generate {count} candidates (cap {cap})")


class SingularJacobian(NablaCVError, ArithmeticError):
    pass


class NoConvergence(NablaCVError, RuntimeError):
    def __init__(self, message: str, history):
        self.history = list(history)
        super().__init__(f"{message}; final residual {self.history[-1]:.3e}" if self.history else message)


class ProblemFileError(NablaCVError, ValueError):
    """Invalid problem file; carries the file, section and position when known."""

    def __init__(self, message: str, file: str = "", section: str = "", position=None):
        self.file = file
        self.section = section
        self.position = position
        parts = [p for p in (file, f"[{section}]" if section else "") if p]
        where = ": ".join(parts)
        if position is not None:
            message = f"{message} (position {position})"
        super().__init__(f"{where}: {message}" if where else message)
