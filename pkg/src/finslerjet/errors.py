"""Exception hierarchy shared by every module of the package."""


class FinslerError(Exception):
    """Base class for all errors raised by finslerjet."""


# -- jets -------------------------------------------------------------------

class JetError(FinslerError, ArithmeticError):
    pass


class DivisionBySingularJet(JetError, ZeroDivisionError):
    """Divisor's constant term is zero within tolerance."""


class DomainError(JetError, ValueError):
    """sqrt / non-integer power of a non-positive base, or a guard violation."""


class SingularConstantMatrix(JetError):
    pass


class OrderError(JetError, ValueError):
    """A derivative was requested beyond the truncation order of a jet."""


# -- expressions -------------------------------------------------------------

class ExprSyntaxError(FinslerError, SyntaxError):
    """Parse failure; ``offset`` is the 0-based byte offset into the source."""

    def __init__(self, message, text="", offset=0):
        super().__init__(f"{message} (at offset {offset})")
        self.msg = message
        self.text = text
        self.offset = offset


class UnknownIdentifier(ExprSyntaxError):
    pass


class NonLiteralExponent(ExprSyntaxError):
    pass


# -- geometry / verification -------------------------------------------------

class SingularMetric(FinslerError):
    pass


class GuardViolation(DomainError):
    pass


class DegenerateChange(FinslerError):
    """mF^2|phi|^2 - (m-1)Phi^2 vanishes at the point."""


class ZeroPhi(FinslerError):
    pass


class InvalidExponent(FinslerError, ValueError):
    """Kropina exponent m equal to 0 or -1."""


class NoAdmissiblePoints(FinslerError):
    pass


class AcceptanceTooLow(NoAdmissiblePoints):
    pass


class UnknownCheck(FinslerError, KeyError):
    pass


class ConfigError(FinslerError, ValueError):
    pass
