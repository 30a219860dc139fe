"""Exception types shared across the toolkit."""


class PbeError(Exception):
    """Base class for all toolkit errors."""


# --- runtime errors raised while evaluating programs ---

class VmError(PbeError):
    """Base class for errors raised during program evaluation."""

    @property
    def kind(self):
        return type(self).__name__


class TypeMismatch(VmError):
    pass


class DivisionByZero(VmError):
    pass


class IndexOutOfRange(VmError):
    pass


class FuelExhausted(VmError):
    pass


class WallClockExceeded(VmError):
    pass


class NegativeRange(VmError):
    pass


# --- parse errors ---

class ProgramSyntaxError(PbeError):
    pass


class UnknownInstruction(ProgramSyntaxError):
    pass


class ArityMismatch(ProgramSyntaxError):
    pass


# --- generation ---

class InvalidBudget(PbeError):
    pass


class AttemptsExhausted(PbeError):
    pass


# --- decomposition ---

class NoInput(PbeError):
    pass


class NotEnoughCuts(PbeError):
    pass


class EmptyChain(PbeError):
    pass


class AbandonProgram(PbeError):
    pass


# --- synthesis ---

class InconsistentCases(PbeError):
    pass


class SynthesisFailure(PbeError):
    pass


class RaggedDerives(PbeError):
    pass


class UnknownUse(PbeError):
    pass


# --- study ---

class ConfigInvalid(PbeError):
    pass


class OutputUnwritable(PbeError):
    pass


# --- statistics ---

class InsufficientData(PbeError):
    pass


class LengthMismatch(PbeError):
    pass


class ZeroVariance(PbeError):
    pass


class DomainError(PbeError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
