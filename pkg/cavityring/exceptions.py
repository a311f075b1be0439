from enum import IntEnum


class ExitStatus(IntEnum):
    SUCCESS = 0
    INVALID_INPUT = 1
    NUMERICAL_FAILURE = 2
    IO_FAILURE = 3


class CavityRingError(Exception):
    """Base error; carries the process exit status the CLI reports."""

    exit_code: ExitStatus = ExitStatus.INVALID_INPUT


class InvalidInputError(CavityRingError, ValueError):
    exit_code = ExitStatus.INVALID_INPUT


class NumericalError(CavityRingError, ArithmeticError):
    exit_code = ExitStatus.NUMERICAL_FAILURE


class EigensolverError(NumericalError):
    pass


class SingularPointError(NumericalError):
    def __init__(self, level: int, denominator: float):
        self.level = level
        self.denominator = denominator
        super().__init__(
            f"Coefficient formula is singular for level {level} "
            f"(denominator {denominator:.3e})."
        )


class DivergenceError(NumericalError):
    def __init__(self, step: int):
        self.step = step
        super().__init__(f"Integration produced a non-finite state at step {step}.")


class PositivityViolationError(NumericalError):
    def __init__(self, name: str, value: float):
        self.name = name
        self.value = value
        super().__init__(f"{name} = {value:.3e} is below the positivity clamp.")


class UnexplainedMismatchError(NumericalError):
    def __init__(self, checks: list[str]):
        self.checks = checks
        super().__init__(
            "Mismatches outside the documented-deviation list: " + ", ".join(checks)
        )


class OutputError(CavityRingError, OSError):
    exit_code = ExitStatus.IO_FAILURE
