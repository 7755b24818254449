"""Exception types shared across the package."""


class CustDynError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CustDynError, ValueError):
    """Parameters or states that are non-finite or violate basic invariants."""


class PreconditionError(CustDynError, ValueError):
    """An analysis was requested for parameters outside its hypotheses."""


class DegenerateParametersError(CustDynError, ArithmeticError):
    """A linear system that should be regular turned out singular."""


class InconsistentEquilibriumError(CustDynError, ArithmeticError):
    """A closed-form equilibrium failed its residual check."""


class StepFailure(CustDynError, ArithmeticError):
    """The integrator produced a non-finite stage or a vanishing step."""


class BudgetExceeded(CustDynError, RuntimeError):
    """The integrator hit ``max_steps``; ``partial`` holds what was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
