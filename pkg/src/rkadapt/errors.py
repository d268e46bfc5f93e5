"""Exception types shared across the package."""


class RkadaptError(Exception):
    """Base class for all package errors."""


class StructureError(RkadaptError):
    """Dimension or truncation-order mismatch between operands."""


class NoClosedForm(RkadaptError):
    """Requested a closed-form solution for a field that has none."""


class DivergedReference(RkadaptError):
    """Fine reference integration hit a non-finite state."""


class StepDiverged(RkadaptError):
    """An integrator step produced a non-finite state.

    `step_index` is the index of the offending step (0-based).
    """

    def __init__(self, message: str, step_index: int = 0):
        super().__init__(message)
        self.step_index = step_index


class FitUnderdetermined(RkadaptError):
    """Too few usable points remain for a log-log slope fit."""


class TrainingFailed(RkadaptError):
    """Training aborted after repeated divergent epochs."""


class ConfigError(RkadaptError):
    """Experiment configuration failed validation.

    `field` names the offending config entry when known.
    """

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
