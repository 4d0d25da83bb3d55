"""Exception hierarchy for menroll"""

from typing import Any, Optional


class MenrollError(Exception):
    """Base exception for scheduling errors"""

    def __init__(self, message: str = "An error occurred in menroll", details: Optional[Any] = None) -> None:

        self.message = message
        self.details = details
        super().__init__(self.message)

    def __str__(self) -> str:

        if self.details:
            return f"{self.message} - Details: {self.details}"
        return self.message


class ConfigurationError(MenrollError):
    """Scenario document, INI file or command line problem"""

    def __init__(self, message: str = "Configuration error", details: Optional[Any] = None, config_file: Optional[str] = None, setting: Optional[str] = None) -> None:

        self.config_file = config_file
        self.setting = setting
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.config_file:
            base_str = f"{base_str} (File: {self.config_file})"
        if self.setting:
            base_str = f"{base_str} (Setting: {self.setting})"
        return base_str


class ValidationError(MenrollError):
    """A value is outside its domain"""

    def __init__(self, message: str = "Validation error", details: Optional[Any] = None, field: Optional[str] = None, value: Optional[Any] = None) -> None:

        self.field = field
        self.value = value
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.field:
            base_str = f"{base_str} (Field: {self.field})"
        if self.value is not None:
            base_str = f"{base_str} (Value: {self.value})"
        return base_str


class AlignmentError(MenrollError):
    """Two time grids cannot be mapped onto each other"""

    def __init__(self, message: str = "Time grids are not alignable", details: Optional[Any] = None, source_steps: Optional[int] = None, target_steps: Optional[int] = None) -> None:

        self.source_steps = source_steps
        self.target_steps = target_steps
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.source_steps is not None and self.target_steps is not None:
            base_str = f"{base_str} (Steps: {self.source_steps} -> {self.target_steps})"
        return base_str


class AggregationError(MenrollError):
    """Sessions cannot be summed into one station envelope"""

    def __init__(self, message: str = "Aggregation error", details: Optional[Any] = None, station_id: Optional[str] = None) -> None:

        self.station_id = station_id
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.station_id:
            base_str = f"{base_str} (Station: {self.station_id})"
        return base_str


class ModelingError(MenrollError):
    """Malformed optimization model construct"""

    def __init__(self, message: str = "Modeling error", details: Optional[Any] = None, variable: Optional[str] = None) -> None:

        self.variable = variable
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.variable:
            base_str = f"{base_str} (Variable: {self.variable})"
        return base_str


class SolverError(MenrollError):
    """The solver backend failed"""

    def __init__(self, message: str = "Solver error", details: Optional[Any] = None, status: Optional[str] = None) -> None:

        self.status = status
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.status:
            base_str = f"{base_str} (Status: {self.status})"
        return base_str


class SolverLimitError(SolverError):
    """Node or time limit reached before optimality was proven"""

    def __init__(self, message: str = "Solver limit reached", details: Optional[Any] = None, status: Optional[str] = "limit", incumbent: Optional[Any] = None) -> None:

        self.incumbent = incumbent
        super().__init__(message, details, status)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.incumbent is not None:
            base_str = f"{base_str} (Incumbent objective: {self.incumbent.objective:.6f})"
        return base_str


class InfeasibleError(MenrollError):
    """The dispatch model has no feasible point"""

    def __init__(self, message: str = "Dispatch model is infeasible", details: Optional[Any] = None, step: Optional[int] = None, balance: Optional[str] = None) -> None:

        self.step = step
        self.balance = balance
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.balance:
            base_str = f"{base_str} (Balance: {self.balance})"
        if self.step is not None:
            base_str = f"{base_str} (Step: {self.step})"
        return base_str


class RollingError(MenrollError):
    """The rolling controller cannot continue"""

    def __init__(self, message: str = "Rolling horizon failure", details: Optional[Any] = None, step: Optional[int] = None) -> None:

        self.step = step
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.step is not None:
            base_str = f"{base_str} (Step: {self.step})"
        return base_str


class ReportError(MenrollError):
    """Writing experiment artifacts failed"""

    def __init__(self, message: str = "Report error", details: Optional[Any] = None, path: Optional[str] = None) -> None:

        self.path = path
        super().__init__(message, details)

    def __str__(self) -> str:

        base_str = super().__str__()
        if self.path:
            base_str = f"{base_str} (Path: {self.path})"
        return base_str
