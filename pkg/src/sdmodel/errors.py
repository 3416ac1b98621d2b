"""Exception hierarchy.

Everything raised on purpose derives from :class:`ModelError`.  The CLI maps
:class:`InputError` subclasses (bad documents, bad files, invariant breaks) to
exit code 1 and every other :class:`ModelError` to exit code 2.
"""

from __future__ import annotations


class ModelError(Exception):
    """Base class for all errors raised by sdmodel."""


class InputError(ModelError):
    """Malformed or invalid user-supplied input (exit code 1)."""


# -- indicator kernel -------------------------------------------------------

class InvalidInput(ModelError, ValueError):
    pass


class ExponentOverflow(ModelError, OverflowError):
    pass


class ZeroPopulation(ModelError, ValueError):
    pass


class DegenerateGoalposts(ModelError, ValueError):
    pass


class InvalidAlpha(ModelError, ValueError):
    pass


class NonPositiveInput(ModelError, ValueError):
    pass


class DegenerateIndices(ModelError, ValueError):
    pass


class LengthMismatch(ModelError, ValueError):
    pass


class ZeroWeightSum(ModelError, ValueError):
    pass


# -- dynamics engine --------------------------------------------------------

class OverDrain(ModelError, ValueError):
    pass


class StepError(ModelError):
    """A sub-operation failed while advancing the simulation."""

    def __init__(self, step_index: int, time: float, cause: Exception):
        self.step_index = step_index
        self.time = time
        self.cause = cause
        super().__init__(f"step {step_index} (t={time:g}): {type(cause).__name__}: {cause}")


# -- calibration ------------------------------------------------------------

class TooFewObservations(ModelError, ValueError):
    pass


class RankDeficient(ModelError, ValueError):
    def __init__(self, column: int, name: str | None = None):
        self.column = column
        self.name = name
        label = f"column {column}" + (f" ({name})" if name else "")
        super().__init__(f"design matrix is rank deficient at {label}")


class EstimateOutOfDomain(ModelError, ValueError):
    def __init__(self, message: str, raw: dict[str, float]):
        self.raw = dict(raw)
        detail = ", ".join(f"{k}={v:.6g}" for k, v in raw.items())
        super().__init__(f"{message} (raw estimates: {detail})")


class NonPositiveFlow(ModelError, ValueError):
    pass


# -- scenarios --------------------------------------------------------------

class ParseError(InputError):
    def __init__(self, source: str, line: int, column: int, message: str):
        self.source = source
        self.line = line
        self.column = column
        super().__init__(f"{source}:{line}:{column}: parse error: {message}")


class SchemaError(InputError):
    def __init__(self, path: str, message: str, suggestion: str | None = None,
                 source: str | None = None):
        self.path = path
        self.message = message
        self.suggestion = suggestion
        self.source = source
        text = f"{source + ': ' if source else ''}{path}: {message}"
        if suggestion:
            text += f" (did you mean '{suggestion}'?)"
        super().__init__(text)

    def with_source(self, source: str) -> "SchemaError":
        return SchemaError(self.path, self.message, self.suggestion, source)


class InvariantViolation(InputError):
    def __init__(self, field: str, rule: str, source: str | None = None):
        self.field = field
        self.rule = rule
        self.source = source
        super().__init__(f"{source + ': ' if source else ''}{field}: violates rule '{rule}'")

    def with_source(self, source: str) -> "InvariantViolation":
        return InvariantViolation(self.field, self.rule, source)


class TargetYearOutOfRange(ModelError):
    pass


class SpanMismatch(ModelError):
    pass


class ScenarioRunError(ModelError):
    def __init__(self, scenario: str, cause: Exception):
        self.scenario = scenario
        self.cause = cause
        super().__init__(f"scenario '{scenario}': {cause}")


# -- history / serialization ------------------------------------------------

class IngestError(InputError):
    pass


class MissingColumn(IngestError):
    def __init__(self, source: str, column: str):
        self.column = column
        super().__init__(f"{source}: missing required column '{column}'")


class UnknownColumn(IngestError):
    def __init__(self, source: str, column: str, position: int):
        self.column = column
        super().__init__(f"{source}:1: unknown column '{column}' at position {position}")


class DuplicateYear(IngestError):
    def __init__(self, source: str, year: float, row: int):
        self.year = year
        self.row = row
        super().__init__(f"{source}:{row}: duplicate year {year:g}")


class NonIncreasingYear(IngestError):
    def __init__(self, source: str, year: float, row: int):
        self.year = year
        self.row = row
        super().__init__(f"{source}:{row}: year {year:g} is not after the previous row")


class NonNumericCell(IngestError):
    def __init__(self, source: str, row: int, column: str, text: str):
        self.row = row
        self.column = column
        self.text = text
        super().__init__(f"{source}:{row}: column '{column}': non-numeric cell {text!r}")


class MissingCell(IngestError):
    def __init__(self, source: str, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"{source}:{row}: column '{column}': missing cell")
