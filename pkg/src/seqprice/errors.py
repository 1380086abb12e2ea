"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed user input: unknown ids, bad config values, schema violations."""


class DegenerateSettingError(InputError):
    """A setting cannot be normalized or solved because all values are zero."""


class ProtocolError(RuntimeError):
    """An action referenced an agent or item that is no longer available."""


class UnsupportedSettingError(RuntimeError):
    """Exact solving was requested for a setting without finite support."""


class SizeBudgetError(RuntimeError):
    """The exact computation would exceed the configured search budget."""


class TrainingError(RuntimeError):
    """Training aborted: non-finite loss or gradient."""
