"""Exception types raised by the library.

Every error carries a short machine-readable ``code`` used by the CLI when it
reports failures as JSON on stderr.
"""


class KelvinWavesError(Exception):
    code = "error"


class ConfigError(KelvinWavesError, ValueError):
    code = "invalid_config"


class NotElliptic(KelvinWavesError, ValueError):
    """Frequency lies outside the low elliptic band (0, omega_minus)."""

    code = "not_elliptic"


class DegenerateNormal(KelvinWavesError, ValueError):
    code = "degenerate_normal"


class ChartDomain(KelvinWavesError, ValueError):
    code = "chart_domain"


class DegenerateAxes(KelvinWavesError, ValueError):
    code = "degenerate_axes"


class GramIllConditioned(KelvinWavesError, ArithmeticError):
    code = "gram_ill_conditioned"

    def __init__(self, condition, limit):
        super().__init__(f"Gram condition estimate {condition:.3e} exceeds {limit:.1e}")
        self.condition = condition
        self.limit = limit


class NotAGradient(KelvinWavesError, ArithmeticError):
    code = "not_a_gradient"


class StepCollapse(KelvinWavesError, ArithmeticError):
    code = "step_collapse"

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class InsufficientData(KelvinWavesError, ValueError):
    code = "insufficient_data"


class NoCharacteristicDirection(KelvinWavesError, ValueError):
    """The symbol has no zero in the covector circle at the seed point."""

    code = "no_characteristic_direction"


class NotNested(KelvinWavesError, ArithmeticError):
    """Lower-degree eigenvalues failed to reappear at the next degree."""

    code = "not_nested"


class DegenerateInput(KelvinWavesError, ValueError):
    code = "degenerate_input"
