"""Exception hierarchy shared by the library, the CLI and the API."""

from __future__ import annotations

from typing import Optional


class ToneBifError(Exception):
    """Base class for every domain error raised by tonebif."""

    exit_code = 3


class AudioFormatError(ToneBifError):
    """The WAV file uses a codec or sample type we do not read."""

    exit_code = 2


class WavParseError(ToneBifError):
    """The WAV header or chunk layout is truncated or corrupt."""

    exit_code = 2


class MissingPartialError(ToneBifError):
    def __init__(self, index: int, frequency: float):
        super().__init__(
            f"no spectral maximum found for partial {index} near {frequency:.1f} Hz"
        )
        self.index = index
        self.frequency = frequency


class DegenerateEnvelopeError(ToneBifError):
    """Fewer than two local maxima were found in the signal."""


class SilentSignalError(ToneBifError):
    """The envelope never reaches the hearing threshold."""


class SingularSystemError(ToneBifError):
    """The two sustain steady states coincide."""


class FitInfeasibleError(ToneBifError):
    """The fitted constants violate a sign condition of the model."""


class RefinementError(ToneBifError):
    def __init__(
        self, interval: tuple[float, float], count: int, at: Optional[float] = None
    ):
        span = f"[{interval[0]:.6f}, {interval[1]:.6f}]"
        if at is None:
            message = f"breaking-point cap {count} exceeded on interval {span}"
        else:
            message = (
                f"no halving of the subinterval starting at {at:.6f} s keeps rho "
                f"within tolerance on interval {span} ({count} breaking points so far)"
            )
        super().__init__(message)
        self.interval = interval
        self.count = count
        self.at = at


class BlowUpError(ToneBifError):
    exit_code = 4

    def __init__(self, time: float, value: float):
        super().__init__(f"amplitude {value:.3g} exceeded the guard at t={time:.6f} s")
        self.time = time
        self.value = value


class ClosedFormDomainError(ToneBifError):
    exit_code = 4

    def __init__(self, escape_time: float | None):
        if escape_time is None:
            message = "closed-form denominator is not positive"
        else:
            message = (
                "closed-form denominator is not positive; "
                f"solution escapes at t={escape_time:.6g} s"
            )
        super().__init__(message)
        self.escape_time = escape_time


class LeafResidualError(ToneBifError):
    """A full-system trajectory drifted off its leaf manifold."""

    exit_code = 4

    def __init__(self, residual: float, limit: float):
        super().__init__(f"relative leaf residual {residual:.3g} exceeds {limit:.1g}")
        self.residual = residual
        self.limit = limit
