"""Exception types raised by the analysis and simulation routines."""


class SdqkdError(Exception):
    """Base class for all errors raised by this package."""


class NumericalConsistencyError(SdqkdError, ArithmeticError):
    """A quantity that must be real/normalized came out otherwise."""


class DegenerateBasisError(SdqkdError, ValueError):
    """The two outcome vectors of a measurement basis are (nearly) parallel."""


class OutOfModelError(SdqkdError, ValueError):
    """The input lies outside the domain the device model can explain.

    Raised for instance when the observed QBER is below the floor set by the
    measurement imperfection alone.
    """


class InfeasibleTargetError(SdqkdError, ValueError):
    """No Pauli channel reproduces the requested bit error rate."""

    def __init__(self, target: float, interval: tuple[float, float]):
        self.target = target
        self.interval = interval
        lo, hi = interval
        super().__init__(
            f"bit error rate {target!r} is not attainable by any Pauli channel "
            f"for this preparation; attainable interval is [{lo:.12g}, {hi:.12g}]"
        )


class NoKeyError(SdqkdError):
    """The device model yields no positive key rate at any admissible QBER."""
