"""Security analysis of BB84 with state-dependent preparation and measurement flaws."""

from .bounds import (
    BoundMode,
    KeyRateResult,
    binary_entropy,
    device_threshold,
    keyrate_imperfect,
    keyrate_perfect,
    max_phase_gap,
    phase_gap_bound_analytic,
    qber_threshold,
    rect_only_bound,
    worst_case_phase_error,
)
from .devices import (
    DeviceModel,
    MeasurementAngles,
    PreparationAngles,
    detection_flip_rate,
    is_basis_dependent,
)
from .edp import (
    ErrorRates,
    PauliChannel,
    closed_form_rates_family_a,
    combined_qber,
    edp_error_rates,
    invert_qber,
    rho_imperfect,
    rho_perfect,
)
from .simulate import Eve, ProtocolConfig, SimResult, intercept_resend, run_protocol

__version__ = "0.1.0"
