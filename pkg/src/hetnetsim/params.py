"""System parameters for the two-tier HetNet model.

All internal computation uses linear units: watts for powers, linear
ratios for SIR thresholds, km for distances, km^-2 for densities.
External configuration (JSON) uses the usual radio conventions instead
(dBm for powers, dB for thresholds); see `from_config`.
"""

import json
import math
from dataclasses import dataclass, replace


class ParameterError(ValueError):
    """A system parameter violates a model invariant."""


class PathLossTooSmall(ParameterError):
    """Path-loss exponent <= 2: the interference geometry factor diverges."""


class NonPositiveParameter(ParameterError):
    """A density, power, bandwidth or threshold that must be > 0 is not."""


class InvalidReuseFactor(ParameterError):
    """Frequency reuse factor must be an integer >= 1."""


class PowerOrderingError(ParameterError):
    """Macro transmit power must be >= micro transmit power."""


def db_to_linear(x_db: float) -> float:
    """Convert a dB value to a linear ratio."""
    if not math.isfinite(x_db):
        raise ParameterError(f"non-finite dB value: {x_db!r}")
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    """Convert a linear ratio to dB."""
    if not math.isfinite(x) or x <= 0:
        raise ParameterError(f"cannot express {x!r} in dB")
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    """Convert a dBm power to watts."""
    return db_to_linear(x_dbm) * 1e-3


def watts_to_dbm(p_watts: float) -> float:
    """Convert a power in watts to dBm."""
    return linear_to_db(p_watts * 1e3)


@dataclass(frozen=True)
class TierThresholds:
    """Per-tier SIR thresholds (linear)."""

    T_M: float
    T_mu: float

    def __post_init__(self):
        if not (self.T_M > 0 and self.T_mu > 0):
            raise NonPositiveParameter("tier SIR thresholds must be > 0")


@dataclass(frozen=True)
class SystemParams:
    """Canonical model inputs, all in linear units.

    lambda_M, lambda_mu, lambda_u : densities in points/km^2
    P_M, P_mu                     : transmit powers in watts
    gamma                         : path-loss exponent (> 2)
    W_hz                          : system bandwidth in Hz
    K                             : frequency reuse factor (integer >= 1)
    T                             : minimum SIR threshold, linear
    R_T                           : rate threshold in bit/s
    sigma2                        : noise power in watts (0 for the SIR model)
    """

    lambda_M: float = 0.2
    lambda_mu: float = 0.8
    lambda_u: float = 20.0
    P_M: float = dbm_to_watts(46.0)
    P_mu: float = dbm_to_watts(30.0)
    gamma: float = 4.0
    W_hz: float = 20e6
    K: int = 1
    T: float = 1.0
    R_T: float = 1e6
    sigma2: float = 0.0

    def __post_init__(self):
        validate(self)

    def with_(self, **changes) -> "SystemParams":
        """Copy with the given fields replaced (re-validated)."""
        return replace(self, **changes)


def validate(params: SystemParams) -> SystemParams:
    """Check every model invariant; return the parameters unchanged.

    Raises a named ParameterError subclass for the first violated
    invariant.
    """
    p = params
    for name in ("lambda_M", "lambda_mu", "lambda_u", "P_M", "P_mu",
                 "gamma", "W_hz", "T", "R_T", "sigma2"):
        v = getattr(p, name)
        if not (isinstance(v, (int, float)) and math.isfinite(v)):
            raise ParameterError(f"{name} must be a finite number, got {v!r}")
    if p.gamma <= 2:
        raise PathLossTooSmall(
            f"path-loss exponent must be > 2, got {p.gamma}")
    for name in ("lambda_M", "lambda_mu", "lambda_u", "P_M", "P_mu",
                 "W_hz", "T", "R_T"):
        if getattr(p, name) <= 0:
            raise NonPositiveParameter(f"{name} must be > 0")
    if p.sigma2 < 0:
        raise NonPositiveParameter("sigma2 must be >= 0")
    if not (isinstance(p.K, int) and not isinstance(p.K, bool) and p.K >= 1):
        raise InvalidReuseFactor(f"K must be an integer >= 1, got {p.K!r}")
    if p.P_M < p.P_mu:
        raise PowerOrderingError(
            f"macro power {p.P_M} W below micro power {p.P_mu} W")
    return params


# JSON config fields, with units as exposed to the user.  Any subset may
# be given; missing fields take the defaults above.
_CONFIG_FIELDS = {
    "lambda_M": "lambda_M",       # eNBs/km^2
    "lambda_mu": "lambda_mu",     # eNBs/km^2
    "lambda_u": "lambda_u",       # UEs/km^2
    "P_M_dbm": "P_M",
    "P_mu_dbm": "P_mu",
    "gamma": "gamma",
    "W_hz": "W_hz",
    "K": "K",
    "T_db": "T",
    "R_T": "R_T",                 # bit/s
    "sigma2": "sigma2",           # watts; 0 keeps the pure-SIR model
}


def from_config(config: dict) -> SystemParams:
    """Build SystemParams from a config dict in dB/dBm convention."""
    unknown = set(config) - set(_CONFIG_FIELDS)
    if unknown:
        raise ParameterError(f"unknown config fields: {sorted(unknown)}")
    kwargs = {}
    for key, value in config.items():
        field = _CONFIG_FIELDS[key]
        if key.endswith("_dbm"):
            value = dbm_to_watts(value)
        elif key.endswith("_db"):
            value = db_to_linear(value)
        elif key == "K":
            if value != int(value):
                raise InvalidReuseFactor(f"K must be an integer, got {value!r}")
            value = int(value)
        kwargs[field] = value
    return SystemParams(**kwargs)


def load_config(path) -> SystemParams:
    """Load SystemParams from a JSON config file."""
    with open(path) as f:
        config = json.load(f)
    if not isinstance(config, dict):
        raise ParameterError("config file must contain a JSON object")
    return from_config(config)
