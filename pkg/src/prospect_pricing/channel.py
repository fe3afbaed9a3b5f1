"""Per-user radio link model.

Path loss follows the simplified log-distance form with lognormal shadowing,
P_r = P_t + K - 10*gamma*log10(d/d0) + shadow (all in dB). The delivered rate
on a Rayleigh channel exceeds an advertised rate b with probability
exp(-(2^(b/bw) - 1) * bw * N0 / P_r), the closed-form service guarantee this
module inverts numerically with respect to bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_LN2 = math.log(2.0)


class UnattainableGuaranteeError(ValueError):
    """Target exceeds the bandwidth->infinity guarantee limit at this rate."""

    def __init__(self, rate_bps: float, target: float, supremum: float):
        self.rate_bps = rate_bps
        self.target = target
        self.supremum = supremum
        super().__init__(
            f"guarantee {target} unattainable at rate {rate_bps:g} bps "
            f"(supremum {supremum})")


@dataclass(frozen=True)
class LinkBudget:
    tx_power_dbm: float
    antenna_const_db: float
    pathloss_exponent: float
    distance_m: float
    ref_distance_m: float
    shadow_db: float
    noise_psd_dbm_per_hz: float

    def __post_init__(self) -> None:
        if not (self.distance_m >= self.ref_distance_m > 0.0):
            raise ValueError(
                f"need distance >= ref_distance > 0, got "
                f"{self.distance_m} / {self.ref_distance_m}")
        if self.pathloss_exponent <= 0.0:
            raise ValueError(f"pathloss exponent must be > 0, got {self.pathloss_exponent}")


@dataclass(frozen=True)
class UserChannel:
    """Link state reduced to the two linear-scale quantities the guarantee needs."""

    received_power_w: float
    noise_psd_w_per_hz: float

    def __post_init__(self) -> None:
        if self.received_power_w <= 0.0 or self.noise_psd_w_per_hz <= 0.0:
            raise ValueError("received power and noise PSD must be strictly positive")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError(f"power must be positive, got {watts}")
    return 10.0 * math.log10(watts) + 30.0


def received_power(lb: LinkBudget) -> float:
    """Received power in dBm; the log-distance term contributes 10*gamma*log10(d/d0) dB."""
    path = 10.0 * lb.pathloss_exponent * math.log10(lb.distance_m / lb.ref_distance_m)
    return lb.tx_power_dbm + lb.antenna_const_db - path + lb.shadow_db


def channel_from_budget(lb: LinkBudget) -> UserChannel:
    return UserChannel(
        received_power_w=dbm_to_watts(received_power(lb)),
        noise_psd_w_per_hz=dbm_to_watts(lb.noise_psd_dbm_per_hz))


def service_guarantee(rate_bps: float, bandwidth_hz: float, ch: UserChannel) -> float:
    """P(delivered rate > rate_bps) on bandwidth_hz; 1 at rate 0, falls to 0 as rate grows."""
    if bandwidth_hz <= 0.0:
        raise ValueError(f"bandwidth must be > 0, got {bandwidth_hz}")
    if rate_bps < 0.0:
        raise ValueError(f"rate must be >= 0, got {rate_bps}")
    if rate_bps == 0.0:
        return 1.0
    t = (rate_bps / bandwidth_hz) * _LN2
    scale = bandwidth_hz * ch.noise_psd_w_per_hz / ch.received_power_w
    if t > 60.0:
        # 2^(b/bw) - 1 ~ e^t; stay in logs to dodge overflow
        ln_exponent = t + math.log(scale)
        return math.exp(-math.exp(ln_exponent)) if ln_exponent < 700.0 else 0.0
    return math.exp(-(math.exp(t) - 1.0) * scale)


def guarantee_supremum(rate_bps: float, ch: UserChannel) -> float:
    """Least upper bound of service_guarantee over bandwidth at fixed rate."""
    if rate_bps < 0.0:
        raise ValueError(f"rate must be >= 0, got {rate_bps}")
    return math.exp(-rate_bps * _LN2 * ch.noise_psd_w_per_hz / ch.received_power_w)


def min_bandwidth(rate_bps: float, target: float, ch: UserChannel) -> float:
    """Unique bandwidth with service_guarantee == target (bracketing + bisection).

    The guarantee is strictly increasing in bandwidth, so the root is unique.
    Raises UnattainableGuaranteeError when target >= the supremum at this rate.
    """
    if rate_bps <= 0.0:
        raise ValueError(f"rate must be > 0, got {rate_bps}")
    if not (0.0 < target < 1.0):
        raise ValueError(f"target must lie in (0, 1), got {target}")
    sup = guarantee_supremum(rate_bps, ch)
    if target >= sup:
        raise UnattainableGuaranteeError(rate_bps, target, sup)

    lo = hi = rate_bps
    while service_guarantee(rate_bps, hi, ch) <= target:
        hi *= 2.0
    while service_guarantee(rate_bps, lo, ch) > target:
        lo *= 0.5
    # relative tolerance 1e-11, an order tighter than downstream round trips need
    while hi - lo > 1e-11 * hi:
        mid = 0.5 * (lo + hi)
        if service_guarantee(rate_bps, mid, ch) > target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
