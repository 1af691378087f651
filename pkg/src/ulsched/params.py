"""Network parameters and unit handling.

Everything internal to the package is SI-linear: densities in points per
square meter, powers in mW, distances in meters, SINR thresholds linear.
dBm / per-km^2 / dB only appear at the construction boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """A network parameter is outside its physical domain."""


class PathLossExponentError(ParameterError):
    """alpha <= 2 makes the aggregate interference (and the achievable-radius
    geometry integrals) diverge; the model requires alpha > 2."""


# ------------------------------------------------------------------ units

def dbm_to_mw(x_dbm: float) -> float:
    """10^(x/10): dBm -> mW."""
    return 10.0 ** (x_dbm / 10.0)


def mw_to_dbm(x_mw: float) -> float:
    if x_mw <= 0.0:
        raise ParameterError(f"power must be positive to express in dBm, got {x_mw}")
    return 10.0 * math.log10(x_mw)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    if x <= 0.0:
        raise ParameterError(f"linear ratio must be positive to express in dB, got {x}")
    return 10.0 * math.log10(x)


def per_km2_to_per_m2(x: float) -> float:
    return x * 1e-6


def per_m2_to_per_km2(x: float) -> float:
    return x * 1e6


# ------------------------------------------------------------ domain types

@dataclass(frozen=True)
class SinrThreshold:
    """An SINR threshold, stored linear; dB round-trips to 1e-12 relative."""

    value: float  # linear ratio, > 0

    def __post_init__(self):
        if not (self.value > 0.0 and math.isfinite(self.value)):
            raise ParameterError(f"SINR threshold must be positive and finite, got {self.value}")

    @classmethod
    def from_db(cls, x_db: float) -> "SinrThreshold":
        return cls(db_to_linear(x_db))

    @property
    def db(self) -> float:
        return linear_to_db(self.value)


@dataclass(frozen=True)
class NetworkParams:
    """Immutable snapshot of the network model parameters (SI-linear).

    The achievable radius is the largest serving distance at which full
    channel inversion to the target received power is still possible under
    the transmit power cap: radius = (p_max / rho_target)^(1/alpha).
    It is derived once at construction.
    """

    lambda_bs: float      # BS density, per m^2
    lambda_ue: float      # user density, per m^2
    alpha: float          # path-loss exponent, > 2
    noise_power: float    # receiver noise sigma^2, mW
    p_max: float          # transmit power cap P_u, mW
    rho_target: float     # power-control target received power rho_o, mW
    achievable_radius: float = 0.0  # m, derived; do not pass explicitly

    def __post_init__(self):
        if self.lambda_bs < 0.0 or self.lambda_ue < 0.0:
            raise ParameterError(
                f"densities must be non-negative, got lambda_bs={self.lambda_bs}, "
                f"lambda_ue={self.lambda_ue}")
        if self.alpha <= 2.0:
            raise PathLossExponentError(
                f"path-loss exponent must exceed 2, got alpha={self.alpha}")
        if self.noise_power < 0.0:
            raise ParameterError(f"noise power must be non-negative, got {self.noise_power}")
        if self.p_max <= 0.0 or self.rho_target <= 0.0:
            raise ParameterError(
                f"powers must be positive, got p_max={self.p_max}, rho_target={self.rho_target}")
        if self.p_max < self.rho_target:
            raise ParameterError(
                "p_max below rho_target leaves no achievable range "
                f"(p_max={self.p_max} mW < rho_target={self.rho_target} mW)")
        # exp(log/alpha) keeps the derived radius at ~1e-16 relative error
        radius = math.exp(math.log(self.p_max / self.rho_target) / self.alpha)
        object.__setattr__(self, "achievable_radius", radius)

    @property
    def density_ratio(self) -> float:
        """lambda_ue / lambda_bs (mean users per cell)."""
        if self.lambda_bs == 0.0:
            raise ParameterError("density ratio undefined for lambda_bs = 0")
        return self.lambda_ue / self.lambda_bs

    @property
    def bs_in_range(self) -> float:
        """Mean number of BSs in a disc of the achievable radius:
        pi * lambda_bs * R^2. This dimensionless load shows up in every
        geometry factor."""
        return math.pi * self.lambda_bs * self.achievable_radius ** 2


def make_params(lambda_bs_per_km2: float,
                lambda_ue_per_km2: float,
                alpha: float = 4.0,
                noise_dbm: float = -90.0,
                p_max_dbm: float = 23.0,
                rho_target_dbm: float = -70.0) -> NetworkParams:
    """Build NetworkParams from the human-facing units used throughout the
    experiment interfaces (densities per km^2, powers in dBm)."""
    return NetworkParams(
        lambda_bs=per_km2_to_per_m2(lambda_bs_per_km2),
        lambda_ue=per_km2_to_per_m2(lambda_ue_per_km2),
        alpha=alpha,
        noise_power=dbm_to_mw(noise_dbm),
        p_max=dbm_to_mw(p_max_dbm),
        rho_target=dbm_to_mw(rho_target_dbm),
    )


def outage_probability(p: NetworkParams) -> float:
    """Probability that a typical user has no BS within the achievable
    radius, i.e. cannot meet the power-control target under the cap:
    exp(-pi * lambda_bs * R^2)."""
    return math.exp(-p.bs_in_range)
