"""Scalar link budget for a leaky coaxial cable installation.

Received power at a mobile antenna next to the cable::

    P_R = P_T - L_L - L_C - 10 p log10(d_lat) - L_con + G_R

with longitudinal loss ``L_L = alpha * d_lon`` and coupling loss
``L_C = 10 log10(P_Tx / P_Rx)``. All powers are dBm, all losses dB, the
receiver gain is relative to a half-wave dipole (dBd), distances are metres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

SPEED_OF_LIGHT = 299_792_458.0  # m/s
DIPOLE_GAIN_DBI = 2.15
DEFAULT_LATERAL_CLAMP = 0.1  # m
DEFAULT_LOSS_EXPONENT = 2.0

PowerDbm = float
LossDb = float


@dataclass(frozen=True, order=True)
class Frequency:
    """A carrier frequency in Hz."""

    hertz: float

    def __post_init__(self):
        if not (math.isfinite(self.hertz) and self.hertz > 0):
            raise DomainError(f"frequency must be positive and finite, got {self.hertz!r} Hz")

    @classmethod
    def from_ghz(cls, ghz: float) -> "Frequency":
        return cls(float(ghz) * 1e9)

    @property
    def ghz(self) -> float:
        return self.hertz / 1e9

    @property
    def wavelength(self) -> float:
        """Free-space wavelength in metres."""
        return SPEED_OF_LIGHT / self.hertz

    def __str__(self) -> str:
        return f"{self.ghz:g} GHz"


@dataclass(frozen=True)
class LinkBudgetParams:
    """Installation-wide terms of the link budget.

    ``lateral_clamp`` is the smallest lateral distance the budget is
    evaluated at; closer receivers are treated as sitting at the clamp.
    """

    transmit_power: PowerDbm
    loss_exponent: float = DEFAULT_LOSS_EXPONENT
    connector_loss: LossDb = 0.0
    receiver_gain_dbd: float = 0.0
    lateral_clamp: float = DEFAULT_LATERAL_CLAMP

    def __post_init__(self):
        for name in ("transmit_power", "loss_exponent", "connector_loss",
                     "receiver_gain_dbd", "lateral_clamp"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.loss_exponent <= 0:
            raise DomainError(f"loss_exponent must be > 0, got {self.loss_exponent}")
        if self.lateral_clamp < 0:
            raise DomainError(f"lateral_clamp must be >= 0, got {self.lateral_clamp}")

    @property
    def fixed_terms(self) -> float:
        """Distance-independent part of the budget: ``-L_con + G_R``."""
        return -self.connector_loss + self.receiver_gain_dbd


def dbi_to_dbd(gain_dbi: float) -> float:
    return gain_dbi - DIPOLE_GAIN_DBI


def dbd_to_dbi(gain_dbd: float) -> float:
    return gain_dbd + DIPOLE_GAIN_DBI


def dbm_to_mw(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0)


def mw_to_dbm(p_mw: float) -> float:
    if p_mw <= 0:
        raise DomainError(f"power must be positive, got {p_mw} mW")
    return 10.0 * math.log10(p_mw)


def longitudinal_loss(alpha: float, d_lon: float) -> LossDb:
    """Attenuation accumulated along ``d_lon`` metres of cable at ``alpha`` dB/m."""
    if alpha < 0 or d_lon < 0:
        raise DomainError(f"alpha and d_lon must be >= 0, got alpha={alpha}, d_lon={d_lon}")
    return alpha * d_lon


def coupling_loss_from_powers(p_tx_watts: float, p_rx_watts: float) -> LossDb:
    """Ratio in dB between the power inside the cable and the power received."""
    if p_tx_watts <= 0 or p_rx_watts <= 0:
        raise DomainError("powers must be positive")
    return 10.0 * math.log10(p_tx_watts / p_rx_watts)


def clamp_lateral(d_lat: float, clamp: float = DEFAULT_LATERAL_CLAMP) -> float:
    if d_lat < 0 or math.isnan(d_lat):
        raise DomainError(f"lateral distance must be >= 0, got {d_lat}")
    d = max(d_lat, clamp)
    if d <= 0:
        raise DomainError("lateral distance is zero after clamping")
    return d


def lateral_term(loss_exponent: float, d_lat: float) -> LossDb:
    return 10.0 * loss_exponent * math.log10(d_lat)


def received_power(params: LinkBudgetParams, l_l: LossDb, l_c: LossDb, d_lat: float) -> PowerDbm:
    """Received power in dBm for one receiver position."""
    d = clamp_lateral(d_lat, params.lateral_clamp)
    return (params.transmit_power - l_l - l_c
            - lateral_term(params.loss_exponent, d)
            - params.connector_loss + params.receiver_gain_dbd)


def invert_for_coupling_loss(params: LinkBudgetParams, l_l: LossDb, d_lat: float,
                             measured_p_r: PowerDbm) -> LossDb:
    """Coupling loss that makes :func:`received_power` reproduce ``measured_p_r``."""
    if not d_lat > 0:
        raise DomainError(f"lateral distance must be > 0, got {d_lat}")
    d = clamp_lateral(d_lat, params.lateral_clamp)
    return (params.transmit_power - l_l
            - lateral_term(params.loss_exponent, d)
            - params.connector_loss + params.receiver_gain_dbd
            - measured_p_r)
