"""Deterministic path-loss channel model and direct-transmission power budget.

All internal power arithmetic is in linear milliwatts; dBm appears only at
the conversion helpers. Link gains are dimensionless power gains, with a
reference gain of 1 at 1 m unless configured otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "ChannelModel",
    "CoincidentNodes",
    "LinkInfeasible",
    "NonPositivePower",
    "Position",
    "dbm_to_mw",
    "direct_power",
    "distance",
    "max_direct_range",
    "mw_to_dbm",
    "path_gain",
    "snr_direct",
]


class CoincidentNodes(ValueError):
    """A link was requested between two nodes at the same position."""


class LinkInfeasible(ValueError):
    """The SNR target cannot be met within the transmit-power cap."""


class NonPositivePower(ValueError):
    """A non-positive power cannot be expressed in dBm."""


def dbm_to_mw(x_dbm: float) -> float:
    """Convert dBm to linear milliwatts."""
    return 10.0 ** (x_dbm / 10.0)


def mw_to_dbm(p_mw: float) -> float:
    """Convert linear milliwatts to dBm; requires p_mw > 0."""
    if p_mw <= 0.0:
        raise NonPositivePower(f"cannot express {p_mw} mW in dBm")
    return 10.0 * math.log10(p_mw)


@dataclass(frozen=True)
class Position:
    """Planar node position, in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite position ({self.x}, {self.y})")


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two positions, in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True)
class ChannelModel:
    """Noise-limited channel with power-law spatial attenuation.

    Parameters
    ----------
    exponent:
        Path-loss exponent; received power falls off as distance**-exponent.
    noise_mw:
        Thermal noise power at every receiver, in mW.
    snr_target:
        Minimum acceptable linear SNR on a decodable link.
    p_max_mw:
        Transmit power cap, in mW.
    reference_gain:
        Dimensionless power gain at 1 m.

    The defaults are the reference setup used throughout this package:
    inverse-cubic loss, -60 dBm noise, 10 dB target, 10 dBm cap.
    """

    exponent: float = 3.0
    noise_mw: float = 1e-6
    snr_target: float = 10.0
    p_max_mw: float = 10.0
    reference_gain: float = 1.0

    def __post_init__(self) -> None:
        for name in ("exponent", "noise_mw", "snr_target", "p_max_mw", "reference_gain"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @classmethod
    def from_db(
        cls,
        exponent: float = 3.0,
        noise_dbm: float = -60.0,
        snr_target_db: float = 10.0,
        p_max_dbm: float = 10.0,
        reference_gain: float = 1.0,
    ) -> "ChannelModel":
        """Build a model from the dB-domain parameters used at interfaces."""
        return cls(
            exponent=exponent,
            noise_mw=dbm_to_mw(noise_dbm),
            snr_target=10.0 ** (snr_target_db / 10.0),
            p_max_mw=dbm_to_mw(p_max_dbm),
            reference_gain=reference_gain,
        )


def path_gain(a: Position, b: Position, model: ChannelModel) -> float:
    """Deterministic power gain of the link between `a` and `b`.

    Returns reference_gain * d**-exponent with d the Euclidean distance;
    raises CoincidentNodes when d is zero.
    """
    d = distance(a, b)
    if d == 0.0:
        raise CoincidentNodes(f"zero distance between {a} and {b}")
    return model.reference_gain * d ** -model.exponent


def snr_direct(p_mw: float, gain: float, model: ChannelModel) -> float:
    """Received linear SNR of a direct transmission at power `p_mw`."""
    return p_mw * gain / model.noise_mw


def direct_power(gain: float, model: ChannelModel) -> float:
    """Minimum transmit power (mW) meeting the SNR target on a direct link.

    Solves the SNR equation at equality; raises LinkInfeasible when the
    result exceeds the power cap.
    """
    if gain <= 0.0:
        raise ValueError(f"link gain must be positive, got {gain}")
    p = model.snr_target * model.noise_mw / gain
    if p > model.p_max_mw:
        raise LinkInfeasible(
            f"direct link needs {p:.6g} mW, above the {model.p_max_mw:.6g} mW cap"
        )
    return p


def max_direct_range(model: ChannelModel) -> float:
    """Largest distance (m) at which a direct link can meet the SNR target."""
    ratio = model.p_max_mw * model.reference_gain / (model.snr_target * model.noise_mw)
    return ratio ** (1.0 / model.exponent)
