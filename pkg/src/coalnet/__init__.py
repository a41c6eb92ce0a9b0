"""Coalition-game cooperative relaying for selfish packet-forwarding networks.

Boundary nodes that nobody depends on cannot be coerced into service by
reputation alone, so they buy forwarding instead: they relay a backbone
node's transmissions, cutting its transmit power, and earn packet
forwarding in return at a negotiated ratio. This package computes the
power savings, the stable and fair ratio allocations (equal-split min-max
and Shapley-based average fairness), and the resulting network-connectivity
gains, all behind a scenario-driven CLI.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .channel import ChannelModel, Position
from .coalition import (
    Allocation,
    CharValue,
    PowerSavingGame,
    UNVIABLE,
    alpha_minmax,
    alpha_proportional,
    alpha_shapley,
    core_condition,
    marginal_power_savings,
    shapley,
    utilities,
)
from .cooptx import CoalitionContext, RelayLink, mrc_snr, power_saving, required_source_power
from .netmodel import Network, NodeClass, generate
from .protocol import NetworkState, connectivity, monte_carlo_connectivity, run_protocol

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ChannelModel",
    "CharValue",
    "CoalitionContext",
    "KERNEL_BACKEND",
    "Network",
    "NetworkState",
    "NodeClass",
    "Position",
    "PowerSavingGame",
    "RelayLink",
    "UNVIABLE",
    "alpha_minmax",
    "alpha_proportional",
    "alpha_shapley",
    "connectivity",
    "core_condition",
    "generate",
    "marginal_power_savings",
    "monte_carlo_connectivity",
    "mrc_snr",
    "power_saving",
    "required_source_power",
    "run_protocol",
    "shapley",
    "utilities",
    "__version__",
]
