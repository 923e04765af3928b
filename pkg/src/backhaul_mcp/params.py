"""Scenario description shared by every rate computation.

All quantities are linear: ``p`` is the total per-cell SNR as a power ratio and
``c_backhaul`` is in bits per channel use.  dB conversion happens only in the CLI.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace


class ModelError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ModelError, ValueError):
    """Invalid parameter value."""


class StructureError(ValidationError):
    """Matrix dimensions incompatible with the cellular topology."""


class NumericError(ModelError, ArithmeticError):
    """A numerical routine failed to reach its stated accuracy."""


class UnsupportedCase(ModelError):
    """The requested (model, channel, protocol) combination has no implementation."""


class Model(str, enum.Enum):
    WYNER = "wyner"
    SOFT_HANDOFF = "sh"


class Channel(str, enum.Enum):
    GAUSSIAN = "gaussian"
    RAYLEIGH = "rayleigh"


class Protocol(str, enum.Enum):
    WB = "wb"
    TDMA = "tdma"


@dataclass(frozen=True)
class SystemParams:
    """Symmetric circular cellular uplink with equal backhaul links.

    ``k_users`` may be ``math.inf`` to request the large-K (SLLN) regime with the
    total cell power held fixed.
    """

    model: Model = Model.WYNER
    alpha: float = 0.0
    p: float = 10.0
    k_users: float = 1
    c_backhaul: float = 3.0
    channel: Channel = Channel.GAUSSIAN
    protocol: Protocol = Protocol.WB

    def __post_init__(self):
        for name, kind in (("model", Model), ("channel", Channel), ("protocol", Protocol)):
            try:
                object.__setattr__(self, name, kind(getattr(self, name)))
            except ValueError:
                choices = ", ".join(m.value for m in kind)
                raise ValidationError(f"{name} must be one of {choices}, "
                                      f"got {getattr(self, name)!r}") from None
        if not (0.0 <= self.alpha <= 1.0):
            raise ValidationError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not (self.p > 0.0) or math.isnan(self.p):
            raise ValidationError(f"p must be positive, got {self.p}")
        if not (self.c_backhaul >= 0.0) or math.isinf(self.c_backhaul):
            raise ValidationError(f"c_backhaul must be finite and >= 0, got {self.c_backhaul}")
        k = self.k_users
        if not (k >= 1) or (not math.isinf(k) and k != int(k)):
            raise ValidationError(f"k_users must be a positive integer or inf, got {k}")
        if not math.isinf(k):
            object.__setattr__(self, "k_users", int(k))

    @property
    def k_eff(self) -> float:
        """Users seen by the matrix construction (TDMA activates one per cell)."""
        return 1 if self.protocol is Protocol.TDMA else self.k_users

    @property
    def large_k(self) -> bool:
        return math.isinf(self.k_eff)

    @property
    def fading(self) -> bool:
        return self.channel is Channel.RAYLEIGH

    @property
    def array_gain(self) -> float:
        """Average received power gain of the cell-site array, 1+2a^2 or 1+a^2."""
        if self.model is Model.WYNER:
            return 1.0 + 2.0 * self.alpha**2
        return 1.0 + self.alpha**2

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class MonteCarloCfg:
    n_cells: int = 100
    n_trials: int = 1000
    seed: int = 20080701

    def __post_init__(self):
        if self.n_cells < 3:
            raise ValidationError(f"Monte Carlo needs n_cells >= 3, got {self.n_cells}")
        if self.n_trials < 1:
            raise ValidationError(f"n_trials must be >= 1, got {self.n_trials}")


INF_BITS = math.inf
"""Sentinel for an unlimited compression resolution r."""


def power_fraction(r: float) -> float:
    """1 - 2^-r, clamped to exactly 1 once r exceeds double precision."""
    if r < 0:
        raise ValidationError(f"compression parameter must be >= 0, got {r}")
    if r > 60.0:
        return 1.0
    return -math.expm1(-r * math.log(2.0))
