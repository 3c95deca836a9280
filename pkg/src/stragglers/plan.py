"""Job shape (RedundancyPlan) and the metric record returned by every evaluator."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

__all__ = ["Mode", "RedundancyPlan", "Metrics"]


class Mode(str, Enum):
    NONE = "none"
    REPLICATE = "replicate"
    CODE = "code"


@dataclass(frozen=True)
class RedundancyPlan:
    """k tasks, optional redundancy added at ``delay``, optional relaunch.

    ``c`` counts extra replicas per remaining task (replicate mode); ``n`` is
    the total task count after parity tasks join (code mode).  ``cancel``
    selects which cost the caller cares about; evaluators report both.
    """

    k: int
    mode: Mode = Mode.NONE
    c: int = 0
    n: Optional[int] = None
    delay: float = 0.0
    relaunch: bool = False
    cancel: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if int(self.c) != self.c or self.c < 0:
            raise ValueError(f"c must be a non-negative integer, got {self.c!r}")
        if self.mode is Mode.CODE:
            if self.n is None or int(self.n) != self.n or self.n < self.k:
                raise ValueError(f"code mode needs integer n >= k={self.k}, got n={self.n!r}")
        if math.isnan(self.delay) or self.delay < 0:
            raise ValueError(f"delay must be >= 0, got {self.delay!r}")
        if self.relaunch and not math.isfinite(self.delay):
            raise ValueError("relaunch needs a finite delay")

    @property
    def total_tasks(self) -> int:
        """n in code mode, k otherwise (replicas are not counted here)."""
        return self.n if self.mode is Mode.CODE else self.k

    def canonical(self) -> "RedundancyPlan":
        """Collapse the equivalent encodings of 'no redundancy'.

        Replicate(0), Code(n=k), None, and any redundancy that never starts
        (infinite delay, no relaunch) all become mode None; without relaunch
        the delay is then irrelevant and is set to infinity.
        """
        trivial = (
            self.mode is Mode.NONE
            or (math.isinf(self.delay) and not self.relaunch)
            or (self.mode is Mode.REPLICATE and self.c == 0)
            or (self.mode is Mode.CODE and self.n == self.k)
        )
        if not trivial:
            if self.mode is Mode.REPLICATE:
                return replace(self, n=None)
            return replace(self, c=0)
        return RedundancyPlan(
            k=self.k,
            mode=Mode.NONE,
            delay=self.delay if self.relaunch else math.inf,
            relaunch=self.relaunch,
            cancel=self.cancel,
        )


@dataclass(frozen=True)
class Metrics:
    """Expected latency and both cost variants, plus optional second moments."""

    E_T: float
    E_C_cancel: float
    E_C_nocancel: float
    E_T2: Optional[float] = None
    E_C2: Optional[float] = None

    @property
    def sd_T(self) -> Optional[float]:
        return _sd(self.E_T2, self.E_T)

    @property
    def sd_C(self) -> Optional[float]:
        return _sd(self.E_C2, self.E_C_cancel)

    def as_dict(self, second_moments: bool = True) -> dict:
        d = {"E_T": self.E_T, "E_C_cancel": self.E_C_cancel, "E_C_nocancel": self.E_C_nocancel}
        if second_moments and self.E_T2 is not None:
            d.update(E_T2=self.E_T2, E_C2=self.E_C2, sd_T=self.sd_T, sd_C=self.sd_C)
        return d


class InconsistentMomentError(ArithmeticError):
    """A computed second moment came out below the squared mean."""


def _sd(m2: Optional[float], m1: float) -> Optional[float]:
    if m2 is None:
        return None
    var = m2 - m1 * m1
    if var < 0:
        # cancellation noise only; anything larger is a formula problem
        if var < -1e-9 * max(m2, 1.0):
            raise InconsistentMomentError(f"negative variance {var!r} (E[X^2]={m2!r}, E[X]={m1!r})")
        var = 0.0
    return math.sqrt(var)
