"""Unit-synapse current kernels and their O(1) recursive evaluators.

Four waveform families are supported for the post-synaptic current of a
unit-strength synapse:

* ``delta``  -- all charge in a single simulation step,
* ``zeroth`` -- rectangular pulse of width tau_fall,
* ``first``  -- exponential decay with time constant tau_fall,
* ``second`` -- double exponential, rise tau_rise and fall tau_fall.

Every kernel is normalized so that its *discrete* integral (sum of sampled
current values times dt) is exactly 1: one injected unit of weight always
delivers one unit of charge, regardless of order or timescale. A fixed
transmission delay is applied by the evaluator, not baked into the samples.

``FilterState`` realizes the kernel as a recursive filter whose per-step cost
is constant (independent of the timescale and of how many impulses were
injected), which is what makes long sweeps affordable.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SynapseOrder", "KernelSpec", "DiscreteKernel", "FilterState", "discretize_kernel"]

# Truncation policy: the stored waveform is cut where every omitted sample
# would contribute < _TAIL_EPS charge. Small enough that the recursive filter
# (which never truncates) agrees with direct convolution against the stored
# samples to well below 1e-9 even after ~1e3 stacked impulses.
_TAIL_EPS = 1e-14


class SynapseOrder(enum.Enum):
    DELTA = "delta"
    ZEROTH = "zeroth"
    FIRST = "first"
    SECOND = "second"


@dataclass(frozen=True)
class KernelSpec:
    """Synaptic order plus timescales, delay and sampling step (all in ms)."""

    order: SynapseOrder
    tau_fall: float = 8.0
    tau_rise: float | None = None
    delay: float = 1.0
    dt: float = 1.0

    def __post_init__(self):
        if isinstance(self.order, str):
            object.__setattr__(self, "order", SynapseOrder(self.order))
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.delay < 0:
            raise ValueError("delay must be non-negative")
        ratio = self.delay / self.dt
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("delay must be an integer multiple of dt")
        if self.order is not SynapseOrder.DELTA:
            if self.tau_fall is None or self.tau_fall <= 0:
                raise ValueError("tau_fall must be positive")
            if self.tau_fall < self.dt:
                raise ValueError("tau_fall < dt gives degenerate sampling")
        if self.order is SynapseOrder.SECOND:
            if self.tau_rise is None:
                raise ValueError("second order requires tau_rise")
            if not (0 < self.tau_rise < self.tau_fall):
                raise ValueError("second order requires 0 < tau_rise < tau_fall")
        elif self.tau_rise is not None:
            raise ValueError("tau_rise only applies to second order")

    @property
    def delay_steps(self) -> int:
        return round(self.delay / self.dt)

    def to_dict(self) -> dict:
        return {
            "order": self.order.value,
            "tau_fall_ms": self.tau_fall,
            "tau_rise_ms": self.tau_rise,
            "delay_ms": self.delay,
            "dt_ms": self.dt,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        known = {"order", "tau_fall_ms", "tau_rise_ms", "delay_ms", "dt_ms"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown kernel keys: {sorted(unknown)}")
        if "order" not in d:
            raise ValueError("kernel section requires 'order'")
        return cls(
            order=SynapseOrder(d["order"]),
            tau_fall=d.get("tau_fall_ms", 8.0),
            tau_rise=d.get("tau_rise_ms"),
            delay=d.get("delay_ms", 1.0),
            dt=d.get("dt_ms", 1.0),
        )


@dataclass(frozen=True)
class DiscreteKernel:
    """Unit-charge waveform sampled at dt from onset (delay excluded)."""

    samples: np.ndarray  # current in charge/ms
    charge: float        # sum(samples) * dt
    truncation_horizon: float  # ms

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)


def _horizon_steps(q: float, gain: float) -> int:
    # smallest L with gain * q**L * dt-scale below the tail budget
    if q <= 0.0:
        return 1
    L = int(math.ceil(math.log(_TAIL_EPS / gain) / math.log(q)))
    return max(L, 1)


def discretize_kernel(spec: KernelSpec) -> DiscreteKernel:
    """Sample the kernel at dt and normalize its discrete sum to unit charge."""
    dt = spec.dt
    if spec.order is SynapseOrder.DELTA:
        samples = np.array([1.0 / dt])
    elif spec.order is SynapseOrder.ZEROTH:
        n_bins = round(spec.tau_fall / dt)
        samples = np.full(n_bins, 1.0 / (n_bins * dt))
    elif spec.order is SynapseOrder.FIRST:
        q = math.exp(-dt / spec.tau_fall)
        L = _horizon_steps(q, 1.0 - q)
        raw = q ** np.arange(L)
        samples = raw / (raw.sum() * dt)
    else:  # SECOND
        q1 = math.exp(-dt / spec.tau_fall)
        q2 = math.exp(-dt / spec.tau_rise)
        L = _horizon_steps(q1, 1.0)
        i = np.arange(L)
        raw = q1**i - q2**i
        samples = raw / (raw.sum() * dt)
    charge = float(samples.sum() * dt)
    return DiscreteKernel(samples=samples, charge=charge, truncation_horizon=len(samples) * dt)


def filter_coefficients(spec: KernelSpec) -> tuple[int, float, float, float, int]:
    """Recursive-filter coefficients: (order_id, amplitude, q_fall, q_rise, n_bins).

    order_id 0 covers both delta and zeroth (delta is zeroth with one bin),
    1 is the single-trace exponential, 2 the two-trace double exponential.
    The amplitude is the same normalization constant the sampled waveform
    uses, so filter output and convolution against the samples agree.
    """
    dt = spec.dt
    kern = discretize_kernel(spec)
    if spec.order in (SynapseOrder.DELTA, SynapseOrder.ZEROTH):
        return 0, float(kern.samples[0]), 0.0, 0.0, len(kern.samples)
    if spec.order is SynapseOrder.FIRST:
        q = math.exp(-dt / spec.tau_fall)
        return 1, float(kern.samples[0]), q, 0.0, 0
    q1 = math.exp(-dt / spec.tau_fall)
    q2 = math.exp(-dt / spec.tau_rise)
    amp = float(kern.samples[1] / (q1 - q2))  # samples[0] is 0 for 2nd order
    return 2, amp, q1, q2, 0


class FilterState:
    """Single-owner mutable evaluator of one kernel.

    ``inject`` accumulates weighted impulses for the current step; ``step``
    advances time by dt and returns the synaptic current (charge/ms) for the
    step just entered. An impulse injected at step t first shows up in the
    output of step t + delay/dt.
    """

    def __init__(self, spec: KernelSpec):
        self.spec = spec
        (self._order_id, self._amp, self._q1, self._q2, self._n_bins) = filter_coefficients(spec)
        d = spec.delay_steps
        self._delay = [0.0] * d
        self._dp = 0
        self._incoming = 0.0
        # order 0: running-sum window; orders 1/2: decaying traces
        self._window = [0.0] * self._n_bins
        self._wp = 0
        self._acc = 0.0
        self._tr1 = 0.0
        self._tr2 = 0.0

    def inject(self, weighted_impulse: float) -> None:
        self._incoming += weighted_impulse

    def step(self) -> float:
        if self._delay:
            arriving = self._delay[self._dp]
            self._delay[self._dp] = self._incoming
            self._dp = (self._dp + 1) % len(self._delay)
        else:
            arriving = self._incoming
        self._incoming = 0.0
        if self._order_id == 0:
            self._acc += arriving - self._window[self._wp]
            self._window[self._wp] = arriving
            self._wp = (self._wp + 1) % self._n_bins
            return self._amp * self._acc
        if self._order_id == 1:
            self._tr1 = self._q1 * self._tr1 + arriving
            return self._amp * self._tr1
        self._tr1 = self._q1 * self._tr1 + arriving
        self._tr2 = self._q2 * self._tr2 + arriving
        return self._amp * (self._tr1 - self._tr2)

    def run(self, injections: Sequence[float]) -> np.ndarray:
        """Convenience: inject injections[t] at step t, return the output trace."""
        out = np.empty(len(injections))
        for t, x in enumerate(injections):
            self.inject(x)
            out[t] = self.step()
        return out


def convolve_reference(spec: KernelSpec, injections: Sequence[float]) -> np.ndarray:
    """Direct O(T*L) convolution of injections with the sampled waveform.

    Independent reference for FilterState; intentionally naive.
    """
    kern = discretize_kernel(spec)
    d = spec.delay_steps
    T = len(injections)
    out = np.zeros(T)
    for t_imp, x in enumerate(injections):
        if x == 0.0:
            continue
        start = t_imp + d
        for k, s in enumerate(kern.samples):
            if start + k >= T:
                break
            out[start + k] += x * s
    return out
