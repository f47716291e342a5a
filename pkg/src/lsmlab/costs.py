"""Hardware cost estimator for synapse implementations.

A transparent lookup plus ratio calculator over published point estimates for
the two critical peripheral circuits: the driver that buffers the synaptic
waveform and the pulse-generation stage. Rectangular (zeroth/delta) synapses
get away with digital building blocks (inverter pair, counter); exponential
waveforms (first/second order) need an op-amp buffer and a DAC.

Estimates assume a 0.25 um CMOS node, 3.3 V supply, 4 pF load, ms-range
(~1 kHz) signals and 4-bit counters/DACs. The op-amp's static power is a
range; the published 1000x benefit corresponds to its lower end, so the ratio
uses that value and the full range is retained in the entry.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .kernels import SynapseOrder

__all__ = ["Component", "ImplStyle", "CostEntry", "CostReport", "estimate"]


class Component(enum.Enum):
    DRIVER = "driver"
    PULSE_GENERATION = "pulse_generation"


class ImplStyle(enum.Enum):
    HIGHER_ORDER = "higher_order"
    ZEROTH_ORDER = "zeroth_order"


@dataclass(frozen=True)
class CostEntry:
    component: Component
    style: ImplStyle
    power_w: float                      # value used for ratio computation
    area_um2: float
    notes: str
    power_range_w: tuple[float, float] | None = None

    def __post_init__(self):
        if self.power_w <= 0 or self.area_um2 <= 0:
            raise ValueError("power and area must be positive")

    def to_dict(self) -> dict:
        return {
            "component": self.component.value,
            "style": self.style.value,
            "power_w": self.power_w,
            "power_range_w": list(self.power_range_w) if self.power_range_w else None,
            "area_um2": self.area_um2,
            "notes": self.notes,
        }


_ENTRIES = {
    (Component.DRIVER, ImplStyle.HIGHER_ORDER): CostEntry(
        Component.DRIVER, ImplStyle.HIGHER_ORDER,
        power_w=100e-6, power_range_w=(100e-6, 500e-6), area_um2=1000.0,
        notes="Analog buffer (op-amp), static power"),
    (Component.DRIVER, ImplStyle.ZEROTH_ORDER): CostEntry(
        Component.DRIVER, ImplStyle.ZEROTH_ORDER,
        power_w=100e-9, area_um2=10.0,
        notes="Series inverter pair, dynamic power"),
    (Component.PULSE_GENERATION, ImplStyle.HIGHER_ORDER): CostEntry(
        Component.PULSE_GENERATION, ImplStyle.HIGHER_ORDER,
        power_w=500e-6, area_um2=1500.0,
        notes="4-bit DAC"),
    (Component.PULSE_GENERATION, ImplStyle.ZEROTH_ORDER): CostEntry(
        Component.PULSE_GENERATION, ImplStyle.ZEROTH_ORDER,
        power_w=5e-6, area_um2=500.0,
        notes="4-bit counter"),
}

ASSUMPTIONS = {
    "technology_node": "0.25 um CMOS",
    "supply": "3.3 V",
    "load": "4 pF",
    "signal_band": "ms range (~1 kHz)",
    "bit_width": "4-bit",
}


@dataclass(frozen=True)
class CostReport:
    order: SynapseOrder
    style: ImplStyle
    entries: tuple[CostEntry, ...]
    benefit: dict  # higher-order cost / zeroth-order cost, per component
    assumptions: dict

    def to_dict(self) -> dict:
        return {
            "order": self.order.value,
            "style": self.style.value,
            "entries": [e.to_dict() for e in self.entries],
            "benefit": self.benefit,
            "assumptions": self.assumptions,
        }


def benefit_ratios() -> dict:
    def ratio(component, field):
        hi = getattr(_ENTRIES[(component, ImplStyle.HIGHER_ORDER)], field)
        lo = getattr(_ENTRIES[(component, ImplStyle.ZEROTH_ORDER)], field)
        # point estimates are order-of-magnitude figures; keep the ratio exact
        return round(hi / lo, 6)

    return {
        "driver_power": ratio(Component.DRIVER, "power_w"),
        "driver_area": ratio(Component.DRIVER, "area_um2"),
        "pulse_generation_power": ratio(Component.PULSE_GENERATION, "power_w"),
        "pulse_generation_area": ratio(Component.PULSE_GENERATION, "area_um2"),
    }


def estimate(order: SynapseOrder | str) -> CostReport:
    """Cost report for the given synaptic order.

    Delta and zeroth orders map to the digital implementation style; first and
    second orders to the analog/mixed-signal higher-order style. The benefit
    ratios are always reported for context.
    """
    order = SynapseOrder(order)
    if order in (SynapseOrder.DELTA, SynapseOrder.ZEROTH):
        style = ImplStyle.ZEROTH_ORDER
    else:
        style = ImplStyle.HIGHER_ORDER
    entries = tuple(_ENTRIES[(comp, style)] for comp in Component)
    return CostReport(
        order=order,
        style=style,
        entries=entries,
        benefit=benefit_ratios(),
        assumptions=dict(ASSUMPTIONS),
    )


def format_table(report: CostReport) -> str:
    lines = [
        f"Synapse order: {report.order.value} ({report.style.value} implementation)",
        f"{'component':<18} {'power':>12} {'area':>12}  notes",
    ]
    for e in report.entries:
        power = f"{e.power_w * 1e6:g} uW" if e.power_w >= 1e-6 else f"{e.power_w * 1e9:g} nW"
        if e.power_range_w:
            power = f"{e.power_range_w[0] * 1e6:g}-{e.power_range_w[1] * 1e6:g} uW"
        lines.append(f"{e.component.value:<18} {power:>12} {e.area_um2:>9g} um2  {e.notes}")
    lines.append("benefit (higher order / zeroth order):")
    for k, v in report.benefit.items():
        lines.append(f"  {k}: {v:g}x")
    return "\n".join(lines)
