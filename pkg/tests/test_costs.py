"""Hardware cost lookup and benefit ratio tests."""

import math

import pytest

from lsmlab.costs import Component, ImplStyle, benefit_ratios, estimate, format_table
from lsmlab.kernels import SynapseOrder


class TestEstimate:
    def test_order_to_style_mapping(self):
        assert estimate("delta").style is ImplStyle.ZEROTH_ORDER
        assert estimate("zeroth").style is ImplStyle.ZEROTH_ORDER
        assert estimate("first").style is ImplStyle.HIGHER_ORDER
        assert estimate("second").style is ImplStyle.HIGHER_ORDER
        assert estimate(SynapseOrder.SECOND).order is SynapseOrder.SECOND

    def test_point_estimates(self):
        by_component = {e.component: e for e in estimate("second").entries}
        driver = by_component[Component.DRIVER]
        assert driver.power_w == 100e-6
        assert driver.power_range_w == (100e-6, 500e-6)
        assert driver.area_um2 == 1000.0
        pulse = by_component[Component.PULSE_GENERATION]
        assert pulse.power_w == 500e-6
        assert pulse.area_um2 == 1500.0

        by_component = {e.component: e for e in estimate("zeroth").entries}
        driver = by_component[Component.DRIVER]
        assert driver.power_w == 100e-9
        assert driver.area_um2 == 10.0
        pulse = by_component[Component.PULSE_GENERATION]
        assert pulse.power_w == 5e-6
        assert pulse.area_um2 == 500.0

    def test_benefit_ratios(self):
        ratios = benefit_ratios()
        assert math.isclose(ratios["driver_power"], 1000.0)
        assert math.isclose(ratios["driver_area"], 100.0)
        assert math.isclose(ratios["pulse_generation_power"], 100.0)
        assert math.isclose(ratios["pulse_generation_area"], 3.0)

    def test_assumptions_attached(self):
        report = estimate("first")
        assert report.assumptions["technology_node"] == "0.25 um CMOS"
        assert report.assumptions["supply"] == "3.3 V"

    def test_to_dict_shape(self):
        d = estimate("delta").to_dict()
        assert d["order"] == "delta"
        assert d["style"] == "zeroth_order"
        assert len(d["entries"]) == 2
        assert set(d["benefit"]) == {"driver_power", "driver_area",
                                     "pulse_generation_power", "pulse_generation_area"}

    def test_unknown_order_rejected(self):
        with pytest.raises(ValueError):
            estimate("third")


class TestFormatTable:
    def test_mentions_every_entry_and_ratio(self):
        text = format_table(estimate("second"))
        assert "driver" in text and "pulse_generation" in text
        assert "100-500 uW" in text  # op-amp static power range
        assert "1000x" in text and "3x" in text

    def test_digital_style_shows_nanowatts(self):
        text = format_table(estimate("zeroth"))
        assert "100 nW" in text
