"""Kernel discretization and recursive-filter evaluator tests."""

import json
import math

import numpy as np
import pytest

from lsmlab.kernels import (
    FilterState,
    KernelSpec,
    SynapseOrder,
    convolve_reference,
    discretize_kernel,
    filter_coefficients,
)


def _kernel(order, tau=8.0, **kw):
    if order is SynapseOrder.DELTA:
        return KernelSpec(order=order, **kw)
    if order is SynapseOrder.SECOND:
        return KernelSpec(order=order, tau_fall=tau, tau_rise=tau / 2.0, **kw)
    return KernelSpec(order=order, tau_fall=tau, **kw)


class TestDiscretization:
    def test_unit_charge_all_orders_and_timescales(self):
        for order in SynapseOrder:
            taus = [1.0] if order is SynapseOrder.DELTA else [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 50.0]
            for tau in taus:
                kern = discretize_kernel(_kernel(order, tau))
                assert abs(kern.charge - 1.0) <= 1e-12, (order, tau)

    def test_delta_is_single_full_charge_bin(self):
        kern = discretize_kernel(KernelSpec(order=SynapseOrder.DELTA))
        assert kern.samples.tolist() == [1.0]

    def test_zeroth_is_flat_rectangle(self):
        kern = discretize_kernel(KernelSpec(order=SynapseOrder.ZEROTH, tau_fall=4.0))
        np.testing.assert_allclose(kern.samples, np.full(4, 0.25))

    def test_first_order_is_geometric_decay(self):
        spec = KernelSpec(order=SynapseOrder.FIRST, tau_fall=8.0)
        kern = discretize_kernel(spec)
        q = math.exp(-1.0 / 8.0)
        ratios = kern.samples[1:] / kern.samples[:-1]
        np.testing.assert_allclose(ratios, q, rtol=1e-12)

    def test_second_order_rises_then_falls(self):
        kern = discretize_kernel(_kernel(SynapseOrder.SECOND, 8.0))
        assert kern.samples[0] == 0.0
        peak = int(np.argmax(kern.samples))
        assert 0 < peak < len(kern.samples) - 1
        assert np.all(np.diff(kern.samples[:peak]) > 0)
        assert np.all(np.diff(kern.samples[peak + 1:]) < 0)

    def test_samples_are_read_only(self):
        kern = discretize_kernel(_kernel(SynapseOrder.FIRST, 4.0))
        with pytest.raises(ValueError):
            kern.samples[0] = 0.0

    def test_delta_equals_one_bin_zeroth(self):
        coef_delta = filter_coefficients(KernelSpec(order=SynapseOrder.DELTA))
        coef_zeroth = filter_coefficients(KernelSpec(order=SynapseOrder.ZEROTH, tau_fall=1.0))
        assert coef_delta == coef_zeroth


class TestSpecValidation:
    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError, match="dt"):
            KernelSpec(order=SynapseOrder.DELTA, dt=0.0)

    def test_rejects_negative_delay(self):
        with pytest.raises(ValueError, match="delay"):
            KernelSpec(order=SynapseOrder.DELTA, delay=-1.0)

    def test_rejects_fractional_delay_steps(self):
        with pytest.raises(ValueError, match="multiple"):
            KernelSpec(order=SynapseOrder.DELTA, delay=0.5)

    def test_rejects_tau_fall_below_dt(self):
        with pytest.raises(ValueError, match="tau_fall"):
            KernelSpec(order=SynapseOrder.ZEROTH, tau_fall=0.25)

    def test_second_requires_tau_rise_below_tau_fall(self):
        with pytest.raises(ValueError, match="tau_rise"):
            KernelSpec(order=SynapseOrder.SECOND, tau_fall=8.0)
        with pytest.raises(ValueError, match="tau_rise"):
            KernelSpec(order=SynapseOrder.SECOND, tau_fall=8.0, tau_rise=9.0)

    def test_tau_rise_only_for_second(self):
        with pytest.raises(ValueError, match="tau_rise"):
            KernelSpec(order=SynapseOrder.FIRST, tau_fall=8.0, tau_rise=4.0)

    def test_sub_dt_rise_time_is_allowed(self):
        spec = KernelSpec(order=SynapseOrder.SECOND, tau_fall=1.0, tau_rise=0.5)
        assert abs(discretize_kernel(spec).charge - 1.0) <= 1e-12

    def test_order_accepts_string(self):
        assert KernelSpec(order="first").order is SynapseOrder.FIRST

    def test_dict_round_trip(self):
        spec = _kernel(SynapseOrder.SECOND, 8.0, delay=3.0)
        again = KernelSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
        assert again == spec

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="unknown"):
            KernelSpec.from_dict({"order": "delta", "tau": 1.0})


class TestFilterState:
    def test_single_impulse_reproduces_samples(self):
        for order in SynapseOrder:
            spec = _kernel(order, 8.0)
            kern = discretize_kernel(spec)
            d = spec.delay_steps
            n = d + len(kern.samples) + 5
            out = FilterState(spec).run([1.0] + [0.0] * (n - 1))
            expected = np.zeros(n)
            expected[d: d + len(kern.samples)] = kern.samples
            np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_delay_shifts_output(self):
        spec = KernelSpec(order=SynapseOrder.ZEROTH, tau_fall=2.0, delay=3.0)
        out = FilterState(spec).run([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(out, [0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0])

    def test_linearity(self):
        gen = np.random.Generator(np.random.Philox(11))
        x = gen.normal(size=200)
        y = gen.normal(size=200)
        spec = _kernel(SynapseOrder.SECOND, 4.0, delay=2.0)
        out_sum = FilterState(spec).run(x + y)
        out_parts = FilterState(spec).run(x) + FilterState(spec).run(y)
        np.testing.assert_allclose(out_sum, out_parts, atol=1e-12)

    def test_matches_convolution_reference(self):
        gen = np.random.Generator(np.random.Philox(5))
        inj = np.where(gen.random(300) < 0.05, gen.normal(size=300), 0.0)
        for order in SynapseOrder:
            spec = _kernel(order, 8.0, delay=2.0)
            out = FilterState(spec).run(inj)
            ref = convolve_reference(spec, inj)
            assert np.max(np.abs(out - ref)) <= 1e-9, order
