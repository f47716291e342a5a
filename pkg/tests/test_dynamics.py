"""LIF neuron update and reservoir simulation engine tests."""

import math

import numpy as np
import pytest

from lsmlab.dynamics import (
    LIFParams,
    ScalingPoint,
    SimulationEngine,
    reservoir_activity,
    simulate_sample,
    step_neuron,
)
from lsmlab.dataset import SpikeSample
from lsmlab.kernels import KernelSpec, SynapseOrder


def _sample(channels, times, duration=100.0, label=0):
    return SpikeSample(
        channels=np.asarray(channels, dtype=np.int64),
        times=np.asarray(times, dtype=np.float64),
        label=label,
        duration=duration,
    )


DELTA = KernelSpec(order=SynapseOrder.DELTA)


class TestLIFParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            LIFParams(v_threshold=0.0, v_rest=0.0)
        with pytest.raises(ValueError):
            LIFParams(tau_m=0.0)
        with pytest.raises(ValueError):
            LIFParams(refractory=-1.0)

    def test_decay_and_refractory_steps(self):
        p = LIFParams()
        assert math.isclose(p.decay, math.exp(-1.0 / 64.0), rel_tol=1e-15)
        assert p.refractory_steps == 2

    def test_dict_round_trip(self):
        p = LIFParams(tau_m=32.0, refractory=3.0)
        assert LIFParams.from_dict(p.to_dict()) == p
        with pytest.raises(ValueError, match="unknown"):
            LIFParams.from_dict({"tau_m": 32.0})


class TestStepNeuron:
    def test_pure_decay(self):
        p = LIFParams()
        v, spiked, ref = step_neuron(10.0, 0.0, p, 0)
        assert not spiked and ref == 0
        assert abs(v - 10.0 * math.exp(-1.0 / 64.0)) < 1e-9

    def test_threshold_fires_and_resets(self):
        p = LIFParams()
        v, spiked, ref = step_neuron(19.9, 1.0, p, 0)
        assert spiked and v == p.v_rest and ref == p.refractory_steps

    def test_refractory_clamps_and_ignores_input(self):
        p = LIFParams()
        v, spiked, ref = step_neuron(15.0, 100.0, p, 2)
        assert (v, spiked, ref) == (p.v_rest, False, 1)

    def test_non_finite_membrane_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            step_neuron(math.nan, 0.0, LIFParams(), 0)


class TestEngine:
    def test_quiescent_without_input(self, small_graph, small_wiring):
        engine = SimulationEngine(small_graph, small_wiring, DELTA, LIFParams())
        rec = engine.run_sample(_sample([], []), ScalingPoint(8.0, 2.0))
        assert rec.total_spikes == 0
        assert all(len(r) == 0 for r in rec.raster)

    def test_quiescent_at_zero_input_scale(self, small_graph, small_wiring, small_dataset):
        engine = SimulationEngine(small_graph, small_wiring, DELTA, LIFParams())
        rec = engine.run_sample(small_dataset.samples[0], ScalingPoint(0.0, 2.0))
        assert rec.total_spikes == 0

    def test_single_spike_relays_after_kernel_delay(self, small_graph, small_wiring):
        engine = SimulationEngine(small_graph, small_wiring, DELTA, LIFParams())
        raster = engine.run_raster(_sample([2], [10.0]), ScalingPoint(25.0, 0.0))
        fired_steps, fired_neurons = np.nonzero(raster)
        excite = small_wiring.targets[2][small_wiring.signs[2] > 0]
        assert set(fired_neurons) == set(excite)
        assert np.all(fired_steps == 10 + DELTA.delay_steps)

    def test_sustained_drive_fires_at_refractory_period(self, small_graph, small_wiring):
        engine = SimulationEngine(small_graph, small_wiring, DELTA, LIFParams())
        sample = _sample([2] * 30, np.arange(30, dtype=float), duration=30.0)
        raster = engine.run_raster(sample, ScalingPoint(25.0, 0.0))
        target = small_wiring.targets[2][small_wiring.signs[2] > 0][0]
        times = np.nonzero(raster[:, target])[0]
        # one step of transmission delay, then a spike every refractory+dt
        period = 1 + LIFParams().refractory_steps
        np.testing.assert_array_equal(times, np.arange(1, 30, period))

    def test_delta_equals_one_bin_zeroth(self, small_graph, small_wiring, small_dataset):
        lif = LIFParams()
        point = ScalingPoint(8.0, 2.0)
        zeroth = KernelSpec(order=SynapseOrder.ZEROTH, tau_fall=1.0)
        for sample in small_dataset.samples[:4]:
            a = SimulationEngine(small_graph, small_wiring, DELTA, lif).run_raster(sample, point)
            b = SimulationEngine(small_graph, small_wiring, zeroth, lif).run_raster(sample, point)
            np.testing.assert_array_equal(a, b)

    def test_counts_and_rates_consistent(self, small_graph, small_wiring, small_dataset):
        engine = SimulationEngine(small_graph, small_wiring, DELTA, LIFParams())
        sample = small_dataset.samples[0]
        point = ScalingPoint(8.0, 1.0)
        rec = engine.run_sample(sample, point)
        counts = engine.run_counts(sample, point)
        assert rec.total_spikes == counts.sum()
        np.testing.assert_array_equal([len(r) for r in rec.raster], counts)
        np.testing.assert_allclose(rec.rates, counts / sample.duration)

    def test_membrane_trace_matches_closed_form(self, small_graph, small_wiring):
        lif = LIFParams()
        engine = SimulationEngine(small_graph, small_wiring, DELTA, lif)
        traces = engine.membrane_trace(_sample([2], [5.0]), ScalingPoint(3.0, 0.0))
        arrival = 5 + DELTA.delay_steps
        for k in range(small_wiring.fan_out):
            neuron = small_wiring.targets[2][k]
            sign = small_wiring.signs[2][k]
            t = np.arange(traces.shape[0])
            expected = np.where(t >= arrival, 3.0 * sign * lif.decay ** (t - arrival), 0.0)
            np.testing.assert_allclose(traces[:, neuron], expected, atol=1e-12)

    def test_membrane_trace_superposition(self, small_graph, small_wiring, small_dataset):
        kernel = KernelSpec(order=SynapseOrder.SECOND, tau_fall=8.0, tau_rise=4.0)
        engine = SimulationEngine(small_graph, small_wiring, kernel, LIFParams())
        sample = small_dataset.samples[1]
        one = engine.membrane_trace(sample, ScalingPoint(1.0, 0.0))
        two = engine.membrane_trace(sample, ScalingPoint(2.0, 0.0))
        np.testing.assert_allclose(two, 2.0 * one, atol=1e-9)

    def test_rejects_mismatched_dt(self, small_graph, small_wiring):
        with pytest.raises(ValueError, match="dt"):
            SimulationEngine(small_graph, small_wiring,
                             KernelSpec(order=SynapseOrder.DELTA, dt=0.5, delay=0.5),
                             LIFParams())

    def test_rejects_duration_not_multiple_of_dt(self, small_graph, small_wiring):
        engine = SimulationEngine(small_graph, small_wiring, DELTA, LIFParams())
        with pytest.raises(ValueError, match="duration"):
            engine.run_raster(_sample([0], [1.0], duration=10.5), ScalingPoint(1.0, 0.0))

    def test_rejects_channels_beyond_wiring(self, small_graph, small_wiring):
        engine = SimulationEngine(small_graph, small_wiring, DELTA, LIFParams())
        with pytest.raises(ValueError, match="channels"):
            engine.run_raster(_sample([40], [1.0]), ScalingPoint(1.0, 0.0))

    def test_one_shot_wrapper_matches_engine(self, small_graph, small_wiring, small_dataset):
        sample = small_dataset.samples[2]
        point = ScalingPoint(8.0, 1.0)
        lif = LIFParams()
        a = simulate_sample(small_graph, small_wiring, DELTA, lif, point, sample)
        b = SimulationEngine(small_graph, small_wiring, DELTA, lif).run_sample(sample, point)
        assert a.total_spikes == b.total_spikes
        np.testing.assert_array_equal(a.rates, b.rates)


class TestActivitySummary:
    def test_means_and_rate(self, small_graph, small_wiring, small_dataset):
        engine = SimulationEngine(small_graph, small_wiring, DELTA, LIFParams())
        records = [engine.run_sample(s, ScalingPoint(8.0, 1.0))
                   for s in small_dataset.samples[:4]]
        summary = reservoir_activity(records)
        mean_spikes = np.mean([r.total_spikes for r in records])
        assert summary.spikes_per_sample == mean_spikes
        duration_s = small_dataset.duration / 1000.0
        assert math.isclose(summary.rate_hz_per_neuron,
                            mean_spikes / (small_graph.n_neurons * duration_s))

    def test_requires_records(self):
        with pytest.raises(ValueError):
            reservoir_activity([])
