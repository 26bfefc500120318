"""Dense executor semantics: LIF step, delayed current sum, full forward."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaysnn import (
    DelaySet,
    DelayWeightTensor,
    NetworkModel,
    NeuronParams,
    ShapeError,
    forward_dense,
    layer_input_current,
    lif_step,
    traces_equal,
)
from conftest import random_model, random_raster


class TestLifStep:
    def test_zero_fixed_point(self):
        u, theta = lif_step(0.0, 0.0, 0.0, NeuronParams(tau=10, u_th=1))
        assert u == 0.0 and theta == 0.0

    def test_scalar_evaluation(self):
        u, theta = lif_step(0.5, 0.0, 0.3, NeuronParams(tau=1, u_th=1))
        assert u == pytest.approx(0.5 * math.exp(-1.0) + 0.3, abs=1e-12)
        assert abs(u - 0.483940) < 1e-6
        assert theta == 0.0

    def test_reset_gate_zeroes_leak(self):
        u, theta = lif_step(5.0, 1.0, 0.2, NeuronParams(tau=2, u_th=1))
        assert u == 0.2 and theta == 0.0

    def test_threshold_is_inclusive(self):
        _, theta = lif_step(0.0, 0.0, 1.0, NeuronParams(tau=2, u_th=1.0))
        assert theta == 1.0

    @given(
        u=st.floats(-5, 5), theta=st.sampled_from([0.0, 1.0]),
        current=st.floats(-5, 5), tau=st.floats(0.5, 20),
    )
    @settings(max_examples=100)
    def test_post_spike_potential_equals_current(self, u, theta, current, tau):
        params = NeuronParams(tau=tau, u_th=1.0)
        u_new, _ = lif_step(u, theta, current, params)
        if theta == 1.0:
            assert u_new == current


class TestLayerInputCurrent:
    def test_zero_weights(self):
        w = np.zeros((2, 3, 4))
        spikes = np.ones((2, 3))
        assert layer_input_current(w, spikes, 1) == 0.0

    def test_two_simultaneous_spikes_at_delay_zero(self):
        # two presynaptic neurons spiking now, delays {0,1,2}: the target
        # receives both delay-0 weights
        rng = np.random.default_rng(3)
        w = rng.normal(size=(3, 2, 1))
        spikes = np.zeros((3, 2))
        spikes[0, :] = 1  # delay 0 row
        assert layer_input_current(w, spikes, 0) == pytest.approx(
            w[0, 0, 0] + w[0, 1, 0]
        )

    def test_matches_triple_loop(self):
        rng = np.random.default_rng(11)
        w = rng.normal(size=(3, 4, 2))
        spikes = (rng.random((3, 4)) < 0.5).astype(float)
        for j in range(2):
            expected = 0.0
            for d in range(3):
                for i in range(4):
                    expected += w[d, i, j] * spikes[d, i]
            assert layer_input_current(w, spikes, j) == pytest.approx(expected)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            layer_input_current(np.zeros((2, 3, 1)), np.zeros((2, 4)), 0)


def naive_forward(model, raster):
    """Straightforward re-implementation with plain Python loops: full spike
    record, explicit double sum per neuron (same canonical addition order)."""
    T = model.num_timesteps
    spikes = [np.zeros((T, w), dtype=np.uint8) for w in model.widths[1:]]
    vmem = [np.zeros((T, w), dtype=np.float64) for w in model.widths[1:]]
    u = [[0.0] * w for w in model.widths[1:]]
    th = [[0.0] * w for w in model.widths[1:]]
    pre_spikes = [np.asarray(raster, dtype=float)] + [
        np.zeros((T, w)) for w in model.widths[1:]
    ]
    for t in range(T):
        for l in range(model.num_layers):
            conn = model.connections[l]
            levels = model.delay_sets[l].levels
            p = model.neuron_params[l]
            for j in range(model.widths[l + 1]):
                current = 0.0
                for lvl in range(len(levels) - 1, -1, -1):
                    d = levels[lvl]
                    if t - d < 0:
                        continue
                    for i in range(model.widths[l]):
                        if pre_spikes[l][t - d][i]:
                            current += conn.weights[lvl, i, j]
                u[l][j] = u[l][j] * math.exp(-1.0 / p.tau) * (1.0 - th[l][j]) + current
                th[l][j] = 1.0 if u[l][j] >= p.u_th else 0.0
                spikes[l][t, j] = int(th[l][j])
                vmem[l][t, j] = u[l][j]
            pre_spikes[l + 1][t] = [th[l][j] for j in range(model.widths[l + 1])]
    return spikes, vmem


class TestForwardDense:
    def test_zero_raster_zero_trace(self, small_model):
        raster = np.zeros((small_model.num_timesteps, small_model.widths[0]), np.uint8)
        trace = forward_dense(small_model, raster)
        assert all(s.sum() == 0 for s in trace.spikes)
        assert all((v == 0).all() for v in trace.vmem)
        assert trace.prediction == 0

    def test_raster_shape_mismatch(self, small_model):
        with pytest.raises(ShapeError):
            forward_dense(small_model, np.zeros((3, 3), np.uint8))

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_naive_executor(self, seed):
        model = random_model(seed, max_width=8, max_levels=4, max_timesteps=16)
        raster = random_raster(model, seed + 1000)
        trace = forward_dense(model, raster)
        spikes, vmem = naive_forward(model, raster)
        for l in range(model.num_layers):
            assert np.array_equal(trace.spikes[l], spikes[l])
            assert np.array_equal(trace.vmem[l], vmem[l])

    def test_determinism(self, small_model):
        raster = random_raster(small_model, 5)
        assert traces_equal(
            forward_dense(small_model, raster), forward_dense(small_model, raster)
        )

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_causality_by_truncation(self, seed):
        model = random_model(seed, max_timesteps=20)
        raster = random_raster(model, seed + 50)
        full = forward_dense(model, raster)
        t_cut = model.num_timesteps // 2
        if t_cut == 0:
            pytest.skip("too short")
        truncated = NetworkModel(
            widths=model.widths,
            connections=model.connections,
            delay_sets=model.delay_sets,
            neuron_params=model.neuron_params,
            num_timesteps=t_cut,
            readout=model.readout,
        )
        prefix = forward_dense(truncated, raster[:t_cut])
        for l in range(model.num_layers):
            assert np.array_equal(prefix.spikes[l], full.spikes[l][:t_cut])
            assert np.array_equal(prefix.vmem[l], full.vmem[l][:t_cut])

    def test_zero_delay_reduction(self):
        # every DelaySet {0}: must equal a conventional feedforward SNN step
        rng = np.random.default_rng(9)
        widths = (4, 5, 3)
        conns = tuple(
            DelayWeightTensor.dense(rng.normal(0, 0.8, size=(1, a, b)))
            for a, b in zip(widths[:-1], widths[1:])
        )
        model = NetworkModel(
            widths=widths,
            connections=conns,
            delay_sets=(DelaySet((0,)), DelaySet((0,))),
            neuron_params=(NeuronParams(2, 1), NeuronParams(2, 1)),
            num_timesteps=12,
        )
        raster = random_raster(model, 33)
        trace = forward_dense(model, raster)
        # conventional executor: no history, just w.T @ spikes each step
        u = [np.zeros(w) for w in widths[1:]]
        th = [np.zeros(w) for w in widths[1:]]
        for t in range(12):
            pre = raster[t].astype(float)
            for l in range(2):
                current = np.zeros(widths[l + 1])
                for i in np.flatnonzero(pre):
                    current += conns[l].weights[0, i]
                decay = math.exp(-1.0 / 2.0)
                u[l] = u[l] * decay * (1 - th[l]) + current
                th[l] = (u[l] >= 1.0).astype(float)
                assert np.array_equal(trace.spikes[l][t], th[l].astype(np.uint8))
                assert np.array_equal(trace.vmem[l][t], u[l])
                pre = th[l]

    def test_gating_reset_property(self, small_model):
        # wherever a neuron spiked at t-1, u[t] is exactly the input current:
        # recompute the delayed-current sum from the recorded spike history
        model = small_model
        raster = random_raster(model, 17, density=0.5)
        trace = forward_dense(model, raster)
        pre_records = [raster] + [s for s in trace.spikes]
        hits = 0
        for l in range(model.num_layers):
            levels = model.delay_sets[l].levels
            w = model.connections[l].weights
            for t in range(1, model.num_timesteps):
                fired = np.flatnonzero(trace.spikes[l][t - 1])
                if len(fired) == 0:
                    continue
                delayed = np.zeros((len(levels), model.widths[l]))
                for lvl, d in enumerate(levels):
                    if t - d >= 0:
                        delayed[lvl] = pre_records[l][t - d]
                for j in fired:
                    current = layer_input_current(w, delayed, int(j))
                    assert trace.vmem[l][t][j] == pytest.approx(current, rel=1e-9, abs=1e-12)
                    hits += 1
        assert hits > 0  # the property was actually exercised


class TestMaskEnforcement:
    def test_masked_weights_are_zero_and_frozen(self):
        rng = np.random.default_rng(2)
        w = rng.normal(size=(2, 3, 3))
        mask = rng.random(w.shape) < 0.5
        conn = DelayWeightTensor(w, mask)
        assert (conn.weights[~conn.mask] == 0.0).all()
        with pytest.raises(ValueError):
            conn.weights[0, 0, 0] = 1.0
        with pytest.raises(ValueError):
            conn.mask[0, 0, 0] = True

    def test_input_connection_must_be_delay_free(self):
        with pytest.raises(ShapeError):
            NetworkModel(
                widths=(2, 2),
                connections=(DelayWeightTensor.dense(np.zeros((2, 2, 2))),),
                delay_sets=(DelaySet((0, 1)),),
                neuron_params=(NeuronParams(2, 1),),
                num_timesteps=4,
            )
