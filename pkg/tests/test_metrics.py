"""Memory-overhead arithmetic and fidelity comparison."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaysnn import (
    compare_traces,
    cost_report,
    crossover_alpha,
    forward_dense,
    forward_scdq,
    mem_ring,
    mem_scdq,
    mem_sharedq,
    mem_sharedq_summation,
    scaling_sweep,
)
from delaysnn.costs import reported_crossover
from conftest import random_model, random_raster


class TestMemoryFormulas:
    def test_ring_loihi_reference(self):
        assert mem_ring(48, 64, 8) == 24576

    def test_ring_spinnaker_reference(self):
        assert mem_ring(256, 16, 16) == 65536

    def test_ring_zero_levels(self):
        assert mem_ring(48, 0, 8) == 0

    def test_sharedq_truenorth_reference(self):
        events, _ = mem_sharedq(1.0, 256, 16)
        assert events == 34816

    def test_sharedq_zero_alpha(self):
        assert mem_sharedq(0.0, 256, 16) == (0, 0)

    @given(
        alpha=st.floats(0, 1), pre=st.integers(1, 512), levels=st.integers(1, 64)
    )
    @settings(max_examples=100)
    def test_summation_form_matches_loop(self, alpha, pre, levels):
        events, _ = mem_sharedq_summation(alpha, pre, levels)
        loop = 0.0
        for d in range(1, levels + 1):
            loop += alpha * pre * (levels - d)
        assert events == pytest.approx(loop)

    def test_closed_form_discrepancy_is_surfaced(self):
        # the printed closed form (D^2+D)/2 and the per-FIFO summation
        # disagree for D > 1; the report must flag this, not hide it
        report = cost_report("truenorth")
        assert report.sharedq_events == 34816
        assert report.sharedq_events_summation == 256 * 16 * 15 // 2
        assert not report.closed_form_matches_summation

    def test_scdq_truenorth_reference(self):
        events, _ = mem_scdq(1.0, 256, 16)
        assert events == 7936

    def test_scdq_loihi_reference_bits(self):
        _, bits = mem_scdq(1.0, 48, 64, event_bits=16)
        assert bits == 97536

    def test_scdq_spinnaker_reference_bits(self):
        _, bits = mem_scdq(1.0, 256, 16, event_bits=16)
        assert bits == 126976

    def test_crossover_values(self):
        a_loihi = crossover_alpha(24576, 97536)
        assert a_loihi == pytest.approx(0.252, abs=0.001)
        assert reported_crossover(a_loihi) == pytest.approx(0.25)
        a_spin = crossover_alpha(65536, 126976)
        assert a_spin == pytest.approx(0.516, abs=0.001)
        assert reported_crossover(a_spin) == pytest.approx(0.5)

    def test_crossover_equal_costs(self):
        assert crossover_alpha(100, 100) == 1.0

    @given(
        alpha=st.floats(0.01, 1), pre=st.integers(1, 512), levels=st.integers(1, 128)
    )
    @settings(max_examples=150)
    def test_scdq_no_worse_than_sharedq_closed_form(self, alpha, pre, levels):
        # (D^2+D)/2 >= 2D-1 for integer D >= 1, equality exactly at D in {1,2}
        sq, _ = mem_sharedq(alpha, pre, levels)
        sc, _ = mem_scdq(alpha, pre, levels)
        assert sc <= sq + 1e-9
        if levels > 2:
            assert sc < sq

    def test_scaling_sweep_endpoints_and_monotonicity(self):
        rows = scaling_sweep(level_counts=[1, 2, 16], widths=[48, 256])
        by_key = {(r["num_levels"], r["width"]): r for r in rows}
        assert by_key[(16, 256)]["sharedq_events"] == 34816
        assert by_key[(16, 256)]["scdq_events"] == 7936
        # D=1: both reduce to alpha * I
        assert by_key[(1, 48)]["sharedq_events"] == 48
        assert by_key[(1, 48)]["scdq_events"] == 48
        # monotone non-decreasing in both axes
        for field in ("sharedq_events", "scdq_events"):
            assert by_key[(2, 48)][field] >= by_key[(1, 48)][field]
            assert by_key[(16, 256)][field] >= by_key[(16, 48)][field] if (16, 48) in by_key else True
        sweep2 = scaling_sweep(level_counts=[4], widths=[16, 32])
        assert sweep2[1]["scdq_events"] >= sweep2[0]["scdq_events"]


class TestCompareTraces:
    def test_identical_sets(self):
        model = random_model(1)
        traces = [
            forward_dense(model, random_raster(model, s)) for s in range(5)
        ]
        report = compare_traces(traces, traces, labels=[t.prediction for t in traces])
        assert report.consistency == 100.0
        assert all(r == 0 for r in report.vmem_rmse)
        assert report.accuracy_ref == 100.0
        assert report.avg_spike_counts_ref == report.avg_spike_counts_test

    def test_scdq_vs_dense_full_consistency(self):
        model = random_model(2)
        rasters = [random_raster(model, s) for s in range(6)]
        ref = [forward_dense(model, r) for r in rasters]
        test = [forward_scdq(model, r) for r in rasters]
        report = compare_traces(ref, test)
        assert report.consistency == 100.0
        assert all(r == 0 for r in report.vmem_rmse)

    def test_length_mismatch(self):
        model = random_model(3)
        t = forward_dense(model, random_raster(model, 0))
        with pytest.raises(ValueError):
            compare_traces([t], [t, t])

    def test_confusion_matrices(self):
        model = random_model(4)
        traces = [forward_dense(model, random_raster(model, s)) for s in range(4)]
        labels = [0] * 4
        report = compare_traces(traces, traces, labels=labels)
        conf = np.array(report.confusion_ref)
        assert conf.sum() == 4
        assert (conf[0].sum()) == 4
