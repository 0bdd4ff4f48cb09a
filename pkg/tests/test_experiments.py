import math

import numpy as np
import pytest

from dressedsim.dynamics import BARE, DRESSED, haar_random_qubit_state
from dressedsim.experiments import (
    CircuitRow,
    DimensionBudgetExceeded,
    SweepSpec,
    convergence_study,
    run_circuit,
    run_sweep,
    verify_invariants,
)
from dressedsim.hilbert import TruncationPolicy
from dressedsim.model import ControlSegment, ModelParams


def fixed_spec(**kw):
    defaults = dict(
        mode_freqs=(2.0,),
        alpha_abs_grid=(0.0, 0.2, 0.4),
        truncation=TruncationPolicy.fixed(12),
    )
    defaults.update(kw)
    return SweepSpec(**defaults)


def circuit_params(n_qubits=1, alpha=0.3, n_max=10):
    return ModelParams(
        qubit_freqs=(2.0,) * n_qubits,
        mode_freqs=(2.0,),
        couplings=(alpha,),
        beta=1.0,
        truncation=TruncationPolicy.fixed(n_max),
    )


class TestSweepSpec:
    def test_rejects_empty_grids(self):
        with pytest.raises(ValueError):
            SweepSpec(mode_freqs=())
        with pytest.raises(ValueError):
            SweepSpec(alpha_abs_grid=())

    def test_rejects_negative_alpha(self):
        with pytest.raises(ValueError):
            SweepSpec(alpha_abs_grid=(-0.1,))

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            SweepSpec(t_final=0.0)


class TestRunSweep:
    def test_zero_coupling_rows_are_exact(self):
        rows = run_sweep(fixed_spec(alpha_abs_grid=(0.0,), mode_freqs=(0.01, 2.0, 10.0)))
        assert len(rows) == 3
        for r in rows:
            assert abs(r.fidelity - 1.0) < 1e-9
            assert r.trace_error < 1e-12

    def test_grid_order_preserved(self):
        spec = fixed_spec(mode_freqs=(2.0, 10.0), alpha_abs_grid=(0.0, 0.3))
        rows = run_sweep(spec)
        assert [(r.omega_b, r.alpha_abs) for r in rows] == [
            (2.0, 0.0),
            (2.0, 0.3),
            (10.0, 0.0),
            (10.0, 0.3),
        ]

    def test_deterministic_per_seed(self):
        spec = fixed_spec()
        a = run_sweep(spec)
        b = run_sweep(spec)
        assert [r.fidelity for r in a] == [r.fidelity for r in b]
        c = run_sweep(fixed_spec(seed=7))
        assert [r.fidelity for r in a] != [r.fidelity for r in c]

    def test_workers_agree_with_serial(self):
        spec = fixed_spec()
        serial = run_sweep(spec, workers=1)
        parallel = run_sweep(spec, workers=3)
        assert [r.fidelity for r in serial] == [r.fidelity for r in parallel]

    def test_failed_row_is_isolated(self):
        # the sub-resonant row cannot satisfy a tiny hard cap; the others
        # must still come back clean
        spec = SweepSpec(
            mode_freqs=(0.01, 2.0),
            alpha_abs_grid=(0.2,),
            truncation=TruncationPolicy.adaptive(hard_cap=64),
        )
        rows = run_sweep(spec)
        assert rows[0].error is not None and math.isnan(rows[0].fidelity)
        assert rows[1].error is None and rows[1].fidelity > 0.9

    def test_dressed_readout_is_exact(self):
        rows = run_sweep(fixed_spec(readout=DRESSED, alpha_abs_grid=(0.0, 0.3, 0.5)))
        for r in rows:
            assert abs(r.fidelity - 1.0) < 1e-9

    def test_fast_mode_rescales_heavy_rows(self):
        spec = SweepSpec(
            mode_freqs=(0.01,), alpha_abs_grid=(0.2,), fast=True,
            truncation=TruncationPolicy.adaptive(),
        )
        rows = run_sweep(spec)
        assert rows[0].error is None
        assert rows[0].n_max <= 200  # far below the faithful 900+ levels


class TestRunCircuit:
    def test_empty_circuit_reports_initial_fidelity(self):
        rows = run_circuit([], circuit_params(), readout=DRESSED)
        assert len(rows) == 1
        assert rows[0].segment == 0 and rows[0].elapsed == 0.0
        assert abs(rows[0].fidelity - 1.0) < 1e-9

    def test_dressed_readout_tracks_ideal(self):
        segs = [
            ControlSegment(duration=math.pi / 4.0, eta=(1.0,)),
            ControlSegment(duration=1.0),
        ]
        rows = run_circuit(segs, circuit_params(), readout=DRESSED)
        assert [r.segment for r in rows] == [0, 1, 2]
        for r in rows:
            assert abs(r.fidelity - 1.0) < 1e-9

    def test_two_qubit_entangling_segment(self):
        segs = [
            ControlSegment(duration=0.5, eta=(1.0, 0.0)),
            ControlSegment(duration=0.5, jj={(0, 1): 0.5}),
        ]
        rows = run_circuit(segs, circuit_params(n_qubits=2, n_max=8), readout=DRESSED)
        for r in rows:
            assert abs(r.fidelity - 1.0) < 1e-9

    def test_elapsed_accumulates(self):
        segs = [ControlSegment(duration=0.5), ControlSegment(duration=0.25)]
        rows = run_circuit(segs, circuit_params(), readout=DRESSED)
        assert [r.elapsed for r in rows] == [0.0, 0.5, 0.75]

    def test_three_qubits_rejected(self):
        p = ModelParams(
            (2.0,) * 3, (2.0,), (0.1,), 1.0, TruncationPolicy.fixed(4)
        )
        with pytest.raises(DimensionBudgetExceeded):
            run_circuit([], p)

    def test_bad_segment_rejected_up_front(self):
        segs = [ControlSegment(duration=1.0, eta=(1.0, 0.0))]
        with pytest.raises(Exception):
            run_circuit(segs, circuit_params(n_qubits=1))

    def test_explicit_initial_state(self):
        psi0 = haar_random_qubit_state(11, 1)
        rows = run_circuit([], circuit_params(), readout=DRESSED, psi0=psi0)
        assert abs(rows[0].fidelity - 1.0) < 1e-9


class TestConvergenceStudy:
    def test_requires_increasing_cutoffs(self):
        with pytest.raises(ValueError):
            convergence_study(fixed_spec(), [16, 8])

    def test_zero_coupling_converged_everywhere(self):
        spec = fixed_spec(alpha_abs_grid=(0.0,))
        rows = convergence_study(spec, [4, 8])
        for r in rows:
            assert abs(r.fidelity - 1.0) < 1e-9

    def test_doubling_shrinks_change(self):
        spec = fixed_spec(alpha_abs_grid=(0.3,))
        rows = convergence_study(spec, [4, 8, 16])
        f = {r.n_max: r.fidelity for r in rows}
        assert abs(f[8] - f[16]) < abs(f[4] - f[8])
        assert abs(f[8] - f[16]) < 1e-6


class TestVerifyInvariants:
    def test_all_checks_pass(self):
        report = verify_invariants()
        assert report.passed
        names = [c.name for c in report.checks]
        assert "frame_identity" in names
        assert "dressed_readout_exact" in names
        assert len(names) == len(set(names))

    def test_report_serialises(self):
        d = verify_invariants().to_dict()
        assert d["passed"] is True
        assert all({"name", "value", "threshold", "passed"} <= set(c) for c in d["checks"])

    def test_injected_fault_is_caught(self):
        report = verify_invariants(inject_nonhermitian=True)
        assert not report.passed
        failed = [c.name for c in report.checks if not c.passed]
        assert failed == ["hamiltonian_hermitian"]
