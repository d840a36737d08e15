"""Phase qubits and measurements: single-use discipline, extraction label
arithmetic, and measurement laws cross-checked against the dense state
vectors (an independent computation path)."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dhsieve.errors import (
    BackendMismatchError,
    InsufficientCopiesError,
    QubitConsumedError,
)
from dhsieve.group import GroupCtx
from dhsieve.oracle import make_reflection_oracle, make_trivial_oracle
from dhsieve.phase import (
    PhaseBackend,
    PhaseQubit,
    combine,
    cosine_observe,
    hoyer_readout,
    measure_pm,
    negate_label,
    phase_estimation_kernel,
    sample_batch,
    sample_measure_batch,
    sample_phase_qubit,
    tomography_copies_needed,
    tomography_mod_r,
)
from dhsieve.statevec import cosine_overlap_sim, psi_vector


def backend(N, s, seed=0, **kw):
    return PhaseBackend(make_reflection_oracle(GroupCtx(N), s),
                        rng=np.random.default_rng(seed), **kw)


def test_single_use():
    be = backend(16, 5)
    q = sample_phase_qubit(be)
    measure_pm(q)
    with pytest.raises(QubitConsumedError):
        measure_pm(q)
    q2, q3 = sample_batch(be, 2)
    combine(q2, q3)
    with pytest.raises(QubitConsumedError):
        cosine_observe(q2, 0)


def test_backend_mismatch():
    q1 = sample_phase_qubit(backend(16, 5, seed=1))
    q2 = sample_phase_qubit(backend(16, 5, seed=2))
    with pytest.raises(BackendMismatchError):
        combine(q1, q2)


def test_sampling_costs_queries():
    be = backend(32, 3)
    sample_batch(be, 10)
    sample_phase_qubit(be)
    assert be.oracle.queries == 11


def test_combine_label_arithmetic():
    be = backend(16, 5, seed=3)
    plus = minus = 0
    for _ in range(2000):
        q1, q2 = sample_batch(be, 2)
        k, l = q1.label, q2.label
        out = combine(q1, q2)
        if out.minus_branch:
            assert out.label == (k - l) % 16
            minus += 1
        else:
            assert out.label == (k + l) % 16
            plus += 1
    # branch is a fair coin: 4 sigma band
    assert abs(minus / 2000 - 0.5) < 4 * math.sqrt(0.25 / 2000)


def test_negate_label():
    be = backend(16, 5)
    q = PhaseQubit(3, be)
    q2 = negate_label(q)
    assert q2.label == 13 and q.consumed and not q2.consumed


def test_measure_pm_law_vs_dense_states():
    # the outcome bias equals the fidelity with the reference state,
    # computed from explicit state vectors (independent of the sampler)
    N, s, k = 16, 5, 3
    be = backend(N, s, seed=4)
    n = 20000
    zeros = sum(measure_pm(PhaseQubit(k, be)) == 0 for _ in range(n))
    p = psi_vector(N, s, k).fidelity(psi_vector(N, 0, k))
    assert abs(zeros / n - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_cosine_observe_law_vs_dense_states():
    N, s, k, t = 24, 7, 5, 3
    be = backend(N, s, seed=5)
    n = 20000
    ones = sum(cosine_observe(PhaseQubit(k, be), t) for _ in range(n))
    p = cosine_overlap_sim(N, k, s, t)
    assert abs(ones / n - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_corrupted_qubits_are_coins():
    be = PhaseBackend(make_trivial_oracle(GroupCtx(16)),
                      rng=np.random.default_rng(6))
    qs = sample_batch(be, 4000)
    assert all(q.classical for q in qs)
    ones = sum(measure_pm(q) for q in qs)
    assert abs(ones / 4000 - 0.5) < 4 * math.sqrt(0.25 / 4000)


@given(st.integers(1, 64), st.floats(0, 0.999))
def test_kernel_is_a_distribution(M, theta):
    p = phase_estimation_kernel(theta, M)
    assert p.shape == (M,)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) < 1e-9


def test_kernel_peaks_at_nearest_fraction():
    p = phase_estimation_kernel(5 / 16, 16)
    assert int(np.argmax(p)) == 5


def test_hoyer_readout_register_validation():
    be = backend(16, 5)
    with pytest.raises(ValueError):
        hoyer_readout([PhaseQubit(1, be), PhaseQubit(3, be)])
    with pytest.raises(ValueError):
        hoyer_readout([])


def test_hoyer_readout_distribution():
    N, s, kappa = 16, 5, 2
    M = 1 << (kappa + 1)
    be = backend(N, s, seed=7)
    counts = np.zeros(M)
    n = 6000
    for _ in range(n):
        counts[hoyer_readout([PhaseQubit(1 << j, be)
                              for j in range(kappa + 1)])] += 1
    tv = 0.5 * np.abs(counts / n - phase_estimation_kernel(s / N, M)).sum()
    assert tv < 0.04


def test_tomography_r2_parity():
    for s in (5, 12):
        be = backend(32, s, seed=8)
        qs = [PhaseQubit(16, be) for _ in range(25)]
        assert tomography_mod_r(qs, 2) == s % 2


def test_tomography_r3():
    N = 3 ** 4
    for s in (17, 30, 55):
        be = backend(N, s, seed=9)
        need = tomography_copies_needed(3)
        qs = [PhaseQubit((N // 3) * (1 + i % 2), be) for i in range(need)]
        assert tomography_mod_r(qs, 3) == s % 3


def test_tomography_insufficient():
    be = backend(27, 5)
    with pytest.raises(InsufficientCopiesError):
        tomography_mod_r([PhaseQubit(9, be)], 3)
    with pytest.raises(InsufficientCopiesError):
        tomography_mod_r([], 2)


def test_tomography_r1_trivial():
    be = backend(8, 3)
    assert tomography_mod_r([PhaseQubit(4, be)], 1) == 0


def test_sample_measure_batch_same_law():
    N, s = 16, 9
    be = backend(N, s, seed=10)
    labels, bits = sample_measure_batch(be, 50000)
    # label marginal uniform
    counts = np.bincount(labels, minlength=N) / 50000
    assert np.abs(counts - 1 / N).max() < 0.01
    # conditional zero-rate matches the closed form
    for k in (1, 5, 11):
        sel = bits[labels == k]
        p = math.cos(math.pi * ((k * s) % N) / N) ** 2
        assert abs((sel == 0).mean() - p) < 5 * math.sqrt(0.25 / len(sel))


def test_fault_hooks_change_the_law():
    # these knobs exist for the verification suite's mutation tests
    N, s, k, t = 16, 5, 3, 2
    be = backend(N, s, seed=11, phase_sign=-1)
    n = 8000
    ones = sum(cosine_observe(PhaseQubit(k, be), t) for _ in range(n))
    honest = math.cos(math.pi * (((s - t) * k) % N) / N) ** 2
    flipped = math.cos(math.pi * (((-s - t) * k) % N) / N) ** 2
    assert abs(ones / n - flipped) < 0.03
    assert abs(honest - flipped) > 0.2  # the fault is observable
