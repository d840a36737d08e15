"""Staged sieves: list-size schedule, suffix matching, the parity sieve
over D_{2^n}, and the interval sieve with quadrature readout."""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from dhsieve.errors import SieveExhaustedError
from dhsieve.group import GroupCtx
from dhsieve.oracle import make_reflection_oracle
from dhsieve.phase import PhaseBackend, combine, sample_batch
from dhsieve.staged import (
    estimate_from_quadratures,
    interval_config,
    interval_sieve,
    list_size_constants,
    list_size_schedule,
    match_by_suffix,
    run_general_interval,
    run_staged_parity,
    stage_windows,
    staged_config,
)


def backend(N, s, seed=0):
    return PhaseBackend(make_reflection_oracle(GroupCtx(N), s),
                        rng=np.random.default_rng(seed))


def test_schedule_constants():
    C = list_size_constants(1)
    assert C[0] == 3.0
    assert abs(C[1] - 5.22389) < 2e-3  # 3/(1 - 2^(-4/3)) + 1/4
    for m in (1, 2, 5, 17, 64):
        C = list_size_constants(m)
        assert all(b >= a for a, b in zip(C, C[1:]))
        assert all(b > a for a, b in zip(C[:4], C[1:4]))  # strict early on
        assert C[-1] < 9.0


def test_schedule_initial_size():
    C, size = list_size_schedule(3)
    assert size == 3 * 2 ** 9


def test_staged_config_m():
    assert staged_config(2).m == 1
    assert staged_config(8).m == 3
    assert staged_config(10).m == 3
    assert staged_config(17).m == 4
    with pytest.raises(ValueError):
        staged_config(1)


def test_stage_windows_cover_and_cap():
    for n, m in ((8, 3), (12, 4), (10, 3), (2, 1)):
        ws = stage_windows(n, m)
        assert ws[0][0] == 0 and ws[-1][1] == n - 1
        for (a, b), (c, _) in zip(ws, ws[1:]):
            assert b == c
        assert all(b - a <= m for a, b in ws)


def test_match_by_suffix_frozen_example():
    qs = [SimpleNamespace(label=l) for l in (0b0100, 0b1100, 0b0110)]
    pairs, left = match_by_suffix(qs, (2, 3))
    assert len(pairs) == 1
    assert {pairs[0][0].label, pairs[0][1].label} == {0b0100, 0b1100}
    assert [q.label for q in left] == [0b0110]


def test_match_by_suffix_bounds():
    rng = np.random.default_rng(2)
    qs = [SimpleNamespace(label=int(x))
          for x in rng.integers(0, 1 << 16, size=10 ** 4)]
    pairs, left = match_by_suffix(qs, (0, 3))
    assert len(left) <= 2 ** 3
    assert 2 * len(pairs) + len(left) == 10 ** 4
    for a, b in pairs:
        assert (a.label ^ b.label) & 0b111 == 0
    assert match_by_suffix([], (0, 3)) == ([], [])


def test_stage_invariant_trailing_zeros():
    # white-box pass over one sieve stage sequence: after matching
    # window (lo, hi) and keeping difference-form results, survivors are
    # divisible by 2^hi
    n, N = 8, 256
    be = backend(N, 77, seed=3)
    current = sample_batch(be, 1536)
    for lo, hi in stage_windows(n, 3):
        pairs, _ = match_by_suffix(current, (lo, hi))
        nxt = []
        for kq, lq in pairs:
            out = combine(kq, lq)
            if out.minus_branch or (2 * lq.label) % N == 0:
                nxt.append(out)
        for q in nxt:
            assert q.label % (1 << hi) == 0
        current = nxt
    assert all(q.label in (0, 128) for q in current)


@pytest.mark.parametrize("n", [2, 3, 4, 6, 8, 10])
def test_staged_parity_correct(n):
    rng = np.random.default_rng(n)
    hits = trials = 0
    for _ in range(12):
        s = int(rng.integers(0, 1 << n))
        be = PhaseBackend(make_reflection_oracle(GroupCtx(1 << n), s), rng=rng)
        try:
            bit, st = run_staged_parity(be, n)
        except SieveExhaustedError:
            continue
        trials += 1
        hits += bit == s % 2
        assert st.queries_used <= 3 * 2 ** (3 * staged_config(n).m) + 64
    assert trials > 0 and hits == trials


def test_staged_parity_group_mismatch():
    with pytest.raises(ValueError):
        run_staged_parity(backend(12, 5), 4)


def test_unbiased_top_label():
    # among final-list labels, 2^(n-1) vs 0 is a fair coin
    n, N = 8, 256
    rng = np.random.default_rng(4)
    tops = finals = 0
    for _ in range(40):
        be = PhaseBackend(make_reflection_oracle(GroupCtx(N), 99), rng=rng)
        current = sample_batch(be, 1536)
        for lo, hi in stage_windows(n, 3):
            pairs, _ = match_by_suffix(current, (lo, hi))
            current = [out for kq, lq in pairs
                       for out in [combine(kq, lq)]
                       if out.minus_branch or (2 * lq.label) % N == 0]
        finals += len(current)
        tops += sum(q.label == 128 for q in current)
    frac = tops / finals
    assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / finals)


def test_interval_config():
    m, size = interval_config(1000)
    assert m == math.ceil(math.sqrt(math.log2(1000) - 2))
    assert size == int(3 * 2 ** (3 * m))


def test_interval_sieve_yields_psi1():
    be = backend(360, 123, seed=5)
    ones, st = interval_sieve(be)
    assert ones and all(q.label == 1 and not q.consumed for q in ones)
    assert st.queries_used == interval_config(360)[1]


def test_general_interval_estimate_quality():
    # circular error <= N/4 in at least 2/3 of trials
    N = 1000
    rng = np.random.default_rng(6)
    good = trials = 0
    for _ in range(45):
        s = int(rng.integers(0, N))
        be = PhaseBackend(make_reflection_oracle(GroupCtx(N), s), rng=rng)
        try:
            est, _ = run_general_interval(be)
        except SieveExhaustedError:
            continue
        trials += 1
        good += min((est - s) % N, (s - est) % N) <= N / 4
    assert trials >= 40
    assert good / trials >= 2 / 3


def test_general_interval_zero_secret():
    be = backend(512, 0, seed=7)
    est, _ = run_general_interval(be)
    assert min(est, 512 - est) <= 512 // 8


def test_quadrature_estimator_exact_bias():
    # with exact (noise-free) observation frequencies the quadrature
    # algebra inverts the angle exactly
    N, s = 400, 137
    tq = N // 4
    phi = 2 * math.pi * s / N
    f0 = (1 + math.cos(phi)) / 2
    fq = (1 + math.cos(phi - 2 * math.pi * tq / N)) / 2
    gamma = 2 * math.pi * tq / N
    cos_phi = 2 * f0 - 1
    sin_phi = (2 * fq - 1 - cos_phi * math.cos(gamma)) / math.sin(gamma)
    est = round(math.atan2(sin_phi, cos_phi) / (2 * math.pi) * N) % N
    assert est == s
