"""The phase-qubit abstraction: single-use tokens |psi_k> ~ |0> + e^(2 pi i ks/N)|1>
and every measurement the sieve algorithms use.

The hidden slope is consulted only inside measurement sampling, through a
module-internal hook on the oracle.  Algorithm code sees labels and
measurement outcomes, nothing else.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    BackendMismatchError,
    InsufficientCopiesError,
    QubitConsumedError,
)
from .group import GroupCtx


class PhaseQubit:
    """Single-use phase qubit with a known label.

    classical is set for corrupted qubits that carry no phase information;
    every measurement on them is a fair coin.  minus_branch records, for
    qubits produced by combine, which extraction branch occurred (it is
    classical information revealed by the extraction measurement).
    """

    __slots__ = ("label", "backend", "classical", "consumed", "minus_branch")

    def __init__(self, label, backend, classical=False, minus_branch=None):
        self.label = label
        self.backend = backend
        self.classical = classical
        self.consumed = False
        self.minus_branch = minus_branch

    def _consume(self):
        if self.consumed:
            raise QubitConsumedError("phase qubit already consumed")
        self.consumed = True

    def __repr__(self):
        state = "consumed" if self.consumed else "live"
        return f"PhaseQubit(label={self.label}, {state})"


class PhaseBackend:
    """One oracle plus one RNG stream: the per-trial quantum backend.

    coin_bias and phase_sign exist only for fault injection in the
    verification suite; the defaults are the honest physics.
    """

    def __init__(self, oracle, rng=None, seed=None, coin_bias=0.5,
                 phase_sign=1):
        self.oracle = oracle
        if rng is None:
            rng = np.random.default_rng(seed)
        self.rng = rng
        self.coin_bias = coin_bias
        self.phase_sign = phase_sign
        self.combines = 0

    # -- label arithmetic -------------------------------------------------

    @property
    def _dihedral(self):
        return isinstance(self.oracle.ctx, GroupCtx)

    def label_add(self, k, l):
        if self._dihedral:
            return (k + l) % self.oracle.ctx.N
        return self.oracle.ctx.add(k, l)

    def label_neg(self, k):
        if self._dihedral:
            return (-k) % self.oracle.ctx.N
        return self.oracle.ctx.neg(k)

    # -- sampling ---------------------------------------------------------

    def _random_label(self):
        if self._dihedral:
            N = self.oracle.ctx.N
            if N.bit_length() <= 62:
                return int(self.rng.integers(0, N))
            nbytes = (N.bit_length() + 64) // 8
            return int.from_bytes(self.rng.bytes(nbytes), "little") % N
        return tuple(int(self.rng.integers(0, n))
                     for n in self.oracle.ctx.orders)

    def _turns(self, label):
        t = self.oracle._phase_turns(label)
        if self.phase_sign < 0:
            t = (-t) % 1.0
        return t

    def _ref_turns(self, label, t):
        if self._dihedral:
            N = self.oracle.ctx.N
            return ((label * t) % N) / N
        total = 0.0
        for k, tj, n in zip(label, t, self.oracle.ctx.orders):
            total += ((k * tj) % n) / n
        return total % 1.0


def sample_phase_qubit(backend):
    """Draw one phase qubit: uniform label, one oracle query; corrupted
    oracles yield a classical qubit with probability corruption_rate."""
    o = backend.oracle
    o._counter.bump()
    label = backend._random_label()
    classical = False
    rate = float(o.corruption_rate)
    if rate > 0.0:
        classical = bool(backend.rng.random() < rate)
    return PhaseQubit(label, backend, classical=classical)


def sample_batch(backend, count):
    """Vectorized bulk sampling; semantics identical to count calls of
    sample_phase_qubit."""
    o = backend.oracle
    o._counter.bump(count)
    rate = float(o.corruption_rate)
    flags = (backend.rng.random(count) < rate) if rate > 0.0 else None
    qubits = []
    if backend._dihedral and o.ctx.N.bit_length() <= 62:
        labels = backend.rng.integers(0, o.ctx.N, size=count)
        for i in range(count):
            qubits.append(PhaseQubit(int(labels[i]), backend,
                                     classical=bool(flags[i]) if flags is not None else False))
    else:
        for i in range(count):
            qubits.append(PhaseQubit(backend._random_label(), backend,
                                     classical=bool(flags[i]) if flags is not None else False))
    return qubits


def combine(q1, q2):
    """Extract one qubit from two: the result label is k+l or k-l, an
    unbiased choice revealed by the extraction measurement.  Consumes both
    inputs; corruption propagates by OR."""
    if q1.backend is not q2.backend:
        raise BackendMismatchError("qubits belong to different backends")
    q1._consume()
    q2._consume()
    be = q1.backend
    be.combines += 1
    minus = bool(be.rng.random() >= be.coin_bias)
    if minus:
        label = be.label_add(q1.label, be.label_neg(q2.label))
    else:
        label = be.label_add(q1.label, q2.label)
    return PhaseQubit(label, be, classical=q1.classical or q2.classical,
                      minus_branch=minus)


def negate_label(q):
    """Relabel k -> -k; the states are information-equivalent (bit flip)."""
    q._consume()
    return PhaseQubit(q.backend.label_neg(q.label), q.backend,
                      classical=q.classical, minus_branch=q.minus_branch)


def measure_pm(q):
    """Measure in the |+->/|-> basis; returns 0 for "+" (probability
    cos^2(pi k s / N)) and 1 for "-".  Consumes the qubit."""
    q._consume()
    be = q.backend
    if q.classical:
        p_plus = 0.5
    else:
        p_plus = math.cos(math.pi * be._turns(q.label)) ** 2
    return 0 if be.rng.random() < p_plus else 1


def cosine_observe(q, t):
    """A coin with bias cos^2(pi (s - t) k / N): measure against the
    reference slope t.  Returns 1 with that probability; consumes q."""
    q._consume()
    be = q.backend
    if q.classical:
        p_one = 0.5
    else:
        delta = be._turns(q.label) - be._ref_turns(q.label, t)
        p_one = math.cos(math.pi * delta) ** 2
    return 1 if be.rng.random() < p_one else 0


def phase_estimation_kernel(theta, M):
    """Exact measurement distribution of the binary-register readout:
    P(t) = (1/M^2) sin^2(pi M d) / sin^2(pi d), d = theta - t/M."""
    t = np.arange(M)
    delta = theta - t / M
    num = np.sin(np.pi * M * delta)
    den = M * np.sin(np.pi * delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = (num / den) ** 2
    p[np.abs(np.sin(np.pi * delta)) < 1e-12] = 1.0
    total = p.sum()
    if not math.isfinite(total) or total <= 0:
        raise ArithmeticError("degenerate readout kernel")
    return p / total


def hoyer_readout(qs):
    """Joint Fourier readout of the binary-weighted register
    psi_1, psi_2, ..., psi_{2^kappa}: samples t with t/M ~ s/N where
    M = 2^(kappa+1).  Consumes all qubits."""
    if not qs:
        raise ValueError("empty register")
    be = qs[0].backend
    labels = sorted(q.label for q in qs)
    kappa = len(qs) - 1
    if labels != [1 << j for j in range(kappa + 1)]:
        raise ValueError("register must hold labels 1, 2, 4, ..., 2^kappa")
    for q in qs:
        if q.backend is not be:
            raise BackendMismatchError("mixed backends in readout register")
        if q.classical:
            raise ValueError("classical qubit in readout register")
    for q in qs:
        q._consume()
    M = 1 << (kappa + 1)
    theta = be._turns(1)  # s/N as a fraction of a turn
    p = phase_estimation_kernel(theta, M)
    return int(be.rng.choice(M, p=p))


def tomography_copies_needed(r, delta=0.02):
    """Copies required for the maximum-likelihood residue readout to fail
    with probability at most delta."""
    if r <= 2:
        return 1
    return math.ceil(2 * r * math.log(r / delta))


def tomography_mod_r(qs, r, delta=0.02):
    """Read s mod r from qubits whose labels are multiples of N/r, by
    maximum likelihood over repeated cosine observations at references
    spanning quadratures.  Consumes all qubits."""
    if r == 1:
        for q in qs:
            q._consume()
        return 0
    if not qs:
        raise InsufficientCopiesError("no copies supplied")
    be = qs[0].backend
    if not be._dihedral:
        raise TypeError("residue tomography applies to dihedral backends")
    N = be.oracle.ctx.N
    if N % r != 0:
        raise ValueError("radix must divide N")
    step = N // r
    weights = []
    for q in qs:
        if q.label % step != 0:
            raise ValueError("label is not a multiple of N/r")
        weights.append(q.label // step)

    if r == 2:
        votes = [measure_pm(q) for q, a in zip(qs, weights) if a % 2 == 1]
        if not votes:
            raise InsufficientCopiesError("no odd-weight copies for parity")
        return int(sum(votes) * 2 >= len(votes))

    needed = tomography_copies_needed(r, delta)
    if len(qs) < needed:
        raise InsufficientCopiesError(
            f"need at least {needed} copies for r={r}, got {len(qs)}")

    # quadrature references: 0 and odd multiples of floor(N/(2r))
    q_step = max(1, N // (2 * r))
    refs = [0] + [((2 * i + 1) * q_step) % N for i in range(r)]
    obs = []
    for i, q in enumerate(qs):
        t = refs[i % len(refs)]
        obs.append((weights[i], t, cosine_observe(q, t)))

    eps = 1e-9
    best_c, best_ll = 0, -math.inf
    for c in range(r):
        ll = 0.0
        for a, t, bit in obs:
            delta_turns = ((a * c) % r) / r - ((t * a * step) % N) / N
            p = math.cos(math.pi * delta_turns) ** 2
            p = min(1 - eps, max(eps, p))
            ll += math.log(p) if bit else math.log(1 - p)
        if ll > best_ll:
            best_c, best_ll = c, ll
    return best_c


def sample_measure_batch(backend, count, t=0):
    """Fast path for the verification suite: count independent draws of
    (label, measure outcome against reference slope t), vectorized.

    Same probability law as sample_phase_qubit followed by measure_pm
    (t=0) or cosine_observe (general t), with the outcome convention of
    measure_pm: 0 has probability cos^2.  Costs count queries."""
    o = backend.oracle
    if not backend._dihedral:
        raise TypeError("batch sampling is dihedral-only")
    N = o.ctx.N
    if N.bit_length() > 30:
        raise ValueError("batch path is for small N")
    o._counter.bump(count)
    labels = backend.rng.integers(0, N, size=count)
    turns = ((labels * o._slope) % N) / N
    if backend.phase_sign < 0:
        turns = (-turns) % 1.0
    if t:
        turns = turns - ((labels * t) % N) / N
    p_plus = np.cos(np.pi * turns) ** 2
    rate = float(o.corruption_rate)
    if rate > 0.0:
        classical = backend.rng.random(count) < rate
        p_plus = np.where(classical, 0.5, p_plus)
    bits = (backend.rng.random(count) >= p_plus).astype(np.int64)
    return labels, bits
