"""Hiding oracles: deterministic reflection oracles, hidden shift pairs,
hidden substring instances and their spliced approximations.

The secret slope/shift is sealed inside the oracle object: the public
surface exposes only evaluation (with query counting) and metadata.  The
phase-qubit backend reads the secret through a module-internal hook when
it samples measurement outcomes, mirroring the fact that only the quantum
process ever "touches" the hidden subgroup.

Oracle values are opaque fixed-width tokens: keyed hashes of a coset
representative.  Two evaluations agree exactly when the arguments lie in
the same coset.
"""

from __future__ import annotations

import hashlib
import secrets as _secrets
from dataclasses import dataclass
from fractions import Fraction

from .errors import SimonCaseError
from .group import (
    AbelianGroupSpec,
    DihedralElement,
    GroupCtx,
    subgroup_embed,
)


@dataclass(frozen=True)
class OracleValue:
    """Opaque token; equality means same coset."""

    tag: bytes

    def __repr__(self):
        return f"OracleValue({self.tag.hex()})"


class _Counter:
    """Monotone query counter, shareable between an oracle and the
    derived oracles (restrictions, automorphism wrappers) built on it."""

    __slots__ = ("value",)

    def __init__(self):
        self.value = 0

    def bump(self, n=1):
        self.value += n


class _Tokenizer:
    """Keyed injective encoding of coset representatives."""

    __slots__ = ("_key",)

    def __init__(self, key=None):
        self._key = key if key is not None else _secrets.token_bytes(16)

    def __call__(self, rep):
        h = hashlib.blake2b(repr(rep).encode(), digest_size=12, key=self._key)
        return OracleValue(h.digest())


class HidingOracle:
    """A function on D_N (or D_A) constant exactly on cosets of the hidden
    reflection subgroup, with a query counter and an optional corruption
    rate for spliced approximations."""

    def __init__(self, ctx, slope, eval_fn, corruption_rate=Fraction(0),
                 counter=None):
        self.ctx = ctx
        self.corruption_rate = Fraction(corruption_rate)
        if not 0 <= self.corruption_rate <= 1:
            raise ValueError("corruption_rate must lie in [0, 1]")
        self._slope = slope
        self._eval = eval_fn
        self._counter = counter if counter is not None else _Counter()

    @property
    def queries(self):
        return self._counter.value

    def evaluate(self, element):
        """Evaluate the hiding function; costs one query."""
        self._counter.bump()
        return self._eval(element)

    def to_dict(self):
        """Serializable description; the secret is deliberately omitted."""
        if isinstance(self.ctx, GroupCtx):
            group = {"kind": "dihedral", "N": self.ctx.N}
        else:
            group = {"kind": "generalized", "orders": list(self.ctx.orders)}
        return {
            "group": group,
            "corruption_rate": [self.corruption_rate.numerator,
                                self.corruption_rate.denominator],
            "queries": self.queries,
        }

    def __repr__(self):
        return f"HidingOracle({self.to_dict()!r})"

    # -- backend hook (not part of the algorithm-facing API) --

    def _phase_turns(self, label):
        """Phase of the qubit |psi_label> as a fraction of a full turn."""
        if isinstance(self.ctx, GroupCtx):
            return ((label * self._slope) % self.ctx.N) / self.ctx.N
        total = 0.0
        for k, s, n in zip(label, self._slope, self.ctx.orders):
            total += ((k * s) % n) / n
        return total % 1.0


def make_reflection_oracle(ctx, s):
    """Oracle hiding H = <y x^s> in D_N: f(y^t x^b) = token((b - t*s) mod N)."""
    if isinstance(ctx, GroupCtx):
        N = ctx.N
        if not 0 <= s < N:
            raise ValueError("slope out of range")
        tok = _Tokenizer()

        def ev(e):
            return tok((e.b - e.t * s) % N)

        return HidingOracle(ctx, s, ev)
    # generalized dihedral: s is a coordinate vector
    s = ctx.reduce(s)
    tok = _Tokenizer()

    def ev(e):
        b = e.b
        if e.t:
            b = ctx.add(b, ctx.neg(s))
        return tok(b)

    return HidingOracle(ctx, s, ev)


def make_trivial_oracle(ctx):
    """Injective oracle: the hidden subgroup is trivial, so every sampled
    qubit carries no phase information (corruption rate 1)."""
    tok = _Tokenizer()
    zero = 0 if isinstance(ctx, GroupCtx) else ctx.zero
    return HidingOracle(ctx, zero, lambda e: tok((e.t, e.b)),
                        corruption_rate=Fraction(1))


# ---------------------------------------------------------------------------
# Hidden shift pairs


class ShiftPair:
    """Two injective functions f, g on an abelian group A with
    f(a) = g(a + s).  The shift s is sealed; f and g count queries.

    For truncated free summands the shift relation holds except on the
    wrap-around window, exactly like a spliced approximation.
    """

    def __init__(self, A, shift, f_fn, g_fn, counter=None):
        self.A = A
        self._shift = A.reduce(shift)
        self._f = f_fn
        self._g = g_fn
        self._counter = counter if counter is not None else _Counter()

    @property
    def queries(self):
        return self._counter.value

    def f(self, a):
        self._counter.bump()
        return self._f(self.A.reduce(a))

    def g(self, a):
        self._counter.bump()
        return self._g(self.A.reduce(a))

    def to_dict(self):
        return {"orders": list(self.A.orders), "queries": self.queries}

    def truncation_corruption(self):
        """Fraction of cosets broken by truncating free summands."""
        broken = Fraction(0)
        ntrunc = self.A.free_rank
        if ntrunc == 0:
            return broken
        good = Fraction(1)
        for j in range(self.A.rank - ntrunc, self.A.rank):
            good *= 1 - Fraction(self._shift[j], self.A.orders[j])
        return 1 - good


def make_shift_pair(A, shift):
    """Standard injective hidden-shift instance on A with the given shift.

    Truncated free summands are shifted without wrapping, so the pair only
    approximately hides the shift there (the wrap window is broken).
    """
    shift = A.reduce(shift)
    tok = _Tokenizer()
    ntrunc = A.free_rank
    cut = A.rank - ntrunc

    def g_fn(a):
        return tok(tuple(a))

    def f_fn(a):
        out = []
        for j, (v, s, n) in enumerate(zip(a, shift, A.orders)):
            if j < cut:
                out.append((v + s) % n)
            else:
                out.append(v + s)  # no wrap: fresh value past the window
        return tok(tuple(out))

    return ShiftPair(A, shift, f_fn, g_fn)


def shift_to_dihedral(p):
    """Reduce a hidden shift pair on A to a hidden reflection oracle on
    the generalized dihedral group: h(x^a) = f(a), h(y x^a) = g(a).

    The resulting oracle hides <y x^s> where s is the pair's shift.  For a
    rank-1 group the oracle is returned over the plain dihedral group D_N.
    """
    A = p.A
    rank1 = A.rank == 1

    if rank1:
        N = A.orders[0]
        ctx = GroupCtx(N)
        slope = p._shift[0]

        def ev(e):
            if e.t:
                return p._g((e.b % N,))
            return p._f((e.b % N,))

    else:
        ctx = A
        slope = p._shift

        def ev(e):
            if e.t:
                return p._g(A.reduce(e.b))
            return p._f(A.reduce(e.b))

    return HidingOracle(ctx, slope, ev,
                        corruption_rate=p.truncation_corruption(),
                        counter=p._counter)


class ReflectionFunction:
    """A function h on an abelian group A, injective except for the
    relation h(a) = h(s - a); the hidden reflection inside A itself."""

    def __init__(self, A, s, h_fn, counter=None):
        self.A = A
        self._s = A.reduce(s)
        self._h = h_fn
        self._counter = counter if counter is not None else _Counter()

    @property
    def queries(self):
        return self._counter.value

    def h(self, a):
        self._counter.bump()
        return self._h(self.A.reduce(a))


def make_reflection_function(A, s):
    """Standard instance with h(a) = h(s - a): token of the canonical
    representative of the orbit {a, s-a}."""
    s = A.reduce(s)
    tok = _Tokenizer()

    def h_fn(a):
        mirror = A.add(s, A.neg(a))
        return tok(min(tuple(a), tuple(mirror)))

    return ReflectionFunction(A, s, h_fn)


def reflection_to_shift(refl, v=None):
    """Convert h with h(a) = h(s-a) into a shift pair via
    f(a) = (h(-a), h(v-a)), g(a) = (h(a), h(a-v)), for any v with 2v != 0.

    Raises SimonCaseError when no such v exists (A of exponent 2)."""
    A = refl.A
    if v is None:
        for j, n in enumerate(A.orders):
            if n > 2:
                v = tuple(1 if i == j else 0 for i in range(A.rank))
                break
        else:
            raise SimonCaseError("every element satisfies 2v = 0")
    v = A.reduce(v)
    if A.add(v, v) == A.zero:
        raise ValueError("need 2v != 0")

    def f_fn(a):
        return (refl._h(A.neg(a)), refl._h(A.add(v, A.neg(a))))

    def g_fn(a):
        return (refl._h(a), refl._h(A.add(a, A.neg(v))))

    return ShiftPair(A, refl._s, f_fn, g_fn, counter=refl._counter)


def shift_to_reflection_in_A(p):
    """Convert a shift pair to a single function h(a) = {f(-a), g(a)}
    (unordered pair values) with h(a) = h(s - a)."""
    A = p.A

    def h_fn(a):
        a = A.reduce(a)
        # the pair must be unordered: h(s - a) sees the same two values
        # with the roles of f and g exchanged
        return frozenset({p._f(A.neg(a)), p._g(a)})

    return ReflectionFunction(A, p._shift, h_fn, counter=p._counter)


# ---------------------------------------------------------------------------
# Hidden substring instances and spliced approximation


class SubstringInstance:
    """The N-into-2N hidden substring problem: f on {0..N-1} is a shifted
    restriction of the injective g on {0..2N-1}, f(x) = g(x + s)."""

    def __init__(self, N, s):
        if not 0 <= s < N:
            raise ValueError("substring shift must satisfy 0 <= s < M - N")
        self.N = N
        self.M = 2 * N
        self._s = s
        self._tok = _Tokenizer()
        self._counter = _Counter()

    @property
    def queries(self):
        return self._counter.value

    def f(self, x):
        if not 0 <= x < self.N:
            raise ValueError("f argument out of domain")
        self._counter.bump()
        return self._tok(x + self._s)

    def g(self, x):
        if not 0 <= x < self.M:
            raise ValueError("g argument out of domain")
        self._counter.bump()
        return self._tok(x)


def splice_substring(inst, t):
    """Spliced approximation: guess t for the substring shift and read the
    pair (f, g(.+t)) as a reflection oracle on D_N.

    The result hides slope u = s - t (mod N) with corruption rate
    |s - t| / N: the wrapped window of that size returns fresh unmatched
    tokens."""
    N = inst.N
    if not 0 <= t < inst.M - N:
        raise ValueError("guess out of range")
    d = abs(inst._s - t)
    u = (inst._s - t) % N

    def ev(e):
        if e.t:
            return inst._tok((e.b % N) + t)  # h(y x^c) = g(c + t)
        return inst._tok((e.b % N) + inst._s)  # h(x^b) = f(b)

    return HidingOracle(GroupCtx(N), u, ev,
                        corruption_rate=Fraction(d, N),
                        counter=inst._counter)


# ---------------------------------------------------------------------------
# Derived oracles used by the recovery loops


def restrict_reflection(o, parity, r=2):
    """View the restriction of the oracle to F_parity = <x^r, y x^parity>
    as an oracle on D_{N/r}.

    When parity == s mod r the restriction hides slope (s - parity)/r;
    otherwise H is not contained in F_parity and the restriction is
    injective, i.e. fully corrupted."""
    ctx = o.ctx
    if not isinstance(ctx, GroupCtx):
        raise TypeError("restriction applies to dihedral oracles")
    if ctx.N % r != 0:
        raise ValueError("N not divisible by the radix")
    sub = GroupCtx(ctx.N // r)

    def ev(e):
        return o._eval(subgroup_embed(parity, e, ctx, r))

    if o._slope % r == parity:
        slope = ((o._slope - parity) // r) % sub.N
        corruption = o.corruption_rate
    else:
        slope = 0
        corruption = Fraction(1)
    return HidingOracle(sub, slope, ev, corruption_rate=corruption,
                        counter=o._counter)


def with_label_automorphism(o, u):
    """Wrap the oracle with the rotation automorphism x -> x^u (u a unit
    mod N).  The wrapped oracle hides slope u^-1 s."""
    ctx = o.ctx
    if not isinstance(ctx, GroupCtx):
        raise TypeError("automorphism wrapper applies to dihedral oracles")
    N = ctx.N
    uinv = pow(u, -1, N)

    def ev(e):
        return o._eval(DihedralElement(e.t, (u * e.b) % N))

    return HidingOracle(ctx, (uinv * o._slope) % N, ev,
                        corruption_rate=o.corruption_rate,
                        counter=o._counter)
