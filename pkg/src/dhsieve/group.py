"""Arithmetic for dihedral groups D_N, generalized dihedral groups D_A,
and the index-r subgroups used by the recursive recovery loops.

Elements are kept in the normal form y^t x^b.  The rotation exponent b is
an ordinary Python int (arbitrary precision), or a tuple of ints for
generalized dihedral groups over a product of cyclic factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd


@dataclass(frozen=True)
class GroupCtx:
    """Dihedral group D_N; N is the order of the rotation subgroup."""

    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")


@dataclass(frozen=True)
class AbelianGroupSpec:
    """A finite abelian group Z/N_1 + ... + Z/N_a, possibly obtained by
    truncating free summands to Z/2^m.

    orders: the cyclic factor orders N_1..N_a (truncated factors included).
    free_rank: how many trailing factors came from truncating a Z summand.
    free_bits: per-truncated-coordinate bit widths (len == free_rank).
    """

    orders: tuple
    free_rank: int = 0
    free_bits: tuple = ()

    def __post_init__(self):
        if any(n < 1 for n in self.orders):
            raise ValueError("all cyclic orders must be >= 1")
        if self.free_rank != len(self.free_bits):
            raise ValueError("free_bits must have one entry per free summand")
        if any(m < 1 for m in self.free_bits):
            raise ValueError("truncation bit widths must be positive")

    @property
    def rank(self):
        return len(self.orders)

    @property
    def size(self):
        p = 1
        for n in self.orders:
            p *= n
        return p

    def reduce(self, vec):
        return tuple(v % n for v, n in zip(vec, self.orders))

    def add(self, u, v):
        return tuple((a + b) % n for a, b, n in zip(u, v, self.orders))

    def neg(self, u):
        return tuple((-a) % n for a, n in zip(u, self.orders))

    @property
    def zero(self):
        return (0,) * self.rank


@dataclass(frozen=True)
class DihedralElement:
    """y^t x^b with t the reflection flag and b the rotation exponent.

    b is an int for D_N and a tuple for a generalized dihedral group.
    """

    t: int
    b: object

    def __post_init__(self):
        if self.t not in (0, 1):
            raise ValueError("reflection flag must be 0 or 1")


def _rot_add(b1, b2, ctx):
    if isinstance(ctx, GroupCtx):
        return (b1 + b2) % ctx.N
    return ctx.add(b1, b2)


def _rot_neg(b, ctx):
    if isinstance(ctx, GroupCtx):
        return (-b) % ctx.N
    return ctx.neg(b)


def identity(ctx):
    if isinstance(ctx, GroupCtx):
        return DihedralElement(0, 0)
    return DihedralElement(0, ctx.zero)


def dmul(a, c, ctx):
    """Product (y^ta x^ba)(y^tc x^bc) = y^(ta+tc) x^((-1)^tc ba + bc)."""
    ba = _rot_neg(a.b, ctx) if c.t else a.b
    return DihedralElement(a.t ^ c.t, _rot_add(ba, c.b, ctx))


def dinv(a, ctx):
    """Inverse; reflections are involutions, rotations negate."""
    if a.t:
        return a
    return DihedralElement(0, _rot_neg(a.b, ctx))


def subgroup_embed(parity, e, ctx, r=2):
    """Embed D_{N/r} onto the subgroup F_parity = <x^r, y x^parity> of D_N.

    t=0 maps to (0, r*b); t=1 maps to (1, parity + r*b).  With r=2 these
    are the two index-2 dihedral subgroups used by the power-of-two
    recursion.
    """
    if not isinstance(ctx, GroupCtx):
        raise TypeError("subgroup_embed only applies to dihedral groups")
    if ctx.N % r != 0:
        raise ValueError("N must be divisible by the radix")
    if not 0 <= parity < r:
        raise ValueError("parity out of range")
    if e.t == 0:
        return DihedralElement(0, (r * e.b) % ctx.N)
    return DihedralElement(1, (parity + r * e.b) % ctx.N)


@dataclass(frozen=True)
class CrtSplit:
    """Decomposition N = 2^a * M with M odd, plus the residue isomorphism
    Z/N <-> Z/2^a x Z/M."""

    N: int
    a: int
    M: int
    # CRT idempotents: e2 = 1 mod 2^a, 0 mod M; eM the other way round.
    _e2: int = field(repr=False, default=0)
    _eM: int = field(repr=False, default=0)

    def split(self, x):
        return (x % (1 << self.a), x % self.M)

    def combine(self, x2, xm):
        return (x2 * self._e2 + xm * self._eM) % self.N


def crt_split(N):
    """Write N = 2^a * M with M odd and build the CRT maps."""
    if N < 1:
        raise ValueError("N must be >= 1")
    a = 0
    M = N
    while M % 2 == 0:
        M //= 2
        a += 1
    two_a = 1 << a
    if M == 1:
        e2, eM = 1 % N, 0
    elif two_a == 1:
        e2, eM = 0, 1 % N
    else:
        # e2 = M * (M^-1 mod 2^a), eM = 2^a * (2^-a mod M)
        e2 = M * pow(M, -1, two_a) % N
        eM = two_a * pow(two_a, -1, M) % N
    return CrtSplit(N=N, a=a, M=M, _e2=e2, _eM=eM)


def unit_for_odd_part(N, j):
    """The unit u mod N with u = 1 mod 2^a and u = 2^-j mod M, where
    N = 2^a M.  Multiplying rotation exponents by u is the automorphism
    x -> x^(2^-j) on the odd CRT factor."""
    cs = crt_split(N)
    if cs.M == 1:
        return 1 % N
    inv = pow(pow(2, j, cs.M), -1, cs.M)
    u = cs.combine(1, inv)
    if gcd(u, N) != 1:
        raise ArithmeticError("automorphism multiplier is not a unit")
    return u
