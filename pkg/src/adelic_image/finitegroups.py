"""Finite 2x2 matrix groups over Z/p^n and F_{p^f}.

Elements of a product of matrix groups are stored as flat tuples of ring
element codes, four per component, so subgroup enumeration is hashing
tuples of small ints.  Ring element codes are integers in [0, size):
residues for Z/p^n, base-p encodings of coefficient vectors for F_{p^f}.

Enumeration is breadth-first from the identity in generator index order,
which fixes the element ordering of every closure.  PSL2 components keep
the lexicographically smaller of {M, -M} as the canonical matrix.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd

from . import _polymod
from ._util import is_prime, valuation
from .errors import (
    InvalidGenerator,
    MixedCharacteristic,
    NotEnumerated,
    OverflowBound,
    SmallPrime,
    Unsupported,
)

DEFAULT_OVERFLOW_BOUND = 20_000_000

# rings whose size is at or below this get lookup tables for their ops
_TABLE_LIMIT = 4096

GL2 = "GL2"
SL2 = "SL2"
PSL2 = "PSL2"


@dataclass(frozen=True)
class FiniteRing:
    """Z/p^n (kind 'zmod') or F_{p^f} (kind 'gf', with modulus polynomial).

    The modulus polynomial is monic, constant term first, and verified
    irreducible mod p at construction.
    """

    kind: str
    p: int
    n: int
    modulus: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("zmod", "gf"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.n < 1:
            raise ValueError("exponent/degree must be >= 1")
        if self.kind == "gf":
            m = self.modulus
            if m is None:
                raise ValueError("finite field needs a modulus polynomial")
            if len(m) != self.n + 1 or m[-1] != 1:
                raise ValueError("modulus must be monic of degree n")
            if any(not (0 <= c < self.p) for c in m):
                raise ValueError("modulus coefficients must be reduced mod p")
            if not _polymod.is_irreducible(m, self.p):
                raise ValueError("modulus polynomial is reducible mod p")
        elif self.modulus is not None:
            raise ValueError("Z/p^n takes no modulus polynomial")

    @classmethod
    def zmod(cls, p: int, n: int = 1) -> "FiniteRing":
        return cls("zmod", p, n)

    @classmethod
    def gf(cls, p: int, f: int = 1, modulus: tuple[int, ...] | None = None) -> "FiniteRing":
        if modulus is None:
            modulus = _polymod.first_irreducible(p, f)
        return cls("gf", p, f, tuple(modulus))

    @property
    def size(self) -> int:
        return self.p**self.n

    @property
    def is_field(self) -> bool:
        return self.kind == "gf" or self.n == 1

    def from_int(self, i: int) -> int:
        """Image of the integer i under the canonical map Z -> R."""
        if self.kind == "zmod":
            return i % self.size
        return i % self.p

    # element codes <-> coefficient tuples (gf only)

    def decode(self, code: int) -> tuple[int, ...]:
        if self.kind != "gf":
            raise ValueError("decode applies to field elements")
        out = []
        for _ in range(self.n):
            out.append(code % self.p)
            code //= self.p
        return tuple(out)

    def encode(self, coeffs) -> int:
        if self.kind != "gf":
            raise ValueError("encode applies to field elements")
        code = 0
        for c in reversed(list(coeffs)[: self.n]):
            code = code * self.p + (c % self.p)
        return code

    # arithmetic on codes

    def add(self, a: int, b: int) -> int:
        if self.kind == "zmod":
            return (a + b) % self.size
        p = self.p
        out = 0
        mult = 1
        for _ in range(self.n):
            out += ((a % p + b % p) % p) * mult
            a //= p
            b //= p
            mult *= p
        return out

    def neg(self, a: int) -> int:
        if self.kind == "zmod":
            return (-a) % self.size
        p = self.p
        out = 0
        mult = 1
        for _ in range(self.n):
            out += ((-(a % p)) % p) * mult
            a //= p
            mult *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.kind == "zmod":
            return a * b % self.size
        prod = _polymod.mul(_polymod.trim(self.decode(a)), _polymod.trim(self.decode(b)), self.p)
        return self.encode(_polymod.mod(prod, self.modulus, self.p))

    def is_unit(self, a: int) -> bool:
        if self.kind == "zmod":
            return a % self.p != 0
        return a != 0

    def inv(self, a: int) -> int:
        if not self.is_unit(a):
            raise ZeroDivisionError(f"{a} is not a unit")
        if self.kind == "zmod":
            return pow(a, -1, self.size)
        # a^(q-2) in the field
        out = self.one
        e = self.size - 2
        base = a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def power(self, a: int, e: int) -> int:
        if e < 0:
            return self.power(self.inv(a), -e)
        out = self.one
        base = a
        while e:
            if e & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            e >>= 1
        return out

    def mult_order(self, a: int) -> int:
        if not self.is_unit(a):
            raise ValueError("order of a non-unit")
        k, x = 1, a
        while x != self.one:
            x = self.mul(x, a)
            k += 1
        return k

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1 if self.size > 1 else 0

    @cached_property
    def unit_count(self) -> int:
        if self.kind == "zmod":
            return self.size - self.size // self.p
        return self.size - 1

    @cached_property
    def generator(self) -> int:
        """Smallest code generating the unit group (fields only)."""
        if self.kind != "gf" and self.n != 1:
            raise Unsupported("multiplicative generator only for fields")
        target = self.size - 1
        for code in range(2, self.size):
            if self.is_unit(code) and self.mult_order(code) == target:
                return code
        raise RuntimeError("no generator found")

    @cached_property
    def residue_field(self) -> "FiniteRing":
        if self.kind == "gf":
            return self
        return FiniteRing.zmod(self.p, 1)

    def residue(self, a: int) -> int:
        """Image of a code in the residue field."""
        if self.kind == "gf":
            return a
        return a % self.p

    # lookup tables for the closure kernel

    @cached_property
    def tables(self):
        """(mul, add, neg, inv) flat lookup tables, or None for big rings.

        mul/add are indexed a*size+b; inv holds -1 at non-units.
        """
        s = self.size
        if s > _TABLE_LIMIT:
            return None
        mul = [0] * (s * s)
        add = [0] * (s * s)
        for a in range(s):
            base = a * s
            for b in range(s):
                mul[base + b] = self.mul(a, b)
                add[base + b] = self.add(a, b)
        neg = [self.neg(a) for a in range(s)]
        inv = [self.inv(a) if self.is_unit(a) else -1 for a in range(s)]
        return mul, add, neg, inv


@dataclass(frozen=True)
class Mat2:
    """A 2x2 matrix over a FiniteRing; entries are ring element codes."""

    ring: FiniteRing
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        s = self.ring.size
        for e in (self.a, self.b, self.c, self.d):
            if not (0 <= e < s):
                raise ValueError(f"entry {e} out of range for ring of size {s}")

    @classmethod
    def of(cls, ring: FiniteRing, a: int, b: int, c: int, d: int) -> "Mat2":
        """Build from integers via the canonical map Z -> R."""
        f = ring.from_int
        return cls(ring, f(a), f(b), f(c), f(d))

    @classmethod
    def identity(cls, ring: FiniteRing) -> "Mat2":
        return cls(ring, ring.one, 0, 0, ring.one)

    def det(self) -> int:
        r = self.ring
        return r.sub(r.mul(self.a, self.d), r.mul(self.b, self.c))

    def trace(self) -> int:
        return self.ring.add(self.a, self.d)

    def __mul__(self, other: "Mat2") -> "Mat2":
        if self.ring != other.ring:
            raise ValueError("matrix product across different rings")
        r = self.ring
        return Mat2(
            r,
            r.add(r.mul(self.a, other.a), r.mul(self.b, other.c)),
            r.add(r.mul(self.a, other.b), r.mul(self.b, other.d)),
            r.add(r.mul(self.c, other.a), r.mul(self.d, other.c)),
            r.add(r.mul(self.c, other.b), r.mul(self.d, other.d)),
        )

    def neg(self) -> "Mat2":
        r = self.ring
        return Mat2(r, r.neg(self.a), r.neg(self.b), r.neg(self.c), r.neg(self.d))

    def inv(self) -> "Mat2":
        r = self.ring
        di = r.inv(self.det())
        return Mat2(
            r,
            r.mul(self.d, di),
            r.mul(r.neg(self.b), di),
            r.mul(r.neg(self.c), di),
            r.mul(self.a, di),
        )

    def flat(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)


def standard_sl2_generators(ring: FiniteRing) -> tuple[Mat2, Mat2]:
    """The two elementary matrices, which generate SL2 over Z/p^n and F_p."""
    return Mat2.of(ring, 1, 1, 0, 1), Mat2.of(ring, 1, 0, 1, 1)


# ambient group orders


def gl2_order(ring: FiniteRing) -> int:
    q = ring.p if ring.kind == "zmod" else ring.size
    base = (q * q - 1) * (q * q - q)
    if ring.kind == "zmod":
        base *= ring.p ** (4 * (ring.n - 1))
    return base


def sl2_order(ring: FiniteRing) -> int:
    q = ring.p if ring.kind == "zmod" else ring.size
    base = q * (q * q - 1)
    if ring.kind == "zmod":
        base *= ring.p ** (3 * (ring.n - 1))
    return base


def psl2_order(ring: FiniteRing) -> int:
    if not ring.is_field:
        raise Unsupported("PSL2 components must live over a field")
    q = ring.size
    return sl2_order(ring) // gcd(2, q - 1)


_ORDER_BY_TAG = {GL2: gl2_order, SL2: sl2_order, PSL2: psl2_order}


def ambient_order(ambient) -> int:
    total = 1
    for ring, tag in ambient:
        total *= _ORDER_BY_TAG[tag](ring)
    return total


# per-component operation builders


def _comp_mul(ring: FiniteRing):
    tabs = ring.tables
    if ring.kind == "zmod" and ring.n >= 1:
        m = ring.size

        def mulz(u, v, m=m):
            a, b, c, d = u
            e, f, g, h = v
            return (
                (a * e + b * g) % m,
                (a * f + b * h) % m,
                (c * e + d * g) % m,
                (c * f + d * h) % m,
            )

        return mulz
    if tabs is not None:
        M, A, _, _ = tabs
        s = ring.size

        def mulgf(u, v, M=M, A=A, s=s):
            a, b, c, d = u
            e, f, g, h = v
            return (
                A[M[a * s + e] * s + M[b * s + g]],
                A[M[a * s + f] * s + M[b * s + h]],
                A[M[c * s + e] * s + M[d * s + g]],
                A[M[c * s + f] * s + M[d * s + h]],
            )

        return mulgf

    def mulslow(u, v, r=ring):
        a, b, c, d = u
        e, f, g, h = v
        return (
            r.add(r.mul(a, e), r.mul(b, g)),
            r.add(r.mul(a, f), r.mul(b, h)),
            r.add(r.mul(c, e), r.mul(d, g)),
            r.add(r.mul(c, f), r.mul(d, h)),
        )

    return mulslow


def _comp_neg(ring: FiniteRing):
    tabs = ring.tables
    if ring.kind == "zmod":
        m = ring.size
        return lambda u, m=m: ((-u[0]) % m, (-u[1]) % m, (-u[2]) % m, (-u[3]) % m)
    if tabs is not None:
        N = tabs[2]
        return lambda u, N=N: (N[u[0]], N[u[1]], N[u[2]], N[u[3]])
    return lambda u, r=ring: (r.neg(u[0]), r.neg(u[1]), r.neg(u[2]), r.neg(u[3]))


def _comp_inv(ring: FiniteRing):
    def invc(u, r=ring):
        a, b, c, d = u
        det = r.sub(r.mul(a, d), r.mul(b, c))
        di = r.inv(det)
        return (r.mul(d, di), r.mul(r.neg(b), di), r.mul(r.neg(c), di), r.mul(a, di))

    return invc


class _AmbientOps:
    """Compiled flat-tuple operations for a fixed ambient product."""

    def __init__(self, ambient):
        self.ambient = tuple(ambient)
        self.t = len(self.ambient)
        self.identity = tuple(
            e for ring, _ in self.ambient for e in (ring.one, 0, 0, ring.one)
        )
        muls = [_comp_mul(r) for r, _ in self.ambient]
        negs = [_comp_neg(r) for r, _ in self.ambient]
        invs = [_comp_inv(r) for r, _ in self.ambient]
        psl_mask = [tag == PSL2 for _, tag in self.ambient]

        if self.t == 1:
            m1 = muls[0]
            self.mul = m1
            i1 = invs[0]
            if psl_mask[0]:
                n1 = negs[0]

                def cano1(u, n1=n1):
                    return min(u, n1(u))

                self.cano = cano1
                self.mul = lambda u, v, m1=m1, c=cano1: c(m1(u, v))
                self.inv = lambda u, i1=i1, c=cano1: c(i1(u))
            else:
                self.cano = None
                self.inv = i1
        else:

            def mulp(u, v, muls=muls, t=self.t):
                out = []
                for i in range(t):
                    o = 4 * i
                    out.extend(muls[i](u[o : o + 4], v[o : o + 4]))
                return tuple(out)

            if any(psl_mask):

                def canop(u, negs=negs, psl_mask=psl_mask, t=self.t):
                    out = []
                    for i in range(t):
                        o = 4 * i
                        s = u[o : o + 4]
                        if psl_mask[i]:
                            s = min(s, negs[i](s))
                        out.extend(s)
                    return tuple(out)

                self.cano = canop
                self.mul = lambda u, v, m=mulp, c=canop: c(m(u, v))
            else:
                self.cano = None
                self.mul = mulp

            def invp(u, invs=invs, t=self.t):
                out = []
                for i in range(t):
                    o = 4 * i
                    out.extend(invs[i](u[o : o + 4]))
                return tuple(out)

            if any(psl_mask):
                self.inv = lambda u, i=invp, c=self.cano: c(i(u))
            else:
                self.inv = invp


@dataclass
class SubgroupClosure:
    """A fully enumerated subgroup of a product of matrix groups.

    elements is the BFS discovery list; element_set indexes it.  All
    elements are flat tuples, 4 codes per ambient component.
    """

    ambient: tuple
    generators: tuple
    elements: list
    element_set: frozenset
    overflow_bound: int
    _ops: _AmbientOps = field(repr=False, default=None)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def ops(self) -> _AmbientOps:
        if self._ops is None:
            self._ops = _AmbientOps(self.ambient)
        return self._ops

    def __contains__(self, item) -> bool:
        if isinstance(item, Mat2):
            item = item.flat()
        elif item and isinstance(item[0], Mat2):
            item = tuple(e for m in item for e in m.flat())
        return tuple(item) in self.element_set

    def mul(self, u, v):
        return self.ops.mul(u, v)

    def inv(self, u):
        return self.ops.inv(u)

    def as_mats(self, flat) -> tuple[Mat2, ...]:
        out = []
        for i, (ring, _) in enumerate(self.ambient):
            o = 4 * i
            out.append(Mat2(ring, *flat[o : o + 4]))
        return tuple(out)

    def is_full(self) -> bool:
        return self.order == ambient_order(self.ambient)

    def project(self, indices) -> "SubgroupClosure":
        """Image under projection onto the listed ambient components.

        The image of a group is a group, so no re-closure is needed;
        first-seen order is kept.
        """
        indices = list(indices)
        sub_ambient = tuple(self.ambient[i] for i in indices)

        def cut(flat):
            return tuple(e for i in indices for e in flat[4 * i : 4 * i + 4])

        seen = set()
        elements = []
        for u in self.elements:
            w = cut(u)
            if w not in seen:
                seen.add(w)
                elements.append(w)
        gens = []
        for g in self.generators:
            w = cut(g)
            if w not in gens:
                gens.append(w)
        return SubgroupClosure(
            ambient=sub_ambient,
            generators=tuple(gens),
            elements=elements,
            element_set=frozenset(seen),
            overflow_bound=self.overflow_bound,
        )

    def element_order(self, u) -> int:
        mul = self.ops.mul
        e = self.ops.identity
        if self.ops.cano is not None:
            e = self.ops.cano(e)
        k, x = 1, u
        while x != e:
            x = mul(x, u)
            k += 1
        return k


def _flatten_generator(gen, ambient):
    if isinstance(gen, Mat2):
        gen = (gen,)
    gen = tuple(gen)
    if len(gen) != len(ambient):
        raise InvalidGenerator(
            f"generator has {len(gen)} components, ambient has {len(ambient)}"
        )
    flat = []
    for m, (ring, tag) in zip(gen, ambient):
        if not isinstance(m, Mat2):
            raise InvalidGenerator("generator components must be Mat2")
        if m.ring != ring:
            raise InvalidGenerator("generator component ring does not match ambient")
        det = m.det()
        if tag in (SL2, PSL2):
            if det != ring.one:
                raise InvalidGenerator(f"determinant {det} is not 1 in an SL2 component")
        else:
            if not ring.is_unit(det):
                raise InvalidGenerator(f"determinant {det} is not a unit")
        flat.extend(m.flat())
    return tuple(flat)


def closure(gens, ambient, bound: int = DEFAULT_OVERFLOW_BOUND) -> SubgroupClosure:
    """Enumerate the subgroup generated by gens inside the ambient product.

    Breadth-first from the identity, multiplying by generators in index
    order; in a finite group this reaches the full set of products of
    generators and inverses.  Raises OverflowBound if the element count
    would exceed bound.
    """
    ambient = tuple((r, t) for r, t in ambient)
    for ring, tag in ambient:
        if tag not in _ORDER_BY_TAG:
            raise InvalidGenerator(f"unknown ambient tag {tag!r}")
        if tag == PSL2 and not ring.is_field:
            raise Unsupported("PSL2 components must live over a field")
    ops = _AmbientOps(ambient)
    flat_gens = []
    for g in gens:
        f = _flatten_generator(g, ambient)
        if ops.cano is not None:
            f = ops.cano(f)
        flat_gens.append(f)

    identity = ops.identity
    if ops.cano is not None:
        identity = ops.cano(identity)
    seen = {identity}
    elements = [identity]
    if flat_gens:
        mul = ops.mul
        queue = deque([identity])
        sadd = seen.add
        eapp = elements.append
        qapp = queue.append
        while queue:
            u = queue.popleft()
            for g in flat_gens:
                w = mul(u, g)
                if w not in seen:
                    if len(seen) >= bound:
                        raise OverflowBound(
                            f"closure exceeded {bound} elements; raise the bound"
                        )
                    sadd(w)
                    eapp(w)
                    qapp(w)
    total = ambient_order(ambient)
    assert total % len(elements) == 0, "Lagrange violation: enumeration bug"
    return SubgroupClosure(
        ambient=ambient,
        generators=tuple(flat_gens),
        elements=elements,
        element_set=frozenset(seen),
        overflow_bound=bound,
        _ops=ops,
    )


def enumerate_gl2(ring: FiniteRing):
    """All of GL2(R) as flat 4-tuples, in lexicographic entry order."""
    s = ring.size
    for a in range(s):
        for b in range(s):
            for c in range(s):
                ab = (a, b, c)
                for d in range(s):
                    if ring.is_unit(ring.sub(ring.mul(a, d), ring.mul(b, c))):
                        yield (a, b, c, d)


def enumerate_sl2(ring: FiniteRing):
    """All of SL2(R) as flat 4-tuples, in lexicographic entry order."""
    one = ring.one
    s = ring.size
    for a in range(s):
        for b in range(s):
            for c in range(s):
                for d in range(s):
                    if ring.sub(ring.mul(a, d), ring.mul(b, c)) == one:
                        yield (a, b, c, d)


# lifting certificate


def is_full_sl2_lift(gens, rings, bound: int = DEFAULT_OVERFLOW_BOUND) -> bool:
    """Decide whether gens generate the full product of SL2(Z/p^n_i).

    All rings must be Z/p^n for one common p >= 5.  The criterion is the
    image of the generators in the product of PSL2(F_p): if that image
    is the whole product, the generated subgroup is the whole product of
    SL2's (closed-subgroup lifting; the t = 1 case is the classical
    saturation statement, the general case its product form).
    """
    rings = list(rings)
    if not rings:
        raise InvalidGenerator("need at least one ring")
    p = rings[0].p
    for r in rings:
        if r.kind != "zmod":
            raise Unsupported("lifting certificate applies to Z/p^n components")
        if r.p != p:
            raise MixedCharacteristic("all components must share one residue characteristic")
    if p < 5:
        raise SmallPrime("the lifting criterion needs p >= 5")

    res = FiniteRing.zmod(p, 1)
    res_ambient = tuple((res, PSL2) for _ in rings)
    res_gens = []
    for g in gens:
        if isinstance(g, Mat2):
            g = (g,)
        comps = []
        for m, r in zip(g, rings):
            if m.ring != r:
                raise InvalidGenerator("generator component ring does not match")
            if m.det() != r.one:
                raise InvalidGenerator("generators must lie in SL2")
            comps.append(Mat2(res, m.a % p, m.b % p, m.c % p, m.d % p))
        res_gens.append(tuple(comps))
    image = closure(res_gens, res_ambient, bound=bound)
    return image.order == ambient_order(res_ambient)


# Dickson classification


@dataclass(frozen=True)
class Psl2Class:
    """Classification tag for a subgroup of PSL2(F_q), q = p^f, p >= 5."""

    tag: str
    order: int
    subfield_size: int | None = None

    def __str__(self):
        if self.subfield_size is not None:
            return f"{self.tag}({self.subfield_size})"
        return self.tag


def _orders_multiset(sub: SubgroupClosure) -> set[int]:
    return {sub.element_order(u) for u in sub.elements}


def _is_cyclic(sub: SubgroupClosure) -> bool:
    n = sub.order
    return any(sub.element_order(u) == n for u in sub.elements)


def _is_dihedral(sub: SubgroupClosure) -> bool:
    n = sub.order
    if n < 4 or n % 2 != 0:
        return False
    mul = sub.ops.mul
    inv = sub.ops.inv
    half = n // 2
    for g in sub.elements:
        if sub.element_order(g) != half:
            continue
        cyc = set()
        x = g
        for _ in range(half):
            cyc.add(x)
            x = mul(x, g)
        gi = inv(g)
        for h in sub.elements:
            if h in cyc:
                continue
            if sub.element_order(h) != 2:
                continue
            if mul(mul(h, g), inv(h)) == gi:
                return True
    return False


def _fixes_common_point(sub: SubgroupClosure, ring: FiniteRing) -> bool:
    """True iff the generators share a fixed point on P1(F_q)."""
    pts = [(ring.one, 0)] + [(z, ring.one) for z in range(ring.size)]
    gens = sub.generators or sub.elements[:1]
    for x, y in pts:
        ok = True
        for g in gens:
            a, b, c, d = g
            nx = ring.add(ring.mul(a, x), ring.mul(b, y))
            ny = ring.add(ring.mul(c, x), ring.mul(d, y))
            # projective fixed point: (nx, ny) parallel to (x, y)
            if ring.sub(ring.mul(nx, y), ring.mul(ny, x)) != 0:
                ok = False
                break
        if ok:
            return True
    return False


def dickson_classify(sub: SubgroupClosure) -> Psl2Class:
    """Classify an enumerated subgroup of PSL2(F_q), p >= 5.

    Tags follow the classical subgroup list: Full, Cyclic, Dihedral, A4,
    S4, A5, PSL2-subfield, PGL2-subfield, Borel-contained.  Exactly one
    tag is returned; the decision order is Full, Cyclic, Dihedral,
    sporadic, subfield, Borel-contained.  Honest subgroups only: an A5
    appearing merely as a subquotient is not seen by this routine.
    """
    if len(sub.ambient) != 1 or sub.ambient[0][1] != PSL2:
        raise Unsupported("classification expects a single PSL2 component")
    ring = sub.ambient[0][0]
    if not ring.is_field:
        raise Unsupported("classification works over a finite field")
    p, f = ring.p, ring.n
    if p < 5:
        raise SmallPrime("classification implemented for p >= 5 only")
    if not sub.elements:
        raise NotEnumerated("subgroup must be enumerated")
    q = ring.size
    n = sub.order

    if n == q * (q * q - 1) // 2:
        return Psl2Class("Full", n)
    if _is_cyclic(sub):
        return Psl2Class("Cyclic", n)
    if _is_dihedral(sub):
        return Psl2Class("Dihedral", n)
    orders = _orders_multiset(sub)
    if n == 12 and orders == {1, 2, 3}:
        return Psl2Class("A4", n)
    if n == 24 and orders == {1, 2, 3, 4}:
        return Psl2Class("S4", n)
    if n == 60 and p != 5 and orders == {1, 2, 3, 5}:
        return Psl2Class("A5", n)
    for e in range(1, f + 1):
        if f % e != 0:
            continue
        qe = p**e
        if e < f and n == qe * (qe * qe - 1) // 2:
            return Psl2Class("PSL2-subfield", n, qe)
        if f % (2 * e) == 0 and n == qe * (qe * qe - 1):
            return Psl2Class("PGL2-subfield", n, qe)
    if _fixes_common_point(sub, ring):
        return Psl2Class("Borel-contained", n)
    raise Unsupported(
        f"subgroup of order {n} in PSL2(F_{q}) escaped the classification tree"
    )


def are_conjugate_in_pgl2(sub1: SubgroupClosure, sub2: SubgroupClosure) -> bool:
    """Explicit-search conjugacy test inside PGL2(F_q), permitted for q <= 11.

    Larger fields are refused rather than answered slowly and doubtfully.
    """
    ring = sub1.ambient[0][0]
    if sub2.ambient[0][0] != ring:
        raise MixedCharacteristic("subgroups live over different fields")
    q = ring.size
    if q > 11:
        raise Unsupported("PGL2-conjugacy search is limited to q <= 11")
    if sub1.order != sub2.order:
        return False
    set2 = sub2.element_set
    cano = sub1.ops.cano
    for g in enumerate_gl2(ring):
        a, b, c, d = g
        det = ring.sub(ring.mul(a, d), ring.mul(b, c))
        di = ring.inv(det)
        gi = (ring.mul(d, di), ring.mul(ring.neg(b), di), ring.mul(ring.neg(c), di), ring.mul(a, di))
        ok = True
        for u in sub1.elements:
            w = _mat4_mul(_mat4_mul(g, u, ring), gi, ring)
            if cano is not None:
                w = min(w, _comp_neg(ring)(w))
            if w not in set2:
                ok = False
                break
        if ok:
            return True
    return False


def _mat4_mul(u, v, ring):
    a, b, c, d = u
    e, f, g, h = v
    return (
        ring.add(ring.mul(a, e), ring.mul(b, g)),
        ring.add(ring.mul(a, f), ring.mul(b, h)),
        ring.add(ring.mul(c, e), ring.mul(d, g)),
        ring.add(ring.mul(c, f), ring.mul(d, h)),
    )


# tensor cokernel certificates


def matrix_rank(rows, ring: FiniteRing) -> int:
    """Rank of a matrix over a field by Gaussian elimination on codes."""
    if not ring.is_field:
        raise Unsupported("rank over the residue field only")
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    rank = 0
    col = 0
    while rank < nrows and col < ncols:
        piv = None
        for r in range(rank, nrows):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pinv = ring.inv(m[rank][col])
        m[rank] = [ring.mul(pinv, x) for x in m[rank]]
        for r in range(nrows):
            if r != rank and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [ring.sub(x, ring.mul(factor, y)) for x, y in zip(m[r], m[rank])]
        rank += 1
        col += 1
    return rank


def kron2(aflat, bflat, ring: FiniteRing):
    """Kronecker product of two 2x2 matrices as a 4x4 row list."""
    a = [[aflat[0], aflat[1]], [aflat[2], aflat[3]]]
    b = [[bflat[0], bflat[1]], [bflat[2], bflat[3]]]
    rows = []
    for i in range(2):
        for j in range(2):
            row = []
            for k in range(2):
                for l in range(2):
                    row.append(ring.mul(a[i][k], b[j][l]))
            rows.append(row)
    return rows


def _embed_code(code: int, src: FiniteRing, dst: FiniteRing, root: int | None) -> int:
    if src == dst:
        return code
    if src.kind == "zmod":
        return dst.from_int(code % src.p)
    # field into field: evaluate the coefficient vector at the chosen root
    coeffs = src.decode(code)
    acc = dst.zero
    power = dst.one
    for c in coeffs:
        acc = dst.add(acc, dst.mul(dst.from_int(c), power))
        power = dst.mul(power, root)
    return acc


def _find_root(modulus, p, dst: FiniteRing) -> int:
    if dst.size > 20000:
        raise Unsupported("compositum embedding search capped at |K| <= 20000")
    for z in range(dst.size):
        acc = dst.zero
        power = dst.one
        for c in modulus:
            acc = dst.add(acc, dst.mul(dst.from_int(c), power))
            power = dst.mul(power, z)
        if acc == dst.zero:
            return z
    raise NoRootError("modulus has no root in the target field")


class NoRootError(Unsupported):
    pass


def common_ring(r1: FiniteRing, r2: FiniteRing):
    """A ring both r1 and r2 map to, with the two embedding data.

    Returns (ring, root1, root2) where root_i is the image of the i-th
    field generator when an embedding is needed (None otherwise).
    """
    if r1.p != r2.p:
        raise MixedCharacteristic(f"p = {r1.p} vs p = {r2.p}")
    if r1 == r2:
        return r1, None, None
    if r1.kind == "zmod" and r2.kind == "zmod":
        return (r1 if r1.n <= r2.n else r2), None, None
    if r1.kind == "zmod" and r1.n > 1 or r2.kind == "zmod" and r2.n > 1:
        raise Unsupported("no common quotient of Z/p^n (n > 1) and a field extension")
    # both map into a field
    p = r1.p
    f1 = r1.n if r1.kind == "gf" else 1
    f2 = r2.n if r2.kind == "gf" else 1
    F = f1 * f2 // gcd(f1, f2)
    if r1.kind == "gf" and f2 % f1 == 0 and F == f2:
        dst = r2
    elif r2.kind == "gf" and f1 % f2 == 0 and F == f1:
        dst = r1
    else:
        dst = FiniteRing.gf(p, F)
    root1 = _find_root(r1.modulus, p, dst) if (r1.kind == "gf" and r1 != dst) else None
    root2 = _find_root(r2.modulus, p, dst) if (r2.kind == "gf" and r2 != dst) else None
    return dst, root1, root2


@dataclass(frozen=True)
class TensorCokerCertificate:
    """Certificate for the cokernel of a tensor b - 1 on the 4-dim space.

    residue_rank is computed over the residue field; smith_profile over
    the common ring (entries are canonical: units normalized to 1, then
    p-powers, then zeros).  free_rank_one records whether the profile is
    the (1,1,1,0) pattern, i.e. cokernel free of rank one.
    """

    ring: FiniteRing
    matrix: tuple
    residue_rank: int
    smith_profile: tuple
    free_rank_one: bool


def smith_profile_local(rows, ring: FiniteRing):
    """Smith normal form diagonal over Z/p^n (or a field), canonical form.

    Over a local ring every entry is unit * p^v; pivoting on a minimal
    valuation entry keeps all eliminations exact.
    """
    p, n = ring.p, ring.n if ring.kind == "zmod" else 1
    size = ring.size
    m = [list(r) for r in rows]
    nr, nc = len(m), len(m[0]) if m else 0
    diag = []

    def val(x):
        if x == 0:
            return n + 1
        if ring.kind == "gf":
            return 0
        return valuation(x, p)

    top = 0
    left = 0
    while top < nr and left < nc:
        best = None
        bv = n + 1
        for i in range(top, nr):
            for j in range(left, nc):
                v = val(m[i][j])
                if v < bv:
                    bv = v
                    best = (i, j)
                    if v == 0:
                        break
            if bv == 0:
                break
        if best is None or bv > n:
            break
        bi, bj = best
        m[top], m[bi] = m[bi], m[top]
        for row in m:
            row[left], row[bj] = row[bj], row[left]
        pivot = m[top][left]
        # pivot = unit * p^bv; normalize the row by the unit part
        if ring.kind == "gf":
            unit_inv = ring.inv(pivot)
        else:
            unit = pivot // (p**bv)
            # recover the unit part exactly: pivot = u * p^bv with u a unit mod p^(n-bv)
            u = pivot
            for _ in range(bv):
                u //= p
            unit_inv = pow(u, -1, size)
        m[top] = [ring.mul(unit_inv, x) for x in m[top]]
        pv = m[top][left]
        for i in range(nr):
            if i == top:
                continue
            x = m[i][left]
            if x == 0:
                continue
            # x divisible by p^bv since bv is minimal
            if ring.kind == "gf":
                factor = x
            else:
                factor = x // (p**bv)
            m[i] = [ring.sub(a, ring.mul(factor, b)) for a, b in zip(m[i], m[top])]
        for j in range(left + 1, nc):
            m[top][j] = 0
        diag.append(pv)
        top += 1
        left += 1
    while len(diag) < min(nr, nc):
        diag.append(0)
    return tuple(diag)


def tensor_coker_certificate(a: Mat2, b: Mat2) -> TensorCokerCertificate:
    """Certificate data for coker(a tensor b - 1) on the 4-dim module."""
    dst, root1, root2 = common_ring(a.ring, b.ring)
    af = tuple(_embed_code(x, a.ring, dst, root1) for x in a.flat())
    bf = tuple(_embed_code(x, b.ring, dst, root2) for x in b.flat())
    rows = kron2(af, bf, dst)
    one = dst.one
    for i in range(4):
        rows[i][i] = dst.sub(rows[i][i], one)
    resf = dst.residue_field
    res_rows = [[dst.residue(x) for x in row] for row in rows]
    residue_rank = matrix_rank(res_rows, resf)
    profile = smith_profile_local(rows, dst)
    units = sum(1 for d in profile if d != 0 and dst.is_unit(d))
    zeros = sum(1 for d in profile if d == 0)
    free_rank_one = units == 3 and zeros == 1
    return TensorCokerCertificate(
        ring=dst,
        matrix=tuple(tuple(r) for r in rows),
        residue_rank=residue_rank,
        smith_profile=profile,
        free_rank_one=free_rank_one,
    )


def smith_profile_int(rows) -> tuple[int, ...]:
    """Smith normal form diagonal of an integer matrix (nonneg entries)."""
    m = [[int(x) for x in r] for r in rows]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    diag = []
    top = 0
    left = 0
    while top < nr and left < nc:
        # find the smallest nonzero entry in the remaining block
        best = None
        for i in range(top, nr):
            for j in range(left, nc):
                if m[i][j] != 0 and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        bi, bj = best
        m[top], m[bi] = m[bi], m[top]
        for row in m:
            row[left], row[bj] = row[bj], row[left]
        # reduce until the pivot divides its row and column
        while True:
            pivot = m[top][left]
            changed = False
            for i in range(top + 1, nr):
                if m[i][left] % pivot != 0:
                    qf = m[i][left] // pivot
                    m[i] = [a - qf * b for a, b in zip(m[i], m[top])]
                    m[top], m[i] = m[i], m[top]
                    changed = True
                    break
            if changed:
                continue
            for j in range(left + 1, nc):
                if m[top][j] % pivot != 0:
                    qf = m[top][j] // pivot
                    for row in m:
                        row[j] -= qf * row[left]
                    for row in m:
                        row[left], row[j] = row[j], row[left]
                    changed = True
                    break
            if not changed:
                break
        pivot = m[top][left]
        for i in range(top + 1, nr):
            if m[i][left]:
                qf = m[i][left] // pivot
                m[i] = [a - qf * b for a, b in zip(m[i], m[top])]
        for j in range(left + 1, nc):
            if m[top][j]:
                qf = m[top][j] // pivot
                for row in m:
                    row[j] -= qf * row[left]
        diag.append(abs(pivot))
        top += 1
        left += 1
    while len(diag) < min(nr, nc):
        diag.append(0)
    # enforce divisibility d1 | d2 | ...
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            a, b = diag[i], diag[j]
            if a and b and b % a != 0:
                g = gcd(a, b)
                diag[i], diag[j] = g, a * b // g
    return tuple(diag)
