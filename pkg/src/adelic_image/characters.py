"""Dirichlet characters with exact root-of-unity values.

A character mod N is stored by its values on a fixed generating set of
(Z/N)^x.  Generators are canonical: the 2-part first (-1, then 5 when
2^e with e >= 3 divides N), then one smallest primitive root per odd
prime power, primes ascending.  Values are symbolic roots of unity, so
all identities hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import gcd, lcm, prod

from ._util import factorize, kronecker, multiplicative_order
from .errors import BadInput, BadPrime, BoundTooLarge, NotCoprime

MODULUS_BOUND = 10**6


@dataclass(frozen=True)
class RootOfUnity:
    """zeta_order^exp with gcd(exp, order) = 1, zeta_m = e^(2 pi i / m)."""

    order: int
    exp: int

    @classmethod
    def make(cls, m: int, e: int) -> "RootOfUnity":
        if m < 1:
            raise BadInput("root of unity needs a positive order")
        e %= m
        g = gcd(e, m)
        if g == 0:
            return cls(1, 0)
        return cls(m // g, e // g)

    @classmethod
    def one(cls) -> "RootOfUnity":
        return cls(1, 0)

    @classmethod
    def minus_one(cls) -> "RootOfUnity":
        return cls(2, 1)

    def __mul__(self, other: "RootOfUnity") -> "RootOfUnity":
        m = lcm(self.order, other.order)
        return RootOfUnity.make(m, self.exp * (m // self.order) + other.exp * (m // other.order))

    def __pow__(self, k: int) -> "RootOfUnity":
        return RootOfUnity.make(self.order, self.exp * k)

    def inv(self) -> "RootOfUnity":
        return RootOfUnity.make(self.order, -self.exp)

    def conjugate(self) -> "RootOfUnity":
        return self.inv()

    @property
    def is_one(self) -> bool:
        return self.order == 1

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    def as_int(self) -> int:
        """The value as an integer, defined only for +-1."""
        if self.order == 1:
            return 1
        if self.order == 2:
            return -1
        raise BadInput(f"zeta_{self.order}^{self.exp} is not rational")

    def as_complex(self) -> complex:
        from cmath import exp, pi

        return exp(2j * pi * self.exp / self.order)

    def __str__(self):
        if self.order == 1:
            return "1"
        if self.order == 2:
            return "-1"
        return f"zeta{self.order}^{self.exp}"


class UnitGroupZN:
    """(Z/N)^x with canonical generators and discrete logarithms.

    Generators: for 4 | N the class of -1; for 8 | N also the class of
    5; then the smallest primitive root mod q^e for each odd prime power
    q^e || N, primes ascending.  Each generator is CRT-lifted to be 1 in
    the other components.
    """

    def __init__(self, N: int):
        if N < 1:
            raise BadInput("modulus must be positive")
        if N > MODULUS_BOUND:
            raise BoundTooLarge(f"modulus {N} exceeds the supported bound {MODULUS_BOUND}")
        self.N = N
        self.factorization = factorize(N)
        gens = []
        orders = []
        comps = []  # (q, e, local generator(s) spec) for dlog
        two_e = self.factorization.get(2, 0)
        if two_e >= 2:
            gens.append(self._crt_lift(2, -1 % 2**two_e))
            orders.append(2)
            if two_e >= 3:
                gens.append(self._crt_lift(2, 5))
                orders.append(2 ** (two_e - 2))
        for q in sorted(self.factorization):
            if q == 2:
                continue
            e = self.factorization[q]
            g = _smallest_primitive_root(q, e)
            gens.append(self._crt_lift(q, g))
            orders.append((q - 1) * q ** (e - 1))
        self.generators = tuple(gens)
        self.orders = tuple(orders)

    def _crt_lift(self, q: int, g: int) -> int:
        qe = q ** self.factorization[q]
        rest = self.N // qe
        if rest == 1:
            return g % self.N
        # x = g mod q^e, x = 1 mod rest
        inv_rest = pow(rest, -1, qe)
        x = (1 + rest * ((g - 1) * inv_rest % qe)) % self.N
        return x

    @property
    def order(self) -> int:
        return prod(self.orders) if self.orders else 1

    def dlog(self, a: int) -> tuple[int, ...]:
        """Exponent vector of a on the canonical generators."""
        a %= self.N
        if self.N == 1:
            return ()
        if gcd(a, self.N) != 1:
            raise NotCoprime(f"{a} shares a factor with {self.N}")
        out = []
        idx = 0
        two_e = self.factorization.get(2, 0)
        if two_e >= 2:
            m = 2**two_e
            a2 = a % m
            if two_e == 2:
                out.append(0 if a2 == 1 else 1)
                idx += 1
            else:
                sign = 0 if a2 % 4 == 1 else 1
                b = a2 if sign == 0 else (-a2) % m
                # b lies in <5>
                k = 0
                x = 1
                half = 2 ** (two_e - 2)
                while x != b:
                    x = x * 5 % m
                    k += 1
                    if k > half:
                        raise RuntimeError("2-adic dlog failed")
                out.append(sign)
                out.append(k)
                idx += 2
        for q in sorted(self.factorization):
            if q == 2:
                continue
            e = self.factorization[q]
            qe = q**e
            g = _smallest_primitive_root(q, e)
            target = a % qe
            k = 0
            x = 1
            bound = (q - 1) * q ** (e - 1)
            while x != target:
                x = x * g % qe
                k += 1
                if k > bound:
                    raise RuntimeError("dlog failed")
            out.append(k)
            idx += 1
        return tuple(out)

    def units(self):
        for a in range(self.N if self.N > 1 else 2):
            if a < self.N and gcd(a, self.N) == 1:
                yield a
        if self.N == 1:
            return


@lru_cache(maxsize=None)
def _smallest_primitive_root(q: int, e: int) -> int:
    qe = q**e
    target = (q - 1) * q ** (e - 1)
    for g in range(2, qe):
        if gcd(g, q) == 1 and multiplicative_order(g, qe) == target:
            return g
    raise RuntimeError(f"no primitive root mod {qe}")


@lru_cache(maxsize=None)
def unit_group(N: int) -> UnitGroupZN:
    return UnitGroupZN(N)


@dataclass(frozen=True)
class DirichletCharacter:
    """A character of (Z/N)^x, by its values on the canonical generators."""

    modulus: int
    gen_values: tuple[RootOfUnity, ...]

    def __post_init__(self):
        U = unit_group(self.modulus)
        if len(self.gen_values) != len(U.generators):
            raise BadInput(
                f"expected {len(U.generators)} generator values, got {len(self.gen_values)}"
            )
        for v, o in zip(self.gen_values, U.orders):
            if o % v.order != 0:
                raise BadInput(
                    f"value of order {v.order} on a generator of order {o} is not a character"
                )

    @classmethod
    def trivial(cls, N: int) -> "DirichletCharacter":
        U = unit_group(N)
        return cls(N, tuple(RootOfUnity.one() for _ in U.generators))

    @classmethod
    def from_json(cls, data: dict) -> "DirichletCharacter":
        from .errors import SchemaError

        if not isinstance(data, dict) or "modulus" not in data or "gen_images" not in data:
            raise SchemaError("character JSON needs 'modulus' and 'gen_images'")
        N = data["modulus"]
        if not isinstance(N, int) or N < 1:
            raise SchemaError("character modulus must be a positive integer")
        vals = []
        for item in data["gen_images"]:
            if not isinstance(item, dict) or "order" not in item or "exp" not in item:
                raise SchemaError("each gen_image needs 'order' and 'exp'")
            vals.append(RootOfUnity.make(item["order"], item["exp"]))
        try:
            return cls(N, tuple(vals))
        except BadInput as exc:
            raise SchemaError(str(exc)) from exc

    def to_json(self) -> dict:
        return {
            "modulus": self.modulus,
            "gen_images": [{"order": v.order, "exp": v.exp} for v in self.gen_values],
        }

    def __call__(self, a: int):
        """chi(a): a RootOfUnity, or the integer 0 off the unit group."""
        a %= self.modulus
        if self.modulus == 1:
            return RootOfUnity.one()
        if gcd(a, self.modulus) != 1:
            return 0
        U = unit_group(self.modulus)
        expv = U.dlog(a)
        out = RootOfUnity.one()
        for v, k in zip(self.gen_values, expv):
            out = out * v**k
        return out

    @property
    def order(self) -> int:
        return lcm(*(v.order for v in self.gen_values)) if self.gen_values else 1

    @property
    def is_trivial(self) -> bool:
        return all(v.is_one for v in self.gen_values)

    @property
    def is_quadratic(self) -> bool:
        return self.order <= 2

    @property
    def is_odd(self) -> bool:
        v = self(-1)
        return v != 0 and v.as_int() == -1

    @property
    def is_even(self) -> bool:
        return not self.is_odd

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if self.modulus == other.modulus:
            return DirichletCharacter(
                self.modulus, tuple(a * b for a, b in zip(self.gen_values, other.gen_values))
            )
        M = lcm(self.modulus, other.modulus)
        return self.induce(M) * other.induce(M)

    def __pow__(self, k: int) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(v**k for v in self.gen_values))

    def conjugate(self) -> "DirichletCharacter":
        return self**-1

    def induce(self, M: int) -> "DirichletCharacter":
        """The character mod M (a multiple of the modulus) with the same values."""
        if M % self.modulus != 0:
            raise BadInput(f"{M} is not a multiple of {self.modulus}")
        UM = unit_group(M)
        vals = []
        for g in UM.generators:
            v = self(g)
            if v == 0:
                raise BadInput("induction hit a non-unit; modulus mismatch")
            vals.append(v)
        return DirichletCharacter(M, tuple(vals))

    @property
    def conductor(self) -> int:
        """Smallest d | N through which the character factors.

        Decided exhaustively: chi factors through d iff chi kills every
        unit that is 1 mod d.
        """
        N = self.modulus
        divisors = sorted(d for d in range(1, N + 1) if N % d == 0)
        for d in divisors:
            ok = True
            for u in range(1, N, d):
                if gcd(u, N) == 1 and not self(u).is_one:
                    ok = False
                    break
            if ok:
                return d
        return N

    def primitive(self) -> "DirichletCharacter":
        """The primitive character (mod the conductor) inducing this one."""
        f = self.conductor
        if f == self.modulus:
            return self
        Uf = unit_group(f)
        vals = []
        for h in Uf.generators:
            x = self._unit_lift(h, f)
            v = self(x)
            assert v != 0
            vals.append(v)
        return DirichletCharacter(f, tuple(vals))

    def _unit_lift(self, h: int, f: int) -> int:
        """A unit mod N congruent to h mod f."""
        N = self.modulus
        x = h % f if f > 1 else 1
        # walk up by f until coprime to N; terminates since the reduction
        # map of unit groups is surjective
        for _ in range(N // f + 1):
            if gcd(x, N) == 1:
                return x
            x += f
        raise RuntimeError("unit lift failed")

    def is_one_mod_p(self, p: int) -> bool:
        """True iff every value is congruent to 1 in residue char p.

        zeta_m - 1 lies over p exactly when m is a power of p, so the
        condition is that the character order is a p-power.
        """
        o = self.order
        while o % p == 0:
            o //= p
        return o == 1

    def restrict_values(self):
        """All (unit, value) pairs; handy for small-modulus checks."""
        return [(u, self(u)) for u in unit_group(self.modulus).units()]


def enumerate_characters(N: int):
    """All phi(N) characters mod N, exponent-lexicographic on generators."""
    U = unit_group(N)
    ranges = [range(o) for o in U.orders]
    for exps in product(*ranges):
        vals = tuple(RootOfUnity.make(o, e) for o, e in zip(U.orders, exps))
        yield DirichletCharacter(N, vals)


def is_fundamental_discriminant(D: int) -> bool:
    if D == 0 or D == 1:
        return False
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    n = abs(n)
    return all(e == 1 for e in factorize(n).values())


def kronecker_character(D: int) -> DirichletCharacter:
    """The quadratic character of the field with discriminant D."""
    if not is_fundamental_discriminant(D):
        raise BadInput(f"{D} is not a fundamental discriminant")
    N = abs(D)
    U = unit_group(N)
    vals = []
    for g in U.generators:
        s = kronecker(D, g)
        if s == 1:
            vals.append(RootOfUnity.one())
        elif s == -1:
            vals.append(RootOfUnity.minus_one())
        else:
            raise RuntimeError("kronecker symbol vanished on a unit")
    return DirichletCharacter(N, tuple(vals))


def reduce_root_mod(root: RootOfUnity, field) -> int:
    """Canonical image of a root of unity in a finite field.

    The p-power part of the order collapses to 1; the prime-to-p part m'
    maps zeta_m' to g^((q-1)/m') for the field's canonical generator g.
    Requires m' | q - 1.
    """
    p = field.p
    q = field.size
    m = root.order
    a = 0
    mp = m
    while mp % p == 0:
        mp //= p
        a += 1
    if (q - 1) % mp != 0:
        raise BadPrime(f"mu_{mp} does not land in a field with {q} elements")
    if mp == 1:
        return field.one
    # split zeta_m^e into prime-to-p and p-power parts; only the former
    # survives reduction
    pa = p**a
    s = pow(pa, -1, mp)
    e_prime = root.exp * s % mp
    g = field.generator
    zbar = field.power(g, (q - 1) // mp)
    return field.power(zbar, e_prime)
