"""Number fields in a fixed power basis, with residue-prime arithmetic.

Fields are Q[x]/(f) for a monic irreducible integer polynomial f, with
elements stored as tuples of Fractions in the power basis.  Primes above
an unramified p correspond to the irreducible factors of f mod p; factor
order is canonical (the factorization routine sorts by degree, then
coefficient tuple), so prime indices are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

from . import _polymod
from ._util import is_prime
from .errors import BadInput, DenominatorAtP, RamifiedOrBadPoly, Unsupported
from .finitegroups import FiniteRing

Coords = tuple[Fraction, ...]


class NumberFieldQ:
    """Q[x]/(f) with f monic irreducible over Z, constant term first."""

    def __init__(self, coeffs):
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) < 2:
            raise BadInput("defining polynomial must have degree >= 1")
        if coeffs[-1] != 1:
            raise BadInput("defining polynomial must be monic")
        self.coeffs = coeffs
        self.degree = len(coeffs) - 1
        if not self._sympy_poly.is_irreducible:
            raise BadInput("defining polynomial is reducible over Q")
        # reduction table: x^(deg+k) as a coordinate vector, k = 0..deg-2
        d = self.degree
        self._red = []
        prev = [Fraction(-c) for c in coeffs[:-1]]
        self._red.append(tuple(prev))
        for _ in range(d - 2):
            nxt = [Fraction(0)] + prev[:-1]
            top = prev[-1]
            for i in range(d):
                nxt[i] += top * self._red[0][i]
            self._red.append(tuple(nxt))
            prev = nxt

    @cached_property
    def _sympy_poly(self):
        import sympy

        x = sympy.symbols("x")
        expr = sum(int(c) * x**i for i, c in enumerate(self.coeffs))
        return sympy.Poly(expr, x, domain=sympy.QQ)

    @cached_property
    def disc(self) -> int:
        import sympy

        return int(sympy.discriminant(self._sympy_poly.as_expr()))

    def __eq__(self, other):
        return isinstance(other, NumberFieldQ) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(("NumberFieldQ", self.coeffs))

    def __repr__(self):
        return f"NumberFieldQ({list(self.coeffs)})"

    # element constructors

    def element(self, coords) -> Coords:
        coords = [Fraction(c) for c in coords]
        if len(coords) > self.degree:
            raise BadInput("too many coordinates")
        coords += [Fraction(0)] * (self.degree - len(coords))
        return tuple(coords)

    @property
    def zero(self) -> Coords:
        return tuple([Fraction(0)] * self.degree)

    @property
    def one(self) -> Coords:
        return self.element([1])

    @property
    def gen(self) -> Coords:
        if self.degree == 1:
            # x = 0 in Q[x]/(x - c) only when c = 0; generally the root
            return self.element([Fraction(-self.coeffs[0])])
        return self.element([0, 1])

    def from_rational(self, q) -> Coords:
        return self.element([Fraction(q)])

    # arithmetic

    def add(self, a: Coords, b: Coords) -> Coords:
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a: Coords, b: Coords) -> Coords:
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a: Coords) -> Coords:
        return tuple(-x for x in a)

    def scale(self, q, a: Coords) -> Coords:
        q = Fraction(q)
        return tuple(q * x for x in a)

    def mul(self, a: Coords, b: Coords) -> Coords:
        d = self.degree
        if d == 1:
            return (a[0] * b[0],)
        raw = [Fraction(0)] * (2 * d - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                if y == 0:
                    continue
                raw[i + j] += x * y
        out = list(raw[:d])
        for k in range(d, 2 * d - 1):
            c = raw[k]
            if c == 0:
                continue
            red = self._red[k - d]
            for i in range(d):
                out[i] += c * red[i]
        return tuple(out)

    def power(self, a: Coords, e: int) -> Coords:
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

    def is_zero(self, a: Coords) -> bool:
        return all(x == 0 for x in a)

    def mul_matrix(self, a: Coords):
        """Matrix of multiplication by a: row i is a * x^i in the basis."""
        if self.degree == 1:
            return [list(self.mul(a, self.one))]
        rows = []
        basis_elt = self.one
        x = self.element([0, 1])
        for _ in range(self.degree):
            rows.append(list(self.mul(a, basis_elt)))
            basis_elt = self.mul(basis_elt, x)
        return rows

    def norm(self, a: Coords) -> Fraction:
        return _det_fractions(self.mul_matrix(a))

    def trace(self, a: Coords) -> Fraction:
        m = self.mul_matrix(a)
        return sum(m[i][i] for i in range(self.degree))

    def inv(self, a: Coords) -> Coords:
        if self.is_zero(a):
            raise ZeroDivisionError("inverse of zero")
        if self.degree == 1:
            return (1 / a[0],)
        # solve a * y = 1 by Gaussian elimination on the transpose of
        # the multiplication matrix
        d = self.degree
        m = self.mul_matrix(a)
        # columns of m^T: we need y with sum_i y_i * (a x^i) = 1
        aug = [[m[i][j] for i in range(d)] + [Fraction(1) if j == 0 else Fraction(0)] for j in range(d)]
        for col in range(d):
            piv = None
            for r in range(col, d):
                if aug[r][col] != 0:
                    piv = r
                    break
            if piv is None:
                raise ZeroDivisionError("element is a zero divisor; field bug")
            aug[col], aug[piv] = aug[piv], aug[col]
            pv = aug[col][col]
            aug[col] = [v / pv for v in aug[col]]
            for r in range(d):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
        return tuple(aug[i][d] for i in range(d))

    def eval_poly_at(self, intpoly, a: Coords) -> Coords:
        """Evaluate an integer polynomial (constant first) at a field element."""
        out = self.zero
        for c in reversed(intpoly):
            out = self.add(self.mul(out, a), self.from_rational(c))
        return out

    def automorphisms(self) -> list["FieldAutomorphism"]:
        """All field automorphisms, identity first, rest sorted by image.

        Degree 1 and 2 are handled directly; higher degrees factor the
        defining polynomial over the field itself.
        """
        ident = FieldAutomorphism(self, self.gen)
        if self.degree == 1:
            return [ident]
        if self.degree == 2:
            a1 = self.coeffs[1]
            conj = self.element([Fraction(-a1), Fraction(-1)])
            return [ident, FieldAutomorphism(self, conj)]
        images = self._roots_in_self()
        autos = [ident]
        others = []
        for img in images:
            if img == self.gen:
                continue
            others.append(FieldAutomorphism(self, img))
        others.sort(key=lambda g: g.image)
        return autos + others

    def _roots_in_self(self) -> list[Coords]:
        return roots_in_field(self, self.coeffs)

    def _coords_from_sympy(self, expr, alpha) -> Coords:
        import sympy

        if expr.is_Rational:
            return self.from_rational(Fraction(int(expr.p), int(expr.q)))
        poly = sympy.Poly(expr, alpha)
        coeffs = poly.all_coeffs()[::-1]  # constant first
        out = self.zero
        for i, c in enumerate(coeffs):
            c = sympy.Rational(c)
            frac = Fraction(int(c.p), int(c.q))
            if i < self.degree:
                term = [Fraction(0)] * self.degree
                term[i] = frac
                out = self.add(out, tuple(term))
            else:
                out = self.add(out, self.scale(frac, self.power(self.gen, i)))
        return out


def roots_in_field(field: NumberFieldQ, intpoly) -> list[Coords]:
    """All roots of an integer polynomial (constant first) lying in the field.

    Factors the polynomial over the field and collects the linear factors;
    every returned root is re-verified with the field's own arithmetic.
    """
    import sympy

    x = sympy.symbols("x")
    expr = sum(int(c) * x**i for i, c in enumerate(intpoly))
    try:
        if field.degree == 1:
            alpha = None
            dom = sympy.QQ
        else:
            alpha = sympy.CRootOf(field._sympy_poly.as_expr(), 0)
            dom = sympy.QQ.algebraic_field(alpha)
        fk = sympy.Poly(expr, x, domain=dom)
        _, factors = fk.factor_list()
    except (sympy.SympifyError, NotImplementedError, sympy.PolynomialError) as exc:
        raise Unsupported(f"root search failed: {exc}") from exc
    roots = []
    for fac, _mult in factors:
        if fac.degree() != 1:
            continue
        lead, const = fac.all_coeffs()
        root_expr = sympy.expand(-const / lead)
        coords = field._coords_from_sympy(root_expr, alpha)
        if not field.is_zero(field.eval_poly_at(intpoly, coords)):
            raise Unsupported("root extraction produced a non-root")
        roots.append(coords)
    return roots


def _det_fractions(rows) -> Fraction:
    m = [list(r) for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        pv = m[col][col]
        m[col] = [v / pv for v in m[col]]
        for r in range(col + 1, n):
            if m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
    return det


@dataclass(frozen=True)
class FieldAutomorphism:
    """An automorphism of a NumberFieldQ, given by the image of the generator."""

    field: NumberFieldQ
    image: Coords

    def __post_init__(self):
        val = self.field.eval_poly_at(self.field.coeffs, self.image)
        if not self.field.is_zero(val):
            raise BadInput("claimed automorphism image is not a root of the defining polynomial")

    @property
    def is_identity(self) -> bool:
        return self.image == self.field.gen

    def apply(self, a: Coords) -> Coords:
        out = self.field.zero
        power = self.field.one
        for c in a:
            if c != 0:
                out = self.field.add(out, self.field.scale(c, power))
            power = self.field.mul(power, self.image)
        return out

    def compose(self, other: "FieldAutomorphism") -> "FieldAutomorphism":
        """self after other: (self . other)(x) = self(other(x))."""
        return FieldAutomorphism(self.field, self.apply(other.image))

    @cached_property
    def order(self) -> int:
        k = 1
        cur = self
        while not cur.is_identity:
            cur = cur.compose(self)
            k += 1
            if k > self.field.degree + 1:
                raise RuntimeError("automorphism order exceeded field degree")
        return k

    def inverse(self) -> "FieldAutomorphism":
        out = FieldAutomorphism(self.field, self.field.gen)
        for _ in range(self.order - 1):
            out = out.compose(self)
        return out


@dataclass(frozen=True)
class ResiduePrime:
    """A prime above p, named by an irreducible factor of f mod p."""

    field: NumberFieldQ
    p: int
    gbar: tuple[int, ...]
    index: int

    @cached_property
    def degree(self) -> int:
        return len(self.gbar) - 1

    @cached_property
    def residue_field(self) -> FiniteRing:
        return FiniteRing.gf(self.p, self.degree, self.gbar)

    def __repr__(self):
        return f"ResiduePrime(p={self.p}, index={self.index}, degree={self.degree})"


@lru_cache(maxsize=None)
def _factor_defining_poly(coeffs: tuple, p: int):
    fbar = tuple(c % p for c in coeffs)
    return _polymod.factor(fbar, p)


def residue_primes(field: NumberFieldQ, p: int) -> list[ResiduePrime]:
    """The primes above p, in canonical factor order; p must be unramified.

    Unramified here means p does not divide the discriminant of the
    defining polynomial, which also makes the power basis p-maximal.
    """
    if not is_prime(p):
        raise BadInput(f"{p} is not prime")
    if field.disc % p == 0:
        raise RamifiedOrBadPoly(
            f"p = {p} divides the defining polynomial discriminant {field.disc}"
        )
    factors = _factor_defining_poly(field.coeffs, p)
    assert all(m == 1 for _, m in factors), "squarefree factorization expected"
    return [
        ResiduePrime(field=field, p=p, gbar=g, index=i)
        for i, (g, _m) in enumerate(factors)
    ]


def reduce_at(a: Coords, P: ResiduePrime) -> int:
    """Image of a field element in the residue field of P, as a code."""
    p = P.p
    # clear to a common denominator, which must be prime to p
    coeffs = []
    for c in a:
        if c.denominator % p == 0:
            raise DenominatorAtP(f"coordinate {c} has p = {p} in its denominator")
        num = c.numerator % p
        den_inv = pow(c.denominator % p, -1, p)
        coeffs.append(num * den_inv % p)
    poly = _polymod.mod(_polymod.trim(tuple(coeffs)), P.gbar, p)
    F = P.residue_field
    padded = list(poly) + [0] * (F.n - len(poly))
    return F.encode(padded)


def residues_equal(a: Coords, b: Coords, P: ResiduePrime) -> bool:
    return reduce_at(a, P) == reduce_at(b, P)


def act_on_prime(
    gamma: FieldAutomorphism, P: ResiduePrime, primes: list[ResiduePrime]
) -> ResiduePrime:
    """The prime gamma(P) from the list of all primes above p.

    gamma(P) = Q iff the defining factor of Q kills the reduction of
    gamma^{-1}(generator) at P.
    """
    ginv = gamma.inverse()
    r = reduce_at(ginv.apply(P.field.gen), P)
    F = P.residue_field
    for Q in primes:
        acc = F.zero
        power = F.one
        for c in Q.gbar:
            acc = F.add(acc, F.mul(F.from_int(c), power))
            power = F.mul(power, r)
        if acc == F.zero:
            return Q
    raise RuntimeError("automorphism action on primes failed to land")


def decomposition_group(
    P: ResiduePrime, gammas: list[FieldAutomorphism], primes: list[ResiduePrime]
) -> list[FieldAutomorphism]:
    """The stabilizer of P inside the given group of automorphisms."""
    return [g for g in gammas if act_on_prime(g, P, primes) == P]


def prime_orbits(
    primes: list[ResiduePrime], gammas: list[FieldAutomorphism]
) -> list[list[int]]:
    """Orbits of the automorphisms on prime indices, each sorted, in
    order of smallest member."""
    seen = set()
    orbits = []
    for P in primes:
        if P.index in seen:
            continue
        orbit = set()
        stack = [P]
        while stack:
            cur = stack.pop()
            if cur.index in orbit:
                continue
            orbit.add(cur.index)
            for g in gammas:
                nxt = act_on_prime(g, cur, primes)
                if nxt.index not in orbit:
                    stack.append(nxt)
        seen |= orbit
        orbits.append(sorted(orbit))
    orbits.sort(key=lambda o: o[0])
    return orbits
