"""Local image models at a single prime and pair-level classification.

The objects here are finite shadows of the expected images of Galois
representations attached to newforms: the determinant-power condition
group at p for a single form, the coset pinned down by a scaling element
compatible with twist characters, Goursat analysis of product subgroups,
entanglement detection for pairs, scans for exceptional primes, and the
finite-level openness audit with its unit-group counterexample gallery.

Everything is exact arithmetic over small finite rings; nothing here
certifies statements about the actual Galois image, it computes the
candidate groups and classifies given subgroup data against them.
"""

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import reduce
from itertools import product as iproduct
from math import gcd, prod

from ._util import is_prime, kronecker, primes_upto
from .characters import is_fundamental_discriminant, reduce_root_mod
from .errors import (
    BadInput,
    BadPrime,
    BoundTooLarge,
    IncompleteCover,
    NeedTwoPrimes,
    NoEligibleEll,
    NoSolution,
    NotEnumerated,
    OverflowBound,
    RamifiedInK,
)
from .finitegroups import (
    GL2,
    FiniteRing,
    Mat2,
    SubgroupClosure,
    ambient_order,
    enumerate_gl2,
    enumerate_sl2,
    sl2_order,
)
from .newforms import (
    InnerTwistGroup,
    Newform,
    default_presentation,
    detect_inner_twists,
)
from .numberfields import (
    ResiduePrime,
    decomposition_group,
    prime_orbits,
    reduce_at,
    residue_primes,
)

ALL_PRIMES = "AllPrimesCandidate"


# ---------------------------------------------------------------------------
# specs: residue-block data for forms at p


@dataclass(frozen=True)
class FormBlock:
    """Residue degrees of the twist-invariant subfield at p, plus the weight.

    Orbits of the twist automorphisms on the primes of the coefficient
    field stand in for the primes of the invariant subfield; each orbit
    contributes one degree.
    """

    degrees: tuple
    weight: int

    def __post_init__(self):
        if self.weight < 1:
            raise BadInput("weight must be >= 1")
        if not self.degrees or any(d < 1 for d in self.degrees):
            raise BadInput("residue degrees must be positive")


@dataclass(frozen=True)
class GroupGSpec:
    """Local shape data at p for one form or an ordered pair of forms."""

    p: int
    blocks: tuple

    def __post_init__(self):
        if not is_prime(self.p):
            raise BadInput(f"{self.p} is not prime")
        if not 1 <= len(self.blocks) <= 2:
            raise BadInput("spec takes one or two form blocks")

    @property
    def weights(self):
        return tuple(b.weight for b in self.blocks)

    def rings(self):
        """Fresh residue-field rings matching the block degrees."""
        return [FiniteRing.gf(self.p, d) for b in self.blocks for d in b.degrees]


def gamma_parts(twists: InnerTwistGroup):
    """Distinct automorphism components of a twist group."""
    seen = set()
    out = []
    for t in twists.elements:
        if t.gamma.image not in seen:
            seen.add(t.gamma.image)
            out.append(t.gamma)
    return out


def form_block(f: Newform, p: int, twists: InnerTwistGroup) -> FormBlock:
    """Residue block of f at p, one degree per twist-orbit of primes.

    An orbit of size s whose members have residue degree d and stabilizer
    of order m contributes the degree d/m of the invariant subfield below.
    """
    if p < 5:
        raise BadPrime(f"p = {p} is below the supported range")
    if f.level % p == 0:
        raise BadPrime(f"p = {p} divides the level {f.level}")
    gammas = gamma_parts(twists)
    primes = residue_primes(f.field, p)
    degrees = []
    for orbit in prime_orbits(primes, gammas):
        P = primes[orbit[0]]
        D = decomposition_group(P, gammas, primes)
        if P.degree % len(D) != 0:
            raise BadInput("stabilizer order does not divide the residue degree")
        degrees.append(P.degree // len(D))
    return FormBlock(tuple(degrees), f.weight)


# ---------------------------------------------------------------------------
# the determinant-power condition group at p


@dataclass(frozen=True)
class DaggerGroup:
    """The group of residue matrix tuples whose determinants agree on a
    common unit power.

    Membership is decided in one determinant pass: all component
    determinants must be the same prime-field value, lying in the allowed
    power subgroup.
    """

    p: int
    weight: int
    degrees: tuple
    order: int
    allowed_dets: frozenset

    def contains(self, mats) -> bool:
        if isinstance(mats, Mat2):
            mats = (mats,)
        if len(mats) != len(self.degrees):
            raise BadInput("component count does not match the spec")
        flat = []
        rings = []
        for m in mats:
            flat.extend(m.flat())
            rings.append(m.ring)
        return self.contains_flat(tuple(flat), rings)

    def contains_flat(self, flat, rings) -> bool:
        common = None
        for i, ring in enumerate(rings):
            a, b, c, d = flat[4 * i : 4 * i + 4]
            det = ring.sub(ring.mul(a, d), ring.mul(b, c))
            if det >= self.p:
                return False
            if common is None:
                common = det
            elif det != common:
                return False
        return common in self.allowed_dets


def _power_subgroup(p: int, exponent: int) -> frozenset:
    e = exponent % (p - 1)
    return frozenset(pow(l, e, p) for l in range(1, p))


def dagger_group_modp(spec: GroupGSpec) -> DaggerGroup:
    """Order and membership test for the expected local image of one form."""
    if len(spec.blocks) != 1:
        raise BadInput("single-form operation needs a one-block spec")
    p = spec.p
    if p < 5:
        raise BadPrime(f"p = {p} is below the supported range")
    block = spec.blocks[0]
    k = block.weight
    order = prod(sl2_order(FiniteRing.gf(p, d)) for d in block.degrees)
    order *= (p - 1) // gcd(p - 1, k - 1)
    return DaggerGroup(
        p=p,
        weight=k,
        degrees=block.degrees,
        order=order,
        allowed_dets=_power_subgroup(p, k - 1),
    )


# ---------------------------------------------------------------------------
# the character-compatible scaling coset


@dataclass(frozen=True)
class PapierSolution:
    """A residue element alpha transforming under the twist group by the
    prescribed character values, together with the coset it determines.

    The specific alpha depends on the canonical embedding of character
    values into the residue field; its existence does not.  The recorded
    generator pins the embedding down.
    """

    prime: ResiduePrime
    u: int
    constraints: tuple
    alpha: int
    eps_value: int
    embedding_generator: int
    coset: Mat2


def _null_space_modp(rows, ncols: int, p: int):
    """Basis of the right null space of an integer matrix mod p.

    Basis vectors come out in ascending free-column order with a 1 in
    their free position, so the first vector is canonical.
    """
    m = [[v % p for v in row] for row in rows]
    nrows = len(m)
    pivots = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, nrows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [(v * inv) % p for v in m[r]]
        for i in range(nrows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(v - f * w) % p for v, w in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    basis = []
    pivot_set = set(pivots)
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [0] * ncols
        vec[free] = 1
        for i, c in enumerate(pivots):
            vec[c] = (-m[i][free]) % p
        basis.append(tuple(vec))
    return basis


def papier_coset(
    f: Newform, twists: InnerTwistGroup, P: ResiduePrime, u: int
) -> PapierSolution:
    """Solve for alpha with gamma(alpha) = chi_gamma(u) alpha in the residue
    field at P, for every twist automorphism stabilizing P.

    The solution is the first basis vector of the null space of the
    stacked eigen-conditions; the attached coset is diag(alpha,
    eps(u)/alpha) times the special linear group.
    """
    p = P.p
    if f.level % p == 0:
        raise BadPrime(f"p = {p} divides the level {f.level}")
    primes = residue_primes(f.field, p)
    if not any(Q.gbar == P.gbar for Q in primes):
        raise BadInput("prime does not belong to this form's field at p")
    F = P.residue_field
    d = F.n

    gammas = gamma_parts(twists)
    D_images = {g.image for g in decomposition_group(P, gammas, primes)}

    constraints = []
    for t in twists.elements:
        if t.gamma.image not in D_images:
            continue
        val = t.chi.primitive()(u)
        if val == 0:
            raise BadInput(f"u = {u} is not a unit for a twist character")
        c = reduce_root_mod(val, F)
        constraints.append((t.gamma, c))

    rows = []
    for gamma, c in constraints:
        r = reduce_at(gamma.apply(f.field.gen), P)
        cols = []
        for j in range(d):
            ej = F.encode([0] * j + [1])
            cols.append(F.decode(F.sub(F.power(r, j), F.mul(c, ej))))
        for i in range(d):
            rows.append([cols[j][i] for j in range(d)])

    basis = _null_space_modp(rows, d, p)
    if not basis:
        raise NoSolution(
            f"no nonzero alpha matches the character values at u = {u}"
        )
    alpha = F.encode(basis[0])

    # re-verify the defining relation element by element
    coords = F.decode(alpha)
    for gamma, c in constraints:
        r = reduce_at(gamma.apply(f.field.gen), P)
        acc = F.zero
        for j, aj in enumerate(coords):
            acc = F.add(acc, F.mul(F.from_int(aj), F.power(r, j)))
        assert acc == F.mul(c, alpha), "null-space solution failed verification"

    eps_val = f.eps.primitive()(u)
    if eps_val == 0:
        raise BadInput(f"u = {u} is not a unit for the nebentypus")
    e_code = reduce_root_mod(eps_val, F)
    coset = Mat2(F, alpha, 0, 0, F.mul(e_code, F.inv(alpha)))
    return PapierSolution(
        prime=P,
        u=u,
        constraints=tuple((g, c) for g, c in constraints),
        alpha=alpha,
        eps_value=e_code,
        embedding_generator=F.generator,
        coset=coset,
    )


# ---------------------------------------------------------------------------
# Goursat classification of subgroups of a two-factor product


def _comp_ops(ring: FiniteRing, tag: str):
    """(mul, canonicalize) for one component given its ambient tag."""

    def mul(x, y):
        return (Mat2(ring, *x) * Mat2(ring, *y)).flat()

    if tag == "PSL2":

        def cano(x):
            return min(x, Mat2(ring, *x).neg().flat())

    else:

        def cano(x):
            return x

    return mul, cano


@dataclass
class GoursatResult:
    """Classification of a subgroup of a product of two matrix groups."""

    kind: str  # "Full" | "Graph" | "NotSurjectiveOntoFactors"
    ambient: tuple
    order: int
    factor_orders: tuple
    projection_orders: tuple
    n1: frozenset = dc_field(default=None)
    n2: frozenset = dc_field(default=None)
    iso: dict = dc_field(default=None)
    quotient_order: int = dc_field(default=None)

    def reconstruct(self) -> frozenset:
        """Re-materialize the classified subgroup from the stored data."""
        if self.kind == "Full":
            r1, t1 = self.ambient[0]
            r2, t2 = self.ambient[1]
            _, cano1 = _comp_ops(r1, t1)
            _, cano2 = _comp_ops(r2, t2)
            g1 = {cano1(x) for x in _enumerate_component(r1, t1)}
            g2 = {cano2(y) for y in _enumerate_component(r2, t2)}
            return frozenset(x + y for x in g1 for y in g2)
        if self.kind != "Graph":
            raise BadInput("only Full and Graph data reconstruct a subgroup")
        mul1, _ = _comp_ops(*self.ambient[0])
        mul2, _ = _comp_ops(*self.ambient[1])
        out = set()
        for r1, r2 in self.iso.items():
            for x in self.n1:
                a = mul1(r1, x)
                for y in self.n2:
                    out.add(a + mul2(r2, y))
        return frozenset(out)


def _enumerate_component(ring: FiniteRing, tag: str):
    if tag == GL2:
        yield from enumerate_gl2(ring)
    else:
        seen = set()
        for m in enumerate_sl2(ring):
            if tag == "PSL2":
                m = min(m, Mat2(ring, *m).neg().flat())
                if m in seen:
                    continue
                seen.add(m)
            yield m


def goursat_classify(U: SubgroupClosure) -> GoursatResult:
    """Full product, graph data, or failure of factor surjectivity.

    Graph data consists of the two projection kernels and the induced
    quotient identification as an explicit coset bijection keyed by
    canonical (minimal) coset representatives.
    """
    if not isinstance(U, SubgroupClosure):
        raise NotEnumerated("input must be an enumerated subgroup")
    if len(U.ambient) != 2:
        raise NotEnumerated("classification needs exactly two components")
    g1o = ambient_order((U.ambient[0],))
    g2o = ambient_order((U.ambient[1],))
    p1 = U.project([0])
    p2 = U.project([1])
    base = dict(
        ambient=U.ambient,
        order=U.order,
        factor_orders=(g1o, g2o),
        projection_orders=(p1.order, p2.order),
    )
    if p1.order != g1o or p2.order != g2o:
        return GoursatResult(kind="NotSurjectiveOntoFactors", **base)
    if U.order == g1o * g2o:
        return GoursatResult(kind="Full", **base)

    mul1, cano1 = _comp_ops(*U.ambient[0])
    mul2, cano2 = _comp_ops(*U.ambient[1])
    id1 = cano1(Mat2.identity(U.ambient[0][0]).flat())
    id2 = cano2(Mat2.identity(U.ambient[1][0]).flat())
    n1 = frozenset(u[:4] for u in U.elements if u[4:] == id2)
    n2 = frozenset(u[4:] for u in U.elements if u[:4] == id1)

    def coset_rep(x, normal, mul):
        return min(mul(x, n) for n in normal)

    iso = {}
    for u in U.elements:
        c1 = coset_rep(u[:4], n1, mul1)
        c2 = coset_rep(u[4:], n2, mul2)
        if c1 in iso:
            assert iso[c1] == c2, "coset pairing is not well defined"
        else:
            iso[c1] = c2
    q = g1o // len(n1)
    assert q == g2o // len(n2), "quotient orders disagree"
    assert U.order == len(n1) * len(n2) * q, "Goursat order identity failed"
    assert len(iso) == q
    return GoursatResult(
        kind="Graph", n1=n1, n2=n2, iso=iso, quotient_order=q, **base
    )


# ---------------------------------------------------------------------------
# pair classification at p


@dataclass(frozen=True)
class EntanglementDatum:
    """How the two residue blocks are locked together at one prime pair.

    sign +1 means the strict relation y = t x' holds with t the scaling
    power of the determinant parameter; sign -1 allows both t and -t,
    the projective pattern.
    """

    v: int
    w: int
    frobenius_power: int
    sign: int
    exponent: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise BadInput("sign must be +1 or -1")

    def to_json(self):
        return {
            "v": self.v,
            "w": self.w,
            "frobenius_power": self.frobenius_power,
            "sign": "+" if self.sign == 1 else "-",
            "exponent": self.exponent,
        }


@dataclass(frozen=True)
class LocalImageReport:
    """Per-prime classification outcome."""

    p: int
    verdict: str  # FullDagger | OpenIndexBounded | Entangled | Unknown
    index: int = None
    datum: EntanglementDatum = None
    evidence: tuple = ()

    def __post_init__(self):
        if self.verdict not in ("FullDagger", "OpenIndexBounded", "Entangled", "Unknown"):
            raise BadInput(f"unknown verdict {self.verdict!r}")
        if self.verdict == "Entangled" and self.datum is None:
            raise BadInput("an entangled verdict carries its datum")
        if self.verdict == "OpenIndexBounded" and (self.index is None or self.index < 1):
            raise BadInput("a bounded-index verdict carries a positive index")

    @property
    def local_index(self) -> int:
        return self.index if self.verdict == "OpenIndexBounded" else 1

    def to_json(self):
        out = {"p": self.p, "verdict": self.verdict, "evidence": list(self.evidence)}
        if self.verdict == "OpenIndexBounded":
            out["index"] = self.index
        if self.datum is not None:
            out["datum"] = self.datum.to_json()
        return out


def _det_pair_classes(p: int, kf: int, kg: int):
    """Achievable determinant pairs and the parameters realizing each."""
    pairs = {}
    for lam in range(1, p):
        df = pow(lam, (1 - kf) % (p - 1), p)
        dg = pow(lam, (1 - kg) % (p - 1), p)
        pairs.setdefault((df, dg), []).append(lam)
    return pairs


def pair_fibre_order(spec: GroupGSpec) -> int:
    """Order of the mod-p fibre product of the two expected local groups."""
    if len(spec.blocks) != 2:
        raise BadInput("pair operation needs a two-block spec")
    p = spec.p
    kf, kg = spec.weights
    total = prod(
        sl2_order(FiniteRing.gf(p, d)) for b in spec.blocks for d in b.degrees
    )
    return total * ((p - 1) // gcd(p - 1, gcd(kf - 1, kg - 1)))


def _flat_det(flat, i, ring):
    a, b, c, d = flat[4 * i : 4 * i + 4]
    return ring.sub(ring.mul(a, d), ring.mul(b, c))


def _embedding_roots(ring_v: FiniteRing, ring_w: FiniteRing):
    """Roots in ring_w of ring_v's defining modulus, sorted by code."""
    roots = []
    for z in range(ring_w.size):
        acc = ring_w.zero
        power = ring_w.one
        for c in ring_v.modulus:
            acc = ring_w.add(acc, ring_w.mul(ring_w.from_int(c), power))
            power = ring_w.mul(power, z)
        if acc == ring_w.zero:
            roots.append(z)
    return sorted(roots)


def _component_map(ring_v: FiniteRing, ring_w: FiniteRing, root: int):
    """The field map ring_v -> ring_w sending the generator to root."""

    def phi(code):
        acc = ring_w.zero
        power = ring_w.one
        for c in ring_v.decode(code):
            acc = ring_w.add(acc, ring_w.mul(ring_w.from_int(c), power))
            power = ring_w.mul(power, root)
        return acc

    return phi


def pair_entanglement_classify(U: SubgroupClosure, spec: GroupGSpec) -> LocalImageReport:
    """Classify an enumerated subgroup of the mod-p pair fibre product.

    Full order gives FullDagger.  Otherwise a scaling relation between one
    residue block of each side is searched for; a relation that both holds
    on every element and accounts for the whole order gives Entangled with
    its datum.  Everything else is Unknown, with evidence attached.
    """
    if not isinstance(U, SubgroupClosure):
        raise NotEnumerated("input must be an enumerated subgroup")
    if len(spec.blocks) != 2:
        raise BadInput("pair operation needs a two-block spec")
    p = spec.p
    if p < 5:
        raise BadPrime(f"p = {p} is below the supported range")
    kf, kg = spec.weights
    degf, degg = spec.blocks[0].degrees, spec.blocks[1].degrees
    nf, ng = len(degf), len(degg)
    if len(U.ambient) != nf + ng:
        raise BadInput("ambient component count does not match the spec")
    for i, d in enumerate(degf + degg):
        ring, tag = U.ambient[i]
        if tag != GL2 or ring.size != p**d:
            raise BadInput(f"ambient component {i} does not match the spec")

    # factor surjectivity against the per-form expected groups
    for side, (lo, hi, block) in enumerate(
        [(0, nf, spec.blocks[0]), (nf, nf + ng, spec.blocks[1])]
    ):
        dag = dagger_group_modp(GroupGSpec(p, (block,)))
        proj = U.project(range(lo, hi))
        rings = [r for r, _ in proj.ambient]
        if proj.order != dag.order or not all(
            dag.contains_flat(u, rings) for u in proj.elements
        ):
            return LocalImageReport(
                p=p,
                verdict="Unknown",
                evidence=(
                    f"projection onto factor {side + 1} is not the full expected local group",
                ),
            )

    pairs = _det_pair_classes(p, kf, kg)
    fibre = pair_fibre_order(spec)
    if U.order == fibre:
        return LocalImageReport(
            p=p,
            verdict="FullDagger",
            evidence=(f"order {U.order} equals the fibre-product order",),
        )

    if (kf - kg) % 2 != 0:
        return LocalImageReport(
            p=p,
            verdict="Unknown",
            evidence=(
                f"order {U.order} of {fibre}",
                "odd weight difference: the scaling pattern is undefined",
            ),
        )
    e = (kf - kg) // 2

    # per-element determinant classes, shared across candidate data
    det_cache = []
    for u in U.elements:
        df = _flat_det(u, 0, U.ambient[0][0])
        dg = _flat_det(u, nf, U.ambient[nf][0])
        if (df, dg) not in pairs:
            return LocalImageReport(
                p=p,
                verdict="Unknown",
                evidence=("element determinants fall outside the fibre condition",),
            )
        det_cache.append((df, dg))

    sl2_all = prod(sl2_order(r) for r, _ in U.ambient)
    near_misses = []
    for v in range(nf):
        ring_v = U.ambient[v][0]
        for w in range(ng):
            ring_w = U.ambient[nf + w][0]
            if ring_v.n != ring_w.n:
                continue
            roots = _embedding_roots(ring_v, ring_w)
            base = roots[0]
            # scalar-multiplication lookup, shared across candidate data
            tmul = {
                t: [ring_w.mul(ring_w.from_int(t), c) for c in range(ring_w.size)]
                for t in range(1, p)
            }
            for j in range(ring_v.n):
                phi = _component_map(ring_v, ring_w, ring_w.power(base, p**j))
                pmap = [phi(c) for c in range(ring_v.size)]
                for sign in (1, -1):
                    tsets = {}
                    for key, lams in pairs.items():
                        ts = {pow(lam, e % (p - 1), p) for lam in lams}
                        if sign == -1:
                            ts |= {(p - t) % p for t in ts}
                        tsets[key] = ts
                    ok = True
                    off_v, off_w = 4 * v, 4 * (nf + w)
                    for u, key in zip(U.elements, det_cache):
                        yw = u[off_w : off_w + 4]
                        phix = tuple(pmap[c] for c in u[off_v : off_v + 4])
                        if not any(
                            yw == (tmul[t][phix[0]], tmul[t][phix[1]], tmul[t][phix[2]], tmul[t][phix[3]])
                            for t in tsets[key]
                        ):
                            ok = False
                            break
                    if not ok:
                        continue
                    expected = (
                        sl2_all
                        // sl2_order(ring_w)
                        * sum(len(ts) for ts in tsets.values())
                    )
                    datum = EntanglementDatum(
                        v=v, w=w, frobenius_power=j, sign=sign, exponent=e
                    )
                    if U.order == expected:
                        return LocalImageReport(
                            p=p,
                            verdict="Entangled",
                            datum=datum,
                            evidence=(
                                f"relation locks block {v} to block {w}; "
                                f"order {U.order} matches the pattern",
                            ),
                        )
                    near_misses.append(
                        f"relation {datum.to_json()} holds but accounts for "
                        f"{expected} elements, not {U.order}"
                    )
    return LocalImageReport(
        p=p,
        verdict="Unknown",
        evidence=tuple(
            [f"order {U.order} of {fibre}; no scaling pattern matched"] + near_misses
        ),
    )


def entangled_elements(spec: GroupGSpec, datum: EntanglementDatum, rings) -> frozenset:
    """Materialize the subgroup cut out by an entanglement datum.

    rings must list the residue rings in spec order.  Intended for
    round-trip checks on small ambients; the enumeration is by brute
    force over determinant classes.
    """
    if len(spec.blocks) != 2:
        raise BadInput("pair operation needs a two-block spec")
    p = spec.p
    kf, kg = spec.weights
    nf = len(spec.blocks[0].degrees)
    pairs = _det_pair_classes(p, kf, kg)
    by_det = []
    for i, ring in enumerate(rings):
        if i == len(spec.blocks[0].degrees) + datum.w:
            by_det.append(None)  # locked component, never enumerated
            continue
        table = {}
        for m in enumerate_gl2(ring):
            table.setdefault(_flat_det(m, 0, ring), []).append(m)
        by_det.append(table)
    ring_v = rings[datum.v]
    ring_w = rings[nf + datum.w]
    roots = _embedding_roots(ring_v, ring_w)
    phi = _component_map(ring_v, ring_w, ring_w.power(roots[0], p**datum.frobenius_power))
    # tabulated maps keep the class-by-class enumeration affordable
    pmap = [phi(c) for c in range(ring_v.size)]
    scalar_row = {}
    for t in range(1, p):
        tc = ring_w.from_int(t)
        scalar_row[t] = [ring_w.mul(tc, c) for c in range(ring_w.size)]

    out = set()
    for (df, dg), lams in pairs.items():
        ts = {pow(lam, datum.exponent % (p - 1), p) for lam in lams}
        if datum.sign == -1:
            ts |= {(p - t) % p for t in ts}
        rows = [scalar_row[t] for t in sorted(ts)]
        comp_choices = []
        for i, ring in enumerate(rings):
            want = df if i < nf else dg
            if i == nf + datum.w:
                comp_choices.append(None)  # determined below
            else:
                comp_choices.append(by_det[i].get(want, []))
        free_positions = [i for i in range(len(rings)) if comp_choices[i] is not None]
        two_comp = len(rings) == 2 and datum.v == 0 and nf + datum.w == 1
        for combo in iproduct(*(comp_choices[i] for i in free_positions)):
            parts = dict(zip(free_positions, combo))
            xv = parts[datum.v]
            phix = (pmap[xv[0]], pmap[xv[1]], pmap[xv[2]], pmap[xv[3]])
            for row in rows:
                yw = (row[phix[0]], row[phix[1]], row[phix[2]], row[phix[3]])
                if two_comp:
                    out.add(xv + yw)
                    continue
                flat = []
                for i in range(len(rings)):
                    flat.extend(yw if i == nf + datum.w else parts[i])
                out.add(tuple(flat))
    return frozenset(out)


# ---------------------------------------------------------------------------
# exceptional prime scan for a pair


@dataclass(frozen=True)
class ScanResult:
    """Outcome of the congruence scan over a pair of coefficient tables."""

    tested_ells: tuple
    norms: dict
    gcd_value: int
    candidates: frozenset  # None when indeterminate
    all_primes: bool
    excluded: frozenset

    def to_json(self):
        return {
            "tested_ells": list(self.tested_ells),
            "norms": {str(l): str(n) for l, n in self.norms.items()},
            "gcd": str(self.gcd_value),
            "candidates": (
                ALL_PRIMES
                if self.all_primes
                else (sorted(self.candidates) if self.candidates is not None else None)
            ),
            "excluded": sorted(self.excluded),
        }


def _in_joint_kernel(l: int, twist_groups) -> bool:
    for G in twist_groups:
        for t in G.elements:
            v = t.chi.primitive()(l)
            if v == 0 or not v.is_one:
                return False
    return True


def exceptional_prime_scan(
    f: Newform,
    g: Newform,
    gammas=None,
    ell_bound: int = 200,
    p_bound: int = 1000,
    twists_f: InnerTwistGroup = None,
    twists_g: InnerTwistGroup = None,
    presentation=None,
) -> ScanResult:
    """Candidate primes where the pair could fail to have the generic image.

    For each prime l up to ell_bound lying in the joint character kernel
    of both twist groups, the scan computes the integer norm of
    prod_gamma (a_l(f)^2 - l^(kf-kg) gamma(a_l(g))^2) in a composite
    field, then intersects divisor sets: primes up to p_bound dividing
    the gcd of at least three nonzero norms, minus side-condition
    exclusions.  An identically zero product reports the all-primes
    sentinel; fewer than three usable norms leaves candidates undecided
    (None).
    """
    if f.weight < g.weight:
        raise BadInput("the first form must have the larger weight")
    if min(f.bound, g.bound) < ell_bound:
        raise BoundTooLarge(
            f"coefficient tables stop before the requested bound {ell_bound}"
        )
    if twists_f is None:
        twists_f = detect_inner_twists(f)
    if twists_g is None:
        twists_g = detect_inner_twists(g)
    if gammas is None:
        gammas = g.field.automorphisms()
    if presentation is None:
        presentation = default_presentation(f, g)
    presentation.verify(f.field, g.field)
    K = presentation.field

    NfNg = f.level * g.level
    eligible = []
    for l in primes_upto(ell_bound):
        if NfNg % l == 0:
            continue
        if _in_joint_kernel(l, (twists_f, twists_g)):
            eligible.append(l)
    if not eligible:
        raise NoEligibleEll(f"no usable prime below {ell_bound} lies in the joint kernel")

    norms = {}
    for l in eligible:
        af = presentation.map_f(f.field, f.a(l))
        scale = Fraction(l ** (f.weight - g.weight))
        val = K.one
        for gamma in gammas:
            ag = presentation.map_g(g.field, gamma.apply(g.a(l)))
            term = K.sub(K.mul(af, af), K.scale(scale, K.mul(ag, ag)))
            val = K.mul(val, term)
        nrm = K.norm(val)
        if nrm.denominator != 1:
            raise BadInput(f"non-integral norm at l = {l}; coefficient data not integral")
        norms[l] = int(nrm)

    nonzero = [n for n in norms.values() if n != 0]
    if not nonzero:
        return ScanResult(
            tested_ells=tuple(eligible),
            norms=norms,
            gcd_value=0,
            candidates=None,
            all_primes=True,
            excluded=frozenset(),
        )
    g_val = reduce(gcd, (abs(n) for n in nonzero))
    if len(nonzero) < 3:
        return ScanResult(
            tested_ells=tuple(eligible),
            norms=norms,
            gcd_value=g_val,
            candidates=None,
            all_primes=False,
            excluded=frozenset(),
        )
    dividing = {p for p in primes_upto(p_bound) if g_val % p == 0}
    excluded = {p for p in dividing if p < 5 or NfNg % p == 0}
    return ScanResult(
        tested_ells=tuple(eligible),
        norms=norms,
        gcd_value=g_val,
        candidates=frozenset(dividing - excluded),
        all_primes=False,
        excluded=frozenset(excluded),
    )


# ---------------------------------------------------------------------------
# finite-level openness audit


@dataclass(frozen=True)
class DetLevel:
    """The determinant image at one prime level: a subgroup of units."""

    modulus: int
    elements: frozenset

    def __post_init__(self):
        if self.modulus < 3:
            raise BadInput("modulus must be a prime power >= 3")
        q, r = self.modulus, self.p
        while q % r == 0:
            q //= r
        if q != 1:
            raise BadInput(f"{self.modulus} is not a prime power")
        elems = self.elements
        if not elems or any(
            not (0 < x < self.modulus) or gcd(x, self.modulus) != 1 for x in elems
        ):
            raise BadInput("elements must be reduced units")
        if 1 not in elems:
            raise BadInput("subgroup must contain 1")
        for a in elems:
            if pow(a, -1, self.modulus) not in elems:
                raise BadInput("subgroup not closed under inverses")
            for b in elems:
                if (a * b) % self.modulus not in elems:
                    raise BadInput("subgroup not closed under multiplication")

    @property
    def p(self) -> int:
        q = self.modulus
        for r in primes_upto(q):
            if q % r == 0:
                return r
        raise BadInput("modulus has no prime divisor")

    @property
    def unit_count(self) -> int:
        q, r = self.modulus, self.p
        return q - q // r

    @property
    def index(self) -> int:
        return self.unit_count // len(self.elements)


@dataclass(frozen=True)
class DetImage:
    """Determinant data: explicit levels plus a claim about the rest.

    full_outside asserts the determinant image is the full unit group at
    every prime not listed; without it no finite computation can certify
    openness of the determinant.
    """

    levels: tuple  # of DetLevel
    full_outside: bool = True


@dataclass(frozen=True)
class AuditResult:
    open: bool
    index_bound: int
    failing: str
    assumptions: tuple

    def to_json(self):
        return {
            "open": self.open,
            "index_bound": self.index_bound,
            "failing": self.failing,
            "assumptions": list(self.assumptions),
        }


def adelic_openness_audit(reports, det_image: DetImage) -> AuditResult:
    """Finite-level openness decision from per-prime reports and det data.

    Open means: every report is FullDagger or OpenIndexBounded, and the
    determinant image is full outside the audited set (explicit proper
    subgroups at audited primes fold into the index bound).  The decision
    is monotone: improving any report verdict never turns open off.
    """
    reports = list(reports)
    seen = {}
    for r in reports:
        if r.p in seen:
            raise BadInput(f"duplicate report for p = {r.p}")
        seen[r.p] = r
    for r in reports:
        if r.verdict == "Unknown":
            raise IncompleteCover(f"report at p = {r.p} is Unknown; the cover has a hole")
    for lvl in det_image.levels:
        if lvl.p not in seen:
            raise IncompleteCover(
                f"determinant data at p = {lvl.p} lies outside the report set"
            )

    assumptions = (
        "local projections assumed full outside the audited set",
        "determinant image " + ("assumed full" if det_image.full_outside else "NOT full")
        + " outside the audited set",
    )
    entangled = [r for r in reports if r.verdict == "Entangled"]
    if entangled:
        return AuditResult(
            open=False, index_bound=None, failing="EntangledPair", assumptions=assumptions
        )
    if not det_image.full_outside:
        return AuditResult(
            open=False, index_bound=None, failing="DetNotOpen", assumptions=assumptions
        )
    det_by_p = {lvl.p: lvl for lvl in det_image.levels}
    bound = 1
    for r in reports:
        local = r.local_index
        if r.p in det_by_p:
            local = max(local, det_by_p[r.p].index)
        bound *= local
    return AuditResult(open=True, index_bound=bound, failing=None, assumptions=assumptions)


# ---------------------------------------------------------------------------
# the unit-group counterexample gallery


@dataclass(frozen=True)
class CounterexampleRecord:
    primes: tuple
    elements: frozenset
    order: int
    ambient_order: int
    index: int
    is_subgroup: bool
    projections_surjective: bool


def counterexample_subgroup(primes) -> CounterexampleRecord:
    """The all-squares-or-all-nonsquares subgroup of a product of unit groups.

    Each projection is surjective yet the subgroup is proper, with index
    2^(r-1); the classical witness that componentwise surjectivity does
    not force openness of a product subgroup.
    """
    ps = list(primes)
    if len(ps) < 2:
        raise NeedTwoPrimes("the phenomenon needs at least two prime factors")
    if len(set(ps)) != len(ps):
        raise BadInput("primes must be distinct")
    for p in ps:
        if p == 2 or not is_prime(p):
            raise BadInput(f"{p} is not an odd prime")
    total = prod(p - 1 for p in ps)
    if total > 10**6:
        raise OverflowBound("unit-group product too large to enumerate")

    squares = [frozenset(x * x % p for x in range(1, p)) for p in ps]
    units = [range(1, p) for p in ps]
    elements = set()
    for tup in iproduct(*units):
        flags = [x in sq for x, sq in zip(tup, squares)]
        if all(flags) or not any(flags):
            elements.add(tup)

    is_subgroup = all(
        tuple(a * b % p for a, b, p in zip(x, y, ps)) in elements
        for x in elements
        for y in elements
    ) and tuple(1 for _ in ps) in elements
    is_subgroup = is_subgroup and all(
        tuple(pow(a, -1, p) for a, p in zip(x, ps)) in elements for x in elements
    )
    projections_surjective = all(
        {x[i] for x in elements} == set(range(1, p)) for i, p in enumerate(ps)
    )
    order = len(elements)
    index = total // order
    assert index == 2 ** (len(ps) - 1), "index formula failed"
    return CounterexampleRecord(
        primes=tuple(ps),
        elements=frozenset(elements),
        order=order,
        ambient_order=total,
        index=index,
        is_subgroup=is_subgroup,
        projections_surjective=projections_surjective,
    )


# ---------------------------------------------------------------------------
# expected image for a form with complex multiplication


@dataclass(frozen=True)
class CmImage:
    """Expected mod-p image description for a form with extra symmetry."""

    p: int
    weight: int
    disc: int
    case: str  # "split" | "inert"
    order: int
    diagonal_values: frozenset = None  # split: allowed diagonal entries
    elements: frozenset = None  # inert: explicit matrix set

    def contains(self, m) -> bool:
        if isinstance(m, Mat2):
            m = m.flat()
        a, b, c, d = m
        if self.case == "split":
            return b == 0 and c == 0 and a in self.diagonal_values and d in self.diagonal_values
        return tuple(m) in self.elements


def cm_expected_image_modp(k: int, K_disc: int, p: int) -> CmImage:
    """Order and membership for the diagonal-or-norm-pattern image at p.

    Split case: both diagonal entries range over the (k-1)-th power
    subgroup.  Inert case: the cyclic group of multiplication matrices by
    (1-k)-th powers in the quadratic extension.
    """
    if k < 1:
        raise BadInput("weight must be >= 1")
    if not is_prime(p) or p == 2:
        raise BadInput(f"p = {p} must be an odd prime")
    if not is_fundamental_discriminant(K_disc):
        raise BadInput(f"{K_disc} is not a fundamental discriminant")
    s = kronecker(K_disc, p)
    if s == 0:
        raise RamifiedInK(f"p = {p} ramifies (divides {K_disc})")
    if s == 1:
        values = _power_subgroup(p, 1 - k)
        return CmImage(
            p=p,
            weight=k,
            disc=K_disc,
            case="split",
            order=len(values) ** 2,
            diagonal_values=values,
        )
    F = FiniteRing.gf(p, 2)
    y = F.power(F.generator, (1 - k) % (p**2 - 1))
    t_code = F.encode([0, 1])
    elements = set()
    z = F.one
    while True:
        col1 = F.decode(z)
        col2 = F.decode(F.mul(z, t_code))
        elements.add((col1[0], col2[0], col1[1], col2[1]))
        z = F.mul(z, y)
        if z == F.one:
            break
    order = (p**2 - 1) // gcd(p**2 - 1, k - 1)
    assert len(elements) == order, "cyclic pattern order mismatch"
    return CmImage(
        p=p,
        weight=k,
        disc=K_disc,
        case="inert",
        order=order,
        elements=frozenset(elements),
    )
