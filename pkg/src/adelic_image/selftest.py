"""Seeded exhaustive self-test suites, runnable from the command line.

Each suite re-derives one family of finite facts the library depends on
(closure lifting, product classification, the negative hypothesis scan,
the index-2^(r-1) counterexample, expected-order formulas, the coset
solver) against an independent oracle: brute enumeration, element-wise
round-trips, or direct re-computation in the relevant finite structure.
Suites take a seed and are deterministic given it.
"""

from dataclasses import dataclass
import random

from .characters import DirichletCharacter, kronecker_character
from .errors import BadInput
from .finitegroups import (
    GL2,
    SL2,
    FiniteRing,
    Mat2,
    closure,
    sl2_order,
    standard_sl2_generators,
)
from .hypcheck import negative_check
from .imageanalysis import (
    EntanglementDatum,
    FormBlock,
    GroupGSpec,
    counterexample_subgroup,
    dagger_group_modp,
    entangled_elements,
    goursat_classify,
    pair_entanglement_classify,
    pair_fibre_order,
    papier_coset,
)
from .newforms import InnerTwist, InnerTwistGroup, Newform
from .numberfields import NumberFieldQ, residue_primes

DEFAULT_SEED = 0x5EED

_TRIV = DirichletCharacter(1, ())


@dataclass(frozen=True)
class Check:
    label: str
    ok: bool
    detail: str

    def to_json(self):
        return {"label": self.label, "ok": self.ok, "detail": self.detail}


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    seed: int
    checks: tuple

    @property
    def passed(self) -> int:
        return sum(1 for c in self.checks if c.ok)

    @property
    def failed(self) -> int:
        return len(self.checks) - self.passed

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_json(self):
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "failed": self.failed,
            "checks": [c.to_json() for c in self.checks],
        }

    def summary_lines(self):
        lines = []
        for c in self.checks:
            mark = "ok  " if c.ok else "FAIL"
            lines.append(f"  [{mark}] {c.label}: {c.detail}")
        lines.append(f"{self.suite}: {self.passed} passed, {self.failed} failed")
        return lines


# ---------------------------------------------------------------------------
# lifting: closures over Z/25 determined by their mod-5 image


def _random_sl2(ring, rng):
    s = ring.size
    while True:
        a, b, c, d = (rng.randrange(s) for _ in range(4))
        if (a * d - b * c) % s == 1:
            return Mat2(ring, a, b, c, d)


def _mod5_projection_full(mats25, ring5) -> bool:
    gens = [Mat2(ring5, *(x % 5 for x in m.flat())) for m in mats25]
    return closure(gens, ((ring5, SL2),)).order == 120


def _flat_mul(x, y, mul, add, s):
    a, b, c, d = x
    e, f, g, h = y
    return (
        add[mul[a * s + e] * s + mul[b * s + g]],
        add[mul[a * s + f] * s + mul[b * s + h]],
        add[mul[c * s + e] * s + mul[d * s + g]],
        add[mul[c * s + f] * s + mul[d * s + h]],
    )


def _psl2_pair_order(pairs, ring) -> int:
    """Order of the subgroup of PSL2 x PSL2 generated by the given pairs
    of matrices, by direct closure on sign-canonical representatives."""
    mul, add, neg, _ = ring.tables
    s = ring.size

    def cano(flat):
        alt = tuple(neg[x] for x in flat)
        return flat if flat <= alt else alt

    gens = [(cano(a.flat()), cano(b.flat())) for a, b in pairs]
    seen = set(gens)
    frontier = list(gens)
    while frontier:
        nxt = []
        for ea, eb in frontier:
            for ga, gb in gens:
                el = (cano(_flat_mul(ea, ga, mul, add, s)), cano(_flat_mul(eb, gb, mul, add, s)))
                if el not in seen:
                    seen.add(el)
                    nxt.append(el)
        frontier = nxt
    return len(seen)


def suite_lifting(seed: int):
    checks = []
    Z25 = FiniteRing.zmod(5, 2)
    R5 = FiniteRing.gf(5, 1)

    up = closure([Mat2.of(Z25, 1, 1, 0, 1), Mat2.of(Z25, 1, 0, 1, 1)], ((Z25, SL2),))
    checks.append(
        Check(
            "unipotent pair mod 25",
            up.order == 15000,
            f"closure order {up.order}, expected 15000",
        )
    )

    rng = random.Random(seed)
    good = 0
    trials = 200
    for _ in range(trials):
        while True:
            x, y = _random_sl2(Z25, rng), _random_sl2(Z25, rng)
            if _mod5_projection_full([x, y], R5):
                break
        if closure([x, y], ((Z25, SL2),)).order == 15000:
            good += 1
    checks.append(
        Check(
            "random pairs mod 25",
            good == trials,
            f"{good}/{trials} closures of full mod-5 pairs have order 15000",
        )
    )

    amb = ((R5, SL2), (R5, SL2))
    good = 0
    trials = 50
    for _ in range(trials):
        while True:
            gens = [
                (_random_sl2(R5, rng), _random_sl2(R5, rng)),
                (_random_sl2(R5, rng), _random_sl2(R5, rng)),
            ]
            if _psl2_pair_order(gens, R5) == 3600:
                break
        if closure(gens, amb).order == 14400:
            good += 1
    checks.append(
        Check(
            "pair residue closures",
            good == trials,
            f"{good}/{trials} subgroups surjecting onto the projective product are full",
        )
    )
    return checks


# ---------------------------------------------------------------------------
# goursat: graph constructions classify and regenerate exactly


def suite_goursat(seed: int):
    del seed  # fully deterministic constructions
    checks = []
    R5 = FiniteRing.gf(5, 1)
    S1, S2 = standard_sl2_generators(R5)
    I5 = Mat2.identity(R5)
    D31 = Mat2.of(R5, 3, 0, 0, 1)
    amb = ((R5, GL2), (R5, GL2))
    spec22 = GroupGSpec(5, (FormBlock((1,), 2), FormBlock((1,), 2)))

    def roundtrip(label, U, spec, rings, expect):
        rep = pair_entanglement_classify(U, spec)
        if rep.verdict != "Entangled":
            return Check(label, False, f"verdict {rep.verdict}, expected Entangled")
        if expect is not None and expect(rep.datum) is False:
            return Check(label, False, f"unexpected datum {rep.datum}")
        regen = entangled_elements(spec, rep.datum, rings)
        ok = regen == U.element_set
        return Check(
            label,
            ok,
            f"datum {rep.datum.to_json()} regenerates {len(regen)} of {U.order} elements",
        )

    sl_amb = ((R5, SL2), (R5, SL2))
    sl_full = closure([(S1, I5), (S2, I5), (I5, S1), (I5, S2)], sl_amb)
    g = goursat_classify(sl_full)
    checks.append(
        Check(
            "full product",
            g.kind == "Full" and sl_full.order == 14400,
            f"order {sl_full.order}, goursat kind {g.kind}",
        )
    )

    fibre = closure([(S1, I5), (S2, I5), (I5, S1), (I5, S2), (D31, D31)], amb)
    rep = pair_entanglement_classify(fibre, spec22)
    checks.append(
        Check(
            "expected fibre",
            rep.verdict == "FullDagger" and fibre.order == 57600,
            f"order {fibre.order}, verdict {rep.verdict}",
        )
    )

    diag = closure([(S1, S1), (S2, S2), (D31, D31)], amb)
    gd = goursat_classify(diag)
    checks.append(
        Check(
            "diagonal goursat",
            gd.kind == "Graph" and gd.reconstruct() == diag.element_set,
            f"kind {gd.kind}, quotient {gd.quotient_order}, reconstruction exact",
        )
    )
    checks.append(
        roundtrip(
            "diagonal datum",
            diag,
            spec22,
            [R5, R5],
            lambda d: d == EntanglementDatum(0, 0, 0, 1, 0),
        )
    )

    pm = closure([(S1, S1.neg()), (S2, S2.neg()), (D31, D31.neg())], amb)
    checks.append(
        roundtrip("sign-twisted datum", pm, spec22, [R5, R5], lambda d: d.sign == -1)
    )

    F25 = FiniteRing.gf(5, 2)
    t = F25.encode([0, 1])

    def frob(m):
        return Mat2(F25, *(F25.power(c, 5) for c in m.flat()))

    gens25 = [
        Mat2.of(F25, 1, 1, 0, 1),
        Mat2(F25, F25.one, t, F25.zero, F25.one),
        Mat2.of(F25, 1, 0, 1, 1),
        Mat2(F25, F25.one, F25.zero, t, F25.one),
        Mat2.of(F25, 3, 0, 0, 1),
    ]
    frobgraph = closure(
        [(a, frob(a)) for a in gens25], ((F25, GL2), (F25, GL2)), bound=200000
    )
    spec_q = GroupGSpec(5, (FormBlock((2,), 2), FormBlock((2,), 2)))
    checks.append(
        roundtrip(
            "frobenius-twisted datum",
            frobgraph,
            spec_q,
            [F25, F25],
            lambda d: d.frobenius_power == 1,
        )
    )

    R7 = FiniteRing.gf(7, 1)
    t1, t2 = standard_sl2_generators(R7)
    scal = closure(
        [(t1, t1), (t2, t2), (Mat2.of(R7, 3, 0, 0, 1), Mat2.of(R7, 1, 0, 0, 5))],
        ((R7, GL2), (R7, GL2)),
    )
    spec_w = GroupGSpec(7, (FormBlock((1,), 12), FormBlock((1,), 2)))
    checks.append(
        roundtrip(
            "scalar-twisted datum",
            scal,
            spec_w,
            [R7, R7],
            lambda d: d.exponent == 5,
        )
    )
    return checks


# ---------------------------------------------------------------------------
# negative-hyp: the exhaustive unit-determinant scan


def suite_negative_hyp(seed: int):
    del seed
    checks = []
    for q in (3, 5):
        rec = negative_check(_TRIV, _TRIV, q)
        checks.append(
            Check(
                f"q={q} scan",
                rec.confirmed,
                f"{rec.pairs_scanned} pairs scanned, {rec.rank3_pairs} violations",
            )
        )
    return checks


# ---------------------------------------------------------------------------
# counterexample: componentwise surjectivity without openness


def suite_counterexample(seed: int):
    del seed
    checks = []
    for primes, index in (((3, 5), 2), ((3, 5, 7), 4)):
        rec = counterexample_subgroup(primes)
        ok = (
            rec.index == index
            and rec.is_subgroup
            and rec.projections_surjective
            and rec.order * rec.index == rec.ambient_order
        )
        checks.append(
            Check(
                "primes " + str(primes),
                ok,
                f"order {rec.order} in {rec.ambient_order}, index {rec.index}",
            )
        )
    return checks


# ---------------------------------------------------------------------------
# dagger-orders: expected order formula vs exhaustive determinant counts


def _det_histogram(ring):
    """Count invertible 2x2 matrices over the ring by determinant code."""
    mul, add, neg, _ = ring.tables
    s = ring.size
    hist = [0] * s
    for a in range(s):
        row = mul[a * s : (a + 1) * s]
        for b in range(s):
            for c in range(s):
                nbc = neg[mul[b * s + c]]
                for d in range(s):
                    det = add[row[d] * s + nbc]
                    if det:
                        hist[det] += 1
    return hist


def suite_dagger_orders(seed: int):
    del seed
    checks = []
    hists = {}
    for p in (5, 7):
        hists[(p, 1)] = _det_histogram(FiniteRing.gf(p, 1))
        hists[(p, 2)] = _det_histogram(FiniteRing.gf(p, 2))
    for p in (5, 7):
        for degrees in ((1,), (1, 1), (2,)):
            for k in range(2, 9):
                dag = dagger_group_modp(GroupGSpec(p, (FormBlock(degrees, k),)))
                allowed = dag.allowed_dets
                if degrees == (1, 1):
                    h = hists[(p, 1)]
                    count = sum(h[d] * h[d] for d in allowed)
                else:
                    h = hists[(p, degrees[0])]
                    count = sum(h[d] for d in allowed)
                checks.append(
                    Check(
                        f"p={p} k={k} degrees={degrees}",
                        count == dag.order,
                        f"enumerated {count}, formula {dag.order}",
                    )
                )
    return checks


# ---------------------------------------------------------------------------
# papier: the coset solver against direct field arithmetic


def suite_papier(seed: int):
    del seed
    checks = []
    L = NumberFieldQ((-3, 0, 1))
    f = Newform("selftest", 1, 2, _TRIV, L, {2: L.zero}, (), None)
    ident, conj = L.automorphisms()
    twisted = InnerTwistGroup(
        (InnerTwist(ident, _TRIV), InnerTwist(conj, kronecker_character(-4))), None
    )
    trivial = InnerTwistGroup((InnerTwist(ident, _TRIV),), None)

    P5 = residue_primes(L, 5)[0]
    sol = papier_coset(f, twisted, P5, 3)
    F = P5.residue_field
    anti = F.power(sol.alpha, 5) == F.neg(sol.alpha)
    sq = F.power(sol.alpha, 4) == F.from_int(-1)
    checks.append(
        Check(
            "inert p=5 anticommuting alpha",
            anti and sq and sol.alpha != F.one,
            f"alpha code {sol.alpha}: alpha^5 = -alpha {anti}, alpha^4 = -1 {sq}",
        )
    )

    sol1 = papier_coset(f, twisted, P5, 1)
    checks.append(
        Check(
            "inert p=5 trivial character value",
            sol1.alpha == F.one,
            f"chi(u) = 1 pins alpha to {sol1.alpha}, expected {F.one}",
        )
    )

    sol_id = papier_coset(f, trivial, P5, 7)
    checks.append(
        Check(
            "trivial twist group",
            sol_id.alpha == F.one,
            f"no constraints, alpha {sol_id.alpha}",
        )
    )

    P11 = residue_primes(L, 11)[0]
    sol2 = papier_coset(f, twisted, P11, 3)
    F11 = P11.residue_field
    checks.append(
        Check(
            "split p=11 trivial stabilizer",
            sol2.alpha == F11.one,
            f"conjugation moves the prime; alpha {sol2.alpha}, expected 1",
        )
    )
    return checks


SUITES = {
    "lifting": suite_lifting,
    "goursat": suite_goursat,
    "negative-hyp": suite_negative_hyp,
    "counterexample": suite_counterexample,
    "dagger-orders": suite_dagger_orders,
    "papier": suite_papier,
}


def run_suite(name: str, seed: int = DEFAULT_SEED) -> SuiteResult:
    if name not in SUITES:
        raise BadInput(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SuiteResult(suite=name, seed=seed, checks=tuple(SUITES[name](seed)))
