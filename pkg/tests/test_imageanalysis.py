"""Local image machinery: expected groups, cosets, classification, scans.

The heavier tests enumerate subgroups of products of matrix groups; the
closures are cached at module level so each is built once.
"""

from functools import lru_cache
from pathlib import Path

import pytest

from adelic_image.characters import DirichletCharacter, kronecker_character
from adelic_image.errors import (
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
from adelic_image.finitegroups import (
    GL2,
    PSL2,
    SL2,
    FiniteRing,
    Mat2,
    SubgroupClosure,
    closure,
    enumerate_gl2,
    sl2_order,
    standard_sl2_generators,
)
from adelic_image.imageanalysis import (
    DetImage,
    DetLevel,
    EntanglementDatum,
    FormBlock,
    GroupGSpec,
    LocalImageReport,
    adelic_openness_audit,
    cm_expected_image_modp,
    counterexample_subgroup,
    dagger_group_modp,
    entangled_elements,
    exceptional_prime_scan,
    form_block,
    goursat_classify,
    pair_entanglement_classify,
    pair_fibre_order,
    papier_coset,
)
from adelic_image.newforms import (
    InnerTwist,
    InnerTwistGroup,
    Newform,
    detect_inner_twists,
    load_newform,
)
from adelic_image.numberfields import NumberFieldQ, residue_primes

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@lru_cache(maxsize=None)
def fixture(label):
    return load_newform(FIXTURES / f"{label}.json")


@lru_cache(maxsize=None)
def twists_of(label):
    return detect_inner_twists(fixture(label))


TRIV = DirichletCharacter(1, ())


@lru_cache(maxsize=None)
def sqrt3_form(eps_disc=None):
    """A synthetic weight-2 form over Q(sqrt 3), optionally with quadratic
    nebentypus; only the field, level, weight and eps matter here."""
    L = NumberFieldQ((-3, 0, 1))
    eps = TRIV if eps_disc is None else kronecker_character(eps_disc)
    level = 1 if eps_disc is None else 4
    return Newform("synthetic", level, 2, eps, L, {2: L.zero}, (), None)


def identity_twists(f):
    ident = f.field.automorphisms()[0]
    return InnerTwistGroup((InnerTwist(ident, TRIV),), None)


def conj_twists(f, chi):
    ident, conj = f.field.automorphisms()
    return InnerTwistGroup((InnerTwist(ident, TRIV), InnerTwist(conj, chi)), None)


R5 = FiniteRing.gf(5, 1)
S1, S2 = standard_sl2_generators(R5)
I5 = Mat2.identity(R5)
D31 = Mat2.of(R5, 3, 0, 0, 1)
AMB_SL = ((R5, SL2), (R5, SL2))
AMB_GL = ((R5, GL2), (R5, GL2))


@lru_cache(maxsize=None)
def pair_closure(kind):
    """The reference subgroups of GL2(F5) x GL2(F5) used across tests."""
    if kind == "full":
        gens = [(S1, I5), (S2, I5), (I5, S1), (I5, S2), (D31, D31)]
    elif kind == "diag":
        gens = [(S1, S1), (S2, S2), (D31, D31)]
    elif kind == "pm":
        gens = [(S1, S1.neg()), (S2, S2.neg()), (D31, D31.neg())]
    elif kind == "sl2":
        gens = [(S1, I5), (S2, I5), (I5, S1), (I5, S2)]
    elif kind == "legendre":
        # second component flips sign exactly when the determinant is a
        # non-square; multiplicative, so still a subgroup
        gens = [(S1, S1), (S2, S2), (Mat2.of(R5, 2, 0, 0, 1), Mat2.of(R5, 3, 0, 0, 4))]
    else:
        raise ValueError(kind)
    return closure(gens, AMB_GL)


SPEC22 = GroupGSpec(5, (FormBlock((1,), 2), FormBlock((1,), 2)))


# ---------------------------------------------------------------------------


class TestSpecs:
    def test_block_validation(self):
        with pytest.raises(BadInput):
            FormBlock((), 2)
        with pytest.raises(BadInput):
            FormBlock((0,), 2)
        with pytest.raises(BadInput):
            FormBlock((1,), 0)

    def test_spec_validation(self):
        with pytest.raises(BadInput):
            GroupGSpec(6, (FormBlock((1,), 2),))
        with pytest.raises(BadInput):
            GroupGSpec(5, ())
        with pytest.raises(BadInput):
            GroupGSpec(5, (FormBlock((1,), 2),) * 3)

    def test_spec_rings(self):
        spec = GroupGSpec(5, (FormBlock((1, 2), 2),))
        sizes = [r.size for r in spec.rings()]
        assert sizes == [5, 25]

    def test_form_block_rational_field(self):
        blk = form_block(fixture("1.12.a.a"), 5, twists_of("1.12.a.a"))
        assert blk == FormBlock((1,), 12)

    def test_form_block_twist_collapse(self):
        # the conjugation twist folds both split primes (and the inert
        # degree-2 prime) down to a single degree-1 block
        tw = twists_of("25.12.b.a")
        f = fixture("25.12.b.a")
        assert form_block(f, 11, tw).degrees == (1,)
        assert form_block(f, 7, tw).degrees == (1,)

    def test_form_block_untwisted_quadratic(self):
        f = sqrt3_form()
        tw = identity_twists(f)
        assert form_block(f, 5, tw).degrees == (2,)
        assert form_block(f, 11, tw).degrees == (1, 1)

    def test_form_block_bad_primes(self):
        f = fixture("11.2.a.a")
        tw = twists_of("11.2.a.a")
        with pytest.raises(BadPrime):
            form_block(f, 11, tw)
        with pytest.raises(BadPrime):
            form_block(f, 3, tw)


class TestDaggerGroup:
    def test_orders_rational_field(self):
        assert dagger_group_modp(GroupGSpec(5, (FormBlock((1,), 2),))).order == 480
        assert dagger_group_modp(GroupGSpec(5, (FormBlock((1,), 3),))).order == 240
        # k - 1 a multiple of p - 1 collapses the determinant part
        assert dagger_group_modp(GroupGSpec(7, (FormBlock((1,), 7),))).order == 336

    def test_orders_larger_blocks(self):
        q = dagger_group_modp(GroupGSpec(5, (FormBlock((2,), 2),)))
        assert q.order == sl2_order(FiniteRing.gf(5, 2)) * 4
        two = dagger_group_modp(GroupGSpec(5, (FormBlock((1, 1), 2),)))
        assert two.order == 120 * 120 * 4

    @pytest.mark.parametrize("p", [5, 7])
    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_order_matches_brute_count(self, p, k):
        # independent check: count GL2(F_p) matrices det-by-det
        ring = FiniteRing.gf(p, 1)
        dag = dagger_group_modp(GroupGSpec(p, (FormBlock((1,), k),)))
        count = sum(1 for m in enumerate_gl2(ring) if dag.contains_flat(m, [ring]))
        assert count == dag.order

    def test_membership(self):
        dag2 = dagger_group_modp(GroupGSpec(5, (FormBlock((1,), 2),)))
        dag3 = dagger_group_modp(GroupGSpec(5, (FormBlock((1,), 3),)))
        assert dag2.contains(I5)
        assert dag3.contains(I5)
        m = Mat2.of(R5, 2, 0, 0, 1)
        assert dag2.contains(m)
        assert not dag3.contains(m)  # det 2 is not a square mod 5

    def test_membership_requires_common_det(self):
        dag = dagger_group_modp(GroupGSpec(5, (FormBlock((1, 1), 2),)))
        a = Mat2.of(R5, 2, 0, 0, 1)
        b = Mat2.of(R5, 3, 0, 0, 1)
        assert dag.contains((a, a))
        assert not dag.contains((a, b))
        with pytest.raises(BadInput):
            dag.contains((a,))

    def test_nonprime_det_rejected(self):
        # a determinant outside the prime subfield fails membership
        F = FiniteRing.gf(5, 2)
        dag = dagger_group_modp(GroupGSpec(5, (FormBlock((2,), 2),)))
        t = F.encode([0, 1])
        m = Mat2(F, t, F.zero, F.zero, F.one)
        assert not dag.contains(m)
        assert dag.contains(Mat2.of(F, 2, 0, 0, 1))

    def test_guards(self):
        with pytest.raises(BadPrime):
            dagger_group_modp(GroupGSpec(3, (FormBlock((1,), 2),)))
        with pytest.raises(BadInput):
            dagger_group_modp(SPEC22)


class TestPapierCoset:
    def test_inert_nontrivial_character(self):
        # Q(sqrt 3) at the inert prime 5, conjugation twisted by a
        # character taking the value -1 at u: alpha must anticommute,
        # so alpha is a square root of a non-square
        f = sqrt3_form()
        tw = conj_twists(f, kronecker_character(-4))
        P = residue_primes(f.field, 5)[0]
        sol = papier_coset(f, tw, P, 3)
        F = P.residue_field
        assert F.decode(sol.alpha) == (0, 1)
        assert F.power(sol.alpha, 4) == F.from_int(-1)
        assert F.power(sol.alpha, 5) == F.neg(sol.alpha)
        assert sol.coset.flat() == (sol.alpha, 0, 0, F.inv(sol.alpha))
        assert sol.eps_value == F.one

    def test_inert_trivial_value(self):
        # chi(u) = 1 pins alpha to the prime subfield; canonical choice 1
        f = sqrt3_form()
        tw = conj_twists(f, kronecker_character(-4))
        P = residue_primes(f.field, 5)[0]
        sol = papier_coset(f, tw, P, 1)
        assert sol.alpha == P.residue_field.one

    def test_trivial_twist_group(self):
        f = sqrt3_form()
        P = residue_primes(f.field, 5)[0]
        sol = papier_coset(f, identity_twists(f), P, 7)
        assert sol.alpha == P.residue_field.one

    def test_split_prime_trivial_stabilizer(self):
        # conjugation swaps the two primes above 11, so no constraint
        # survives and alpha degenerates to 1
        f = sqrt3_form()
        tw = conj_twists(f, kronecker_character(-4))
        P = residue_primes(f.field, 11)[0]
        sol = papier_coset(f, tw, P, 3)
        assert P.degree == 1
        assert sol.alpha == 1
        assert sol.coset.flat() == (1, 0, 0, 1)

    def test_identity_obstruction(self):
        # a twist with identity automorphism but chi(u) != 1 forces
        # (1 - chi(u)) alpha = 0, which has no nonzero solution
        f = sqrt3_form()
        ident = f.field.automorphisms()[0]
        tw = InnerTwistGroup(
            (InnerTwist(ident, TRIV), InnerTwist(ident, kronecker_character(-4))), None
        )
        P = residue_primes(f.field, 5)[0]
        with pytest.raises(NoSolution):
            papier_coset(f, tw, P, 3)

    def test_nontrivial_nebentypus_scales_coset(self):
        f = sqrt3_form(eps_disc=-4)
        tw = conj_twists(f, kronecker_character(-4))
        P = residue_primes(f.field, 5)[0]
        F = P.residue_field
        sol = papier_coset(f, tw, P, 3)
        assert sol.eps_value == F.from_int(-1)
        a, b, c, d = sol.coset.flat()
        assert (b, c) == (0, 0)
        assert d == F.mul(sol.eps_value, F.inv(a))

    def test_guards(self):
        f = sqrt3_form()
        tw = conj_twists(f, kronecker_character(-4))
        P = residue_primes(f.field, 5)[0]
        with pytest.raises(BadInput):
            papier_coset(f, tw, P, 2)  # u not a unit for the character
        other = residue_primes(fixture("1.12.a.a").field, 5)[0]
        with pytest.raises(BadInput):
            papier_coset(f, tw, other, 3)
        with pytest.raises(BadPrime):
            papier_coset(
                Newform("lvl5", 5, 2, TRIV, f.field, {2: f.field.zero}, (), None),
                tw,
                P,
                3,
            )


class TestGoursat:
    def test_full_product(self):
        U = closure([(S1, I5), (S2, I5), (I5, S1), (I5, S2)], AMB_SL)
        res = goursat_classify(U)
        assert res.kind == "Full"
        assert res.factor_orders == (120, 120)
        assert res.reconstruct() == U.element_set

    def test_diagonal_graph(self):
        U = closure([(S1, S1), (S2, S2)], AMB_SL)
        res = goursat_classify(U)
        assert res.kind == "Graph"
        assert len(res.n1) == 1 and len(res.n2) == 1
        assert res.quotient_order == 120
        assert res.reconstruct() == U.element_set

    def test_sign_graph(self):
        # {(g, +-g)}: kernels are the centers, quotient is the simple group
        U = closure([(S1, S1.neg()), (S2, S2.neg())], AMB_SL)
        res = goursat_classify(U)
        assert res.kind == "Graph"
        assert res.order == 240
        assert len(res.n1) == 2 and len(res.n2) == 2
        assert res.quotient_order == 60
        assert res.reconstruct() == U.element_set

    def test_projective_diagonal(self):
        amb = ((R5, PSL2), (R5, PSL2))
        U = closure([(S1, S1), (S2, S2)], amb)
        res = goursat_classify(U)
        assert res.kind == "Graph"
        assert res.order == 60
        assert res.quotient_order == 60
        assert res.reconstruct() == U.element_set

    def test_gl2_diagonal(self):
        U = pair_closure("diag")
        res = goursat_classify(U)
        assert res.kind == "Graph"
        assert res.quotient_order == 480
        assert res.reconstruct() == U.element_set

    def test_not_surjective(self):
        U = closure([(S1, I5)], AMB_SL)
        res = goursat_classify(U)
        assert res.kind == "NotSurjectiveOntoFactors"
        assert res.projection_orders == (5, 1)
        with pytest.raises(BadInput):
            res.reconstruct()

    def test_guards(self):
        with pytest.raises(NotEnumerated):
            goursat_classify({(1, 2)})
        U1 = closure([S1, S2], ((R5, SL2),))
        with pytest.raises(NotEnumerated):
            goursat_classify(U1)


class TestPairClassify:
    def test_full_fibre(self):
        U = pair_closure("full")
        assert U.order == pair_fibre_order(SPEC22) == 57600
        rep = pair_entanglement_classify(U, SPEC22)
        assert rep.verdict == "FullDagger"

    def test_diagonal_is_entangled_plus(self):
        U = pair_closure("diag")
        rep = pair_entanglement_classify(U, SPEC22)
        assert rep.verdict == "Entangled"
        assert rep.datum == EntanglementDatum(0, 0, 0, 1, 0)
        assert entangled_elements(SPEC22, rep.datum, [R5, R5]) == U.element_set

    def test_sign_flip_is_entangled_minus(self):
        U = pair_closure("pm")
        assert U.order == 960
        rep = pair_entanglement_classify(U, SPEC22)
        assert rep.verdict == "Entangled"
        assert rep.datum.sign == -1
        assert entangled_elements(SPEC22, rep.datum, [R5, R5]) == U.element_set

    def test_json_shape(self):
        rep = pair_entanglement_classify(pair_closure("pm"), SPEC22)
        js = rep.to_json()
        assert js["p"] == 5 and js["verdict"] == "Entangled"
        assert js["datum"]["sign"] == "-"

    def test_small_projection_is_unknown(self):
        rep = pair_entanglement_classify(pair_closure("sl2"), SPEC22)
        assert rep.verdict == "Unknown"
        assert any("projection" in e for e in rep.evidence)

    def test_legendre_twist_is_near_miss(self):
        # sign flips on non-square determinants: the loose pattern holds
        # elementwise but only accounts for half its group, so no verdict
        U = pair_closure("legendre")
        assert U.order == 480
        rep = pair_entanglement_classify(U, SPEC22)
        assert rep.verdict == "Unknown"
        assert any("holds but accounts for" in e for e in rep.evidence)

    def test_unequal_weights_datum(self):
        # weight pair (12, 2) at p = 7: the scaling exponent is 5 and the
        # locked subgroup has one parameter value per determinant pair
        R7 = FiniteRing.gf(7, 1)
        t1, t2 = standard_sl2_generators(R7)
        x = Mat2.of(R7, 3, 0, 0, 1)
        y = Mat2.of(R7, 1, 0, 0, 5)  # 3^5 * x = diag(3^6, 3^5)
        spec = GroupGSpec(7, (FormBlock((1,), 12), FormBlock((1,), 2)))
        U = closure([(t1, t1), (t2, t2), (x, y)], ((R7, GL2), (R7, GL2)))
        assert U.order == 336 * 6
        rep = pair_entanglement_classify(U, spec)
        assert rep.verdict == "Entangled"
        assert rep.datum.exponent == 5
        assert rep.datum.sign == 1
        assert entangled_elements(spec, rep.datum, [R7, R7]) == U.element_set

    def test_det_class_violation(self):
        # the diagonal has equal determinants, impossible for weights (4, 2)
        spec = GroupGSpec(5, (FormBlock((1,), 4), FormBlock((1,), 2)))
        rep = pair_entanglement_classify(pair_closure("diag"), spec)
        assert rep.verdict == "Unknown"
        assert any("determinants" in e for e in rep.evidence)

    def test_quadratic_frobenius_datum(self):
        # graph of the field automorphism over F25: detected with
        # frobenius power 1, distinguishing it from the plain diagonal
        F = FiniteRing.gf(5, 2)
        t = F.encode([0, 1])

        def frob(m):
            return Mat2(F, *(F.power(c, 5) for c in m.flat()))

        gens = [
            Mat2.of(F, 1, 1, 0, 1),
            Mat2(F, F.one, t, F.zero, F.one),
            Mat2.of(F, 1, 0, 1, 1),
            Mat2(F, F.one, F.zero, t, F.one),
            Mat2.of(F, 3, 0, 0, 1),
        ]
        U = closure([(a, frob(a)) for a in gens], ((F, GL2), (F, GL2)), bound=200000)
        spec = GroupGSpec(5, (FormBlock((2,), 2), FormBlock((2,), 2)))
        rep = pair_entanglement_classify(U, spec)
        assert rep.verdict == "Entangled"
        assert rep.datum.frobenius_power == 1
        assert rep.datum.sign == 1

    def test_three_component_lock(self):
        # f side has two residue primes; only the second is locked to the
        # g side, the first stays free over its determinant class
        spec = GroupGSpec(5, (FormBlock((1, 1), 2), FormBlock((1,), 2)))
        amb = ((R5, GL2), (R5, GL2), (R5, GL2))
        U = closure(
            [
                (S1, I5, I5),
                (S2, I5, I5),
                (I5, S1, S1),
                (I5, S2, S2),
                (D31, D31, D31),
            ],
            amb,
        )
        assert U.order == 57600
        rep = pair_entanglement_classify(U, spec)
        assert rep.verdict == "Entangled"
        assert (rep.datum.v, rep.datum.w) == (1, 0)
        assert entangled_elements(spec, rep.datum, [R5, R5, R5]) == U.element_set

    def test_odd_weight_difference_guard(self):
        # white box: a near-full element list with all determinant pairs
        # present cannot carry a scaling pattern when the weight gap is odd
        spec32 = GroupGSpec(5, (FormBlock((1,), 3), FormBlock((1,), 2)))
        full = closure(
            [(S1, I5), (S2, I5), (I5, S1), (I5, S2), (Mat2.of(R5, 4, 0, 0, 1), D31)],
            AMB_GL,
        )
        assert full.order == pair_fibre_order(spec32)
        trimmed = list(full.elements)[:-1]
        U = SubgroupClosure(
            ambient=full.ambient,
            generators=full.generators,
            elements=trimmed,
            element_set=frozenset(trimmed),
            overflow_bound=full.overflow_bound,
        )
        rep = pair_entanglement_classify(U, spec32)
        assert rep.verdict == "Unknown"
        assert any("odd weight difference" in e for e in rep.evidence)

    def test_guards(self):
        with pytest.raises(NotEnumerated):
            pair_entanglement_classify(frozenset(), SPEC22)
        with pytest.raises(BadInput):
            pair_entanglement_classify(pair_closure("diag"), GroupGSpec(5, (FormBlock((1,), 2),)))
        with pytest.raises(BadPrime):
            pair_entanglement_classify(
                pair_closure("diag"), GroupGSpec(3, (FormBlock((1,), 2), FormBlock((1,), 2)))
            )
        wrong = GroupGSpec(5, (FormBlock((2,), 2), FormBlock((1,), 2)))
        with pytest.raises(BadInput):
            pair_entanglement_classify(pair_closure("diag"), wrong)
        U_sl = closure([(S1, S1)], AMB_SL)
        with pytest.raises(BadInput):
            pair_entanglement_classify(U_sl, SPEC22)


class TestExceptionalPrimeScan:
    def test_self_pair_hits_everything(self):
        f = fixture("1.12.a.a")
        res = exceptional_prime_scan(f, f)
        assert res.all_primes
        assert res.candidates is None
        assert set(res.norms.values()) == {0}
        assert res.to_json()["candidates"] == "AllPrimesCandidate"

    def test_generic_pair_is_clean(self):
        res = exceptional_prime_scan(
            fixture("1.12.a.a"),
            fixture("32.2.a.a"),
            twists_f=twists_of("1.12.a.a"),
            twists_g=twists_of("32.2.a.a"),
        )
        assert res.candidates == frozenset()
        assert res.excluded == {2}
        # the twist kernel of the second form keeps only l = 1 mod 4
        assert all(l % 4 == 1 for l in res.tested_ells)
        assert len(res.tested_ells) >= 20

    def test_rigged_pair_reports_seven(self):
        res = exceptional_prime_scan(fixture("1.12.a.a"), fixture("1.2.x.rig"))
        assert res.candidates == frozenset({7})
        assert res.excluded == frozenset()
        assert res.gcd_value % 7 == 0

    def test_few_norms_is_indeterminate(self):
        res = exceptional_prime_scan(fixture("1.12.a.a"), fixture("1.2.x.rig"), ell_bound=3)
        assert res.candidates is None
        assert not res.all_primes

    def test_weight_order_enforced(self):
        with pytest.raises(BadInput):
            exceptional_prime_scan(fixture("32.2.a.a"), fixture("1.12.a.a"))

    def test_table_bound_enforced(self):
        with pytest.raises(BoundTooLarge):
            exceptional_prime_scan(fixture("1.12.a.a"), fixture("1.12.a.a"), ell_bound=2000)

    def test_no_eligible_ell(self):
        # below 5 nothing survives: 2 divides the level product and the
        # self-twist character of the second form kills 3
        with pytest.raises(NoEligibleEll):
            exceptional_prime_scan(
                fixture("1.12.a.a"),
                fixture("16.3.c.a"),
                twists_g=twists_of("16.3.c.a"),
                ell_bound=3,
            )


class TestOpennessAudit:
    def full(self, p):
        return LocalImageReport(p, "FullDagger")

    def test_all_full_is_open(self):
        res = adelic_openness_audit([self.full(5), self.full(7)], DetImage(levels=()))
        assert res.open and res.index_bound == 1 and res.failing is None

    def test_index_combines_report_and_det(self):
        lvl = DetLevel(5, frozenset({1, 4}))
        res = adelic_openness_audit(
            [self.full(5), LocalImageReport(11, "OpenIndexBounded", index=3)],
            DetImage(levels=(lvl,)),
        )
        assert res.open and res.index_bound == 6

    def test_entangled_blocks_openness(self):
        ent = LocalImageReport(13, "Entangled", datum=EntanglementDatum(0, 0, 0, 1, 0))
        res = adelic_openness_audit([self.full(5), ent], DetImage(levels=()))
        assert not res.open and res.failing == "EntangledPair"

    def test_det_not_full_blocks_openness(self):
        res = adelic_openness_audit([self.full(5)], DetImage(levels=(), full_outside=False))
        assert not res.open and res.failing == "DetNotOpen"

    def test_entangled_takes_precedence(self):
        ent = LocalImageReport(13, "Entangled", datum=EntanglementDatum(0, 0, 0, 1, 0))
        res = adelic_openness_audit(
            [ent], DetImage(levels=(), full_outside=False)
        )
        assert res.failing == "EntangledPair"

    def test_unknown_is_a_hole(self):
        with pytest.raises(IncompleteCover):
            adelic_openness_audit(
                [self.full(5), LocalImageReport(7, "Unknown")], DetImage(levels=())
            )

    def test_stray_det_level_is_a_hole(self):
        lvl = DetLevel(5, frozenset({1, 4}))
        with pytest.raises(IncompleteCover):
            adelic_openness_audit([self.full(7)], DetImage(levels=(lvl,)))

    def test_duplicate_reports_rejected(self):
        with pytest.raises(BadInput):
            adelic_openness_audit([self.full(5), self.full(5)], DetImage(levels=()))

    def test_monotone_under_upgrades(self):
        # improving one verdict can only keep open-ness and shrink the bound
        datum = EntanglementDatum(0, 0, 0, 1, 0)
        ladder = [
            LocalImageReport(13, "Entangled", datum=datum),
            LocalImageReport(13, "OpenIndexBounded", index=5),
            LocalImageReport(13, "OpenIndexBounded", index=2),
            LocalImageReport(13, "FullDagger"),
        ]
        base = [self.full(5), LocalImageReport(7, "OpenIndexBounded", index=4)]
        prev_open, prev_bound = False, None
        for step in ladder:
            res = adelic_openness_audit(base + [step], DetImage(levels=()))
            assert res.open >= prev_open
            if prev_bound is not None and res.index_bound is not None:
                assert res.index_bound <= prev_bound
            prev_open, prev_bound = res.open, res.index_bound

    def test_det_level_validation(self):
        with pytest.raises(BadInput):
            DetLevel(12, frozenset({1}))  # not a prime power
        with pytest.raises(BadInput):
            DetLevel(5, frozenset({1, 2}))  # not closed
        with pytest.raises(BadInput):
            DetLevel(5, frozenset({1, 9}))  # not reduced
        lvl = DetLevel(25, frozenset({1, 7, 24, 18}))
        assert lvl.p == 5 and lvl.index == 5


class TestCounterexample:
    def test_two_primes(self):
        rec = counterexample_subgroup([3, 5])
        assert rec.order == 4 and rec.ambient_order == 8 and rec.index == 2
        assert rec.is_subgroup and rec.projections_surjective
        assert (2, 2) in rec.elements  # both non-squares
        assert (1, 2) not in rec.elements  # mixed

    def test_three_primes(self):
        rec = counterexample_subgroup([3, 5, 7])
        assert rec.index == 4
        assert rec.order == 12
        assert rec.is_subgroup and rec.projections_surjective

    def test_guards(self):
        with pytest.raises(NeedTwoPrimes):
            counterexample_subgroup([5])
        with pytest.raises(BadInput):
            counterexample_subgroup([2, 5])
        with pytest.raises(BadInput):
            counterexample_subgroup([5, 5])
        with pytest.raises(BadInput):
            counterexample_subgroup([5, 9])
        with pytest.raises(OverflowBound):
            counterexample_subgroup([10007, 10009, 10037, 10039])


class TestCmImage:
    def test_split_orders(self):
        img = cm_expected_image_modp(2, -4, 5)
        assert img.case == "split" and img.order == 16
        img3 = cm_expected_image_modp(3, -4, 5)
        assert img3.case == "split" and img3.order == 4

    def test_split_membership(self):
        img = cm_expected_image_modp(3, -4, 5)
        assert img.contains((1, 0, 0, 4))
        assert not img.contains((2, 0, 0, 1))  # 2 is not a square mod 5
        assert not img.contains((1, 1, 0, 1))  # off-diagonal

    def test_inert_order_and_membership(self):
        img = cm_expected_image_modp(2, -4, 7)
        assert img.case == "inert" and img.order == 48
        assert img.contains((1, 0, 0, 1))
        assert len(img.elements) == 48
        # every member is invertible with determinant the field norm
        R7 = FiniteRing.gf(7, 1)
        for m in img.elements:
            assert Mat2(R7, *m).det() != 0

    def test_weight_one_collapses(self):
        img = cm_expected_image_modp(1, -4, 5)
        assert img.order == 1 and img.contains((1, 0, 0, 1))

    def test_guards(self):
        with pytest.raises(RamifiedInK):
            cm_expected_image_modp(2, -3, 3)
        with pytest.raises(BadInput):
            cm_expected_image_modp(2, -5, 7)  # not fundamental
        with pytest.raises(BadInput):
            cm_expected_image_modp(0, -4, 5)
        with pytest.raises(BadInput):
            cm_expected_image_modp(2, -4, 2)
