"""Closures of 2x2 matrix groups over small finite rings.

The punchline: a pair of matrices over Z/25 whose mod-5 image is all of
SL2(F5) already generates the full congruence fibre, so closure orders
are decided at the bottom level.
"""

from adelic_image.finitegroups import (
    SL2,
    FiniteRing,
    Mat2,
    closure,
    sl2_order,
    standard_sl2_generators,
)

R5 = FiniteRing.gf(5, 1)
F25 = FiniteRing.gf(5, 2)
Z25 = FiniteRing.zmod(5, 2)

print("ring sizes:", R5.size, F25.size, Z25.size)
print("|SL2(F5)|   =", sl2_order(R5))
print("|SL2(F25)|  =", sl2_order(F25))

s1, s2 = standard_sl2_generators(R5)
print("standard generators give order", closure([s1, s2], ((R5, SL2),)).order)

up = closure(
    [Mat2.of(Z25, 1, 1, 0, 1), Mat2.of(Z25, 1, 0, 1, 1)], ((Z25, SL2),)
)
print("unipotent pair over Z/25 generates", up.order, "elements")
print("  (that is |SL2(Z/25)| = 5^3 * |SL2(F5)| =", 125 * sl2_order(R5), ")")

# the mod-5 projection decides everything: a pair projecting onto a
# proper subgroup stays small upstairs
b1 = Mat2.of(Z25, 1, 1, 0, 1)
b2 = Mat2.of(Z25, 1, 5, 0, 1)
small = closure([b1, b2], ((Z25, SL2),))
print("a pair with upper-triangular image stops at", small.order, "elements")

full2 = closure(
    [(s1, Mat2.identity(R5)), (s2, Mat2.identity(R5)),
     (Mat2.identity(R5), s1), (Mat2.identity(R5), s2)],
    ((R5, SL2), (R5, SL2)),
)
print("componentwise generators of SL2 x SL2 give", full2.order)

diag = closure([(s1, s1), (s2, s2)], ((R5, SL2), (R5, SL2)))
print("diagonal generators stop at", diag.order, "(the graph of the identity)")
