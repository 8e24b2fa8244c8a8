"""Regenerate the JSON coefficient fixtures in fixtures/.

Every non-synthetic fixture is an eta product, expanded exactly over Z,
cross-checked against the Hecke recursions before anything is written.
Run from the repo root:

    python3 tools/make_fixtures.py
"""

import json
import math
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from adelic_image._util import is_prime, primes_upto
from adelic_image.characters import DirichletCharacter, kronecker_character, unit_group

NMAX = 1000
OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def dedekind_eta_series(nmax):
    """Coefficients of prod_{n>=1} (1 - q^n) up to q^nmax, by pentagonal numbers."""
    a = [0] * (nmax + 1)
    a[0] = 1
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        if g1 > nmax and g2 > nmax:
            break
        s = -1 if k % 2 else 1
        if g1 <= nmax:
            a[g1] += s
        if g2 <= nmax:
            a[g2] += s
        k += 1
    return a


def poly_mul(a, b, nmax):
    out = [0] * (nmax + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        top = nmax - i
        for j, bj in enumerate(b[: top + 1]):
            if bj:
                out[i + j] += ai * bj
    return out


def poly_pow(a, e, nmax):
    result = [0] * (nmax + 1)
    result[0] = 1
    base = list(a)
    while e:
        if e & 1:
            result = poly_mul(result, base, nmax)
        e >>= 1
        if e:
            base = poly_mul(base, base, nmax)
    return result


def rescale(a, m, nmax):
    out = [0] * (nmax + 1)
    for i, ai in enumerate(a):
        if ai and i * m <= nmax:
            out[i * m] = ai
    return out


def eta_product(factors, nmax):
    """a_n of prod eta(m z)^r, n = 1..nmax. Requires sum(m*r) = 24."""
    offset = sum(m * r for m, r in factors)
    assert offset % 24 == 0, factors
    offset //= 24
    eta = dedekind_eta_series(nmax)
    series = [0] * (nmax + 1)
    series[0] = 1
    for m, r in factors:
        series = poly_mul(series, poly_pow(rescale(eta, m, nmax), r, nmax), nmax)
    an = [0] * (nmax + 1)
    for n in range(offset, nmax + 1):
        an[n] = series[n - offset]
    assert an[1] == 1
    return an


def check_hecke(an, k, level, eps, nmax):
    """Full multiplicativity + prime-power recursion; the fixtures' oracle."""
    for m in range(2, nmax + 1):
        for n in range(2, nmax // m + 1):
            if math.gcd(m, n) == 1:
                assert an[m * n] == an[m] * an[n], (m, n)
    for l in primes_upto(nmax):
        if level % l == 0:
            continue
        e = eps(l)
        pw = l
        while pw * l <= nmax:
            assert an[pw * l] == an[l] * an[pw] - e * l ** (k - 1) * an[pw // l], (l, pw)
            pw *= l


def char_json(chi):
    return {
        "modulus": chi.modulus,
        "gen_images": [{"order": r.order, "exp": r.exp} for r in chi.gen_values],
    }


def trivial_char(modulus):
    return DirichletCharacter.trivial(modulus)


def int_eps(chi):
    """A Dirichlet character with values in {1,-1,0} as a plain int function."""

    def eps(n):
        v = chi(n)
        if v == 0:
            return 0
        assert v.order in (1, 2)
        return 1 if v.order == 1 else -1

    return eps


def ap_entries(an, coords_of):
    return [{"l": l, "coords": coords_of(l, an[l])} for l in primes_upto(NMAX)]


def rational_coords(l, a):
    return [str(a)]


def write_fixture(name, data):
    path = OUT / (name + ".json")
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
        fh.write("\n")
    print("wrote", path.name)


def identity_twist(field_poly, modulus):
    deg = len(field_poly) - 1
    image = ["0"] * deg
    if deg >= 2:
        image[1] = "1"
    else:
        # degree 1: the generator is the rational root of x, i.e. 0
        image = ["0"]
    return {"auto_image": image, "char": char_json(trivial_char(modulus))}


def main():
    OUT.mkdir(exist_ok=True)

    chi_m4 = kronecker_character(-4)
    chi_m23 = kronecker_character(-23)

    # weight 12, level 1
    delta = eta_product([(1, 24)], NMAX)
    check_hecke(delta, 12, 1, lambda l: 1, NMAX)
    assert delta[2] == -24 and delta[3] == 252 and delta[5] == 4830
    write_fixture(
        "1.12.a.a",
        {
            "label": "1.12.a.a",
            "level": 1,
            "weight": 12,
            "char": char_json(trivial_char(1)),
            "field_poly": [0, 1],
            "power_basis": True,
            "ap": ap_entries(delta, rational_coords),
            "inner_twists": [identity_twist([0, 1], 1)],
        },
    )

    # weight 2, level 11
    f11 = eta_product([(1, 2), (11, 2)], NMAX)
    check_hecke(f11, 2, 11, lambda l: 0 if l == 11 else 1, NMAX)
    assert f11[2] == -2 and f11[3] == -1 and f11[11] == 1
    write_fixture(
        "11.2.a.a",
        {
            "label": "11.2.a.a",
            "level": 11,
            "weight": 2,
            "char": char_json(trivial_char(11)),
            "field_poly": [0, 1],
            "power_basis": True,
            "ap": ap_entries(f11, rational_coords),
            "inner_twists": [identity_twist([0, 1], 11)],
        },
    )

    # weight 3, level 16, character of conductor 4, CM by Q(i)
    f16 = eta_product([(4, 6)], NMAX)
    eps16 = chi_m4.induce(16)
    check_hecke(f16, 3, 16, int_eps(eps16), NMAX)
    for l in primes_upto(NMAX):
        if l % 4 == 3:
            assert f16[l] == 0, l
    write_fixture(
        "16.3.c.a",
        {
            "label": "16.3.c.a",
            "level": 16,
            "weight": 3,
            "char": char_json(eps16),
            "field_poly": [0, 1],
            "power_basis": True,
            "ap": ap_entries(f16, rational_coords),
            "inner_twists": [
                identity_twist([0, 1], 16),
                {"auto_image": ["0"], "char": char_json(chi_m4)},
            ],
            "cm_disc": -4,
        },
    )

    # weight 2, level 32, trivial character, CM by Q(i)
    f32 = eta_product([(4, 2), (8, 2)], NMAX)
    check_hecke(f32, 2, 32, lambda l: 0 if l == 2 else 1, NMAX)
    for l in primes_upto(NMAX):
        if l % 4 == 3:
            assert f32[l] == 0, l
    write_fixture(
        "32.2.a.a",
        {
            "label": "32.2.a.a",
            "level": 32,
            "weight": 2,
            "char": char_json(trivial_char(32)),
            "field_poly": [0, 1],
            "power_basis": True,
            "ap": ap_entries(f32, rational_coords),
            "inner_twists": [
                identity_twist([0, 1], 32),
                {"auto_image": ["0"], "char": char_json(chi_m4)},
            ],
            "cm_disc": -4,
        },
    )

    # weight 1, level 23, odd quadratic character (dihedral form)
    g23 = eta_product([(1, 1), (23, 1)], NMAX)
    check_hecke(g23, 1, 23, int_eps(chi_m23), NMAX)
    assert g23[2] == -1 and g23[3] == -1 and g23[13] == -1 and g23[59] == 2
    write_fixture(
        "23.1.b.a",
        {
            "label": "23.1.b.a",
            "level": 23,
            "weight": 1,
            "char": char_json(chi_m23),
            "field_poly": [0, 1],
            "power_basis": True,
            "ap": ap_entries(g23, rational_coords),
            "inner_twists": [
                identity_twist([0, 1], 23),
                {"auto_image": ["0"], "char": char_json(chi_m23)},
            ],
            "cm_disc": -23,
        },
    )

    # weight 12, level 25: quartic twist of the level-1 form, coefficients in Q(i)
    # chi5 is the order-4 character mod 5 with chi5(2) = i.
    def chi5_pow(n):
        # discrete log of n mod 5 to base 2: 2^e = n
        if n % 5 == 0:
            return None
        return {1: 0, 2: 1, 4: 2, 3: 3}[n % 5]

    def twist_coords(l, a):
        e = chi5_pow(l)
        if e is None:
            return ["0", "0"]
        # i^e * a as (re, im)
        re = (a, 0, -a, 0)[e % 4]
        im = (0, a, 0, -a)[e % 4]
        return [str(re), str(im)]

    eps25 = DirichletCharacter.from_json(
        {"modulus": 25, "gen_images": [{"order": 2, "exp": 1}]}
    )
    assert eps25.conductor == 5
    # integer-level sanity: the twisted an are chi5(n) tau(n); check Hecke on the
    # quadratic-character part via |a|^2-type identities reduces to delta's, so
    # verify multiplicativity of the coordinate pairs directly instead.
    prs = primes_upto(31)
    for i_, l1 in enumerate(prs):
        for l2 in prs[i_:]:
            if l1 * l2 > NMAX or l1 == l2:
                continue
            c12 = twist_coords(l1 * l2, delta[l1] * delta[l2])
            e1, e2 = chi5_pow(l1), chi5_pow(l2)
            if e1 is None or e2 is None:
                continue
            a1, a2 = delta[l1], delta[l2]
            prod_re = (a1 * a2, 0, -a1 * a2, 0)[(e1 + e2) % 4]
            prod_im = (0, a1 * a2, 0, -a1 * a2)[(e1 + e2) % 4]
            assert c12 == [str(prod_re), str(prod_im)]
    write_fixture(
        "25.12.b.a",
        {
            "label": "25.12.b.a",
            "level": 25,
            "weight": 12,
            "char": char_json(eps25),
            "field_poly": [1, 0, 1],
            "power_basis": True,
            "ap": [
                {"l": l, "coords": twist_coords(l, delta[l])} for l in primes_upto(NMAX)
            ],
            "inner_twists": [
                {
                    "auto_image": ["0", "1"],
                    "char": char_json(trivial_char(25)),
                },
                {
                    "auto_image": ["0", "-1"],
                    "char": char_json(
                        DirichletCharacter.from_json(
                            {"modulus": 5, "gen_images": [{"order": 2, "exp": 1}]}
                        )
                    ),
                },
            ],
        },
    )

    # weight 2, level 176: quadratic twist of the level-11 form by chi_{-4}
    def m4(n):
        return 0 if n % 2 == 0 else (1 if n % 4 == 1 else -1)

    f176 = [m4(n) * f11[n] for n in range(NMAX + 1)]
    check_hecke(f176, 2, 176, lambda l: 0 if l in (2, 11) else 1, NMAX)
    write_fixture(
        "176.2.x.a",
        {
            "label": "176.2.x.a",
            "level": 176,
            "weight": 2,
            "char": char_json(trivial_char(176)),
            "field_poly": [0, 1],
            "power_basis": True,
            "ap": ap_entries(f176, rational_coords),
            "inner_twists": [identity_twist([0, 1], 176)],
        },
    )

    # synthetic weight-2 level-1 partner rigged so that
    # delta_ap^2 - l^10 * rig_ap^2 == 0 mod 7 at every prime l != 7
    rig = [0] * (NMAX + 1)
    for l in primes_upto(NMAX):
        if l == 7:
            rig[l] = 1
            continue
        v = (delta[l] * pow(l, -5, 7)) % 7
        if v > 3:
            v -= 7
        rig[l] = v
        assert (delta[l] ** 2 - l**10 * v * v) % 7 == 0
    write_fixture(
        "1.2.x.rig",
        {
            "label": "1.2.x.rig",
            "level": 1,
            "weight": 2,
            "char": char_json(trivial_char(1)),
            "field_poly": [0, 1],
            "power_basis": True,
            "ap": ap_entries(rig, rational_coords),
        },
    )

    # gcd checks backing the scan expectations: the rigged pair must pin
    # exactly {7}, and the generic pair (delta, 32.2.a.a) must leave nothing
    # once primes below 5 and divisors of the levels are removed.
    ells = [l for l in primes_upto(200) if l != 7]
    g = 0
    for l in ells:
        g = math.gcd(g, delta[l] ** 2 - l**10 * rig[l] ** 2)
    big = {p for p in primes_upto(1000) if g % p == 0 and p >= 5}
    assert big == {7}, big

    ells = [l for l in primes_upto(200) if l % 4 == 1]
    g = 0
    for l in ells:
        g = math.gcd(g, delta[l] ** 2 - l**10 * f32[l] ** 2)
    big = {p for p in primes_upto(1000) if g % p == 0 and p >= 5 and 32 % p != 0}
    assert big == set(), big
    print("scan gcd checks passed (rigged -> {7}, generic -> {})")

    # sanity on canonical generator conventions used in the character blocks
    assert unit_group(16).generators == (15, 5)
    assert unit_group(25).generators == (2,)
    assert unit_group(23).generators == (5,)
    print("all fixtures verified and written")


if __name__ == "__main__":
    main()
