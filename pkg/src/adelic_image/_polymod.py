"""Univariate polynomial arithmetic over F_p.

Polynomials are tuples of ints in [0, p), constant term first, with no
trailing zeros; the zero polynomial is the empty tuple.  Factorization
runs square-free / distinct-degree / equal-degree stages; the only
randomness is the equal-degree splitting, driven by a PRNG with a fixed
default seed so factor ordering is reproducible run to run.
"""

from __future__ import annotations

import random

DEFAULT_SEED = 0x5EED


def trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def deg(f):
    return len(f) - 1


def add(f, g, p):
    n = max(len(f), len(g))
    return trim([((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % p for i in range(n)])


def sub(f, g, p):
    n = max(len(f), len(g))
    return trim([((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p for i in range(n)])


def mul(f, g, p):
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return trim(out)


def scale(f, c, p):
    c %= p
    return trim([a * c % p for a in f])


def divmod_poly(f, g, p):
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    f = list(f)
    q = [0] * max(0, len(f) - len(g) + 1)
    inv_lead = pow(g[-1], -1, p)
    while len(f) >= len(g) and trim(f):
        shift = len(f) - len(g)
        c = f[-1] * inv_lead % p
        q[shift] = c
        for i, b in enumerate(g):
            f[shift + i] = (f[shift + i] - c * b) % p
        f = list(trim(f))
    return trim(q), trim(f)


def mod(f, g, p):
    return divmod_poly(f, g, p)[1]


def gcd_poly(f, g, p):
    while g:
        f, g = g, mod(f, g, p)
    if f:
        f = scale(f, pow(f[-1], -1, p), p)
    return f


def powmod(f, e, g, p):
    result = (1,)
    f = mod(f, g, p)
    while e:
        if e & 1:
            result = mod(mul(result, f, p), g, p)
        f = mod(mul(f, f, p), g, p)
        e >>= 1
    return result


def evaluate(f, x, p):
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def derivative(f, p):
    return trim([i * f[i] % p for i in range(1, len(f))])


def monic(f, p):
    if not f:
        return f
    return scale(f, pow(f[-1], -1, p), p)


def is_irreducible(f, p):
    """Rabin test: f irreducible iff x^(p^n) = x mod f and gcd conditions."""
    f = monic(f, p)
    n = deg(f)
    if n <= 0:
        return False
    if n == 1:
        return True
    x = (0, 1)
    # x^(p^n) must reduce to x
    h = x
    for _ in range(n):
        h = powmod(h, p, f, p)
    if h != x:
        return False
    # for each prime r | n, gcd(x^(p^(n/r)) - x, f) must be 1
    for r in _prime_divisors(n):
        h = x
        for _ in range(n // r):
            h = powmod(h, p, f, p)
        if deg(gcd_poly(sub(h, x, p), f, p)) > 0:
            return False
    return True


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def squarefree_part(f, p):
    """Decompose monic f into a list of (squarefree factor, multiplicity)."""
    out = []
    e = 1
    while deg(f) > 0:
        d = derivative(f, p)
        if not d:
            # f is a p-th power: f(x) = g(x^p)
            g = trim([f[i] for i in range(0, len(f), p)])
            for base, m in squarefree_part(g, p):
                out.append((base, m * p * e))
            return out
        c = gcd_poly(f, d, p)
        w = divmod_poly(f, c, p)[0]
        i = 1
        while deg(w) > 0:
            y = gcd_poly(w, c, p)
            z = divmod_poly(w, y, p)[0]
            if deg(z) > 0:
                out.append((z, i * e))
            w = y
            c = divmod_poly(c, y, p)[0]
            i += 1
        f = c
    return out


def distinct_degree(f, p):
    """Split squarefree monic f into [(product of degree-d irreducibles, d)]."""
    out = []
    h = (0, 1)
    d = 0
    while deg(f) >= 2 * (d + 1):
        d += 1
        h = powmod(h, p, f, p)
        g = gcd_poly(sub(h, (0, 1), p), f, p)
        if deg(g) > 0:
            out.append((g, d))
            f = divmod_poly(f, g, p)[0]
            h = mod(h, f, p)
    if deg(f) > 0:
        out.append((f, deg(f)))
    return out


def equal_degree(f, d, p, rng):
    """Cantor-Zassenhaus split of f (all factors of degree d) into irreducibles."""
    n = deg(f)
    if n == d:
        return [f]
    while True:
        a = tuple(rng.randrange(p) for _ in range(n))
        a = trim(a)
        if deg(a) < 1:
            continue
        g = gcd_poly(a, f, p)
        if 0 < deg(g) < n:
            break
        if p == 2:
            t = a
            h = a
            for _ in range(d - 1):
                h = powmod(h, 2, f, p)
                t = add(t, h, p)
            g = gcd_poly(t, f, p)
        else:
            e = (p**d - 1) // 2
            t = sub(powmod(a, e, f, p), (1,), p)
            g = gcd_poly(t, f, p)
        if 0 < deg(g) < n:
            break
    left = equal_degree(g, d, p, rng)
    right = equal_degree(divmod_poly(f, g, p)[0], d, p, rng)
    return left + right


def factor(f, p, seed=DEFAULT_SEED):
    """Factor f over F_p into monic irreducibles.

    Returns a list of (factor, multiplicity) sorted by degree then by
    coefficient tuple, so results are stable independent of the PRNG
    draw order.
    """
    f = monic(f, p)
    rng = random.Random(seed)
    pieces = []
    for sqf, m in squarefree_part(f, p):
        for block, d in distinct_degree(sqf, p):
            for irr in equal_degree(block, d, p, rng):
                pieces.append((irr, m))
    pieces.sort(key=lambda t: (deg(t[0]), t[0]))
    return pieces


def roots(f, p):
    """Roots of f in F_p, ascending."""
    return [x for x in range(p) if evaluate(f, x, p) == 0]


def first_irreducible(p, n):
    """The first monic irreducible of degree n over F_p in lexicographic
    order of the coefficient tuple (constant term first)."""
    if n == 1:
        return (0, 1)
    total = p**n
    for code in range(total):
        coeffs = []
        c = code
        for _ in range(n):
            coeffs.append(c % p)
            c //= p
        f = tuple(coeffs) + (1,)
        if is_irreducible(f, p):
            return f
    raise RuntimeError("unreachable: irreducibles of every degree exist")
