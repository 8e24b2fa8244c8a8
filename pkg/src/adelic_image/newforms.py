"""Newform data model and ingestion, plus the coefficient-level twist machinery.

A newform here is a finite coefficient table: the character, the coefficient
field in a power basis, and a_l for every prime l up to a bound.  Everything
downstream (twist groups, pair scans, witness construction) consumes this
table; nothing here computes q-expansions from scratch.

Detections performed by this module are evidence at a finite bound, never
proofs.  Verification failures, on the other hand, are definitive.
"""

import json
import os
import threading
import time
import urllib.error
import urllib.request
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ._util import is_prime, primes_upto
from .characters import (
    DirichletCharacter,
    RootOfUnity,
    enumerate_characters,
    is_fundamental_discriminant,
    unit_group,
)
from .errors import (
    BadInput,
    BoundTooLarge,
    BoundTooSmall,
    ConductorViolation,
    FetchError,
    IncompatibleFields,
    NotClosed,
    NotPowerBasis,
    OfflineMiss,
    SchemaError,
    Unsupported,
)
from .numberfields import FieldAutomorphism, NumberFieldQ

RAMANUJAN_TOL = 1e-6

_REQUIRED_KEYS = {"label", "level", "weight", "char", "field_poly", "power_basis", "ap"}
_OPTIONAL_KEYS = {"inner_twists", "cm_disc"}


def twist_modulus(level: int) -> int:
    """Conductor bound for inner-twist characters: N for odd N, else 4N."""
    return level if level % 2 == 1 else 4 * level


def _parse_fraction(s) -> Fraction:
    if not isinstance(s, str):
        raise SchemaError(f"coordinate {s!r} must be a string rational")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as e:
        raise SchemaError(f"bad rational {s!r}") from e


@dataclass(frozen=True)
class InnerTwist:
    """A pair (gamma, chi) with gamma(a_l) = chi(l) a_l on good primes."""

    gamma: FieldAutomorphism
    chi: DirichletCharacter

    @property
    def is_identity(self) -> bool:
        return self.gamma.is_identity and self.chi.is_trivial

    def same_as(self, other: "InnerTwist") -> bool:
        return (
            self.gamma.image == other.gamma.image
            and self.chi.primitive() == other.chi.primitive()
        )

    def sort_key(self):
        prim = self.chi.primitive()
        return (
            0 if self.gamma.is_identity else 1,
            self.gamma.image,
            prim.modulus,
            tuple((v.order, v.exp) for v in prim.gen_values),
        )


@dataclass(frozen=True)
class TwistCheck:
    ok: bool
    first_failing_ell: Optional[int]


@dataclass(frozen=True)
class TwistEvidence:
    """Counting record for the squared-coefficient twist identity."""

    gamma: FieldAutomorphism
    matched: int
    tested: int
    first_counterexample: Optional[int]

    def __post_init__(self):
        assert self.matched <= self.tested
        assert (self.first_counterexample is None) == (self.matched == self.tested)


class InnerTwistGroup:
    """The group of verified inner twists, with its composition table."""

    def __init__(self, elements, table):
        self.elements = tuple(elements)
        self.table = table

    @property
    def order(self) -> int:
        return len(self.elements)

    def compose(self, i: int, j: int) -> int:
        return self.table[(i, j)]

    def characters(self):
        return [t.chi for t in self.elements]

    def nontrivial_characters(self):
        return [t.chi for t in self.elements if not t.chi.is_trivial]

    def h_units(self, modulus: int):
        """Units u mod `modulus` with chi_gamma(u) = 1 for every twist.

        This is the finite-level shadow of the subgroup cut out by the
        twist characters.
        """
        out = []
        chis = [t.chi.primitive() for t in self.elements]
        for u in unit_group(modulus).units():
            ok = True
            for chi in chis:
                v = chi(u)
                if v == 0 or not v.is_one:
                    ok = False
                    break
            if ok:
                out.append(u)
        return out

    def decomposition_subgroup(self, autos) -> list[InnerTwist]:
        """The twists whose automorphism part lies in the given list."""
        images = {a.image for a in autos}
        return [t for t in self.elements if t.gamma.image in images]


@dataclass(frozen=True)
class CompositePresentation:
    """A common field receiving both coefficient fields.

    embed_f / embed_g are the images of the respective power-basis
    generators, as coordinate tuples in `field`.
    """

    field: NumberFieldQ
    embed_f: tuple
    embed_g: tuple

    def verify(self, field_f: NumberFieldQ, field_g: NumberFieldQ) -> None:
        for src, img in ((field_f, self.embed_f), (field_g, self.embed_g)):
            val = self.field.eval_poly_at(src.coeffs, img)
            if not self.field.is_zero(val):
                raise BadInput("presentation image is not a root of the defining polynomial")

    def map_f(self, field_f: NumberFieldQ, a):
        return self._map(field_f, a, self.embed_f)

    def map_g(self, field_g: NumberFieldQ, a):
        return self._map(field_g, a, self.embed_g)

    def _map(self, src: NumberFieldQ, a, img):
        out = self.field.zero
        pw = self.field.one
        for c in a:
            out = self.field.add(out, self.field.scale(c, pw))
            pw = self.field.mul(pw, img)
        return out


class Newform:
    """Immutable coefficient-table model of a newform."""

    def __init__(self, label, level, weight, eps, field, ap, listed_inner_twists, cm_disc):
        self.label = label
        self.level = level
        self.weight = weight
        self.eps = eps
        self.field = field
        self.ap = ap
        self.bound = max(ap)
        self.listed_inner_twists = listed_inner_twists
        self.cm_disc = cm_disc
        self._an_cache = {1: field.one}

    def __repr__(self):
        return f"Newform({self.label!r}, N={self.level}, k={self.weight}, deg={self.field.degree})"

    def a(self, l: int):
        if not is_prime(l):
            raise BadInput(f"a({l}): prime index required; use an() for composites")
        if l not in self.ap:
            raise BoundTooLarge(f"no coefficient stored for l={l} (bound {self.bound})")
        return self.ap[l]

    def eps_value_in_field(self, n: int):
        """eps(n) as an element of the coefficient field (order <= 2 only)."""
        v = self.eps(n)
        if v == 0:
            return self.field.zero
        if v.order == 1:
            return self.field.one
        if v.order == 2:
            return self.field.from_rational(-1)
        raise Unsupported(
            "character value of order > 2; no canonical field embedding for composites"
        )

    def an(self, n: int):
        """a_n by Hecke multiplicativity from the prime table."""
        if n < 1:
            raise BadInput("n must be positive")
        if n in self._an_cache:
            return self._an_cache[n]
        F = self.field
        out = F.one
        m = n
        p = 2
        while p * p <= m:
            if m % p == 0:
                e = 0
                while m % p == 0:
                    m //= p
                    e += 1
                out = F.mul(out, self._a_prime_power(p, e))
            p += 1
        if m > 1:
            out = F.mul(out, self._a_prime_power(m, 1))
        self._an_cache[n] = out
        return out

    def _a_prime_power(self, l: int, e: int):
        F = self.field
        al = self.a(l)
        if self.level % l == 0:
            return F.power(al, e)
        if e == 1:
            return al
        epsl = self.eps_value_in_field(l)
        scale = F.scale(Fraction(l ** (self.weight - 1)), epsl)
        prev, cur = F.one, al
        for _ in range(e - 1):
            prev, cur = cur, F.sub(F.mul(al, cur), F.mul(scale, prev))
        return cur

    @classmethod
    def from_json(cls, data: dict) -> "Newform":
        if not isinstance(data, dict):
            raise SchemaError("newform record must be a JSON object")
        keys = set(data)
        missing = _REQUIRED_KEYS - keys
        if missing:
            raise SchemaError(f"missing keys: {sorted(missing)}")
        unknown = keys - _REQUIRED_KEYS - _OPTIONAL_KEYS
        if unknown:
            raise SchemaError(f"unknown keys: {sorted(unknown)}")

        label = data["label"]
        if not isinstance(label, str) or not label:
            raise SchemaError("label must be a nonempty string")
        level = data["level"]
        weight = data["weight"]
        if not isinstance(level, int) or level < 1:
            raise SchemaError("level must be a positive integer")
        if not isinstance(weight, int) or weight < 1:
            raise SchemaError("weight must be a positive integer")

        pb = data["power_basis"]
        if pb is not True:
            if pb is False:
                raise NotPowerBasis(
                    f"{label}: coefficients not in a power basis; refusing to guess a conversion"
                )
            raise SchemaError("power_basis must be a JSON boolean")

        fp = data["field_poly"]
        if (
            not isinstance(fp, list)
            or len(fp) < 2
            or not all(isinstance(c, int) for c in fp)
        ):
            raise SchemaError("field_poly must be a list of >= 2 integers")
        if fp[-1] != 1:
            raise SchemaError("field_poly must be monic (constant coefficient first)")
        try:
            field = NumberFieldQ(tuple(fp))
        except BadInput as e:
            raise SchemaError(f"bad field_poly: {e}") from e
        deg = field.degree

        eps = DirichletCharacter.from_json(data["char"])
        if level % eps.modulus != 0:
            raise SchemaError("character modulus must divide the level")

        ap_raw = data["ap"]
        if not isinstance(ap_raw, list) or not ap_raw:
            raise SchemaError("ap must be a nonempty list")
        ap = {}
        for entry in ap_raw:
            if not isinstance(entry, dict) or set(entry) != {"l", "coords"}:
                raise SchemaError("each ap entry must be {l, coords}")
            l = entry["l"]
            if not isinstance(l, int) or not is_prime(l):
                raise SchemaError(f"ap index {l!r} is not prime")
            if l in ap:
                raise SchemaError(f"duplicate ap entry for l={l}")
            coords = entry["coords"]
            if not isinstance(coords, list) or len(coords) != deg:
                raise SchemaError(f"coords for l={l} must have length {deg}")
            ap[l] = field.element(tuple(_parse_fraction(c) for c in coords))
        bound = max(ap)
        for l in primes_upto(bound):
            if l not in ap:
                raise SchemaError(f"ap table has a gap at l={l} below its bound {bound}")

        listed = None
        if "inner_twists" in data:
            raw = data["inner_twists"]
            if not isinstance(raw, list):
                raise SchemaError("inner_twists must be a list")
            listed = []
            for item in raw:
                if not isinstance(item, dict) or set(item) != {"auto_image", "char"}:
                    raise SchemaError("each inner twist must be {auto_image, char}")
                img = item["auto_image"]
                if not isinstance(img, list) or len(img) != deg:
                    raise SchemaError("auto_image must have the field degree length")
                image = field.element(tuple(_parse_fraction(c) for c in img))
                try:
                    gamma = FieldAutomorphism(field, image)
                except BadInput as e:
                    raise SchemaError(f"auto_image is not a root: {e}") from e
                listed.append(InnerTwist(gamma, DirichletCharacter.from_json(item["char"])))
            listed = tuple(listed)

        cm_disc = None
        if "cm_disc" in data:
            cm_disc = data["cm_disc"]
            if not isinstance(cm_disc, int) or cm_disc >= 0:
                raise SchemaError("cm_disc must be a negative integer")
            if not is_fundamental_discriminant(cm_disc):
                raise SchemaError(f"cm_disc {cm_disc} is not a fundamental discriminant")

        form = cls(label, level, weight, eps, field, ap, listed, cm_disc)
        form._ramanujan_advisory()
        return form

    def _ramanujan_advisory(self):
        """Check |a_l| <= 2 l^((k-1)/2) + tol under every complex embedding.

        Advisory only: violations raise warnings, never errors, since this
        is a sanity screen for fixture data rather than part of the model.
        """
        import numpy as np

        roots = np.roots(list(reversed(self.field.coeffs)))
        bad = []
        for l in sorted(self.ap):
            if self.level % l == 0:
                continue
            coords = self.ap[l]
            vals = np.array([float(c) for c in coords])
            for r in roots:
                powers = r ** np.arange(len(vals))
                v = abs(np.dot(vals, powers))
                if v > 2 * l ** ((self.weight - 1) / 2) + RAMANUJAN_TOL:
                    bad.append(l)
                    break
        if bad:
            warnings.warn(
                f"{self.label}: coefficient bound violated at {len(bad)} primes "
                f"(first at l={bad[0]}); data may not come from a newform",
                stacklevel=3,
            )


def _root_value_candidates(field: NumberFieldQ, order: int):
    """Primitive order-th roots of unity inside the field, sorted canonically."""
    if order == 1:
        return [field.one]
    if order == 2:
        return [field.from_rational(-1)]
    from .numberfields import roots_in_field

    poly = [0] * (order + 1)
    poly[0] = -1
    poly[order] = 1
    out = []
    for r in roots_in_field(field, tuple(poly)):
        primitive = True
        for q in {d for d in range(2, order + 1) if order % d == 0 and is_prime(d)}:
            if field.is_zero(field.sub(field.power(r, order // q), field.one)):
                primitive = False
                break
        if primitive:
            out.append(r)
    return sorted(out)


def _value_in_field(field: NumberFieldQ, root, order: int, v: RootOfUnity):
    """Image of the abstract root v under the embedding zeta_order -> root."""
    assert order % v.order == 0
    return field.power(root, (order // v.order) * v.exp)


def verify_inner_twist(f: Newform, twist: InnerTwist, B: int) -> TwistCheck:
    """Does gamma(a_l) = chi(l) a_l hold for every prime l <= B off the bad set?

    The character values are matched into the coefficient field; when the
    value group has several embeddings (order > 2), each is tried and the
    twist verifies if any single embedding works for all tested primes.
    """
    if B > f.bound:
        raise BoundTooLarge(f"B={B} exceeds the stored coefficient bound {f.bound}")
    limit = twist_modulus(f.level)
    cond = twist.chi.conductor
    if limit % cond != 0:
        raise ConductorViolation(
            f"conductor {cond} does not divide {limit} (level {f.level})"
        )
    m = twist.chi.order
    gamma = twist.gamma
    F = f.field
    ells = [l for l in primes_upto(B) if (f.level * twist.chi.modulus) % l != 0]

    # roots: embeddings of the value group into L; None marks the fallback
    # where order > 2 values have no home and force a_l = 0
    candidates = _root_value_candidates(F, m) or [None]
    best_fail = None
    best_progress = -1
    for root in candidates:
        progress = 0
        fail = None
        for l in ells:
            v = twist.chi(l)
            if root is None and v.order > 2:
                if F.is_zero(f.a(l)):
                    progress += 1
                    continue
                fail = l
                break
            if root is None:
                val = F.one if v.is_one else F.from_rational(-1)
            else:
                val = _value_in_field(F, root, m, v)
            if gamma.apply(f.a(l)) != F.mul(val, f.a(l)):
                fail = l
                break
            progress += 1
        if fail is None:
            return TwistCheck(True, None)
        if progress > best_progress:
            best_progress, best_fail = progress, fail
    return TwistCheck(False, best_fail)


def _bound_precondition(level: int, B: int) -> None:
    """Require enough odd primes coprime to 4N below B to pin any character."""
    fourN = 4 * level
    need = unit_group(fourN).order
    have = sum(1 for l in primes_upto(B) if l != 2 and fourN % l != 0)
    if have < need:
        raise BoundTooSmall(
            f"need {need} odd primes coprime to {fourN} below B, found {have}"
        )


def detect_inner_twists(f: Newform, candidates=None, B: int = None) -> InnerTwistGroup:
    """All verified pairs (gamma, chi), closed under the twist group law.

    `candidates` are the field automorphisms to consider (defaults to the
    full computed automorphism list).  The result is canonically ordered and
    independent of the candidate ordering; failure of group closure means
    the input data is inconsistent and raises NotClosed.
    """
    if B is None:
        B = f.bound
    if B > f.bound:
        raise BoundTooLarge(f"B={B} exceeds the stored coefficient bound {f.bound}")
    _bound_precondition(f.level, B)
    if candidates is None:
        candidates = f.field.automorphisms()
    seen = set()
    autos = []
    for g in candidates:
        if g.image not in seen:
            seen.add(g.image)
            autos.append(g)

    M = twist_modulus(f.level)
    found = []
    for gamma in autos:
        for chi in enumerate_characters(M):
            tw = InnerTwist(gamma, chi)
            if tw.is_identity:
                found.append(tw)
                continue
            if verify_inner_twist(f, tw, B).ok:
                found.append(tw)

    found.sort(key=lambda t: t.sort_key())
    index = {t.sort_key(): i for i, t in enumerate(found)}

    n = len(found)
    table = {}
    for i, s in enumerate(found):
        for j, t in enumerate(found):
            prod = _compose_twists(f.field, s, t)
            k = index.get(prod.sort_key())
            if k is None:
                raise NotClosed(
                    f"{f.label}: product of verified twists is not a verified twist"
                )
            table[(i, j)] = k
    # full axiom audit of the table; any failure means inconsistent input data
    ident = next(i for i, t in enumerate(found) if t.is_identity)
    for i in range(n):
        if table[(ident, i)] != i or table[(i, ident)] != i:
            raise NotClosed(f"{f.label}: identity twist does not act as identity")
        if not any(table[(i, j)] == ident for j in range(n)):
            raise NotClosed(f"{f.label}: twist without inverse")
        for j in range(n):
            if table[(i, j)] != table[(j, i)]:
                raise NotClosed(f"{f.label}: twist group is not abelian")
            for k in range(n):
                if table[(table[(i, j)], k)] != table[(i, table[(j, k)])]:
                    raise NotClosed(f"{f.label}: twist composition is not associative")
    return InnerTwistGroup(found, table)


def _compose_twists(field: NumberFieldQ, s: InnerTwist, t: InnerTwist) -> InnerTwist:
    """(gamma, chi) . (sigma, mu) = (gamma sigma, chi^sigma mu)."""
    return InnerTwist(
        s.gamma.compose(t.gamma), _char_conjugate(field, s.chi, t.gamma) * t.chi
    )


def _char_conjugate(field: NumberFieldQ, chi: DirichletCharacter, sigma: FieldAutomorphism):
    """chi^sigma: the character with values sigma(chi(n)).

    For value order <= 2 this is chi itself; otherwise sigma permutes the
    roots of unity in L and acts as chi -> chi^t.
    """
    m = chi.order
    if m <= 2 or sigma.is_identity:
        return chi
    roots = _root_value_candidates(field, m)
    if not roots:
        return chi
    r = roots[0]
    sr = sigma.apply(r)
    pw = field.one
    for t in range(m):
        if pw == sr:
            return chi**t
        pw = field.mul(pw, r)
    raise BadInput("automorphism does not permute the roots of unity")


def detect_self_twist(f: Newform, B: int = None) -> Optional[DirichletCharacter]:
    """Quadratic chi with a_l = 0 whenever chi(l) = -1, or None.

    Evidence at bound B only: a None answer exhibits counterexamples, a
    non-None answer is consistent with (not proof of) a self-twist.
    """
    if B is None:
        B = f.bound
    if B > f.bound:
        raise BoundTooLarge(f"B={B} exceeds the stored coefficient bound {f.bound}")
    _bound_precondition(f.level, B)
    # self-twist candidates run over the full 4N modulus regardless of parity
    for chi in enumerate_characters(4 * f.level):
        if chi.is_trivial or chi.order != 2:
            continue
        prim = chi.primitive()
        ok = True
        for l in primes_upto(B):
            if f.level % l == 0 or prim.modulus % l == 0:
                continue
            v = prim(l)
            if v != 0 and not v.is_one and not f.field.is_zero(f.a(l)):
                ok = False
                break
        if ok:
            return prim
    return None


def default_presentation(f: Newform, g: Newform) -> CompositePresentation:
    """Identity-style presentation when one is available without a search."""
    Ff, Fg = f.field, g.field
    if Ff.coeffs == Fg.coeffs:
        return CompositePresentation(Ff, Ff.gen, Fg.gen)
    if Ff.degree == 1:
        # a degree-1 generator is a rational number; embed it directly
        return CompositePresentation(Fg, Fg.from_rational(_rational_gen(Ff)), Fg.gen)
    if Fg.degree == 1:
        return CompositePresentation(Ff, Ff.gen, Ff.from_rational(_rational_gen(Fg)))
    raise IncompatibleFields(
        f"no composite presentation supplied and fields differ: "
        f"{Ff.coeffs} vs {Fg.coeffs}"
    )


def _rational_gen(field: NumberFieldQ) -> Fraction:
    assert field.degree == 1
    return Fraction(-field.coeffs[0], 1)


def twist_relation_evidence(
    f: Newform,
    g: Newform,
    gamma: FieldAutomorphism,
    B: int,
    presentation: CompositePresentation = None,
) -> TwistEvidence:
    """Count primes where the squared-coefficient twist identity holds.

    Tests  a_l(f)^2 l^(k_g - 1) eps_g(l)  =  gamma(a_l(g))^2 l^(k_f - 1) eps_f(l)
    inside a composite field, over primes l <= B coprime to both levels.
    """
    if B > f.bound or B > g.bound:
        raise BoundTooLarge("B exceeds a stored coefficient bound")
    if gamma.field != g.field:
        raise BadInput("gamma must be an automorphism of the second form's field")
    if presentation is None:
        presentation = default_presentation(f, g)
    presentation.verify(f.field, g.field)
    K = presentation.field

    def side_values(eps):
        m = eps.order
        if m <= 2:
            return [None]
        roots = _root_value_candidates(K, m)
        if not roots:
            raise IncompatibleFields(
                "character values do not embed in the composite field"
            )
        return roots

    def eps_at(eps, root, l):
        v = eps(l)
        if v == 0:
            return K.zero
        if root is None:
            return K.one if v.is_one else K.from_rational(-1)
        return _value_in_field(K, root, eps.order, v)

    ells = [l for l in primes_upto(B) if (f.level * g.level) % l != 0]
    best = None
    for root_f in side_values(f.eps):
        for root_g in side_values(g.eps):
            matched = 0
            first_cx = None
            for l in ells:
                af = presentation.map_f(f.field, f.a(l))
                ag = presentation.map_g(g.field, gamma.apply(g.a(l)))
                lhs = K.mul(K.power(af, 2), eps_at(g.eps, root_g, l))
                lhs = K.scale(Fraction(l ** (g.weight - 1)), lhs)
                rhs = K.mul(K.power(ag, 2), eps_at(f.eps, root_f, l))
                rhs = K.scale(Fraction(l ** (f.weight - 1)), rhs)
                if lhs == rhs:
                    matched += 1
                elif first_cx is None:
                    first_cx = l
            ev = TwistEvidence(gamma, matched, len(ells), first_cx)
            if best is None or ev.matched > best.matched:
                best = ev
    return best


class LmfdbClient:
    """Label-keyed fetch-and-cache client for newform records.

    Requests are serialized with a configurable minimum delay; responses are
    cached to disk verbatim and the cache is consulted first.  With
    offline=True a cache miss raises instead of touching the network.
    """

    BASE_URL = "https://www.lmfdb.org/api/mf_newforms/?label={label}&_format=json"
    DEFAULT_DELAY = 0.5

    def __init__(self, cache_dir=None, offline=False, transport=None, min_delay=None):
        if cache_dir is None:
            cache_dir = os.environ.get("ADELIC_IMAGE_CACHE")
        if cache_dir is None:
            cache_dir = Path.home() / ".cache" / "adelic-image"
        self.cache_dir = Path(cache_dir)
        self.offline = offline
        if min_delay is None:
            min_delay = self.DEFAULT_DELAY
        if transport is None:
            self._transport = self._http_get
            # politeness floor for the real endpoint; injected transports
            # (tests, mirrors) may go faster
            min_delay = max(min_delay, self.DEFAULT_DELAY)
        else:
            self._transport = transport
        self.min_delay = min_delay
        self._lock = threading.Lock()
        self._last_request = 0.0

    @staticmethod
    def _check_label(label: str) -> str:
        if not label or not all(c.isalnum() or c in "._-" for c in label):
            raise BadInput(f"malformed label {label!r}")
        return label

    def cache_path(self, label: str) -> Path:
        return self.cache_dir / f"{self._check_label(label)}.json"

    def fetch(self, label: str) -> dict:
        path = self.cache_path(label)
        if path.exists():
            try:
                with open(path) as fh:
                    return json.load(fh)
            except (OSError, json.JSONDecodeError) as e:
                raise SchemaError(f"unreadable cache entry {path}: {e}") from e
        if self.offline:
            raise OfflineMiss(f"{label}: not cached and offline mode forbids fetching")
        data = self._request(label)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            json.dump(data, fh)
        os.replace(tmp, path)
        return data

    def _request(self, label: str) -> dict:
        with self._lock:
            wait = self.min_delay - (time.monotonic() - self._last_request)
            if wait > 0:
                time.sleep(wait)
            try:
                raw = self._transport(self.BASE_URL.format(label=label))
            except (urllib.error.URLError, OSError) as e:
                raise FetchError(f"fetching {label}: {e}") from e
            finally:
                self._last_request = time.monotonic()
        try:
            return json.loads(raw)
        except json.JSONDecodeError as e:
            raise FetchError(f"non-JSON response for {label}") from e

    @staticmethod
    def _http_get(url: str) -> bytes:
        with urllib.request.urlopen(url, timeout=30) as resp:
            return resp.read()


def load_newform(
    source,
    *,
    cache_dir=None,
    offline: bool = False,
    client: LmfdbClient = None,
) -> Newform:
    """Load a newform from a local JSON file or by label via the cache/client.

    A `source` that names an existing file (or ends in .json) is read
    directly; anything else is treated as a label.  Records may be either
    the bare schema object or wrapped in a {"data": [record]} envelope.
    """
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as e:
            raise SchemaError(f"cannot read {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path} is not valid JSON: {e}") from e
    else:
        if client is None:
            client = LmfdbClient(cache_dir=cache_dir, offline=offline)
        data = client.fetch(str(source))
    if isinstance(data, dict) and "data" in data and "label" not in data:
        records = data["data"]
        if not isinstance(records, list) or not records:
            raise SchemaError("response envelope contains no records")
        data = records[0]
    return Newform.from_json(data)
