"""Command line front end emitting deterministic JSON reports.

The JSON report is the single source of truth; the printed text is a
rendering of the same dict and carries nothing the report does not.
Reports contain no timestamps, sort every mapping, and draw any sampled
values from the seeded generator, so identical inputs, flags, and seed
give byte-identical output.

Mathematical verdicts (a hypothesis coming back No, a scan finding
candidate primes) are results and exit 0.  Only operational failures
exit nonzero, each error class with its own code.
"""

import functools
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import click

from . import __version__
from ._util import primes_upto
from .errors import AdelicImageError, BadInput, BoundTooSmall
from .finitegroups import GL2, FiniteRing, Mat2, closure, standard_sl2_generators
from .hypcheck import (
    GALOIS_LIFT_NOTE,
    YES,
    check_cm_case,
    check_existence_tau,
    check_existence_tau_II,
    check_weight_one,
)
from .imageanalysis import (
    DetImage,
    GroupGSpec,
    adelic_openness_audit,
    dagger_group_modp,
    exceptional_prime_scan,
    form_block,
    pair_entanglement_classify,
    pair_fibre_order,
    papier_coset,
)
from .newforms import (
    LmfdbClient,
    detect_inner_twists,
    load_newform,
    twist_modulus,
    twist_relation_evidence,
    verify_inner_twist,
)
from .numberfields import residue_primes
from .selftest import DEFAULT_SEED, SUITES, run_suite

TOOL_NAME = "adelic-image"

MIN_BOUND = 37  # smallest coefficient bound with enough usable primes
PAPIER_SAMPLES = 3
ENUMERATION_CAP = 200_000  # largest synthetic fibre enumerated per prime

ASSUMPTION_SINGLE_IMAGE = (
    "residue images of a single form at good primes are taken to match the "
    "determinant-power model; openness of the full image is conditional on it"
)
ASSUMPTION_PAIR_CONCLUSION = (
    "the pair verdict combines the congruence scan with local checks; "
    "openness is conditional on the scan candidates exhausting the "
    "exceptional primes"
)


@dataclass(frozen=True)
class RunConfig:
    """Global flags, validated once at dispatch."""

    cache_dir: str
    offline: bool
    seed: int
    workers: int

    def __post_init__(self):
        if self.seed < 0:
            raise BadInput("seed must be nonnegative")
        if self.workers < 1:
            raise BadInput("workers must be >= 1")


def _with_exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AdelicImageError as e:
            click.echo(f"error[{type(e).__name__}]: {e}", err=True)
            raise SystemExit(e.exit_code)

    return wrapper


def _parse_primes(text: str):
    """A..B inclusive; the range must contain at least one prime."""
    parts = text.split("..")
    if len(parts) != 2:
        raise BadInput(f"prime range {text!r} must have the form A..B")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise BadInput(f"prime range {text!r} must have integer endpoints")
    if lo < 2 or hi < lo:
        raise BadInput(f"prime range {text!r} is empty or inverted")
    ps = [p for p in primes_upto(hi) if p >= lo]
    if not ps:
        raise BadInput(f"no primes in {text!r}")
    return ps


def _effective_bound(requested, *forms):
    """Coefficient-table depth: the stored tables unless --bound trims them."""
    if requested is not None and requested < MIN_BOUND:
        raise BadInput(f"bound {requested} is below the minimum {MIN_BOUND}")
    bounds = [f.bound for f in forms]
    if requested is not None:
        bounds.append(requested)
    eff = min(bounds)
    if eff < MIN_BOUND:
        raise BoundTooSmall(
            f"coefficient tables stop at {eff}, below the minimum {MIN_BOUND}"
        )
    return eff


def _pmap(fn, items, workers: int):
    """Map preserving input order, so reports never depend on scheduling."""
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _emit(report: dict, json_out, lines):
    if json_out:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
        Path(json_out).write_text(text)
    for line in lines:
        click.echo(line)


def _gamma_json(gamma):
    return [str(c) for c in gamma.image]


def _error_json(e: AdelicImageError):
    return {"status": type(e).__name__, "reason": str(e)}


# ---------------------------------------------------------------------------
# analyze: one form, per-prime residue data


def _twists_json(f, twists, bound: int):
    elements = []
    for t in twists.elements:
        chk = verify_inner_twist(f, t, bound)
        prim = t.chi.primitive()
        elements.append(
            {
                "gamma": _gamma_json(t.gamma),
                "identity_gamma": t.gamma.is_identity,
                "chi_conductor": prim.modulus,
                "chi_order": prim.order,
                "verified": chk.ok,
                "first_failing_ell": chk.first_failing_ell,
            }
        )
    return {
        "order": len(twists.elements),
        "cm_discriminant": f.cm_disc,
        "elements": elements,
    }


def _sample_units(modulus: int, rng, count: int):
    if modulus == 1:
        return [1]
    units = [u for u in range(1, modulus) if gcd(u, modulus) == 1]
    return rng.sample(units, min(count, len(units)))


def _analyze_local(f, twists, p: int, papier_us):
    entry = {"p": p}
    try:
        block = form_block(f, p, twists)
    except AdelicImageError as e:
        entry["status"] = "skipped"
        entry["reason"] = f"{type(e).__name__}: {e}"
        return entry
    dag = dagger_group_modp(GroupGSpec(p, (block,)))
    flags = {
        "at_least_5": p >= 5,
        "coprime_to_level": f.level % p != 0,
        "unramified_in_field": f.field.disc % p != 0,
    }
    flags["good"] = all(flags.values())
    entry.update(
        status="ok",
        block_degrees=list(block.degrees),
        expected_order=dag.order,
        allowed_det_classes=len(dag.allowed_dets),
        good_prime=flags,
    )
    P = residue_primes(f.field, p)[0]
    cosets = []
    for u in papier_us:
        rec = {"u": u}
        try:
            sol = papier_coset(f, twists, P, u)
            rec.update(
                alpha=sol.alpha,
                eps_value=sol.eps_value,
                embedding_generator=sol.embedding_generator,
                residue_degree=P.degree,
            )
        except AdelicImageError as e:
            rec.update(_error_json(e))
        cosets.append(rec)
    entry["scaling_cosets"] = cosets
    return entry


def _render_analyze(r):
    lines = [f"{r['tool']['name']} {r['tool']['version']} analyze"]
    i = r["inputs"]
    lines.append(
        f"form {i['label']}: level {i['level']}, weight {i['weight']}, "
        f"field degree {i['field_degree']}"
    )
    tw = r["inner_twists"]
    verified = sum(1 for t in tw["elements"] if t["verified"])
    lines.append(
        f"inner twists: {tw['order']} element(s), {verified} verified at "
        f"bound {i['effective_bound']}, cm discriminant {tw['cm_discriminant']}"
    )
    for e in r["local"]:
        if e["status"] != "ok":
            lines.append(f"p = {e['p']}: skipped ({e['reason']})")
            continue
        lines.append(
            f"p = {e['p']}: degrees {e['block_degrees']}, expected order "
            f"{e['expected_order']}, det classes {e['allowed_det_classes']}, "
            f"good prime {e['good_prime']['good']}"
        )
        for c in e["scaling_cosets"]:
            if "alpha" in c:
                lines.append(
                    f"  u = {c['u']}: alpha code {c['alpha']}, "
                    f"eps code {c['eps_value']}"
                )
            else:
                lines.append(f"  u = {c['u']}: {c['status']}: {c['reason']}")
    lines.append(f"headline: {r['headline']}")
    lines.append("assumptions:")
    lines.extend(f"  - {a}" for a in r["assumptions"])
    return lines


# ---------------------------------------------------------------------------
# pair: scan, per-prime classification, audit, hypothesis checks


def _synthetic_fibre(spec: GroupGSpec):
    """Enumerate the expected pair image at p from standard generators."""
    rings = spec.rings()
    ambient = tuple((r, GL2) for r in rings)
    idents = [Mat2.identity(r) for r in rings]
    gens = []
    for i, r in enumerate(rings):
        for s in standard_sl2_generators(r):
            tup = list(idents)
            tup[i] = s
            gens.append(tuple(tup))
    p = spec.p
    g0 = FiniteRing.gf(p, 1).generator
    nf = len(spec.blocks[0].degrees)
    kf, kg = spec.weights
    det_tup = []
    for i, r in enumerate(rings):
        k = kf if i < nf else kg
        det_tup.append(Mat2.of(r, pow(g0, (1 - k) % (p - 1), p), 0, 0, 1))
    gens.append(tuple(det_tup))
    return closure(gens, ambient, bound=pair_fibre_order(spec))


def _pair_local(f, g, twists_f, twists_g, p: int):
    entry = {"p": p}
    try:
        bf = form_block(f, p, twists_f)
        bg = form_block(g, p, twists_g)
    except AdelicImageError as e:
        entry["status"] = "skipped"
        entry["reason"] = f"{type(e).__name__}: {e}"
        return entry, None
    spec = GroupGSpec(p, (bf, bg))
    order = pair_fibre_order(spec)
    entry["block_degrees"] = [list(bf.degrees), list(bg.degrees)]
    entry["fibre_order"] = order
    if order > ENUMERATION_CAP:
        entry["status"] = "skipped"
        entry["reason"] = (
            f"fibre order {order} is above the enumeration cap {ENUMERATION_CAP}"
        )
        return entry, None
    rep = pair_entanglement_classify(_synthetic_fibre(spec), spec)
    entry.update(status="ok", verdict=rep.verdict, evidence=list(rep.evidence))
    if rep.verdict == "OpenIndexBounded":
        entry["index"] = rep.index
    if rep.datum is not None:
        entry["datum"] = rep.datum.to_json()
    return entry, rep


_HYP_CHECKS = (
    ("tau", lambda f, g, p, tf, tg: check_existence_tau(f, g, p, tf, tg)),
    ("tau2", lambda f, g, p, tf, tg: check_existence_tau_II(f, g, p, tf, tg)),
    ("cm", lambda f, g, p, tf, tg: check_cm_case(f, g, p, tf)),
    ("weight1", lambda f, g, p, tf, tg: check_weight_one(f, g, p)),
)


def _hyp_at(f, g, twists_f, twists_g, p: int):
    out = {"p": p, "checks": []}
    for name, runner in _HYP_CHECKS:
        rec = {"check": name}
        try:
            status = runner(f, g, p, twists_f, twists_g)
            rec.update(status.to_json())
        except AdelicImageError as e:
            rec["status"] = "inapplicable"
            rec["reason"] = f"{type(e).__name__}: {e}"
        out["checks"].append(rec)
    return out


def _pair_headline(scan_json):
    if "status" in scan_json:
        return f"scan unavailable ({scan_json['status']}); no pair verdict"
    cands = scan_json["candidates"]
    if cands == "AllPrimesCandidate":
        return (
            "twist-degenerate pair: the congruence product vanishes "
            "identically and every prime is a candidate"
        )
    if cands is None:
        return "scan indeterminate: fewer than three usable norms below the bound"
    if cands:
        return (
            f"either one of the primes {cands} is exceptional for this pair "
            "or the pair image is open, conditional on the assumption ledger"
        )
    return (
        "no exceptional candidates below the scan bounds: the pair image is "
        "open, conditional on the assumption ledger"
    )


def _render_pair(r):
    lines = [f"{r['tool']['name']} {r['tool']['version']} pair"]
    for tag in ("f", "g"):
        d = r["forms"][tag]
        lines.append(
            f"{tag} = {d['label']}: level {d['level']}, weight {d['weight']}, "
            f"field degree {d['field_degree']}"
        )
    if r["inputs"]["swapped"]:
        lines.append("note: arguments swapped so the larger weight comes first")
    lines.append("twist evidence:")
    for ev in r["twist_evidence"]:
        if "status" in ev:
            lines.append(f"  gamma {ev['gamma']}: {ev['status']}: {ev['reason']}")
        else:
            lines.append(
                f"  gamma {ev['gamma']}: {ev['matched']}/{ev['tested']} matched, "
                f"first counterexample {ev['first_counterexample']}"
            )
    sc = r["scan"]
    if "status" in sc:
        lines.append(f"scan: {sc['status']}: {sc['reason']}")
    else:
        lines.append(
            f"scan: candidates {sc['candidates']}, gcd {sc['gcd']}, "
            f"{len(sc['tested_ells'])} ells tested"
        )
    for e in r["local"]:
        if e["status"] != "ok":
            lines.append(f"p = {e['p']}: skipped ({e['reason']})")
        else:
            lines.append(
                f"p = {e['p']}: {e['verdict']}, fibre order {e['fibre_order']}"
            )
    au = r["audit"]
    if "status" in au:
        lines.append(f"audit: {au['status']}: {au['reason']}")
    else:
        lines.append(
            f"audit over p in {r['audited_primes']}: open {au['open']}, "
            f"index bound {au['index_bound']}"
        )
    for h in r.get("hyp", ()):
        parts = []
        for c in h["checks"]:
            if c.get("status") == "inapplicable":
                parts.append(f"{c['check']} n/a")
            else:
                parts.append(f"{c['check']} V={c['holds_V']} T={c['holds_T']}")
        lines.append(f"hyp p = {h['p']}: " + "; ".join(parts))
    lines.append(f"headline: {r['headline']}")
    lines.append("assumptions:")
    lines.extend(f"  - {a}" for a in r["assumptions"])
    return lines


# ---------------------------------------------------------------------------
# the command group


@click.group(name=TOOL_NAME)
@click.version_option(__version__, prog_name=TOOL_NAME)
@click.option("--cache-dir", default=None, help="coefficient cache directory")
@click.option("--offline", is_flag=True, help="never touch the network")
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--workers", default=1, show_default=True, type=int)
@click.pass_context
@_with_exit_codes
def main(ctx, cache_dir, offline, seed, workers):
    """Finite-level image diagnostics for modular form coefficient tables."""
    ctx.obj = RunConfig(cache_dir=cache_dir, offline=offline, seed=seed, workers=workers)


@main.command()
@click.argument("label")
@click.pass_obj
@_with_exit_codes
def fetch(cfg, label):
    """Download one coefficient table into the cache and print its path."""
    client = LmfdbClient(cache_dir=cfg.cache_dir, offline=cfg.offline)
    client.fetch(label)
    click.echo(str(client.cache_path(label)))


@main.command()
@click.argument("source")
@click.option("--primes", "prime_range", required=True, help="prime range A..B")
@click.option("--bound", default=None, type=int, help="coefficient depth (default: full table)")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
@_with_exit_codes
def analyze(cfg, source, prime_range, bound, json_out):
    """Per-prime residue image data for one form."""
    ps = _parse_primes(prime_range)
    f = load_newform(source, cache_dir=cfg.cache_dir, offline=cfg.offline)
    eff = _effective_bound(bound, f)
    twists = detect_inner_twists(f, B=eff)

    rng = random.Random(cfg.seed)
    papier_us = _sample_units(twist_modulus(f.level), rng, PAPIER_SAMPLES)
    local = _pmap(
        lambda p: _analyze_local(f, twists, p, papier_us), ps, cfg.workers
    )

    report = {
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": "analyze",
        "inputs": {
            "source": source,
            "label": f.label,
            "level": f.level,
            "weight": f.weight,
            "field_degree": f.field.degree,
            "primes": ps,
            "requested_bound": bound,
            "effective_bound": eff,
            "cache_dir": cfg.cache_dir,
            "offline": cfg.offline,
            "seed": cfg.seed,
            "workers": cfg.workers,
        },
        "inner_twists": _twists_json(f, twists, eff),
        "local": local,
        "headline": (
            "residue data computed at each listed prime; openness of the "
            "adelic image is conditional on the assumption ledger"
        ),
        "assumptions": [ASSUMPTION_SINGLE_IMAGE],
    }
    _emit(report, json_out, _render_analyze(report))


@main.command()
@click.argument("source_f")
@click.argument("source_g")
@click.option("--primes", "prime_range", required=True, help="prime range A..B")
@click.option("--bound", default=None, type=int, help="coefficient depth (default: full tables)")
@click.option("--hyp", is_flag=True, help="run the rank-one criteria per prime")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
@_with_exit_codes
def pair(cfg, source_f, source_g, prime_range, bound, hyp, json_out):
    """Joint image diagnostics for an ordered pair of forms."""
    ps = _parse_primes(prime_range)
    f = load_newform(source_f, cache_dir=cfg.cache_dir, offline=cfg.offline)
    g = load_newform(source_g, cache_dir=cfg.cache_dir, offline=cfg.offline)
    swapped = f.weight < g.weight
    if swapped:
        f, g = g, f
    eff = _effective_bound(bound, f, g)
    twists_f = detect_inner_twists(f, B=_effective_bound(bound, f))
    twists_g = detect_inner_twists(g, B=_effective_bound(bound, g))

    evidence = []
    for gamma in g.field.automorphisms():
        ev = {"gamma": _gamma_json(gamma)}
        try:
            te = twist_relation_evidence(f, g, gamma, eff)
            ev.update(
                matched=te.matched,
                tested=te.tested,
                first_counterexample=te.first_counterexample,
            )
        except AdelicImageError as e:
            ev.update(_error_json(e))
        evidence.append(ev)

    ell_bound = min(200, f.bound, g.bound)
    try:
        scan = exceptional_prime_scan(
            f, g, ell_bound=ell_bound, p_bound=1000,
            twists_f=twists_f, twists_g=twists_g,
        )
        scan_json = scan.to_json()
    except AdelicImageError as e:
        scan_json = _error_json(e)

    results = _pmap(
        lambda p: _pair_local(f, g, twists_f, twists_g, p), ps, cfg.workers
    )
    local = [entry for entry, _ in results]
    reps = [rep for _, rep in results if rep is not None]
    audited = [entry["p"] for entry, rep in results if rep is not None]

    assumptions = {ASSUMPTION_SINGLE_IMAGE, ASSUMPTION_PAIR_CONCLUSION}
    if reps:
        try:
            audit = adelic_openness_audit(reps, DetImage((), True))
            audit_json = audit.to_json()
            assumptions.update(audit.assumptions)
        except AdelicImageError as e:
            audit_json = _error_json(e)
    else:
        audit_json = {
            "status": "NoAuditedPrimes",
            "reason": "no prime in range admitted an enumerated fibre",
        }

    report = {
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": "pair",
        "inputs": {
            "source_f": source_f,
            "source_g": source_g,
            "swapped": swapped,
            "primes": ps,
            "requested_bound": bound,
            "effective_bound": eff,
            "scan_ell_bound": ell_bound,
            "scan_p_bound": 1000,
            "cache_dir": cfg.cache_dir,
            "offline": cfg.offline,
            "seed": cfg.seed,
            "workers": cfg.workers,
        },
        "forms": {
            "f": {
                "label": f.label,
                "level": f.level,
                "weight": f.weight,
                "field_degree": f.field.degree,
                "cm_discriminant": f.cm_disc,
            },
            "g": {
                "label": g.label,
                "level": g.level,
                "weight": g.weight,
                "field_degree": g.field.degree,
                "cm_discriminant": g.cm_disc,
            },
        },
        "twist_evidence": evidence,
        "scan": scan_json,
        "local": local,
        "audited_primes": audited,
        "audit": audit_json,
        "headline": _pair_headline(scan_json),
    }
    if hyp:
        good = [p for p in ps if p >= 5 and (f.level * g.level) % p != 0]
        report["hyp"] = _pmap(
            lambda p: _hyp_at(f, g, twists_f, twists_g, p), good, cfg.workers
        )
        if any(
            c.get("holds_T") == YES or c.get("holds_V") == YES
            for h in report["hyp"]
            for c in h["checks"]
        ):
            assumptions.add(GALOIS_LIFT_NOTE)
    report["assumptions"] = sorted(assumptions)
    _emit(report, json_out, _render_pair(report))


@main.command()
@click.argument("suite", type=click.Choice(sorted(SUITES)))
@click.pass_obj
@_with_exit_codes
def selftest(cfg, suite):
    """Run one self-test suite; exit nonzero if any check fails."""
    res = run_suite(suite, seed=cfg.seed)
    for line in res.summary_lines():
        click.echo(line)
    if not res.ok:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
