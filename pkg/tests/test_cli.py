"""End-to-end command line tests over the vendored fixture tables.

Everything runs offline; the fixtures directory doubles as a warm cache.
"""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from adelic_image.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def runner():
    return CliRunner()


def fx(label):
    return str(FIXTURES / f"{label}.json")


class TestFetch:
    def test_warm_cache_prints_path(self, runner):
        res = runner.invoke(
            main, ["--cache-dir", str(FIXTURES), "--offline", "fetch", "1.12.a.a"]
        )
        assert res.exit_code == 0
        assert res.output.strip().endswith("1.12.a.a.json")

    def test_cold_offline_miss(self, runner, tmp_path):
        res = runner.invoke(
            main, ["--cache-dir", str(tmp_path), "--offline", "fetch", "99.9.z.z"]
        )
        assert res.exit_code == 32

    def test_idempotent(self, runner):
        args = ["--cache-dir", str(FIXTURES), "--offline", "fetch", "1.12.a.a"]
        first = runner.invoke(main, args)
        second = runner.invoke(main, args)
        assert first.output == second.output


class TestAnalyze:
    def test_fixture_path(self, runner, tmp_path):
        out = tmp_path / "report.json"
        res = runner.invoke(
            main,
            ["--offline", "analyze", fx("1.12.a.a"), "--primes", "5..13",
             "--json", str(out)],
        )
        assert res.exit_code == 0
        assert "headline:" in res.output
        rep = json.loads(out.read_text())
        assert rep["command"] == "analyze"
        assert rep["inputs"]["primes"] == [5, 7, 11, 13]
        assert [e["p"] for e in rep["local"]] == [5, 7, 11, 13]

    def test_label_via_cache_dir(self, runner):
        res = runner.invoke(
            main,
            ["--cache-dir", str(FIXTURES), "--offline", "analyze", "1.12.a.a",
             "--primes", "5..5"],
        )
        assert res.exit_code == 0

    def test_expected_orders(self, runner, tmp_path):
        out = tmp_path / "r.json"
        runner.invoke(
            main,
            ["--offline", "analyze", fx("1.12.a.a"), "--primes", "5..7",
             "--json", str(out)],
        )
        locs = {e["p"]: e for e in json.loads(out.read_text())["local"]}
        # |SL2(F_p)| * (p-1)/gcd(p-1, 11)
        assert locs[5]["expected_order"] == 480
        assert locs[7]["expected_order"] == 2016

    def test_small_primes_skipped_not_fatal(self, runner, tmp_path):
        out = tmp_path / "r.json"
        res = runner.invoke(
            main,
            ["--offline", "analyze", fx("1.12.a.a"), "--primes", "2..5",
             "--json", str(out)],
        )
        assert res.exit_code == 0
        locs = {e["p"]: e for e in json.loads(out.read_text())["local"]}
        assert locs[2]["status"] == "skipped"
        assert locs[3]["status"] == "skipped"
        assert locs[5]["status"] == "ok"

    def test_byte_identical_reports(self, runner, tmp_path):
        texts = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            res = runner.invoke(
                main,
                ["--offline", "analyze", fx("16.3.c.a"), "--primes", "5..11",
                 "--json", str(out)],
            )
            assert res.exit_code == 0
            texts.append(out.read_bytes())
        assert texts[0] == texts[1]

    def test_seed_changes_sampled_units(self, runner, tmp_path):
        reps = []
        for seed in ("1", "2"):
            out = tmp_path / f"s{seed}.json"
            runner.invoke(
                main,
                ["--offline", "--seed", seed, "analyze", fx("16.3.c.a"),
                 "--primes", "5..5", "--json", str(out)],
            )
            rep = json.loads(out.read_text())
            assert rep["inputs"]["seed"] == int(seed)
            reps.append([c["u"] for c in rep["local"][0]["scaling_cosets"]])
        assert reps[0] != reps[1]

    def test_workers_do_not_change_content(self, runner, tmp_path):
        reps = []
        for n in ("1", "3"):
            out = tmp_path / f"w{n}.json"
            res = runner.invoke(
                main,
                ["--offline", "--workers", n, "analyze", fx("16.3.c.a"),
                 "--primes", "5..13", "--json", str(out)],
            )
            assert res.exit_code == 0
            rep = json.loads(out.read_text())
            del rep["inputs"]["workers"]
            reps.append(rep)
        assert reps[0] == reps[1]

    def test_self_twist_constrains_cosets(self, runner, tmp_path):
        out = tmp_path / "r.json"
        runner.invoke(
            main,
            ["--offline", "analyze", fx("16.3.c.a"), "--primes", "5..5",
             "--json", str(out)],
        )
        rep = json.loads(out.read_text())
        assert rep["inner_twists"]["order"] == 2
        assert rep["inner_twists"]["cm_discriminant"] == -4
        # sampled units off the self-twist kernel admit no coset
        for c in rep["local"][0]["scaling_cosets"]:
            assert ("alpha" in c) == (c["u"] % 4 == 1)

    def test_bad_prime_range(self, runner):
        res = runner.invoke(
            main, ["--offline", "analyze", fx("1.12.a.a"), "--primes", "7..5"]
        )
        assert res.exit_code == 2

    def test_no_primes_in_range(self, runner):
        res = runner.invoke(
            main, ["--offline", "analyze", fx("1.12.a.a"), "--primes", "24..28"]
        )
        assert res.exit_code == 2

    def test_bound_too_small(self, runner):
        res = runner.invoke(
            main,
            ["--offline", "analyze", fx("1.12.a.a"), "--primes", "5..7",
             "--bound", "10"],
        )
        assert res.exit_code == 2

    def test_corrupt_file_schema_exit(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"label": "x"}')
        res = runner.invoke(
            main, ["--offline", "analyze", str(bad), "--primes", "5..7"]
        )
        assert res.exit_code == 30


class TestPair:
    def test_rigged_pair_candidates(self, runner, tmp_path):
        out = tmp_path / "r.json"
        res = runner.invoke(
            main,
            ["--offline", "pair", fx("1.12.a.a"), fx("1.2.x.rig"),
             "--primes", "7..7", "--json", str(out)],
        )
        assert res.exit_code == 0
        rep = json.loads(out.read_text())
        assert rep["scan"]["candidates"] == [7]
        assert "either one of the primes [7]" in rep["headline"]

    def test_generic_pair_empty_candidates(self, runner, tmp_path):
        out = tmp_path / "r.json"
        res = runner.invoke(
            main,
            ["--offline", "pair", fx("1.12.a.a"), fx("32.2.a.a"),
             "--primes", "5..5", "--json", str(out)],
        )
        assert res.exit_code == 0
        rep = json.loads(out.read_text())
        assert rep["scan"]["candidates"] == []
        assert "open" in rep["headline"]

    def test_self_pair_twist_degenerate(self, runner, tmp_path):
        out = tmp_path / "r.json"
        res = runner.invoke(
            main,
            ["--offline", "pair", fx("1.12.a.a"), fx("1.12.a.a"),
             "--primes", "7..7", "--json", str(out)],
        )
        assert res.exit_code == 0
        rep = json.loads(out.read_text())
        assert rep["scan"]["candidates"] == "AllPrimesCandidate"
        assert rep["headline"].startswith("twist-degenerate pair")
        ev = rep["twist_evidence"][0]
        assert ev["matched"] == ev["tested"] > 0

    def test_weight_order_swapped(self, runner, tmp_path):
        out = tmp_path / "r.json"
        res = runner.invoke(
            main,
            ["--offline", "pair", fx("32.2.a.a"), fx("1.12.a.a"),
             "--primes", "7..7", "--json", str(out)],
        )
        assert res.exit_code == 0
        rep = json.loads(out.read_text())
        assert rep["inputs"]["swapped"] is True
        assert rep["forms"]["f"]["label"] == "1.12.a.a"

    def test_local_classification_and_audit(self, runner, tmp_path):
        out = tmp_path / "r.json"
        res = runner.invoke(
            main,
            ["--offline", "pair", fx("1.12.a.a"), fx("32.2.a.a"),
             "--primes", "5..7", "--json", str(out)],
        )
        assert res.exit_code == 0
        rep = json.loads(out.read_text())
        locs = {e["p"]: e for e in rep["local"]}
        assert locs[5]["verdict"] == "FullDagger"
        assert locs[5]["fibre_order"] == 57600
        assert locs[7]["status"] == "skipped"
        assert rep["audited_primes"] == [5]
        assert rep["audit"]["open"] is True
        assert rep["audit"]["index_bound"] == 1

    def test_hyp_section(self, runner, tmp_path):
        out = tmp_path / "r.json"
        res = runner.invoke(
            main,
            ["--offline", "pair", fx("1.12.a.a"), fx("32.2.a.a"),
             "--primes", "7..7", "--hyp", "--json", str(out)],
        )
        assert res.exit_code == 0
        rep = json.loads(out.read_text())
        checks = {c["check"]: c for c in rep["hyp"][0]["checks"]}
        # trivial character product kills the diagonal construction
        assert checks["tau"]["holds_V"] == "No"
        assert checks["tau"]["holds_T"] == "No"
        assert checks["tau"]["conditions"]
        assert checks["tau2"]["holds_V"] == "Unknown"
        # 32.2.a.a has cm by -4 but the trivial product blocks the unit search
        assert checks["cm"]["holds_V"] == "Unknown"
        assert checks["weight1"]["status"] == "inapplicable"

    def test_hyp_inapplicable_without_cm(self, runner, tmp_path):
        out = tmp_path / "r.json"
        runner.invoke(
            main,
            ["--offline", "pair", fx("1.12.a.a"), fx("11.2.a.a"),
             "--primes", "7..7", "--hyp", "--json", str(out)],
        )
        rep = json.loads(out.read_text())
        checks = {c["check"]: c for c in rep["hyp"][0]["checks"]}
        assert checks["cm"]["status"] == "inapplicable"

    def test_byte_identical_reports(self, runner, tmp_path):
        texts = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            res = runner.invoke(
                main,
                ["--offline", "pair", fx("1.12.a.a"), fx("32.2.a.a"),
                 "--primes", "5..7", "--hyp", "--json", str(out)],
            )
            assert res.exit_code == 0
            texts.append(out.read_bytes())
        assert texts[0] == texts[1]

    def test_assumption_ledger_sorted_unique(self, runner, tmp_path):
        out = tmp_path / "r.json"
        runner.invoke(
            main,
            ["--offline", "pair", fx("1.12.a.a"), fx("32.2.a.a"),
             "--primes", "5..5", "--json", str(out)],
        )
        rep = json.loads(out.read_text())
        assumps = rep["assumptions"]
        assert assumps == sorted(assumps)
        assert len(assumps) == len(set(assumps))


class TestSelftest:
    def test_pass_exit_zero(self, runner):
        res = runner.invoke(main, ["selftest", "counterexample"])
        assert res.exit_code == 0
        assert "counterexample: 2 passed, 0 failed" in res.output

    def test_unknown_suite_usage_error(self, runner):
        res = runner.invoke(main, ["selftest", "nope"])
        assert res.exit_code == 2

    def test_seed_flag_reaches_suite(self, runner):
        res = runner.invoke(main, ["--seed", "9", "selftest", "papier"])
        assert res.exit_code == 0
        assert "papier: 4 passed, 0 failed" in res.output


class TestVersion:
    def test_version_flag(self, runner):
        res = runner.invoke(main, ["--version"])
        assert res.exit_code == 0
        assert "adelic-image" in res.output
