"""Fast self-test suites and the result container.

The two heavyweight suites (lifting, goursat) run in the acceptance
battery; here we exercise the cheap ones end to end plus the result
plumbing they all share.
"""

import pytest

from adelic_image.errors import BadInput
from adelic_image.selftest import (
    DEFAULT_SEED,
    SUITES,
    Check,
    SuiteResult,
    run_suite,
)


class TestRunSuite:
    def test_unknown_suite_rejected(self):
        with pytest.raises(BadInput):
            run_suite("nope")

    def test_registry_names(self):
        assert set(SUITES) == {
            "lifting",
            "goursat",
            "negative-hyp",
            "counterexample",
            "dagger-orders",
            "papier",
        }

    def test_default_seed_echoed(self):
        res = run_suite("counterexample")
        assert res.seed == DEFAULT_SEED

    def test_explicit_seed_echoed(self):
        res = run_suite("counterexample", seed=123)
        assert res.seed == 123


class TestNegativeHypSuite:
    def test_green(self):
        res = run_suite("negative-hyp")
        assert res.ok
        assert res.passed == 2 and res.failed == 0

    def test_scan_counts_in_details(self):
        res = run_suite("negative-hyp")
        by_label = {c.label: c for c in res.checks}
        assert "1152 pairs scanned" in by_label["q=3 scan"].detail
        assert "57600 pairs scanned" in by_label["q=5 scan"].detail


class TestCounterexampleSuite:
    def test_green(self):
        res = run_suite("counterexample")
        assert res.ok
        labels = [c.label for c in res.checks]
        assert labels == ["primes (3, 5)", "primes (3, 5, 7)"]

    def test_index_details(self):
        res = run_suite("counterexample")
        assert "index 2" in res.checks[0].detail
        assert "index 4" in res.checks[1].detail


class TestDaggerOrdersSuite:
    def test_green(self):
        res = run_suite("dagger-orders")
        assert res.ok
        # 2 primes x 3 degree shapes x 7 weights
        assert len(res.checks) == 42

    def test_formula_matches_enumeration_everywhere(self):
        res = run_suite("dagger-orders")
        for c in res.checks:
            enumerated, formula = c.detail.split(", ")
            assert enumerated.split()[-1] == formula.split()[-1]


class TestPapierSuite:
    def test_green(self):
        res = run_suite("papier")
        assert res.ok
        assert res.passed == 4

    def test_anticommuting_check_present(self):
        res = run_suite("papier")
        labels = [c.label for c in res.checks]
        assert "inert p=5 anticommuting alpha" in labels

    def test_deterministic(self):
        assert run_suite("papier").to_json() == run_suite("papier").to_json()


class TestResultContainer:
    def test_counts(self):
        res = SuiteResult(
            "demo",
            0,
            (Check("a", True, "x"), Check("b", False, "y"), Check("c", True, "z")),
        )
        assert res.passed == 2
        assert res.failed == 1
        assert not res.ok

    def test_json_shape(self):
        res = SuiteResult("demo", 7, (Check("a", True, "x"),))
        assert res.to_json() == {
            "suite": "demo",
            "seed": 7,
            "passed": 1,
            "failed": 0,
            "checks": [{"label": "a", "ok": True, "detail": "x"}],
        }

    def test_summary_lines(self):
        res = SuiteResult("demo", 7, (Check("a", True, "x"), Check("b", False, "y")))
        lines = res.summary_lines()
        assert lines[0] == "  [ok  ] a: x"
        assert lines[1] == "  [FAIL] b: y"
        assert lines[2] == "demo: 1 passed, 1 failed"
