import pytest

from suq2martin.verify import INVARIANT_SUITES, Check, run_suite


@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("suite", sorted(INVARIANT_SUITES))
def test_invariant_suite_passes(suite, q):
    checks = run_suite(suite, q, seed=42)
    assert checks
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


def test_suites_are_seeded():
    a = [c.value for c in run_suite("martin", 0.5, seed=1)]
    b = [c.value for c in run_suite("martin", 0.5, seed=1)]
    assert a == b


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope", 0.5)


def test_check_line_format():
    assert Check("x", True, 1e-12, 1e-10).line().startswith("PASS  x: 1.000e-12")
    assert Check("x", False, 1.0, 0.5, "note").line().endswith("note")
