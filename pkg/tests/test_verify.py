import pytest

from vessel_lab.errors import ArgumentError
from vessel_lab.verify import (SUITES, VerificationReport, parse_suites, run_suites, thread_count)


def test_parse_suites():
    assert parse_suites("all") == list(SUITES)
    assert parse_suites("axioms, det") == ["axioms", "det"]
    with pytest.raises(ArgumentError):
        parse_suites("axioms,bogus")
    with pytest.raises(ArgumentError):
        parse_suites("")


def test_thread_count(monkeypatch):
    monkeypatch.setenv("VESSEL_LAB_THREADS", "3")
    assert thread_count() == 3
    for bad in ("0", "x"):
        monkeypatch.setenv("VESSEL_LAB_THREADS", bad)
        with pytest.raises(ArgumentError):
            thread_count()


@pytest.mark.parametrize("name", ["rank1", "diag", "curve8", "nls", "canonical"])
def test_all_suites_pass(request, name):
    rep = run_suites(request.getfixturevalue(name), SUITES, seed=3)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    assert all(c.passed == (c.residual <= c.tolerance) for c in rep.checks)


def test_zero_fixture_trivial(zero):
    rep = run_suites(zero, SUITES)
    assert rep.passed
    exact = [c for c in rep.checks if c.suite != "intertwine"]
    assert max(c.residual for c in exact) == 0.0
    assert rep.skipped == [{"suite": "bounds", "reason": "bounds need a minimal vessel"}]


def test_non_sl_skips(nls):
    rep = run_suites(nls, ["gl", "jost", "bounds"])
    assert rep.summary() == {"total": 0, "passed": 0, "failed": 0, "skipped": 3}


def test_tolerance_override_fails(rank1):
    rep = run_suites(rank1, ["axioms"], tol=1e-16)
    assert not rep.passed and rep.n_failed > 0


def test_deterministic_and_thread_independent(rank1):
    a = run_suites(rank1, SUITES, seed=11, threads=1).to_dict()
    b = run_suites(rank1, SUITES, seed=11, threads=4).to_dict()
    assert a == b
    assert "timings" not in a


def test_timings_optional(rank1):
    rep = run_suites(rank1, ["det"], timings=True)
    assert set(rep.timings) == {"det"}


def test_unknown_suite(rank1):
    with pytest.raises(ArgumentError):
        run_suites(rank1, ["nope"])


def test_empty_report():
    rep = VerificationReport(["x"])
    assert rep.passed and rep.max_residual() == 0.0
