import pytest

from mwboson.verify import grid_input, run_battery


@pytest.mark.parametrize("M,N,expected", [(3, 0, (0, 0, 0)), (3, 2, (1, 1, 0)), (2, 3, (2, 1)), (1, 3, (3,))])
def test_grid_input(M, N, expected):
    assert grid_input(M, N) == expected


def test_battery_passes():
    report = run_battery((2, 3), (1, 2), 2, seed=1)
    assert report.passed
    names = [c.name for c in report.checks]
    assert "reck_roundtrip[M=2]" in names and "schedule_fidelity[M=3]" in names
    assert {"hong_ou_mandel", "dispersive_scaling", "rwa_scaling"} <= set(names)
    assert not report.warnings


def test_fault_injection_is_caught():
    report = run_battery((2, 3), (1,), 2, seed=1, inject_fault=True)
    assert not report.passed
    failed = {c.name.split("[")[0] for c in report.checks if not c.passed}
    assert failed == {"reck_roundtrip", "oracle_equivalence", "schedule_fidelity"}


@pytest.mark.parametrize("modes,photons,instances", [((), (1,), 1), ((2,), (), 1), ((2,), (1,), 0)])
def test_empty_grid_warns(modes, photons, instances):
    report = run_battery(modes, photons, instances)
    assert report.passed and not report.checks
    assert report.warnings


def test_battery_is_deterministic():
    a = run_battery((3,), (2,), 2, seed=5)
    b = run_battery((3,), (2,), 2, seed=5)
    assert a.checks == b.checks
