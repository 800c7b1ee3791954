import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call":
        return
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\n[acceptance] {outcome}: {name}", flush=True)


@pytest.fixture(scope="session")
def synth_default():
    from retrofit import datastore as ds

    return ds.generate_synthetic(ds.SynthConfig())
