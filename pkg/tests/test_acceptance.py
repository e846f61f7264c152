"""One test per acceptance criterion, each run at its stated tolerance.

Every test prints a PASS/FAIL line, visible even under output capture.
"""
import pytest

from qrounds.acceptance import CRITERIA, run_acceptance


@pytest.mark.slow
@pytest.mark.parametrize("cid", [c[0] for c in CRITERIA], ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(cid, capsys):
    (result,) = run_acceptance(only={cid})
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
    assert not result.over_budget, f"took {result.elapsed:.1f}s, budget {result.budget:.0f}s"
