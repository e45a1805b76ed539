import pytest

from ..core.acceptance import (
    AcceptanceOpts,
    AcceptanceRun,
    Check,
    extrapolate,
    extrapolated_stderr,
    run_acceptance,
)
from ..tools.exceptions import (
    ResetLdpNumericException,
    ResetLdpOracleRequiredException,
    ResetLdpUsageException,
)
from ..tools.settings import set_setting


def test_extrapolation_removes_leading_bias():
    limit, slope, t = 0.3, 2.0, 50.0
    fine, coarse = limit + slope / t, limit + slope / (t / 4.0)
    assert extrapolate(fine, coarse, 1.0) == pytest.approx(limit)
    root_fine = limit + slope / t**0.5
    root_coarse = limit + slope / (t / 4.0) ** 0.5
    assert extrapolate(root_fine, root_coarse, 0.5) == pytest.approx(limit)
    assert extrapolated_stderr(0.01, 0.01, 1.0) > 0.01


def test_check_ids():
    assert Check.from_id("cgf") is Check.Cgf
    assert [check.id for check in Check][0] == "poisson-occupation"
    with pytest.raises(ResetLdpUsageException):
        Check.from_id("everything")


def test_samples_follow_quick_mode():
    assert AcceptanceOpts(quick=True).samples < AcceptanceOpts().samples


def test_invalid_options():
    with pytest.raises(ResetLdpUsageException):
        AcceptanceRun(AcceptanceOpts(workers=0))


def test_fast_checks_pass():
    results = run_acceptance(
        AcceptanceOpts(checks=[Check.PoissonOccupation, Check.AiryConstants])
    )
    assert [result.check for result in results] == [
        "poisson-occupation",
        "airy-constants",
    ]
    assert all(result.passed for result in results), results


def test_failed_check_does_not_stop_the_run(mocker):
    mocker.patch.object(
        AcceptanceRun,
        "_airy_constants",
        side_effect=ResetLdpNumericException("no zeros", {"i": 1}),
    )
    mocker.patch.object(AcceptanceRun, "_cgf", return_value="fine")
    results = run_acceptance(AcceptanceOpts(checks=[Check.AiryConstants, Check.Cgf]))
    assert [result.passed for result in results] == [False, True]
    assert "no zeros" in results[0].detail
    assert results[1].detail == "fine"


def test_quick_mode_builds_a_law(mocker, tmp_path, small_law):
    set_setting("cache", str(tmp_path / "missing.bin"))
    build = mocker.patch(
        "ResetLDP.core.acceptance.AbsAreaLaw.build", return_value=small_law
    )
    assert AcceptanceRun(AcceptanceOpts(quick=True)).law is small_law
    build.assert_called_once()


def test_full_mode_needs_the_table(tmp_path):
    set_setting("cache", str(tmp_path / "missing.bin"))
    with pytest.raises(ResetLdpOracleRequiredException):
        AcceptanceRun(AcceptanceOpts()).law
