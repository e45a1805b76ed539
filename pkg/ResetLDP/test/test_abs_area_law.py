import math

import numpy as np
import pytest

from ..core.abs_area_law import (
    AbsAreaLaw,
    AbsAreaLawOpts,
    default_cache_path,
    load_default_law,
)
from ..definitions.constants import MEAN_ABS_AREA, SECOND_MOMENT_ABS_AREA
from ..tools.exceptions import (
    ResetLdpNumericException,
    ResetLdpOracleRequiredException,
    ResetLdpUsageException,
)
from ..tools.settings import set_setting


def test_moments(small_law):
    assert small_law.count == 1024
    assert small_law.mean == pytest.approx(MEAN_ABS_AREA, abs=0.01)
    assert small_law.second_moment == pytest.approx(SECOND_MOMENT_ABS_AREA, abs=0.02)
    assert small_law.mc_stderr > 0


def test_laplace_and_log_mgf(small_law):
    assert small_law.laplace(0.0) == pytest.approx(1.0)
    assert small_law.log_ratio(0.0) == pytest.approx(0.0, abs=1e-12)
    thetas = np.linspace(0.0, 3.0 * small_law.reliable_tilt, 13)
    log_mgf = np.asarray(small_law.log_mgf(thetas))
    lower = thetas**2 / 6.0
    assert np.all(log_mgf >= lower - 1e-12)
    assert np.all(log_mgf <= lower + math.log(small_law.sandwich_constant) + 1e-9)


def test_ratio_held_beyond_reliable_tilt(small_law):
    tilt = small_law.reliable_tilt
    assert small_law.log_ratio(2.0 * tilt) == pytest.approx(small_law.log_ratio(tilt))
    assert small_law.dlog_ratio(2.0 * tilt) == 0.0


def test_save_and_load(small_law, tmp_path):
    path = str(tmp_path / "law.bin")
    small_law.save(path)
    loaded = AbsAreaLaw.load(path)
    assert np.array_equal(loaded.quantiles, small_law.quantiles)
    assert loaded.step_exponent == small_law.step_exponent


def test_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "law.bin"
    path.write_bytes(b"NOPE" + bytes(64))
    with pytest.raises(ResetLdpOracleRequiredException):
        AbsAreaLaw.load(str(path))


def test_missing_default_table(tmp_path):
    missing = str(tmp_path / "missing.bin")
    set_setting("cache", missing)
    assert default_cache_path() == missing
    with pytest.raises(ResetLdpOracleRequiredException):
        load_default_law()


def test_default_table_from_cache(small_law, tmp_path):
    path = str(tmp_path / "cached.bin")
    small_law.save(path)
    assert load_default_law(path).count == small_law.count


def test_invalid_quantiles():
    with pytest.raises(ResetLdpNumericException):
        AbsAreaLaw(np.array([1.0]), 6)
    with pytest.raises(ResetLdpNumericException):
        AbsAreaLaw(np.array([-1.0, 1.0]), 6)


def test_invalid_build_options():
    assert not AbsAreaLawOpts(paths=10, count=100).check_if_opts_set()
    with pytest.raises(ResetLdpUsageException):
        AbsAreaLaw.build(AbsAreaLawOpts(paths=100, count=10, step_exponent=0))
