import pytest

from ..core.abs_area_law import AbsAreaLaw, AbsAreaLawOpts
from ..core.dist import CubicSuperExp, Exponential
from ..tools.settings import _SETTINGS

SMALL_LAW = AbsAreaLawOpts(
    paths=20_000, count=1024, step_exponent=6, seed=7, chunk_size=5_000
)


@pytest.fixture(scope="session")
def small_law() -> AbsAreaLaw:
    return AbsAreaLaw.build(SMALL_LAW)


@pytest.fixture
def poisson() -> Exponential:
    return Exponential(1.0)


@pytest.fixture
def cubic() -> CubicSuperExp:
    return CubicSuperExp(1.0)


@pytest.fixture(autouse=True)
def clean_settings():
    yield
    _SETTINGS.clear()
