from fractions import Fraction as Q
from pathlib import Path

import pytest

from mvtangent.services import schemas
from mvtangent.services.geometry import Simplex
from mvtangent.services.mcnaughton import mcnaughton
from mvtangent.services.triangulation import validate_complex

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def cusp():
    """{(0,0)} ∪ {(1/i, 1/i²) : 2 ≤ i ≤ 10⁴}."""
    return schemas.closed_set_from(schemas.load(schemas.ClosedSetModel, FIXTURES / "cusp.json"))


@pytest.fixture(scope="session")
def cusp_cert():
    return schemas.certificate_from(schemas.load(schemas.CertificateModel, FIXTURES / "cusp_cert.json"))


@pytest.fixture(scope="session")
def unit_interval():
    """[0,1] split at 1/2."""
    return validate_complex([Simplex.of([(0,), (Q(1, 2),)]), Simplex.of([(Q(1, 2),), (1,)])])


@pytest.fixture(scope="session")
def tall_hat(unit_interval):
    """0 ↦ 0, 1/2 ↦ 1, 1 ↦ 0; pieces 2x and 2 − 2x."""
    return mcnaughton(unit_interval, {(Q(0),): 0, (Q(1, 2),): 1, (Q(1),): 0})


@pytest.fixture(scope="session")
def half_hat(unit_interval):
    """0 ↦ 0, 1/2 ↦ 1/2, 1 ↦ 0."""
    return mcnaughton(unit_interval, {(Q(0),): 0, (Q(1, 2),): Q(1, 2), (Q(1),): 0})
