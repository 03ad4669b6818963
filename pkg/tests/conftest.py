import numpy as np
import pytest

from gdnn.examples import bd_not_zvp_matrix, soc_spec, zvp_not_bd_matrix
from jordan.models import ConeSpec, nonneg, psd, second_order


@pytest.fixture
def tmp_db(tmp_path, monkeypatch):
    db_path = str(tmp_path / "test_reports.db")
    monkeypatch.setattr("harness.store.DB_PATH", db_path)
    from harness.store import init_db
    init_db()
    return db_path


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


@pytest.fixture
def spec_r1_l3():
    return soc_spec(1, 3)


@pytest.fixture
def spec_r2_l3_l4():
    return ConeSpec.of(nonneg(2), second_order(3), second_order(4))


@pytest.fixture
def spec_mixed():
    return ConeSpec.of(nonneg(2), second_order(3), psd(2))


@pytest.fixture
def spec_r1_psd2():
    return ConeSpec.of(nonneg(1), psd(2))


@pytest.fixture
def zvp_member_matrix():
    """In the ZVP cone over R₊ × L³ but outside the BD cone."""
    return zvp_not_bd_matrix(1, 3)


@pytest.fixture
def bd_member_matrix():
    """In the BD cone over R₊ × L³ but outside the ZVP cone."""
    return bd_not_zvp_matrix(1, 3)


@pytest.fixture
def write_doc(tmp_path):
    import yaml

    def _write(name, data):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data))
        return str(path)

    return _write


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: solver-heavy tests (deselect with -m 'not slow')")
