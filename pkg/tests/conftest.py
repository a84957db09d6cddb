import numpy as np
import pytest

from cvqkd.ldpc import PROFILES, build_code

# calibrated detector of the reference link
ETA = 0.552
V_EL = 0.015


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_code():
    """Regular (3,6) code short enough for exhaustive checks."""
    return build_code(PROFILES["regular-3-6"], 512, seed=1)


@pytest.fixture(scope="session")
def session_catalog(tmp_path_factory):
    """Catalog holding one 1024-bit rate-1/2 code, generated on first load."""
    root = tmp_path_factory.mktemp("codes")
    path = root / "catalog.txt"
    path.write_text(
        "# code_id  path  rate  snr_threshold  profile  block_len  seed\n"
        "t050 t050.alist 0.50 1.8 regular-3-6 1024 1\n",
        encoding="utf-8",
    )
    return path


HAMMING_ALIST = """7 3
3 4
1 1 2 1 2 2 3
4 4 4
1 0 0
2 0 0
1 2 0
3 0 0
1 3 0
2 3 0
1 2 3
1 3 5 7
2 3 6 7
4 5 6 7
"""


@pytest.fixture
def hamming_alist():
    return HAMMING_ALIST


@pytest.fixture
def device():
    """(eta, v_el) of the calibrated detector."""
    return ETA, V_EL
