import pytest
import json
import sys
import os

# Add project root to sys.path so we can import from main.py and src
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.cli import run
from src.characters.service import character_by_label
from src.coeffs.service import delta_coefficients, divisor_analog
from src.weights.service import make_interval_bump

# Long enough for the Re s = 2 series check, whose tail past 2·10⁴ is below 1e−6
DELTA_M_MAX = 20000
DIVISOR_M_MAX = 20000
LONG_DELTA_M_MAX = 100000


@pytest.fixture(scope="session")
def delta_source():
    """
    Normalized coefficients of Ramanujan's Δ, shared by every test.
    """
    return delta_coefficients(DELTA_M_MAX)


@pytest.fixture(scope="session")
def long_delta_source():
    """Δ up to 10⁵, for the slow Rankin-Selberg checks."""
    return delta_coefficients(LONG_DELTA_M_MAX)


@pytest.fixture(scope="session")
def divisor_source():
    return divisor_analog(DIVISOR_M_MAX)


@pytest.fixture(scope="session")
def quadratic_mod_5():
    """The Legendre symbol mod 5: the character of order 2."""
    return character_by_label("5:2")


@pytest.fixture(scope="session")
def small_bump():
    return make_interval_bump(10.0, 60.0)


@pytest.fixture
def config_file(tmp_path):
    """
    Writes a JSON config to a temporary file and returns its path.
    Usage:
        path = config_file({"lvalue": {"s_re": 2.0}})
    """
    def _write(document: dict) -> str:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture
def invoke(capsys):
    """
    Runs the CLI in-process and returns (exit code, parsed JSON on stdout).
    Usage:
        code, report = invoke(["characters", "--q", "5"])
    """
    def _invoke(argv: list[str]):
        code = run(argv)
        out = capsys.readouterr().out
        return code, json.loads(out) if out.strip().startswith("{") else out

    return _invoke
