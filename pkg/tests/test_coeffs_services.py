import pytest
import io

import numpy as np

from src.coeffs import service
from src.coeffs.model import CoefficientSource, SourceKind
from src.coeffs.parsers import get_parser
from src.exceptions.coeffs import CoefficientArgumentError, CoefficientFileError, CoefficientRangeError

TAU_HEAD = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]

HEADER = "#coef v1 kind=holomorphic N=1 k=12 mu=- neb=trivial sign=- root=-\n"

# --- Tests for ramanujan_tau ---


def test_ramanujan_tau_first_values():
    tau = service.ramanujan_tau(10)
    assert tau[0] == 0
    assert list(tau[1:]) == TAU_HEAD


def test_ramanujan_tau_matches_squaring_oracle():
    assert list(service.ramanujan_tau(300)) == list(service.tau_by_squaring(300))


def test_ramanujan_tau_known_large_value():
    # τ(1000) = τ(8)τ(125)
    assert service.ramanujan_tau(1000)[1000] == -30328412970240000


def test_ramanujan_tau_rejects_empty_range():
    with pytest.raises(CoefficientArgumentError):
        service.ramanujan_tau(0)


def test_hecke_relations():
    tau = service.ramanujan_tau(2000)
    checked = 0
    for p in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43]:
        j = 1
        while p ** (j + 1) <= 2000:
            assert service.hecke_defect(tau, p, j) == 0
            checked += 1
            j += 1
    assert checked >= 20


def test_tau_is_multiplicative():
    tau = service.ramanujan_tau(1000)
    for m, n in [(2, 3), (4, 25), (7, 11), (8, 125)]:
        assert tau[m * n] == tau[m] * tau[n]


# --- Tests for built-in sources ---


def test_delta_coefficients_normalization(delta_source):
    assert delta_source.coeffs[1] == 1.0
    assert delta_source.coeffs[2] == pytest.approx(-24 * 2**-5.5)
    assert delta_source.weight == 12
    assert delta_source.kind == SourceKind.holomorphic


def test_deligne_bound(delta_source):
    report = service.deligne_check(delta_source)
    assert report.max_ratio <= 1.0 + 1e-12
    assert report.m_max == delta_source.m_max


def test_rankin_selberg_ratio_is_stable(delta_source):
    first = service.rankin_selberg_ratio(delta_source, 5000)
    second = service.rankin_selberg_ratio(delta_source, 20000)
    assert first == pytest.approx(second, rel=0.1)


@pytest.mark.slow
def test_rankin_selberg_ratio_stays_in_a_band(long_delta_source):
    ratios = [service.rankin_selberg_ratio(long_delta_source, x) for x in np.geomspace(1e3, 1e5, 9)]
    assert max(ratios) <= 2 * min(ratios)


def test_rankin_selberg_needs_coefficients(delta_source):
    with pytest.raises(CoefficientRangeError):
        service.rankin_selberg_ratio(delta_source, 10**6)


def test_divisor_analog():
    source = service.divisor_analog(12)
    assert list(source.coeffs[1:]) == [1, 2, 2, 3, 2, 4, 2, 4, 3, 4, 2, 6]
    assert source.kind == SourceKind.divisor
    assert source.reflection_sign == 1


def test_values_with_reflection_sign():
    coeffs = np.array([0.0, 1.0, 0.5, -0.25])
    source = CoefficientSource(kind=SourceKind.maass, mu=2.0, sign=-1, coeffs=coeffs)
    assert list(source.values([1, -2, 3])) == [1.0, -0.5, -0.25]
    with pytest.raises(CoefficientArgumentError):
        source.values([0])
    with pytest.raises(CoefficientRangeError):
        source.values([4])


def test_contragredient_conjugates():
    coeffs = np.array([0, 1, 1j, 2 - 1j])
    source = CoefficientSource(kind=SourceKind.holomorphic, weight=2, coeffs=coeffs, root=1j, name="f")
    dual = service.contragredient(source)
    assert np.array_equal(dual.coeffs, np.conj(coeffs))
    assert dual.root == -1j
    assert dual.name == "f~"


def test_nebentypus_defaults_to_principal(delta_source):
    chi = service.nebentypus_character(delta_source)
    assert chi.is_principal
    assert chi.modulus == 1


def test_resolve_source_needs_exactly_one(tmp_path):
    with pytest.raises(CoefficientArgumentError):
        service.resolve_source(None, None, 10)
    with pytest.raises(CoefficientArgumentError):
        service.resolve_source("delta", tmp_path / "f.coef", 10)
    assert service.resolve_source("divisor", None, 30).m_max == 30


# --- Tests for coefficient files ---


def test_export_and_load(tmp_path):
    source = service.delta_coefficients(50)
    path = tmp_path / "delta.coef"
    service.export_coefficients(source, path)

    text = path.read_text(encoding="utf-8")
    assert text.startswith("#coef v1 kind=holomorphic N=1 k=12")
    assert len(text.splitlines()) == 51

    loaded = service.load_coefficients(path)
    assert loaded.name == "delta"
    assert loaded.weight == 12
    assert np.array_equal(loaded.coeffs, source.coeffs)


def test_export_divisor_header():
    text = service.export_to_text(service.divisor_analog(5))
    assert text.splitlines()[0] == "#coef v1 kind=divisor N=1 k=- mu=0 neb=trivial sign=- root=-"
    assert text.splitlines()[3] == "3 2 0"


def test_load_from_stream():
    source = service.load_coefficients(io.StringIO(HEADER + "1 1 0\n2 0.5 0\n"))
    assert source.name == "stream"
    assert source.m_max == 2


@pytest.mark.parametrize(
    "body, line, fragment",
    [
        ("1 1 0\n3 0.5 0\n", 3, "gap at m=2"),
        ("1 1 0\n1 0.5 0\n", 3, "duplicate"),
        ("1 1 0\n\n2 0.5 0\n", 3, "blank line"),
        ("1 1 0\n2 0.5\n", 3, "expected"),
        ("1 1 0\n2 half 0\n", 3, "unreadable"),
        ("1 0.9 0\n", 2, "λ(1) must equal 1"),
        ("", 2, "no coefficient rows"),
    ],
)
def test_parser_rejects_malformed_rows(body, line, fragment):
    with pytest.raises(CoefficientFileError) as exc:
        service.load_coefficients(io.StringIO(HEADER + body))
    assert exc.value.line == line
    assert fragment in exc.value.detail


@pytest.mark.parametrize(
    "header, fragment",
    [
        ("#coef v1 kind=holomorphic N=1 k=12 mu=- neb=trivial sign=-\n", "missing header keys: root"),
        ("#coef v1 kind=eisenstein N=1 k=12 mu=- neb=trivial sign=- root=-\n", "unknown kind"),
        ("#coef v1 kind=holomorphic N=1 k=- mu=- neb=trivial sign=- root=-\n", "need k"),
        ("#coef v1 kind=maass N=1 k=- mu=3.2 neb=trivial sign=0 root=-\n", "sign=+ or sign=-"),
        ("#coef v1 kind=holomorphic N=one k=12 mu=- neb=trivial sign=- root=-\n", "malformed"),
    ],
)
def test_parser_rejects_malformed_headers(header, fragment):
    with pytest.raises(CoefficientFileError) as exc:
        service.load_coefficients(io.StringIO(header + "1 1 0\n"))
    assert exc.value.line == 1
    assert fragment in exc.value.detail


def test_maass_sign_in_header():
    text = "#coef v1 kind=maass N=1 k=- mu=4.5 neb=trivial sign=+ root=-\n1 1 0\n2 -0.3 0\n"
    source = service.load_coefficients(io.StringIO(text))
    assert source.kind == SourceKind.maass
    assert source.sign == 1
    assert source.mu == pytest.approx(4.5)


def test_unknown_format_version():
    with pytest.raises(CoefficientFileError):
        get_parser("v2")
    with pytest.raises(CoefficientFileError):
        service.load_coefficients(io.StringIO("#coef v2 kind=divisor\n1 1 0\n"))


def test_missing_file(tmp_path):
    with pytest.raises(CoefficientFileError):
        service.load_coefficients(tmp_path / "absent.coef")
