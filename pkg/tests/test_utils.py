import pytest

from qtomo_cli.errors import ConfigError, QtomoError, ValidationError
from qtomo_cli.utils import fmt_float, parse_float_list, parse_range, run_key, safe_slug, sha256_file, write_text


def test_safe_slug():
    assert safe_slug("  Kerr Cubic / T_rev ") == "kerr_cubic_t_rev"
    assert safe_slug("***") == "run"


def test_run_key_is_stable_and_short():
    a = run_key("BEC sweep", '{"a":1}')
    b = run_key("BEC sweep", '{"a":1}')
    c = run_key("BEC sweep", '{"a":2}')
    assert a == b
    assert a != c
    slug, digest = a.rsplit("_", 1)
    assert slug == "bec_sweep"
    assert len(digest) == 8


def test_fmt_float_nine_digits():
    assert fmt_float(1.0 / 3.0) == "0.333333333"
    assert fmt_float(-0.0) == "0"
    assert fmt_float(float("nan")) == "nan"
    assert fmt_float(float("-inf")) == "-inf"
    assert fmt_float(2.0) == "2"


def test_parse_float_list_accepts_fractions():
    assert parse_float_list("0, 1/2; 1/4 3") == pytest.approx([0.0, 0.5, 0.25, 3.0])
    assert parse_float_list("") == []


def test_parse_float_list_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_float_list("1, two")
    with pytest.raises(ConfigError):
        parse_float_list("1/0")


def test_parse_range():
    assert parse_range("-1:1") == (-1.0, 1.0)
    assert parse_range("-6,6") == (-6.0, 6.0)
    with pytest.raises(ConfigError):
        parse_range("1:-1")
    with pytest.raises(ConfigError):
        parse_range("1")


def test_sha256_file(tmp_path):
    p = tmp_path / "a" / "b.txt"
    write_text(p, "abc")
    assert sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_errors_share_a_base():
    assert issubclass(ConfigError, QtomoError)
    assert issubclass(ValidationError, ValueError)
