import numpy as np
import pytest

from ladm.errors import LadmError
from ladm.io import (
    load_spectrum_spec,
    parse_config,
    read_matrix,
    spectrum_spec_from_config,
    spectrum_spec_to_config,
    write_matrix,
)


def test_matrix_round_trip_real(tmp_path, rng):
    M = rng.standard_normal((7, 4))
    path = tmp_path / "m.bin"
    write_matrix(path, M)
    raw = path.read_bytes()
    assert raw[:4] == b"LADM"
    assert int.from_bytes(raw[4:8], "little") == 7
    assert int.from_bytes(raw[8:12], "little") == 4
    assert raw[12] == 0
    np.testing.assert_array_equal(read_matrix(path), M)


def test_matrix_round_trip_complex(tmp_path, rng):
    M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    path = tmp_path / "c.bin"
    write_matrix(path, M)
    assert path.read_bytes()[12] == 1
    np.testing.assert_array_equal(read_matrix(path), M)


def test_matrix_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + bytes(16))
    with pytest.raises(LadmError):
        read_matrix(path)


def test_parse_config_comments_and_errors():
    cfg = parse_config("# header\nn = 40  # inline\n\nj=2\n")
    assert cfg == {"n": "40", "j": "2"}
    with pytest.raises(LadmError):
        parse_config("not a pair")


def test_spectrum_spec_round_trip(tmp_path):
    text = "\n".join([
        "n = 40", "j = 2", "h = 4", "k = 8",
        "decay.kind = exponential", "decay.params = 10.0,0.01",
        "delta = 1e-3", "center = ", "seed = 7",
    ])
    spec = spectrum_spec_from_config(parse_config(text))
    assert spec.n == 40 and spec.seed == 7 and spec.cluster_center is None
    path = tmp_path / "spec.cfg"
    path.write_text(spectrum_spec_to_config(spec))
    again = load_spectrum_spec(path)
    assert again == spec


def test_spectrum_spec_missing_key():
    with pytest.raises(LadmError):
        spectrum_spec_from_config({"n": "10"})
