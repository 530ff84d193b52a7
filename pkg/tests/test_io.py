import struct

import numpy as np
import pytest

from hallmhd import io
from hallmhd.spectral_basis import GridField, TorusDomain


def test_snapshot_header_layout(tmp_path):
    d = TorusDomain(2.5, 4)
    p = tmp_path / "s.bin"
    io.write_snapshot(p, GridField(d, np.arange(64, dtype=float).reshape(4, 4, 4)), t=0.75)
    raw = p.read_bytes()
    assert len(raw) == 32 + 64 * 8
    magic, ver, M, rank, L, t = struct.unpack("<4sIIIdd", raw[:32])
    assert (magic, ver, M, rank, L, t) == (b"HMHD", 1, 4, 1, 2.5, 0.75)
    assert np.array_equal(np.frombuffer(raw[32:], "<f8"), np.arange(64.0))


def test_vector_snapshot_is_component_last_on_disk(tmp_path, rng):
    d = TorusDomain(1.0, 4)
    v = rng.standard_normal((3, 4, 4, 4))
    p = tmp_path / "v.bin"
    io.write_snapshot(p, GridField(d, v))
    body = np.frombuffer(p.read_bytes()[32:], "<f8").reshape(4, 4, 4, 3)
    assert np.array_equal(body[1, 2, 3], v[:, 1, 2, 3])
    a, dd, t = io.read_snapshot(p, d)
    assert np.array_equal(a, v) and dd == d and t == 0.0


def test_snapshot_errors(tmp_path):
    d = TorusDomain(1.0, 4)
    p = tmp_path / "s.bin"
    io.write_snapshot(p, GridField(d, np.ones((4, 4, 4))))
    with pytest.raises(ValueError, match="does not match"):
        io.read_snapshot(p, TorusDomain(1.0, 8))
    raw = p.read_bytes()
    (tmp_path / "bad.bin").write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError, match="magic"):
        io.read_snapshot(tmp_path / "bad.bin")
    (tmp_path / "short.bin").write_bytes(raw[:-8])
    with pytest.raises(ValueError, match="expected"):
        io.read_snapshot(tmp_path / "short.bin")


def test_csv_roundtrip_is_exact(tmp_path):
    rows = [(0.1, 1 / 3, 2.0, 0.0, 1e-300, -7.25)]
    io.write_csv(tmp_path / "l.csv", io.LEDGER_COLUMNS, rows)
    cols, back = io.read_csv(tmp_path / "l.csv")
    assert tuple(cols) == io.LEDGER_COLUMNS and back == [list(rows[0])]


def test_json_handles_numpy(tmp_path):
    io.write_json(tmp_path / "m.json", {"a": np.float64(1.5), "b": np.arange(3), "c": np.bool_(True),
                                        "d": float("nan")})
    text = (tmp_path / "m.json").read_text()
    assert '"a": 1.5' in text and '"nan"' in text


def test_output_root_env(monkeypatch, tmp_path):
    monkeypatch.setenv(io.OUTPUT_ROOT_ENV, str(tmp_path))
    assert io.output_root() == tmp_path
    monkeypatch.delenv(io.OUTPUT_ROOT_ENV)
    assert io.output_root().name == "hmhd_runs"


def test_version_string():
    v = io.version_string()
    assert v.startswith("0.1.0")
