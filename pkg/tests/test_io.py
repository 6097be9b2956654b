"""Tests for the binary CSI container and the CSV export."""

import struct

import numpy as np
import pytest

from csiratio.exceptions import FormatError, InvalidConfigError
from csiratio.io import (decode_tensor, encode_tensor, read_csv, read_tensor, sidecar_path, write_csv,
                         write_tensor)
from csiratio.signal_model import SystemConfig, synthesize_csi

SMALL = SystemConfig(antenna_count=3, subcarrier_count=4, packet_count=40, taylor_window=5)


@pytest.fixture
def tensor(single_path):
    return synthesize_csi(SMALL, single_path)


class TestContainer:
    def test_round_trip_bit_exact(self, tensor, tmp_path):
        path = write_tensor(tensor, tmp_path / "y.csit")
        back = read_tensor(path)
        np.testing.assert_array_equal(back.samples, tensor.samples)
        assert back.config == tensor.config

    def test_header_layout(self, tensor):
        data = encode_tensor(tensor)
        magic, version, M, G, N = struct.unpack_from("<4sBQQQ", data)
        assert (magic, version, M, G, N) == (b"CSIT", 1, 40, 4, 3)
        assert len(data) == 29 + 16 * 40 * 4 * 3
        # m-major, then g, then n; each sample as (re, im)
        re, im = struct.unpack_from("<dd", data, 29 + 16 * (1 * 12 + 2 * 3 + 1))
        assert complex(re, im) == tensor.samples[1, 2, 1]

    def test_without_sidecar(self, tensor, tmp_path):
        path = write_tensor(tensor, tmp_path / "y.csit", sidecar=False)
        assert not sidecar_path(path).exists()
        back = read_tensor(path)
        assert back.shape == (40, 4, 3)

    def test_bad_magic(self, tensor):
        data = bytearray(encode_tensor(tensor))
        data[:4] = b"XXXX"
        with pytest.raises(FormatError, match="magic"):
            decode_tensor(bytes(data))

    def test_bad_version(self, tensor):
        data = bytearray(encode_tensor(tensor))
        data[4] = 9
        with pytest.raises(FormatError, match="version"):
            decode_tensor(bytes(data))

    @pytest.mark.parametrize("cut", [-16, -1, 100])
    def test_size_mismatch(self, tensor, cut):
        data = encode_tensor(tensor)
        data = data[:cut] if cut < 0 else data + b"\0" * cut
        with pytest.raises(FormatError, match="size"):
            decode_tensor(data)

    def test_truncated_header(self):
        with pytest.raises(FormatError):
            decode_tensor(b"CSIT\x01")

    def test_config_mismatch(self, tensor):
        with pytest.raises(InvalidConfigError):
            decode_tensor(encode_tensor(tensor), SystemConfig())

    def test_non_finite_payload(self, tensor):
        data = bytearray(encode_tensor(tensor))
        data[29:37] = struct.pack("<d", float("nan"))
        with pytest.raises(FormatError):
            decode_tensor(bytes(data))

    def test_bad_sidecar(self, tensor, tmp_path):
        path = write_tensor(tensor, tmp_path / "y.csit")
        sidecar_path(path).write_text("{not json")
        with pytest.raises(FormatError):
            read_tensor(path)


class TestCsv:
    def test_round_trip(self, tensor, tmp_path):
        path = write_csv(tensor, tmp_path / "y.csv")
        back = read_csv(path, tensor.config)
        np.testing.assert_array_equal(back.samples, tensor.samples)

    def test_header_and_rows(self, tensor, tmp_path):
        lines = write_csv(tensor, tmp_path / "y.csv").read_text().splitlines()
        assert lines[0] == "m,g,n,re,im"
        assert len(lines) == 1 + 40 * 4 * 3

    def test_missing_rows(self, tensor, tmp_path):
        path = write_csv(tensor, tmp_path / "y.csv")
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-5]) + "\n")
        with pytest.raises(FormatError):
            read_csv(path)
