"""Tests for the binary GroupIndex cache."""

from __future__ import annotations

from pathlib import Path

import pytest

from suzuki_lab.errors import CacheError
from suzuki_lab.group_cache import _HEADER, MAGIC, load_index, read_header, save_index
from suzuki_lab.suzuki import record_dtype


@pytest.fixture
def cache_file(tmp_path: Path, sz8_index) -> Path:
    return save_index(sz8_index, tmp_path / "cache" / "sz8.idx")


def _rewrite_header(path: Path, *, m: int, modulus: int, count: int) -> None:
    data = path.read_bytes()
    path.write_bytes(_HEADER.pack(MAGIC, m, modulus, count) + data[_HEADER.size :])


class TestRoundTrip:
    """save_index then load_index gives the same index."""

    def test_header(self, cache_file: Path, gf8):
        assert read_header(cache_file) == (3, gf8.modulus, 29120)

    def test_file_size(self, cache_file: Path, gf8):
        assert cache_file.stat().st_size == _HEADER.size + 29120 * record_dtype(gf8).itemsize

    def test_load(self, cache_file: Path, sz8_index):
        loaded = load_index(cache_file)
        assert loaded.size == sz8_index.size
        assert loaded.has_matrices
        assert loaded.identity_index == sz8_index.identity_index

    def test_load_index_only(self, cache_file: Path):
        assert not load_index(cache_file, with_matrices=False).has_matrices


class TestCorruption:
    """Damaged or foreign files raise CacheError."""

    def test_bad_magic(self, tmp_path: Path):
        path = tmp_path / "x.idx"
        path.write_bytes(b"NOTANIDX" + bytes(_HEADER.size - 8))
        with pytest.raises(CacheError, match="bad magic"):
            read_header(path)

    def test_truncated_header(self, tmp_path: Path):
        path = tmp_path / "x.idx"
        path.write_bytes(MAGIC)
        with pytest.raises(CacheError, match="truncated header"):
            load_index(path)

    def test_even_degree(self, cache_file: Path, gf8):
        _rewrite_header(cache_file, m=4, modulus=gf8.modulus, count=29120)
        with pytest.raises(CacheError, match="even extension degree"):
            load_index(cache_file)

    def test_wrong_modulus(self, cache_file: Path, gf8):
        _rewrite_header(cache_file, m=3, modulus=gf8.modulus ^ 0b10, count=29120)
        with pytest.raises(CacheError, match="differs from the canonical"):
            load_index(cache_file)

    def test_wrong_count(self, cache_file: Path, gf8):
        _rewrite_header(cache_file, m=3, modulus=gf8.modulus, count=5)
        with pytest.raises(CacheError, match="but \\|Sz\\(8\\)\\| = 29120"):
            load_index(cache_file)

    def test_missing_records(self, cache_file: Path, gf8):
        data = cache_file.read_bytes()
        cache_file.write_bytes(data[: -record_dtype(gf8).itemsize])
        with pytest.raises(CacheError, match="found 29119"):
            load_index(cache_file)

    def test_scrambled_records(self, cache_file: Path, gf8):
        data = bytearray(cache_file.read_bytes())
        size = record_dtype(gf8).itemsize
        first = _HEADER.size
        data[first : first + size], data[first + size : first + 2 * size] = (
            data[first + size : first + 2 * size],
            data[first : first + size],
        )
        cache_file.write_bytes(bytes(data))
        with pytest.raises(CacheError, match="do not match"):
            load_index(cache_file)
