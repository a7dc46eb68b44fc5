import numpy as np
import pytest

from tba.cache import (
    CacheEntry,
    cache_path,
    decode,
    encode,
    map_content_hash,
    read_entry,
    write_entry,
)
from tba.errors import ParseError


def sample_entry(n=6, m=5, seed=0) -> CacheEntry:
    rng = np.random.default_rng(seed)
    return CacheEntry(
        map_hash=map_content_hash(b"some map bytes"),
        m=m,
        coords=rng.normal(size=(n, m)),
        stress=0.0123,
        distances=np.abs(rng.normal(size=(n, n))),
    )


class TestRoundtrip:
    def test_encode_decode(self):
        entry = sample_entry()
        back = decode(encode(entry))
        assert back.map_hash == entry.map_hash
        assert back.m == entry.m
        assert back.stress == entry.stress
        assert np.array_equal(back.coords, entry.coords)
        assert np.array_equal(back.distances, entry.distances)

    def test_byte_determinism(self):
        assert encode(sample_entry()) == encode(sample_entry())

    def test_file_roundtrip(self, tmp_path):
        entry = sample_entry()
        path = cache_path(tmp_path, entry.map_hash, entry.m)
        write_entry(path, entry)
        back = read_entry(path)
        assert np.array_equal(back.coords, entry.coords)

    def test_write_is_atomic(self, tmp_path):
        entry = sample_entry()
        path = cache_path(tmp_path, entry.map_hash, entry.m)
        write_entry(path, entry)
        write_entry(path, entry)
        leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
        assert leftovers == []


class TestValidation:
    def test_bad_magic(self):
        blob = b"NOPE" + encode(sample_entry())[4:]
        with pytest.raises(ParseError, match="magic"):
            decode(blob)

    def test_truncated(self):
        with pytest.raises(ParseError):
            decode(encode(sample_entry())[:40])

    def test_wrong_length(self):
        with pytest.raises(ParseError, match="bytes"):
            decode(encode(sample_entry()) + b"\x00")

    def test_key_includes_dimension(self):
        h = map_content_hash(b"x")
        assert cache_path("/c", h, 5) != cache_path("/c", h, 10)
        assert cache_path("/c", h, 5) != cache_path("/c", map_content_hash(b"y"), 5)
