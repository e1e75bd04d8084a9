"""Binary cache file for a GroupIndex.

Layout (little-endian)::

    magic     8 bytes   b"SZIDX\\x00\\x01\\x00"
    m         uint32    extension degree
    modulus   uint64    field modulus as a bit vector
    count     uint64    number of records (= |Sz(q)|)
    records   count x uint16/32/64, sorted packed Bruhat parameters

A record packs (tag, alpha, beta, gamma, alpha2, beta2) with tag 0 for the
Borel coset and 1 for the big cell, most significant first, so sorted record
order is the GroupIndex rank order.
"""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np

from suzuki_lab.errors import CacheError
from suzuki_lab.field import field_new
from suzuki_lab.suzuki import GroupIndex, enumerate_group, group_order, record_dtype

logger = logging.getLogger(__name__)

MAGIC = b"SZIDX\x00\x01\x00"
_HEADER = struct.Struct("<8sIQQ")


def save_index(index: GroupIndex, path: Path) -> Path:
    """Write ``index`` as a binary cache; returns the path written."""
    fld = index.field
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, fld.m, fld.modulus, index.size))
        for chunk in index.records():
            fh.write(chunk.astype(chunk.dtype.newbyteorder("<"), copy=False).tobytes())
    logger.info("wrote GroupIndex cache for Sz(%d) to %s", fld.q, path)
    return path


def read_header(path: Path) -> tuple[int, int, int]:
    """(m, modulus, count) from a cache file header."""
    with path.open("rb") as fh:
        raw = fh.read(_HEADER.size)
    if len(raw) != _HEADER.size:
        msg = f"{path}: truncated header"
        raise CacheError(msg)
    magic, m, modulus, count = _HEADER.unpack(raw)
    if magic != MAGIC:
        msg = f"{path}: not a GroupIndex cache (bad magic {magic!r})"
        raise CacheError(msg)
    return m, modulus, count


def load_index(path: Path, *, with_matrices: bool | None = None) -> GroupIndex:
    """Read and validate a cache file, returning the matching GroupIndex.

    The record count must equal |Sz(q)| and every record must match the
    canonical parametrisation at its rank.
    """
    m, modulus, count = read_header(path)
    if m % 2 == 0:
        msg = f"{path}: cache declares even extension degree m={m}"
        raise CacheError(msg)
    fld = field_new(m)
    if fld.modulus != modulus:
        msg = f"{path}: modulus {modulus:#x} differs from the canonical {fld.modulus:#x}"
        raise CacheError(msg)
    expected = group_order(fld.q)
    if count != expected:
        msg = f"{path}: {count} records, but |Sz({fld.q})| = {expected}"
        raise CacheError(msg)

    dtype = record_dtype(fld).newbyteorder("<")
    records = np.fromfile(path, dtype=dtype, offset=_HEADER.size)
    if len(records) != count:
        msg = f"{path}: expected {count} records, found {len(records)}"
        raise CacheError(msg)

    index = enumerate_group(fld, with_matrices=with_matrices)
    pos = 0
    for chunk in index.records():
        if not np.array_equal(records[pos : pos + len(chunk)], chunk):
            msg = f"{path}: records near rank {pos} do not match the canonical parametrisation"
            raise CacheError(msg)
        pos += len(chunk)
    logger.info("loaded GroupIndex cache for Sz(%d) from %s", fld.q, path)
    return index
