"""Packed file formats for bit streams and output-symbol streams.

Bits: an 8-byte little-endian count header (number of bits), then the bits
packed LSB-first within each byte.  Symbols: the same count header, then one
little-endian uint16 per symbol.
"""

from __future__ import annotations

import struct

import numpy as np

_HEADER = struct.Struct("<Q")


def pack_bits(bits: np.ndarray) -> bytes:
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    if bits.size and bits.max() > 1:
        raise ValueError("bit stream may only contain 0 and 1")
    return _HEADER.pack(bits.size) + np.packbits(bits, bitorder="little").tobytes()


def unpack_bits(blob: bytes) -> np.ndarray:
    if len(blob) < _HEADER.size:
        raise ValueError("truncated bit stream: missing length header")
    (count,) = _HEADER.unpack_from(blob)
    body = np.frombuffer(blob, dtype=np.uint8, offset=_HEADER.size)
    if body.size * 8 < count or body.size != (count + 7) // 8:
        raise ValueError(f"bit stream length mismatch: header says {count} bits, "
                         f"payload holds {body.size} bytes")
    return np.unpackbits(body, bitorder="little")[:count]


def pack_symbols(symbols: np.ndarray) -> bytes:
    symbols = np.asarray(symbols).reshape(-1)
    if symbols.size and (symbols.min() < 0 or symbols.max() > 0xFFFF):
        raise ValueError("symbols must fit in uint16")
    return _HEADER.pack(symbols.size) + symbols.astype("<u2").tobytes()


def unpack_symbols(blob: bytes) -> np.ndarray:
    if len(blob) < _HEADER.size:
        raise ValueError("truncated symbol stream: missing length header")
    (count,) = _HEADER.unpack_from(blob)
    body = np.frombuffer(blob, dtype="<u2", offset=_HEADER.size)
    if body.size != count:
        raise ValueError(f"symbol stream length mismatch: header says {count}, "
                         f"payload holds {body.size}")
    return body.astype(np.int64)
