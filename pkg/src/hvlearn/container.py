"""Single-file container: a JSON manifest followed by raw array payloads.

Layout:

    bytes 0..7    magic ``b"HVLEARN\\0"``
    bytes 8..11   little-endian uint32, byte length of the JSON header
    header        UTF-8 JSON (format version, user metadata, array index)
    payload       each array's raw bytes, little-endian, C order, at the
                  offsets recorded in the header

The header is plain text, so ``head -c 400 file`` shows what a file
contains; the payloads load with a seek and a single read, no parsing.
Every array carries a sha256 checksum that is verified on load.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"HVLEARN\x00"
FORMAT_VERSION = 1

__all__ = [
    "ContainerError",
    "ContainerVersionError",
    "ContainerChecksumError",
    "write_container",
    "read_container",
    "file_sha256",
]


class ContainerError(ValueError):
    """Malformed container file."""


class ContainerVersionError(ContainerError):
    """Container written by an unknown format version."""


class ContainerChecksumError(ContainerError):
    """Payload is truncated or does not match its recorded checksum."""


def _little_endian(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    if arr.dtype.byteorder == ">":
        arr = arr.astype(arr.dtype.newbyteorder("<"))
    return arr


def write_container(path: str | Path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    """Write ``arrays`` plus ``meta`` to ``path``, replacing any existing file."""
    index = []
    payloads = []
    offset = 0
    for name, arr in arrays.items():
        arr = _little_endian(arr)
        raw = arr.tobytes()
        index.append(
            {
                "name": name,
                "dtype": arr.dtype.str,
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": len(raw),
                "sha256": hashlib.sha256(raw).hexdigest(),
            }
        )
        payloads.append(raw)
        offset += len(raw)
    header = json.dumps(
        {"format_version": FORMAT_VERSION, "meta": meta, "arrays": index},
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for raw in payloads:
            fh.write(raw)


def read_container(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a container file back into ``(meta, arrays)``.

    Raises ``ContainerError`` on a bad magic, ``ContainerVersionError``
    on an unknown format version (before any payload is read), and
    ``ContainerChecksumError`` on truncation or checksum mismatch.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise ContainerError(f"{path}: not a container file (bad magic)")
    if len(blob) < len(MAGIC) + 4:
        raise ContainerError(f"{path}: truncated header length field")
    (header_len,) = struct.unpack_from("<I", blob, len(MAGIC))
    header_end = len(MAGIC) + 4 + header_len
    if len(blob) < header_end:
        raise ContainerError(f"{path}: truncated header")
    try:
        header = json.loads(blob[len(MAGIC) + 4 : header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"{path}: unreadable header: {exc}") from exc
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise ContainerVersionError(f"{path}: unknown format version {version!r}")
    arrays: dict[str, np.ndarray] = {}
    for entry in header["arrays"]:
        start = header_end + entry["offset"]
        stop = start + entry["nbytes"]
        raw = blob[start:stop]
        if len(raw) != entry["nbytes"]:
            raise ContainerChecksumError(
                f"{path}: array {entry['name']!r} is truncated "
                f"({len(raw)} of {entry['nbytes']} bytes present)"
            )
        if hashlib.sha256(raw).hexdigest() != entry["sha256"]:
            raise ContainerChecksumError(f"{path}: array {entry['name']!r} failed its checksum")
        arr = np.frombuffer(raw, dtype=np.dtype(entry["dtype"])).reshape(entry["shape"])
        arrays[entry["name"]] = arr.copy()  # frombuffer views are read-only
    return header["meta"], arrays


def file_sha256(path: str | Path) -> str:
    """Checksum of a whole file, used as a provenance fingerprint."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
