"""Binary checkpoint container.

Layout: magic bytes ``BLWC``, little-endian u16 format version, u32
byte length of a UTF-8 JSON header, the header itself, then each tensor's
values as little-endian IEEE-754 float32, row-major, in manifest order.

The header carries the model kind, hyperparameters, the vocabulary as a
word list (reserved ids implicit), and the tensor manifest mapping each
tensor name to its (rows, cols); vectors are stored with cols = 1.
"""

from __future__ import annotations

import json
from typing import BinaryIO, Mapping

import numpy as np

MAGIC = b"BLWC"
VERSION = 1

Array = np.ndarray


class CheckpointError(ValueError):
    """Unreadable or inconsistent checkpoint file."""


def write_blwc(path: str, header: dict, tensors: Mapping[str, Array]) -> None:
    """Serialize ``tensors`` (in their mapping order) with ``header`` metadata."""
    manifest: dict[str, list[int]] = {}
    for name, t in tensors.items():
        rows, cols = (t.shape[0], 1) if t.ndim == 1 else t.shape
        manifest[name] = [int(rows), int(cols)]
    full_header = dict(header)
    full_header["manifest"] = manifest
    blob = json.dumps(full_header, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(VERSION.to_bytes(2, "little"))
        fh.write(len(blob).to_bytes(4, "little"))
        fh.write(blob)
        for t in tensors.values():
            fh.write(np.ascontiguousarray(t, dtype="<f4").tobytes())


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointError(f"truncated payload: expected {n} bytes for {what}, got {len(data)}")
    return data


def read_blwc(path: str) -> tuple[dict, dict[str, Array]]:
    """Parse a checkpoint into (header, tensors); tensors come back float64.

    Raises :class:`CheckpointError` distinguishing a bad magic/corrupt
    header from a truncated tensor payload.
    """
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CheckpointError(f"bad magic bytes {magic!r}, not a checkpoint file")
        version = int.from_bytes(_read_exact(fh, 2, "version"), "little")
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        header_len = int.from_bytes(_read_exact(fh, 4, "header length"), "little")
        try:
            header = json.loads(_read_exact(fh, header_len, "header").decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CheckpointError(f"corrupt header: {exc}") from exc
        manifest = header.get("manifest")
        if not isinstance(manifest, dict):
            raise CheckpointError("corrupt header: missing tensor manifest")
        tensors: dict[str, Array] = {}
        for name, shape in manifest.items():
            if not (isinstance(shape, list) and len(shape) == 2
                    and all(isinstance(d, int) and d >= 0 for d in shape)):
                raise CheckpointError(f"corrupt header: bad shape for tensor {name!r}")
            rows, cols = shape
            raw = _read_exact(fh, rows * cols * 4, f"tensor {name!r}")
            arr = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(rows, cols)
            tensors[name] = arr
        trailing = fh.read(1)
        if trailing:
            raise CheckpointError("trailing bytes after declared tensor payload")
    return header, tensors


def expect_shape(tensors: dict[str, Array], name: str, rows: int, cols: int) -> Array:
    """Fetch a manifest tensor, checking its declared dimensions."""
    if name not in tensors:
        raise CheckpointError(f"dimension mismatch: tensor {name!r} missing from manifest")
    t = tensors[name]
    if t.shape != (rows, cols):
        raise CheckpointError(
            f"dimension mismatch: tensor {name!r} has shape {t.shape}, expected ({rows}, {cols})")
    return t
