"""Small helpers for the delimited-text artifacts: CSV files with
'# key=value' metadata lines, and run-length-encoded bit strings.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import FormatError

FRONT_FORMAT = "evoprune-front-v1"
MASKS_FORMAT = "evoprune-masks-v1"


def write_records(
    path: str | Path, meta: dict[str, object], header: list[str], rows: list[list[object]]
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for key, value in meta.items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def read_records(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise FormatError(f"missing artifact file: {path}")
    meta: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" not in body:
                    raise FormatError(f"{path}: malformed metadata line {line!r}")
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
            elif header is None:
                header = next(csv.reader([line]))
            elif line:
                rows.append(next(csv.reader([line])))
    if header is None:
        raise FormatError(f"{path}: no header row found")
    return meta, header, rows


def require_format(meta: dict[str, str], expected: str, path: str | Path) -> None:
    found = meta.get("format")
    if found != expected:
        raise FormatError(f"{path}: format {found!r}, expected {expected!r}")


def fmt(value: float) -> str:
    """Round-trip-exact float text."""
    return repr(float(value))


def encode_bits_rle(bits: np.ndarray) -> str:
    """'1x120;0x3;...' run-length encoding of a 0/1 vector."""
    bits = np.asarray(bits)
    if len(bits) == 0:
        return ""
    change = np.flatnonzero(np.diff(bits)) + 1
    starts = np.concatenate([[0], change])
    lengths = np.diff(np.concatenate([starts, [len(bits)]]))
    return ";".join(f"{int(bits[s])}x{int(n)}" for s, n in zip(starts, lengths))


def decode_bits_rle(text: str, expected_len: int) -> np.ndarray:
    out = np.empty(expected_len, dtype=np.uint8)
    pos = 0
    if text:
        for token in text.split(";"):
            try:
                bit, count = token.split("x")
                bit_v, n = int(bit), int(count)
            except ValueError as exc:
                raise FormatError(f"malformed RLE token {token!r}") from exc
            if bit_v not in (0, 1) or n < 1 or pos + n > expected_len:
                raise FormatError(f"RLE token {token!r} inconsistent with length {expected_len}")
            out[pos : pos + n] = bit_v
            pos += n
    if pos != expected_len:
        raise FormatError(f"RLE decodes to {pos} bits, expected {expected_len}")
    return out
