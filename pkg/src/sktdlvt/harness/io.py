"""Matrix dumps, estimate tables and JSON summaries.

Matrix dump layout (little endian): 4-byte magic ``SKTD``, then u32 format
version, rows, cols and dtype code (0 = complex64 as interleaved float32
re/im, 1 = float32), followed by the row-major payload.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"SKTD"
VERSION = 1
HEADER = struct.Struct("<4sIIII")
DTYPES = {0: np.dtype("<c8"), 1: np.dtype("<f4")}

CSV_COLUMNS = ("target_id", "range_cell", "k_amb_out", "k_amb_in", "f_hat_hz",
               "gamma_hat_hz_per_s", "v_c_mps", "a_c_mps2", "peak_mag", "status")


def encode_matrix(a) -> bytes:
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError("only 1-D or 2-D arrays can be dumped")
    code = 0 if np.iscomplexobj(a) else 1
    payload = np.ascontiguousarray(a, dtype=DTYPES[code]).tobytes()
    return HEADER.pack(MAGIC, VERSION, a.shape[0], a.shape[1], code) + payload


def decode_matrix(buf: bytes) -> np.ndarray:
    if len(buf) < HEADER.size:
        raise ValueError("truncated matrix dump header")
    magic, version, rows, cols, code = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported dump version {version}")
    if code not in DTYPES:
        raise ValueError(f"unknown dtype code {code}")
    dt = DTYPES[code]
    need = rows * cols * dt.itemsize
    if len(buf) - HEADER.size != need:
        raise ValueError(f"payload has {len(buf) - HEADER.size} bytes, expected {need}")
    return np.frombuffer(buf, dtype=dt, offset=HEADER.size).reshape(rows, cols).copy()


def write_matrix(path, a):
    Path(path).write_bytes(encode_matrix(a))


def read_matrix(path) -> np.ndarray:
    return decode_matrix(Path(path).read_bytes())


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def estimate_rows(estimates):
    """CSV rows in a canonical order (range cell, then velocity)."""
    def key(e):
        return (e.range_cell, e.v_c_hat if e.v_c_hat is not None else np.inf, e.a2_hat)
    rows = []
    for i, e in enumerate(sorted(estimates, key=key)):
        rows.append((i, e.range_cell, e.k_amb_out, e.k_amb_in, e.f_hat, e.gamma_hat,
                     e.v_c_hat, e.a_c_hat, e.peak_magnitude, e.status))
    return rows


def estimates_csv(estimates) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in estimate_rows(estimates):
        w.writerow([_fmt(v) if not isinstance(v, str) else v for v in r])
    return buf.getvalue()


def write_estimates_csv(path, estimates):
    Path(path).write_text(estimates_csv(estimates))


def read_estimates_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_table_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([v if isinstance(v, str) else _fmt(v) for v in r])
    Path(path).write_text(buf.getvalue())
