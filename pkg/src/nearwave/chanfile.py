"""Binary channel tensor files with a human-readable metadata sidecar.

Layout: a header of five little-endian int64 extents (n_rx, n_ry, n_tx,
n_ty, n_f) followed by the row-major tensor entries as little-endian
float64 pairs (real, imaginary). The sidecar is the same path with a
".meta" suffix appended, holding "key = value" lines.
"""

from __future__ import annotations

import numpy as np

HEADER_DTYPE = np.dtype("<i8")
VALUE_DTYPE = np.dtype("<f8")


def sidecar_path(path) -> str:
    return f"{path}.meta"


def write_channel(path, values: np.ndarray, metadata: dict | None = None) -> None:
    """Write a 5-axis complex tensor plus its metadata sidecar."""
    values = np.asarray(values, dtype=complex)
    if values.ndim != 5:
        raise ValueError("expected a 5-axis channel tensor")
    header = np.asarray(values.shape, dtype=HEADER_DTYPE)
    interleaved = np.empty(values.size * 2, dtype=VALUE_DTYPE)
    flat = values.ravel()
    interleaved[0::2] = flat.real
    interleaved[1::2] = flat.imag
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(interleaved.tobytes())
    if metadata is not None:
        write_metadata(sidecar_path(path), metadata)


def read_channel(path) -> np.ndarray:
    """Read a tensor written by write_channel."""
    with open(path, "rb") as fh:
        header = np.frombuffer(fh.read(5 * HEADER_DTYPE.itemsize), dtype=HEADER_DTYPE)
        if header.size != 5 or np.any(header < 1):
            raise ValueError("corrupt channel file header")
        shape = tuple(int(n) for n in header)
        count = 2 * int(np.prod(shape))
        raw = np.frombuffer(fh.read(count * VALUE_DTYPE.itemsize), dtype=VALUE_DTYPE)
    if raw.size != count:
        raise ValueError("channel file truncated")
    return (raw[0::2] + 1j * raw[1::2]).reshape(shape)


def write_metadata(path, metadata: dict) -> None:
    lines = [f"{key} = {metadata[key]}" for key in metadata]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_metadata(path) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
