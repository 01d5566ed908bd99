"""On-disk formats: dense binary matrices and key-value spectrum configs.

Binary matrix layout (little-endian): magic ``LADM``, u32 rows, u32 cols,
u8 scalar kind (0 = real float64, 1 = complex128), then the entries as
column-major 64-bit floats (complex stored as interleaved re/im pairs).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import LadmError
from .spectral import DecaySpec, SpectrumSpec

MAGIC = b"LADM"
KIND_REAL = 0
KIND_COMPLEX = 1


def write_matrix(path, M) -> None:
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("only 2-d matrices are supported")
    complex_kind = np.iscomplexobj(M)
    kind = KIND_COMPLEX if complex_kind else KIND_REAL
    dtype = np.complex128 if complex_kind else np.float64
    payload = np.asfortranarray(M.astype(dtype, copy=False)).tobytes(order="F")
    header = MAGIC + struct.pack("<IIB", M.shape[0], M.shape[1], kind)
    Path(path).write_bytes(header + payload)


def read_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise LadmError(f"{path}: bad magic {raw[:4]!r}")
    rows, cols, kind = struct.unpack("<IIB", raw[4:13])
    dtype = {KIND_REAL: np.float64, KIND_COMPLEX: np.complex128}.get(kind)
    if dtype is None:
        raise LadmError(f"{path}: unknown scalar kind {kind}")
    count = rows * cols
    data = np.frombuffer(raw, dtype=dtype, offset=13, count=count)
    return data.reshape((rows, cols), order="F").copy()


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise LadmError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def spectrum_spec_from_config(cfg: dict) -> SpectrumSpec:
    try:
        decay = DecaySpec(
            kind=cfg["decay.kind"],
            params=tuple(float(p) for p in cfg["decay.params"].split(",")),
        )
        center = cfg.get("center", "")
        return SpectrumSpec(
            n=int(cfg["n"]),
            j=int(cfg["j"]),
            h=int(cfg["h"]),
            k=int(cfg["k"]),
            decay=decay,
            delta=float(cfg["delta"]),
            cluster_center=float(center) if center else None,
            seed=int(cfg.get("seed", "0")),
        )
    except KeyError as exc:
        raise LadmError(f"config is missing key {exc.args[0]!r}") from exc


def load_spectrum_spec(path) -> SpectrumSpec:
    return spectrum_spec_from_config(parse_config(Path(path).read_text()))


def spectrum_spec_to_config(spec: SpectrumSpec) -> str:
    lines = [
        f"n = {spec.n}",
        f"j = {spec.j}",
        f"h = {spec.h}",
        f"k = {spec.k}",
        f"decay.kind = {spec.decay.kind}",
        "decay.params = " + ",".join(repr(float(p)) for p in spec.decay.params),
        f"delta = {spec.delta!r}",
        "center = " + ("" if spec.cluster_center is None else repr(spec.cluster_center)),
        f"seed = {spec.seed}",
    ]
    return "\n".join(lines) + "\n"
