"""Click-stream container and on-disk formats.

A click stream is the simulated experiment output: time-ordered detection
records, each carrying the index of the pulse that produced it (or -1 for
stationary runs where no pulse clock exists).

Formats
-------
CSV       header ``pulse_index,time_seconds``; stationary records write -1.
binary    packed little-endian records (u64 pulse index, f64 time);
          stationary records store 2**64 - 1 as the index sentinel.
sidecar   JSON next to either format with the seed and full generating
          configuration, default path ``<stream>.meta.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import StreamFormatError

__all__ = [
    "ClickStream",
    "write_stream",
    "read_stream",
    "sidecar_path",
]

_HEADER = "pulse_index,time_seconds"
_BINARY_DTYPE = np.dtype([("pulse_index", "<u8"), ("time_seconds", "<f8")])


@dataclass(frozen=True, eq=False)
class ClickStream:
    """Time-ordered detection records plus generating metadata."""

    pulse_index: np.ndarray
    times: np.ndarray
    metadata: dict

    def __post_init__(self):
        idx = np.asarray(self.pulse_index, dtype=np.int64)
        t = np.asarray(self.times, dtype=float)
        if idx.shape != t.shape or idx.ndim != 1:
            raise ValueError("pulse_index and times must be matching 1-D arrays")
        if t.size and not np.all(np.isfinite(t)):
            raise ValueError("click times must be finite")
        if t.size > 1 and np.any(np.diff(t) < 0):
            raise ValueError("click times must be nondecreasing")
        idx.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "pulse_index", idx)
        object.__setattr__(self, "times", t)

    @property
    def n_clicks(self) -> int:
        return self.times.size

    @property
    def is_pulsed(self) -> bool:
        kind = self.metadata.get("kind")
        if kind is not None:
            return kind == "pulsed"
        return bool(self.n_clicks) and bool(np.all(self.pulse_index >= 0))

    def counts_per_pulse(self, num_pulses: int) -> np.ndarray:
        """Clicks per pulse, including empty pulses (length ``num_pulses``)."""
        if self.n_clicks and (self.pulse_index.min() < 0
                              or self.pulse_index.max() >= num_pulses):
            raise ValueError("pulse indices outside [0, num_pulses)")
        return np.bincount(self.pulse_index, minlength=num_pulses) if self.n_clicks \
            else np.zeros(num_pulses, dtype=np.int64)

    def __repr__(self):
        return f"ClickStream(n_clicks={self.n_clicks}, kind={self.metadata.get('kind')!r})"


def sidecar_path(path) -> str:
    return str(path) + ".meta.json"


def write_stream(stream: ClickStream, path, fmt: str = "csv",
                 sidecar: str | None = None) -> None:
    """Write records in ``fmt`` ("csv" or "binary") plus the JSON sidecar."""
    path = str(path)
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write(_HEADER + "\n")
            if stream.n_clicks:
                np.savetxt(fh, np.column_stack([stream.pulse_index, stream.times]),
                           fmt=("%d", "%.17g"), delimiter=",")
    elif fmt == "binary":
        rec = np.empty(stream.n_clicks, dtype=_BINARY_DTYPE)
        rec["pulse_index"] = stream.pulse_index.view(np.uint64)
        rec["time_seconds"] = stream.times
        rec.tofile(path)
    else:
        raise ValueError(f"unknown stream format {fmt!r}")
    meta = dict(stream.metadata)
    meta["format"] = fmt
    meta["n_clicks"] = int(stream.n_clicks)
    with open(sidecar or sidecar_path(path), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")


def _locate_bad_csv_record(path) -> int:
    with open(path) as fh:
        for i, line in enumerate(fh):
            if i == 0:
                continue
            parts = line.strip().split(",")
            if not line.strip():
                continue
            try:
                int(parts[0])
                float(parts[1])
                if len(parts) != 2:
                    raise ValueError
            except (ValueError, IndexError):
                return i - 1
    return -1


def _read_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip()
        has_rows = bool(fh.readline().strip())
    if header != _HEADER:
        raise StreamFormatError(f"{path}: record -1 (header) must be {_HEADER!r}")
    if not has_rows:
        return np.empty(0, dtype=np.int64), np.empty(0)
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise StreamFormatError(
            f"{path}: record {_locate_bad_csv_record(path)} is malformed") from exc
    if data.size == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    if data.shape[1] != 2:
        raise StreamFormatError(f"{path}: record 0: expected 2 columns")
    return data[:, 0].astype(np.int64), data[:, 1]


def _read_binary(path) -> tuple[np.ndarray, np.ndarray]:
    rec = np.fromfile(path, dtype=_BINARY_DTYPE)
    idx = np.ascontiguousarray(rec["pulse_index"]).view(np.int64)
    return idx, rec["time_seconds"].astype(float)


def read_stream(path, sidecar: str | None = None) -> ClickStream:
    """Read a stream written by `write_stream`; the sidecar is optional."""
    path = str(path)
    meta = {}
    side = sidecar or sidecar_path(path)
    try:
        with open(side) as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        pass
    except json.JSONDecodeError as exc:
        raise StreamFormatError(f"{side}: invalid sidecar JSON: {exc}") from exc
    fmt = meta.get("format") or ("binary" if path.endswith(".bin") else "csv")
    idx, t = _read_binary(path) if fmt == "binary" else _read_csv(path)
    try:
        return ClickStream(idx, t, meta)
    except ValueError as exc:
        bad = int(np.argmin(np.diff(t))) + 1 if t.size > 1 else 0
        raise StreamFormatError(f"{path}: record {bad}: {exc}") from exc
