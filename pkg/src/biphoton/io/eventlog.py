"""Event log files: a text header plus packed binary records.

Layout::

    biphoton-events 1\n
    key=value\n            (one per line, fixed keys first, extras sorted)
    \n                      (single blank line ends the header)
    <record_count binary records>

Each record is little-endian ``(uint16 bin1, uint16 bin2, float64
timestamp)``, 12 bytes. Floats in the header are written with ``repr``,
which round-trips exactly, so write -> read -> write reproduces the file
byte for byte. The header carries everything needed to rebuild the
:class:`~biphoton.interferometer.EventStream`: the configuration tag,
shear settings, and both detector bin grids.
"""
from __future__ import annotations

import numpy as np

from ..errors import EventLogFormatError
from ..interferometer import EventStream, ShearSettings
from ..model import FrequencyGrid

__all__ = ["FORMAT_VERSION", "write_events", "read_events", "read_event_header"]

FORMAT_VERSION = 1

_MAGIC = "biphoton-events"

_RECORD_DTYPE = np.dtype([("bin1", "<u2"), ("bin2", "<u2"), ("timestamp", "<f8")])

# Header keys every log must carry, in the order they are written.
_FIXED_KEYS = (
    "configuration",
    "sheared_photon",
    "shear",
    "delay",
    "sheared_center",
    "sheared_step",
    "sheared_count",
    "herald_center",
    "herald_step",
    "herald_count",
    "record_count",
)


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_events(path, events: EventStream, extra: "dict[str, str] | None" = None) -> None:
    """Write an event stream; ``extra`` adds caller metadata to the header.

    Extra keys must not collide with the fixed keys and their values must
    be single-line strings.
    """
    header = {
        "configuration": events.configuration,
        "sheared_photon": events.settings.sheared_photon,
        "shear": float(events.settings.shear),
        "delay": float(events.settings.delay),
        "sheared_center": float(events.sheared_grid.center),
        "sheared_step": float(events.sheared_grid.step),
        "sheared_count": events.sheared_grid.count,
        "herald_center": float(events.herald_grid.center),
        "herald_step": float(events.herald_grid.step),
        "herald_count": events.herald_grid.count,
        "record_count": len(events),
    }
    extra = dict(extra or {})
    for key, value in extra.items():
        if key in header:
            raise ValueError(f"extra header key {key!r} collides with a fixed key")
        if "\n" in key or "=" in key or "\n" in str(value):
            raise ValueError(f"extra header entry {key!r} is not a single key=value line")

    records = np.empty(len(events), dtype=_RECORD_DTYPE)
    records["bin1"] = events.bin1
    records["bin2"] = events.bin2
    records["timestamp"] = events.timestamps

    lines = [f"{_MAGIC} {FORMAT_VERSION}"]
    lines += [f"{k}={_fmt(header[k])}" for k in _FIXED_KEYS]
    lines += [f"{k}={extra[k]}" for k in sorted(extra)]
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n\n").encode("ascii"))
        fh.write(records.tobytes())


def _split_header(blob: bytes, path) -> tuple[dict, bytes]:
    end = blob.find(b"\n\n")
    if end < 0:
        raise EventLogFormatError(f"{path}: no header terminator (blank line) found")
    try:
        text = blob[:end].decode("ascii")
    except UnicodeDecodeError as exc:
        raise EventLogFormatError(f"{path}: header is not ASCII text") from exc
    lines = text.split("\n")
    magic = lines[0].split(" ")
    if len(magic) != 2 or magic[0] != _MAGIC:
        raise EventLogFormatError(f"{path}: not a biphoton event log")
    if magic[1] != str(FORMAT_VERSION):
        raise EventLogFormatError(
            f"{path}: unsupported format version {magic[1]} (this reader handles "
            f"{FORMAT_VERSION})"
        )
    header = {}
    for line in lines[1:]:
        key, sep, value = line.partition("=")
        if not sep or not key:
            raise EventLogFormatError(f"{path}: malformed header line {line!r}")
        if key in header:
            raise EventLogFormatError(f"{path}: duplicate header key {key!r}")
        header[key] = value
    missing = [k for k in _FIXED_KEYS if k not in header]
    if missing:
        raise EventLogFormatError(f"{path}: header missing key(s): {', '.join(missing)}")
    return header, blob[end + 2 :]


def read_event_header(path) -> dict:
    """Header of an event log as a string-valued dict (cheap: no records)."""
    with open(path, "rb") as fh:
        blob = fh.read(65536)
        if blob.find(b"\n\n") < 0 and len(blob) == 65536:
            raise EventLogFormatError(f"{path}: header exceeds 64 KiB; file is corrupt")
    header, _ = _split_header(blob, path)
    return header


def read_events(path) -> EventStream:
    """Read an event log back into an :class:`EventStream`.

    Raises
    ------
    EventLogFormatError
        On a bad magic line, an unsupported version, missing header keys,
        truncated records, or trailing bytes after the last record.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    header, body = _split_header(blob, path)

    try:
        n = int(header["record_count"])
        settings = ShearSettings(
            shear=float(header["shear"]),
            delay=float(header["delay"]),
            sheared_photon=header["sheared_photon"],
        )
        sheared_grid = FrequencyGrid(
            center=float(header["sheared_center"]),
            step=float(header["sheared_step"]),
            count=int(header["sheared_count"]),
        )
        herald_grid = FrequencyGrid(
            center=float(header["herald_center"]),
            step=float(header["herald_step"]),
            count=int(header["herald_count"]),
        )
    except ValueError as exc:
        raise EventLogFormatError(f"{path}: invalid header field: {exc}") from exc

    expected = n * _RECORD_DTYPE.itemsize
    if len(body) < expected:
        raise EventLogFormatError(
            f"{path}: truncated: header promises {n} records ({expected} bytes), "
            f"found {len(body)}"
        )
    if len(body) > expected:
        raise EventLogFormatError(
            f"{path}: {len(body) - expected} trailing byte(s) after the last record"
        )
    records = np.frombuffer(body, dtype=_RECORD_DTYPE)
    try:
        return EventStream(
            configuration=header["configuration"],
            settings=settings,
            sheared_grid=sheared_grid,
            herald_grid=herald_grid,
            bin1=records["bin1"].copy(),
            bin2=records["bin2"].copy(),
            timestamps=records["timestamp"].copy(),
        )
    except ValueError as exc:
        raise EventLogFormatError(f"{path}: records violate stream invariants: {exc}") from exc
