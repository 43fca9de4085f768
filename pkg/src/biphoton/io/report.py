"""Human- and machine-readable reconstruction reports.

Three output kinds, all plain text with 9 significant digits:

* ``fit_summary.txt``: key=value lines with the fitted phase
  coefficients, their subset scatter, gating statistics, and mode counts.
* axis-labeled matrices (``*.tsv``): first row is the column axis, first
  column the row axis, tab-delimited values.
* flat triples (``*_xyz.tsv``): one ``axis1 axis2 value`` row per cell,
  for plotting without a matrix-aware reader.

``state_real.tsv``/``state_imag.tsv`` are the full-precision handoff of
the reconstructed amplitude (grid geometry in comment lines) so a later
analysis pass can rebuild the state exactly.
"""
from __future__ import annotations

import math
import os

import numpy as np

from ..errors import StateFileError
from ..interferometer import EventStream, Interferogram
from ..model import BiphotonState, FrequencyGrid, TimeFrequencyView
from ..reconstruct import AnalysisSummary, ReconstructionResult

__all__ = [
    "write_matrix",
    "write_triples",
    "write_schmidt_values",
    "write_fit_summary",
    "pooled_counts",
    "write_interferogram",
    "write_state",
    "load_state",
    "emit_reconstruction_report",
    "emit_analysis_report",
]

_FMT = "%.9g"


def _f(value: float) -> str:
    return _FMT % value


def write_matrix(path, values: np.ndarray, axis1: np.ndarray, axis2: np.ndarray,
                 corner: str = "axis1\\axis2") -> None:
    """Axis-labeled tab-delimited matrix; rows follow ``axis1``."""
    values = np.asarray(values)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join([corner] + [_f(v) for v in axis2]) + "\n")
        for x, row in zip(axis1, values):
            fh.write("\t".join([_f(x)] + [_f(v) for v in row]) + "\n")


def write_triples(path, values: np.ndarray, axis1: np.ndarray, axis2: np.ndarray,
                  names: tuple[str, str, str] = ("axis1", "axis2", "value")) -> None:
    """Flat ``axis1 axis2 value`` rows, row-major over the matrix."""
    values = np.asarray(values)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(names) + "\n")
        for i, x in enumerate(axis1):
            for y, v in zip(axis2, values[i]):
                fh.write(f"{_f(x)}\t{_f(y)}\t{_f(v)}\n")


def write_schmidt_values(path, values: np.ndarray, sigmas: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index\tvalue\tsigma\n")
        for i, (v, s) in enumerate(zip(values, sigmas)):
            fh.write(f"{i}\t{_f(v)}\t{_f(s)}\n")


def _fit_lines(prefix: str, fit) -> list[str]:
    lines = [
        f"{prefix}.configuration={fit.configuration}",
        f"{prefix}.phi11_fs2={_f(fit.phi11)}",
        f"{prefix}.phi11_sigma_fs2={_f(fit.phi11_sigma)}",
    ]
    for name in ("phi20", "phi02", "phi30", "phi21", "phi12", "phi03"):
        value = getattr(fit, name)
        if value is None:
            continue
        sigma = getattr(fit, name + "_sigma")
        lines.append(f"{prefix}.{name}_fs2={_f(value)}")
        lines.append(f"{prefix}.{name}_sigma_fs2={_f(sigma)}")
    lines.append(f"{prefix}.n_subsets_used={fit.n_subsets_used}")
    lines.append(f"{prefix}.n_subsets_rejected={fit.n_subsets_rejected}")
    return lines


def write_fit_summary(path, result: ReconstructionResult) -> None:
    sig_fit, idl_fit = result.fits
    lines = _fit_lines("signal_sheared", sig_fit)
    lines += _fit_lines("idler_sheared", idl_fit)
    lines += [
        f"combined.phi11_fs2={_f(result.phi11)}",
        f"combined.phi11_sigma_fs2={_f(result.phi11_sigma)}",
        f"combined.inconsistent={'true' if result.inconsistent else 'false'}",
        f"k_full={_f(result.k_full)}",
        f"k_full_sigma={_f(result.k_full_sigma)}",
        f"k_modulus={_f(result.k_modulus)}",
        f"k_modulus_sigma={_f(result.k_modulus_sigma)}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def pooled_counts(events: EventStream) -> Interferogram:
    """All events of a stream in one histogram."""
    n1, n2 = events.sheared_grid.count, events.herald_grid.count
    counts = np.bincount(
        events.bin1.astype(np.int64) * n2 + events.bin2.astype(np.int64),
        minlength=n1 * n2,
    ).reshape(n1, n2)
    return Interferogram(
        counts=counts, settings=events.settings,
        bin_grids=(events.sheared_grid, events.herald_grid),
        total_events=len(events),
    )


def write_interferogram(path, events: EventStream) -> None:
    gram = pooled_counts(events)
    write_matrix(
        path, gram.counts,
        gram.bin_grids[0].absolute(), gram.bin_grids[1].absolute(),
        corner="w_sheared\\w_herald",
    )


def write_state(out_dir, state: BiphotonState) -> None:
    """Full-precision amplitude handoff with grid geometry in comments."""
    meta = (
        f"# grid1 center={state.grid1.center!r} step={state.grid1.step!r} "
        f"count={state.grid1.count}\n"
        f"# grid2 center={state.grid2.center!r} step={state.grid2.step!r} "
        f"count={state.grid2.count}\n"
    )
    for name, part in (("state_real.tsv", state.amplitude.real),
                       ("state_imag.tsv", state.amplitude.imag)):
        with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
            fh.write(meta)
            np.savetxt(fh, part, fmt="%.17g", delimiter="\t")


def _parse_grid_comment(line: str, path) -> FrequencyGrid:
    fields = dict(
        item.split("=", 1) for item in line.lstrip("#").split()[1:] if "=" in item
    )
    try:
        return FrequencyGrid(
            center=float(fields["center"]), step=float(fields["step"]),
            count=int(fields["count"]),
        )
    except (KeyError, ValueError) as exc:
        raise StateFileError(f"{path}: malformed grid comment {line!r}") from exc


def load_state(state_dir) -> BiphotonState:
    """Rebuild a state written by :func:`write_state` (renormalized)."""
    real_path = os.path.join(state_dir, "state_real.tsv")
    imag_path = os.path.join(state_dir, "state_imag.tsv")
    with open(real_path, "r", encoding="utf-8") as fh:
        line1, line2 = fh.readline(), fh.readline()
    if not line1.startswith("# grid1") or not line2.startswith("# grid2"):
        raise StateFileError(f"{real_path}: missing grid geometry comments")
    grid1 = _parse_grid_comment(line1, real_path)
    grid2 = _parse_grid_comment(line2, real_path)
    parts = []
    for path in (real_path, imag_path):
        values = np.atleast_2d(np.loadtxt(path))
        if values.shape != (grid1.count, grid2.count):
            raise StateFileError(
                f"{path}: matrix shape {values.shape} does not match grids "
                f"({grid1.count}, {grid2.count})"
            )
        parts.append(values)
    amplitude = parts[0] + 1j * parts[1]
    total = np.sum(np.abs(amplitude) ** 2) * grid1.step * grid2.step
    if total <= 0.0:
        raise StateFileError(f"{real_path}: state amplitude is zero")
    return BiphotonState(grid1, grid2, amplitude / math.sqrt(total))


_VIEW_FILES = {
    "joint-temporal": "view_joint_temporal",
    "hybrid-t1-w2": "view_hybrid_t1_w2",
    "hybrid-w1-t2": "view_hybrid_w1_t2",
}

_VIEW_AXES = {
    "joint-temporal": ("t1", "t2"),
    "hybrid-t1-w2": ("t1", "w2"),
    "hybrid-w1-t2": ("w1", "t2"),
}


def _write_view(out_dir, view: TimeFrequencyView) -> None:
    stem = _VIEW_FILES[view.kind]
    names = _VIEW_AXES[view.kind]
    intensity = np.abs(view.amplitude) ** 2
    write_matrix(
        os.path.join(out_dir, stem + ".tsv"), intensity, view.axes[0], view.axes[1],
        corner=f"{names[0]}\\{names[1]}",
    )
    write_triples(
        os.path.join(out_dir, stem + "_xyz.tsv"), intensity,
        view.axes[0], view.axes[1], names=(names[0], names[1], "intensity"),
    )


def emit_analysis_report(out_dir, summary: AnalysisSummary) -> None:
    """Mode-structure files: Schmidt values, mode counts, the three views."""
    os.makedirs(out_dir, exist_ok=True)
    write_schmidt_values(
        os.path.join(out_dir, "schmidt_values.tsv"),
        summary.schmidt_values, summary.schmidt_sigmas,
    )
    lines = [
        f"k_full={_f(summary.k_full)}",
        f"k_full_sigma={_f(summary.k_full_sigma)}",
        f"k_modulus={_f(summary.k_modulus)}",
        f"k_modulus_sigma={_f(summary.k_modulus_sigma)}",
    ]
    with open(os.path.join(out_dir, "mode_counts.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for view in summary.views:
        _write_view(out_dir, view)


def emit_reconstruction_report(
    out_dir,
    result: ReconstructionResult,
    summary: AnalysisSummary,
    events: "tuple[EventStream, EventStream] | None" = None,
) -> None:
    """Everything a reconstruction run leaves behind in ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    write_fit_summary(os.path.join(out_dir, "fit_summary.txt"), result)

    state = result.jsa
    w1, w2 = state.grid1.absolute(), state.grid2.absolute()
    jsi = state.jsi()
    phase = np.angle(state.amplitude)
    write_matrix(os.path.join(out_dir, "jsi.tsv"), jsi, w1, w2, corner="w1\\w2")
    write_triples(os.path.join(out_dir, "jsi_xyz.tsv"), jsi, w1, w2,
                  names=("w1", "w2", "intensity"))
    write_matrix(os.path.join(out_dir, "phase.tsv"), phase, w1, w2, corner="w1\\w2")
    write_triples(os.path.join(out_dir, "phase_xyz.tsv"), phase, w1, w2,
                  names=("w1", "w2", "phase"))
    write_state(out_dir, state)
    emit_analysis_report(out_dir, summary)
    if events is not None:
        for stream in events:
            stem = ("interferogram_signal" if stream.settings.sheared_photon == "signal"
                    else "interferogram_idler")
            write_interferogram(os.path.join(out_dir, stem + ".tsv"), stream)
