"""CSV result files and SVG performance figures."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

import numpy as np
import matplotlib as mpl
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .simulation import RESULT_COLUMNS, ResultRow, aggregate_gain, linear_mean_gain

_INT_COLUMNS = {"trials"}

# fixed id salt and no timestamp keep the SVG bytes reproducible
_RC = {
    "svg.hashsalt": "irs-csi",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.grid": True,
    "grid.linestyle": ":",
    "grid.alpha": 0.6,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "legend.fontsize": 8,
    "legend.frameon": False,
}


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.9g}"


def write_rows(rows: Sequence[ResultRow], fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in RESULT_COLUMNS])


def write_results(rows: Sequence[ResultRow], path) -> None:
    """CSV with a header row; floats carry 9 significant digits."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            write_rows(rows, fh)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror}") from exc


def read_results(path) -> list[ResultRow]:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != RESULT_COLUMNS:
            raise ValueError(f"{path}: header does not match {','.join(RESULT_COLUMNS)}")
        return [
            ResultRow(**{c: int(v) if c in _INT_COLUMNS else float(v) for c, v in zip(RESULT_COLUMNS, rec)})
            for rec in reader
        ]


def sweep_axis(rows: Sequence[ResultRow]) -> str:
    """Which UE coordinate varies across ``rows``; rejects rows that move along several."""
    if not rows:
        raise ValueError("no rows to plot")
    varying = [a for a in ("x", "y", "z") if len({getattr(r, f"ue_{a}") for r in rows}) > 1]
    if len(varying) > 1:
        raise ValueError(f"rows vary along several axes ({', '.join(varying)}); expected a single sweep")
    return varying[0] if varying else "x"


def _series(rows, axis, column, sigma=None):
    sel = [r for r in rows if sigma is None or r.sigma_e == sigma]
    coords = sorted({getattr(r, f"ue_{axis}") for r in sel})
    by_coord = {getattr(r, f"ue_{axis}"): getattr(r, column) for r in sel}
    return np.array(coords), np.array([by_coord[c] for c in coords])


def emit_plot(rows: Sequence[ResultRow], metric: str, path) -> None:
    """Line chart of a sweep: SNR curves (``metric='snr'``) or position error (``'error'``)."""
    if metric not in ("snr", "error"):
        raise ValueError(f"metric must be 'snr' or 'error', got {metric!r}")
    axis = sweep_axis(rows)
    sigmas = sorted({r.sigma_e for r in rows})

    with mpl.rc_context(_RC):
        fig = Figure(figsize=(6.0, 4.0))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot()
        if metric == "snr":
            x, y = _series(rows, axis, "snr_upper_db", sigmas[0])
            ax.plot(x, y, "k-", label="upper (real UE location)")
            for s in sigmas:
                x, y = _series(rows, axis, "snr_proposed_db", s)
                ax.plot(x, y, "o-", label=f"proposed, sigma_e={s:g}")
            x, y = _series(rows, axis, "snr_noopt_db", sigmas[0])
            ax.plot(x, y, "k--", label="noopt (theta = 1)")
            ax.set_ylabel("Received SNR [dB]")
        else:
            for s in sigmas:
                x, y = _series(rows, axis, "mean_pos_err_m", s)
                ax.plot(x, np.where(np.isfinite(y), y, np.nan), "o-", label=f"sigma_e={s:g}")
            ax.set_ylabel("Location error [m]")
        ax.set_xlabel(f"UE {axis}-coordinate [m]")
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, format=Path(path).suffix.lstrip(".") or "svg", metadata={"Date": None})


def summarize(rows: Sequence[ResultRow]) -> list[str]:
    """One human-readable line per sigma_e: mean gain over fixed coefficients and mean error."""
    lines = []
    for s in sorted({r.sigma_e for r in rows}):
        sel = [r for r in rows if r.sigma_e == s]
        errs = [r.mean_pos_err_m for r in sel if math.isfinite(r.mean_pos_err_m)]
        lines.append(
            f"sigma_e={s:g}: gain {aggregate_gain(sel):.2f} dB (mean of dB differences), "
            f"{linear_mean_gain(sel):.2f} dB (ratio of linear means), "
            f"mean position error {np.mean(errs) if errs else math.nan:.4f} m"
        )
    return lines
