"""Plot-ready CSV exports and atomic file writes."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .reconstruct import ReconstructionResult
from .signals import SampledSignal

BATCH_METRICS = ("rmse", "frechet", "pearson")


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temporary file beside ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    return f"{v:.12g}"


def overlay_csv(series: dict) -> str:
    """Two columns (time, value) per named series; shorter series are padded blank."""
    names = list(series)
    longest = max(len(s) for s in series.values())
    header = []
    for name in names:
        header += [f"{name}_time_s", f"{name}_value"]
    lines = [",".join(header)]
    for k in range(longest):
        cells = []
        for name in names:
            s = series[name]
            cells += [_fmt(k / s.fs), _fmt(s.samples[k])] if k < len(s) else ["", ""]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


@dataclass
class EvalBatch:
    """Per-pair metric rows of an evaluation batch, in a fixed order."""

    labels: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def add(self, label: str, metrics: dict) -> None:
        self.labels.append(label)
        self.rows.append(metrics)

    def moments(self) -> dict:
        """Mean and population standard deviation of each metric over defined entries."""
        out = {}
        for name in BATCH_METRICS:
            vals = np.array([r[name] for r in self.rows if r.get(name) is not None], dtype=float)
            out[name] = (float(vals.mean()), float(vals.std())) if vals.size else (None, None)
        return out

    def to_csv(self) -> str:
        lines = [",".join(("pair",) + BATCH_METRICS)]
        for label, row in zip(self.labels, self.rows):
            lines.append(",".join([label] + [_fmt(row.get(n)) for n in BATCH_METRICS]))
        mom = self.moments()
        lines.append(",".join(["mu"] + [_fmt(mom[n][0]) for n in BATCH_METRICS]))
        lines.append(",".join(["sigma"] + [_fmt(mom[n][1]) for n in BATCH_METRICS]))
        return "\n".join(lines) + "\n"


def emit_plot_data(result, path) -> None:
    """Write a plot-ready CSV for ``result``.

    ``result`` may be a :class:`ReconstructionResult` (loss trace), a mapping
    of names to :class:`SampledSignal` (overlay), a ``(pred, ref)`` pair of
    signals, or an :class:`EvalBatch` (per-pair rows plus mu/sigma rows).
    """
    if isinstance(result, ReconstructionResult):
        text = result.trace_csv()
    elif isinstance(result, EvalBatch):
        text = result.to_csv()
    elif isinstance(result, dict) and all(isinstance(v, SampledSignal) for v in result.values()) and result:
        text = overlay_csv(result)
    elif isinstance(result, tuple) and len(result) == 2 and all(isinstance(v, SampledSignal) for v in result):
        text = overlay_csv({"pred": result[0], "ref": result[1]})
    else:
        raise TypeError(f"no plot export for {type(result).__name__}")
    atomic_write(path, text)
