"""Characterization fits: source tomography from photon-counting
histograms, the pump-power law for squeezing, and mode overlap from
interference visibility."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fock
from .experiment import DetectorModel
from .gaussian import BeamSplitter, GaussianCircuit, Loss, TwoModeSqueeze
from .metrics import tvd
from .optimize import nelder_mead
from .tables import CountHistogram, FCTable, sink_outcome

__all__ = [
    "TomographyFit",
    "fit_source",
    "predicted_distribution",
    "pump_to_r",
    "PumpFit",
    "fit_pump_curve",
    "hom_to_delta",
    "read_histogram_csv",
    "write_histogram_csv",
]


@dataclass(frozen=True)
class TomographyFit:
    r: float
    eta: tuple[float, float]
    residual_tvd: float
    converged: bool
    iterations: int


def predicted_distribution(
    r: float,
    eta: tuple[float, float],
    bs_transmission: float,
    det: DetectorModel,
    cutoff: int,
) -> FCTable:
    """Photon statistics of a lossy two-mode squeezed source measured by
    noisy detectors, for one beam-splitter setting."""
    elements = [TwoModeSqueeze(0, 1, r)]
    for mode, e in enumerate(eta):
        if e < 1.0:
            elements.append(Loss(mode, e))
    theta = math.acos(math.sqrt(bs_transmission))
    if theta != 0.0:
        elements.append(BeamSplitter(0, 1, theta))
    rho = fock.replay_fock(GaussianCircuit(2, elements), cutoff, strict=False)
    return fock.attach_detector_noise(rho, det)


def _pooled_table(hist: CountHistogram, cutoff: int) -> FCTable:
    return hist.pooled(cutoff).frequencies(cutoff)


def _pool_prediction(table: FCTable, cutoff: int) -> FCTable:
    entries: dict[tuple[int, ...], float] = {}
    sink = sink_outcome(table.num_modes)
    for key, p in table.entries.items():
        target = sink if max(key) >= cutoff else key
        entries[target] = entries.get(target, 0.0) + p
    entries[sink] = entries.get(sink, 0.0) + table.tail_mass
    return FCTable(entries, cutoff, 0.0)


def fit_source(
    hist_100_0: CountHistogram,
    hist_0_100: CountHistogram,
    det: DetectorModel,
    *,
    cutoff: int = 12,
    start: tuple[float, float, float] = (0.3, 0.5, 0.5),
    tol: float = 1e-7,
    max_iter: int = 1500,
) -> TomographyFit:
    """Recover the source squeezing and the per-arm transmissions from the
    two straight-through beam-splitter settings.

    ``hist_100_0`` is recorded with the beam splitter fully transmissive,
    ``hist_0_100`` fully reflective.  The detector model is held fixed at
    its independently characterized values.  The fit minimizes the summed
    total variation distance between predicted and observed statistics;
    the worse of the two residuals is reported (a candidate for the
    model-mismatch error term).
    """
    emp_t = _pooled_table(hist_100_0, cutoff)
    emp_r = _pooled_table(hist_0_100, cutoff)

    def residuals(x) -> tuple[float, float]:
        r, e1, e2 = x
        pred_t = _pool_prediction(predicted_distribution(r, (e1, e2), 1.0, det, cutoff), cutoff)
        pred_r = _pool_prediction(predicted_distribution(r, (e1, e2), 0.0, det, cutoff), cutoff)
        return tvd(pred_t, emp_t), tvd(pred_r, emp_r)

    result = nelder_mead(
        lambda x: -sum(residuals(x)),
        np.asarray(start, dtype=float),
        bounds=[(0.0, 1.5), (0.0, 1.0), (0.0, 1.0)],
        tol=tol,
        max_iter=max_iter,
    )
    r, e1, e2 = (float(v) for v in result.x)
    res_t, res_r = residuals(result.x)
    at_bounds = r >= 1.5 - 1e-9 or min(e1, e2) <= 1e-9
    return TomographyFit(
        r,
        (e1, e2),
        max(res_t, res_r),
        bool(result.converged and not at_bounds),
        result.iterations,
    )


def pump_to_r(power: float, k: float) -> float:
    """Squeezing from pump power under the square-root law r = k*sqrt(P)."""
    if power < 0:
        raise ValueError("power must be >= 0")
    return k * math.sqrt(power)


@dataclass(frozen=True)
class PumpFit:
    k: float
    residuals: tuple[float, ...]
    sigma_r: float


def fit_pump_curve(points, max_power: float | None = None) -> PumpFit:
    """Least-squares fit of r = k*sqrt(P) on (power, r) pairs.

    ``max_power`` restricts the fit to the low-power plateau; residuals for
    every supplied point are reported so outliers can be inspected.
    """
    pts = [(float(p), float(r)) for p, r in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    selected = [(p, r) for p, r in pts if max_power is None or p <= max_power]
    if len(selected) < 2:
        raise ValueError("plateau selection keeps fewer than two points")
    sq = np.array([math.sqrt(p) for p, _ in selected])
    rs = np.array([r for _, r in selected])
    k = float(sq @ rs / (sq @ sq))
    residuals = tuple(r - k * math.sqrt(p) for p, r in pts)
    sel_res = np.array([r - k * math.sqrt(p) for p, r in selected])
    sigma = float(np.sqrt(np.mean(sel_res**2)))
    return PumpFit(k, residuals, sigma)


def hom_to_delta(visibility: float) -> float:
    """Distinguishability from the interference-dip visibility."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    return 1.0 - visibility


# ---------------------------------------------------------------------------
# histogram file format: CSV `m1,..,mM,count` plus a JSON metadata sidecar
# ---------------------------------------------------------------------------


class HistogramFormatError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def write_histogram_csv(hist: CountHistogram, path) -> None:
    path = Path(path)
    modes = hist.num_modes
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"m{i + 1}" for i in range(modes)] + ["count"])
        for outcome in sorted(hist.counts):
            writer.writerow(list(outcome) + [hist.counts[outcome]])
    sidecar = path.with_suffix(".json")
    meta = {"shots": hist.total_shots, **hist.metadata}
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def read_histogram_csv(path) -> CountHistogram:
    path = Path(path)
    counts: dict[tuple[int, ...], int] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise HistogramFormatError("empty file", 1) from None
        if len(header) < 2 or header[-1].strip() != "count":
            raise HistogramFormatError("header must be m1,..,mM,count", 1)
        modes = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != modes + 1:
                raise HistogramFormatError(f"expected {modes + 1} fields", lineno)
            try:
                outcome = tuple(int(v) for v in row[:-1])
                count = int(row[-1])
            except ValueError:
                raise HistogramFormatError("non-integer field", lineno) from None
            if count < 0:
                raise HistogramFormatError("negative count", lineno)
            counts[outcome] = counts.get(outcome, 0) + count
    if not counts:
        raise HistogramFormatError("no data rows", 2)
    metadata = {}
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        metadata = json.loads(sidecar.read_text())
        metadata.pop("shots", None)
    return CountHistogram(counts, sum(counts.values()), metadata)
