"""Finite-shot sampling from photon-number distributions and statistical
error estimation for the resulting Franck-Condon estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tables import CountHistogram, FCTable

__all__ = ["sample", "FCEstimate", "estimate_fc"]


def sample(table: FCTable, shots: int, seed: int, metadata: dict | None = None) -> CountHistogram:
    """Multinomial draw of ``shots`` samples from a probability table.

    The table's unlisted remainder is sampled as the sink outcome.
    Deterministic for a fixed seed.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    full = table.with_sink()
    outcomes = sorted(full.entries)
    probs = np.array([full.entries[o] for o in outcomes], dtype=float)
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    hist = {o: int(c) for o, c in zip(outcomes, counts) if c > 0}
    return CountHistogram(hist, shots, metadata or {})


@dataclass(frozen=True)
class FCEstimate:
    table: FCTable
    eps_stat: float


def estimate_fc(
    hist: CountHistogram,
    n_bootstrap: int = 1000,
    seed: int = 0,
    percentile: float = 95.0,
) -> FCEstimate:
    """Relative frequencies plus a bootstrap bound on the sampling error.

    ``eps_stat`` is the given percentile of the total variation distance
    between bootstrap resamples and the point estimate.
    """
    n = hist.total_shots
    outcomes = sorted(hist.counts)
    counts = np.array([hist.counts[o] for o in outcomes], dtype=float)
    probs = counts / n
    rng = np.random.default_rng(seed)
    resampled = rng.multinomial(n, probs, size=n_bootstrap) / n
    tvds = 0.5 * np.abs(resampled - probs).sum(axis=1)
    eps = float(np.percentile(tvds, percentile))
    table = FCTable({o: float(p) for o, p in zip(outcomes, probs) if p > 0}, 0, 0.0)
    return FCEstimate(table, eps)
