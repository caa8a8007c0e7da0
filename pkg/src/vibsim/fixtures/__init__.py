"""Bundled reference scenario: the tropolone target, the characterized
experiment that estimated it, and the reference Franck-Condon tables used
by the golden tests."""

from __future__ import annotations

import json
from importlib import resources

from ..gaussian import BeamSplitter
from ..tables import FCTable
from ..vibronic import OpticalTarget

__all__ = [
    "tropolone_target",
    "tropolone_excited_freqs",
    "characterized_model",
    "parameter_uncertainty",
    "reference_tables",
    "reference_table",
    "reference_shots",
    "IDEAL_BS_TRANSMISSION",
]


def _load(name: str) -> dict:
    with resources.files(__package__).joinpath(name).open("r") as fh:
        return json.load(fh)


_TROPOLONE = _load("tropolone.json")
_EXPERIMENT = _load("characterized_experiment.json")
_TABLES = _load("reference_tables.json")

#: intensity transmission of the ideal tropolone beam splitter
IDEAL_BS_TRANSMISSION = float(__import__("math").cos(_TROPOLONE["bs_angle"]) ** 2)


def tropolone_target() -> OpticalTarget:
    """Ideal two-mode target of the tropolone scenario."""
    return OpticalTarget(
        squeeze=tuple(_TROPOLONE["squeeze"]),
        interferometer=(BeamSplitter(0, 1, _TROPOLONE["bs_angle"]),),
        displacement=tuple(complex(d) for d in _TROPOLONE["displacement"]),
    )


def tropolone_excited_freqs() -> tuple[float, float]:
    return tuple(_TROPOLONE["excited_freqs_cm1"])


def characterized_model():
    """Characterized experiment model (imperfections fixed, controllables at
    their configured starting values)."""
    from ..experiment import DetectorModel, ExperimentModel, SMSVPair, TMSV

    src = _EXPERIMENT["source"]
    source = TMSV(src["r"]) if src["kind"] == "tmsv" else SMSVPair(src["r1"], src["r2"])
    det = DetectorModel(**_EXPERIMENT["detector"])
    return ExperimentModel(
        source=source,
        bs_transmission=_EXPERIMENT["bs_transmission"],
        loss_pre=tuple(_EXPERIMENT["loss_pre"]),
        loss_post=tuple(_EXPERIMENT["loss_post"]),
        distinguishability=_EXPERIMENT["distinguishability"],
        detector=det,
    )


def parameter_uncertainty():
    from ..experiment import ParameterUncertainty

    return ParameterUncertainty(**_EXPERIMENT["uncertainties"])


def reference_tables() -> dict:
    """Raw reference-table data (columns, fidelities, errors, shot count)."""
    return json.loads(json.dumps(_TABLES))  # deep copy


def reference_table(column: str, cutoff: int = 20) -> FCTable:
    """One column of the reference tables as a probability table."""
    outcomes = [tuple(o) for o in _TABLES["outcomes"]]
    values = _TABLES[column]
    entries = {o: float(v) for o, v in zip(outcomes, values)}
    tail = max(0.0, 1.0 - sum(entries.values()))
    return FCTable(entries, cutoff, tail)


def reference_shots() -> int:
    return int(_TABLES["shots"])
