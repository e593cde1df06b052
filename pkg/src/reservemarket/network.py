"""DC network sensitivities: PTDF matrix and line flows."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, SingularNetworkError
from .model_io import MarketCase


@dataclass(frozen=True)
class PtdfMatrix:
    """Sensitivity of each line flow to a 1 MW injection withdrawn at the
    reference bus.  Rows follow line order, columns bus order."""
    reference_bus: str
    bus_ids: tuple[str, ...]
    line_ids: tuple[str, ...]
    entries: np.ndarray  # lines x buses

    def bus_index(self, bus_id: str) -> int:
        return self.bus_ids.index(bus_id)

    def column(self, bus_id: str) -> np.ndarray:
        return self.entries[:, self.bus_index(bus_id)]


def build_ptdf(case: MarketCase) -> PtdfMatrix:
    """Factor the reduced nodal susceptance matrix and form line/bus
    sensitivities.  Raises SingularNetworkError on a disconnected grid."""
    bus_ids = tuple(b.id for b in case.buses)
    line_ids = tuple(l.id for l in case.lines)
    n = len(bus_ids)
    m = len(line_ids)
    idx = {bid: i for i, bid in enumerate(bus_ids)}
    ref = idx[case.reference_bus]

    # branch susceptances and incidence
    b_line = np.empty(m)
    inc = np.zeros((m, n))
    for k, l in enumerate(case.lines):
        if l.reactance <= 0:
            raise SingularNetworkError(f"line {l.id}: non-positive reactance")
        b_line[k] = 1.0 / l.reactance
        inc[k, idx[l.from_bus]] = 1.0
        inc[k, idx[l.to_bus]] = -1.0

    bbus = inc.T @ (b_line[:, None] * inc)
    keep = [i for i in range(n) if i != ref]
    reduced = bbus[np.ix_(keep, keep)]
    bf = b_line[:, None] * inc  # flow = bf @ theta

    try:
        theta_sens = np.linalg.solve(reduced, np.eye(n - 1)) if n > 1 else np.empty((0, 0))
    except np.linalg.LinAlgError as exc:
        raise SingularNetworkError("reduced susceptance matrix is singular "
                                   "(disconnected grid?)") from exc
    # guard against near-singular factorizations that solve() lets through
    if n > 1 and not np.all(np.isfinite(theta_sens)):
        raise SingularNetworkError("non-finite network sensitivities")

    entries = np.zeros((m, n))
    if n > 1:
        entries[:, keep] = bf[:, keep] @ theta_sens
    entries[:, ref] = 0.0
    if np.max(np.abs(entries), initial=0.0) > 1.0 + 1e-6:
        raise SingularNetworkError("PTDF entries outside [-1, 1]; grid is "
                                   "numerically degenerate or disconnected")
    return PtdfMatrix(reference_bus=case.reference_bus, bus_ids=bus_ids,
                      line_ids=line_ids, entries=entries)


def line_flows(ptdf: PtdfMatrix, injections) -> np.ndarray:
    """MW flow on every line for a vector of nodal injections (MW, ordered
    like ptdf.bus_ids, or a mapping bus id -> MW covering every bus)."""
    if isinstance(injections, dict):
        missing = set(ptdf.bus_ids) - set(injections)
        if missing:
            raise DimensionMismatch(f"injections missing buses {sorted(missing)}")
        vec = np.array([injections[b] for b in ptdf.bus_ids], dtype=float)
    else:
        vec = np.asarray(injections, dtype=float)
        if vec.shape != (len(ptdf.bus_ids),):
            raise DimensionMismatch(
                f"expected {len(ptdf.bus_ids)} injections, got shape {vec.shape}")
    return ptdf.entries @ vec


def export_ptdf_csv(ptdf: PtdfMatrix, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["line", *ptdf.bus_ids])
        for i, lid in enumerate(ptdf.line_ids):
            w.writerow([lid, *[repr(v) for v in ptdf.entries[i]]])
