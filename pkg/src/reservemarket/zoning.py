"""Reserve zone construction and requirement sizing.

Buses are clustered by K-means over their PTDF columns: buses whose
injections load the same lines end up in the same zone.  Zonal spinning
requirements follow the largest-single-contingency rule (100% / 50% for
spinning / non-spinning); regulation tracks a fraction of hourly zonal load.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyZoneError, InvalidK
from .model_io import MarketCase, ReserveRequirements
from .network import PtdfMatrix


@dataclass(frozen=True)
class ZonePartition:
    k: int
    assignment: dict[str, str]               # bus -> zone id
    members: dict[str, tuple[str, ...]]      # zone -> buses
    generator_sets: dict[str, tuple[str, ...]] = field(default_factory=dict)
    objective_trace: tuple[float, ...] = ()  # within-cluster SSQ per iteration


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = [points[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min([np.sum((points - c) ** 2, axis=1) for c in centers], axis=0)
        total = d2.sum()
        if total <= 0:
            centers.append(points[rng.integers(n)])
            continue
        centers.append(points[rng.choice(n, p=d2 / total)])
    return np.array(centers)


def cluster_buses(ptdf: PtdfMatrix, k: int, seed: int,
                  case: MarketCase | None = None) -> ZonePartition:
    """Lloyd's K-means (k-means++ init, fixed seed) over PTDF columns.

    Runs until centroid movement < 1e-9 or 300 iterations; an emptied
    cluster is reseeded from the point farthest from its centroid.
    """
    n = len(ptdf.bus_ids)
    if not 1 <= k <= n:
        raise InvalidK(f"k={k} outside [1, {n}]")
    points = ptdf.entries.T.copy()  # bus feature = its PTDF column
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(points, k, rng)

    labels = np.zeros(n, dtype=int)
    trace: list[float] = []
    for _ in range(300):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        trace.append(float(d2[np.arange(n), labels].sum()))
        new_centers = centers.copy()
        for c in range(k):
            mask = labels == c
            if mask.any():
                new_centers[c] = points[mask].mean(axis=0)
            else:
                # repair: grab the point farthest from its assigned centroid
                far = int(np.argmax(d2[np.arange(n), labels]))
                new_centers[c] = points[far]
                labels[far] = c
        move = float(np.max(np.abs(new_centers - centers)))
        centers = new_centers
        if move < 1e-9:
            break

    zone_ids = [f"Z{c + 1}" for c in range(k)]
    assignment = {bid: zone_ids[labels[i]] for i, bid in enumerate(ptdf.bus_ids)}
    members = {z: tuple(b for b in ptdf.bus_ids if assignment[b] == z) for z in zone_ids}
    gen_sets: dict[str, tuple[str, ...]] = {}
    if case is not None:
        gen_sets = {z: tuple(g.id for g in case.generators if assignment[g.bus] == z)
                    for z in zone_ids}
    return ZonePartition(k=k, assignment=assignment, members=members,
                         generator_sets=gen_sets, objective_trace=tuple(trace))


def kmeans_objective(ptdf: PtdfMatrix, partition: ZonePartition) -> float:
    points = ptdf.entries.T
    total = 0.0
    for zone, buses in partition.members.items():
        if not buses:
            continue
        rows = np.array([points[ptdf.bus_ids.index(b)] for b in buses])
        total += float(((rows - rows.mean(axis=0)) ** 2).sum())
    return total


def size_requirements(case: MarketCase, partition: ZonePartition,
                      reg_fraction: float = 0.03) -> ReserveRequirements:
    """Largest-single-contingency sizing: rr_spin = zonal max p_max,
    rr_nsp = half of it; rr_reg = reg_fraction x hourly zonal demand."""
    reg, spin, nsp = {}, {}, {}
    zones = sorted(partition.members)
    assignment = partition.assignment
    for z in zones:
        gens = [g for g in case.generators if assignment.get(g.bus) == z]
        if not gens:
            raise EmptyZoneError(f"zone {z} has no generator; requirements "
                                 "would be unmeetable hard constraints")
        largest = max(g.p_max for g in gens)
        demand = [0.0] * case.horizon
        for b in case.buses:
            if assignment.get(b.id) == z:
                for t in range(case.horizon):
                    demand[t] += b.demand[t]
        spin[z] = (largest,) * case.horizon
        nsp[z] = (0.5 * largest,) * case.horizon
        reg[z] = tuple(reg_fraction * d for d in demand)
    return ReserveRequirements(reg=reg, spin=spin, nsp=nsp)


def export_partition_csv(partition: ZonePartition, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bus", "zone"])
        for bus in sorted(partition.assignment):
            w.writerow([bus, partition.assignment[bus]])


def export_requirements_csv(req: ReserveRequirements, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["zone", "t", "rr_reg", "rr_spin", "rr_nsp"])
        for z in req.zones():
            for t in range(len(req.reg[z])):
                w.writerow([z, t, repr(req.reg[z][t]), repr(req.spin[z][t]),
                            repr(req.nsp[z][t])])
