"""Reserve offer construction from historical market outcomes.

Spinning offers are the expected lost opportunity cost of the unit over a
history of (prices, dispatch) snapshots; regulation and non-spinning offers
are fixed multiples derived from observed day-ahead product price ratios.
Negative per-sample lost opportunity is floored at zero before averaging:
a unit losing money on energy would provide reserve for free.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import CoverageError, EmptyHistory
from .model_io import MarketCase

DEFAULT_REG_MULT = 3.28
DEFAULT_NSP_MULT = 0.0864


class OfferProvenance(enum.Enum):
    INPUT = "input"
    COMPUTED = "computed"


@dataclass(frozen=True)
class HistorySnapshot:
    """One historical run: bus LMPs and generator dispatch, per interval."""
    lmp: dict[str, Sequence[float]]       # bus -> $/MWh per interval
    dispatch: dict[str, Sequence[float]]  # gen -> MW per interval


@dataclass(frozen=True)
class OfferSet:
    reg: dict[str, tuple[float, ...]]   # gen -> $/MWh per interval
    spin: dict[str, tuple[float, ...]]
    nsp: dict[str, tuple[float, ...]]
    provenance: OfferProvenance


def compute_offers(history: Sequence[HistorySnapshot], case: MarketCase,
                   reg_mult: float = DEFAULT_REG_MULT,
                   nsp_mult: float = DEFAULT_NSP_MULT) -> OfferSet:
    """Average floored lost-opportunity spinning offers with multiplier
    wiring offer_reg = reg_mult * offer_spin, offer_nsp = nsp_mult * offer_reg.

    Intervals where a unit is offline or at zero output contribute no
    sample (its average production cost is undefined there).
    """
    if not history:
        raise EmptyHistory("offer computation needs at least one snapshot")
    reg, spin, nsp = {}, {}, {}
    T = case.horizon
    for g in case.generators:
        samples: list[float] = []
        for snap in history:
            if g.id not in snap.dispatch:
                raise CoverageError(f"history snapshot has no dispatch for {g.id}")
            if g.bus not in snap.lmp:
                raise CoverageError(f"history snapshot has no LMP for bus {g.bus}")
            prices = snap.lmp[g.bus]
            for p, price in zip(snap.dispatch[g.id], prices):
                if p <= 0.0:
                    continue
                lost = price - g.fuel_cost(p) / p
                samples.append(max(lost, 0.0))
        offer_spin = sum(samples) / len(samples) if samples else 0.0
        offer_reg = reg_mult * offer_spin
        offer_nsp = nsp_mult * offer_reg
        spin[g.id] = (offer_spin,) * T
        reg[g.id] = (offer_reg,) * T
        nsp[g.id] = (offer_nsp,) * T
    return OfferSet(reg=reg, spin=spin, nsp=nsp, provenance=OfferProvenance.COMPUTED)


def apply_offers(case: MarketCase, offers: OfferSet) -> MarketCase:
    """Return a copy of the case with generator offers replaced."""
    patched = []
    for g in case.generators:
        if g.id not in offers.reg or g.id not in offers.spin or g.id not in offers.nsp:
            raise CoverageError(f"offer set does not cover generator {g.id}")
        for table in (offers.reg, offers.spin, offers.nsp):
            if len(table[g.id]) != case.horizon:
                raise CoverageError(f"offers for {g.id} do not cover the horizon")
        patched.append(replace(
            g,
            offer_reg=tuple(offers.reg[g.id]),
            offer_spin=tuple(offers.spin[g.id]),
            offer_nsp=tuple(offers.nsp[g.id])))
    return replace(case, generators=tuple(patched))
