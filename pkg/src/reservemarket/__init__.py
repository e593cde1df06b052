"""Day-ahead electricity market clearing and settlement engine with four
reserve-modeling variants (capacity sharing x requirement cascading)."""

__version__ = "0.1.0"

from .model_io import (CapacityOption, MarketCase, RequirementOption,
                       VariantConfig, all_variants, load_case, validate_case,
                       write_case)
from .network import build_ptdf, line_flows
from .zoning import cluster_buses, size_requirements
from .offers import HistorySnapshot, OfferSet, apply_offers, compute_offers
from .formulation import ConstraintKind, build_model, feasible_check
from .engine import (CommitmentSolution, PriceSet, pricing_run, run_variant,
                     solve_commitment)
from .settlement import (SettlementReport, aggregate_by_fuel,
                         revenue_distribution, settle)
from .suite import SuiteResult, emit_plot_data, run_suite

__all__ = [
    "CapacityOption", "MarketCase", "RequirementOption", "VariantConfig",
    "all_variants", "load_case", "validate_case", "write_case",
    "build_ptdf", "line_flows", "cluster_buses", "size_requirements",
    "HistorySnapshot", "OfferSet", "apply_offers", "compute_offers",
    "ConstraintKind", "build_model", "feasible_check",
    "CommitmentSolution", "PriceSet", "pricing_run", "run_variant",
    "solve_commitment", "SettlementReport", "aggregate_by_fuel",
    "revenue_distribution", "settle", "SuiteResult", "emit_plot_data",
    "run_suite",
]
