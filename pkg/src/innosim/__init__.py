"""Simulator for networks of innovating firms.

Firms invest in discovery and choose how open to be with what they know;
ideas travel over the realized learning network and combine into
technologies, which pay only while proprietary.  The package simulates
realized worlds, prices them, finds symmetric and grouped equilibria, and
ships the analytic approximations the large-population behavior obeys.
"""

from .analytics import (borel_mass, borel_total_progeny_pmf, budget_phase,
                        classify_lambda, criticality_report, direct_eq_rate,
                        giant_prediction, giant_share, optimal_patent_share,
                        patent_profit_curve, solve_investment, spectral_radius)
from .config import (CostSpec, FirmProfile, PayoffSpec, WorldConfig,
                     budget_profile, uniform_profiles)
from .counting import (count_proprietary_exact, count_proprietary_ie,
                       enumerate_proprietary)
from .equilibrium import (EquilibriumResult, SolverConfig, best_response_q,
                          beta_equilibrium, budget_equilibrium,
                          intervention_scan, patents_equilibrium,
                          public_equilibrium, symmetric_equilibrium,
                          tau_summary, variant_equilibrium)
from .errors import (CompetitorCapExceeded, ConfigError,
                     EnumerationBudgetExceeded, IntegrityError, ManifestError,
                     NonConvergence)
from .experiments import run_manifest
from .knowledge import KnowledgeState, knowledge_closure
from .manifest import Manifest
from .montecarlo import (exact_expected_payoffs, expected_payoffs, rep_rng,
                         simulate_once)
from .network import (RealizedNetwork, format_replay, load_replay,
                      parse_replay, sample_learning_network)
from .payoffs import FirmPayoff, PayoffReport, payoff_profile
from .reproduce import CheckResult, baseline_equilibrium, run_check

__version__ = "0.1.0"

__all__ = [
    "borel_mass", "borel_total_progeny_pmf", "budget_phase",
    "classify_lambda", "criticality_report", "direct_eq_rate",
    "giant_prediction", "giant_share", "optimal_patent_share",
    "patent_profit_curve", "solve_investment", "spectral_radius",
    "CostSpec", "FirmProfile", "PayoffSpec", "SolverConfig", "WorldConfig",
    "budget_profile", "uniform_profiles",
    "count_proprietary_exact", "count_proprietary_ie",
    "enumerate_proprietary",
    "EquilibriumResult", "best_response_q", "beta_equilibrium",
    "budget_equilibrium", "intervention_scan", "patents_equilibrium",
    "public_equilibrium", "symmetric_equilibrium", "tau_summary",
    "variant_equilibrium",
    "CompetitorCapExceeded", "ConfigError", "EnumerationBudgetExceeded",
    "IntegrityError", "ManifestError", "NonConvergence",
    "run_manifest",
    "KnowledgeState", "knowledge_closure",
    "Manifest",
    "exact_expected_payoffs", "expected_payoffs", "rep_rng", "simulate_once",
    "RealizedNetwork", "format_replay", "load_replay", "parse_replay",
    "sample_learning_network",
    "FirmPayoff", "PayoffReport", "payoff_profile",
    "CheckResult", "baseline_equilibrium", "run_check",
]
