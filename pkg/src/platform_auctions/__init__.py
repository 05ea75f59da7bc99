"""Platform auction mechanisms, prior-free benchmarks, and experiments.

Submodules:
    distributions  value distributions (piecewise exponential and friends)
    ironing        virtual values and quantile-space ironing
    mechanisms     single-profile mechanism evaluation
    benchmarks     two-level lottery benchmark and posted-price benchmarks
    experiments    Monte Carlo / enumeration harness
    acceptance     end-to-end numeric checks with pinned seeds
"""

__version__ = "0.1.0"

from .errors import ConstructionError, DegenerateInputError, DomainError
from ._kernels import backend_name
from .distributions import (Atom, Distribution, EqualRevenue, MixedDistribution,
                            PiecewiseConstantFn, PointMass, PowerLaw, Uniform,
                            build_from_virtual_values, distribution_from_json,
                            equal_revenue, eval_cdf, eval_quantile, exponential,
                            lb_family, piecewise_exponential, point_mass,
                            power_law, sample, uniform)
from .ironing import (Objective, IronedVirtualFunction, PROFIT, RESIDUAL_SURPLUS,
                      SURPLUS, iron, ironed_value, lower_convex_hull,
                      virtual_value)
from .mechanisms import (ExpectedOutcome, MechanismSpec, ValuationProfile,
                         expected_posting_revenue, monopoly_price_cdf,
                         objective_value, optimal_lottery_price, rsol_exact,
                         run_ironed_maximizer, run_lottery, run_mechanism,
                         run_mixture, run_one_level_lottery, run_ratio_auction,
                         run_rsol_partition, run_two_level_lottery, run_vickrey,
                         sample_monopoly_prices, worst_case_platform)
from .benchmarks import (BenchmarkResult, benchmark, benchmark_n2_closed_form,
                         best_one_level_lottery, profit_benchmarks,
                         truncate_profile)
from .experiments import (Estimate, RatioReport, RuinRoot, adoption_advantage,
                          balanced_check, balanced_probability,
                          bm2_vs_myerson_profit, er_mean_estimate,
                          er_posting_revenue_curve, expected_benchmark,
                          expected_min_two_exact, exponential_benchmark_integral,
                          inscribed_triangle_check, lb_standard_auctions,
                          mc_expectation, monopoly_posting_curve,
                          monopoly_revenue, n2_grid, random_profiles,
                          rsol_proof_checks, rsol_ratio_sweep, ruin_root,
                          thin_tail_example, vickrey2_vs_monopoly,
                          worst_case_ratio_grid)
