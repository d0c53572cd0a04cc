#pragma once

#include <cstdint>
#include <vector>

#include "assp/graph.hpp"
#include "assp/metrics.hpp"
#include "assp/problem.hpp"
#include "assp/saddle.hpp"
#include "assp/trace.hpp"

namespace assp::apps {

/// Interference pricing between small-cell base stations (SCBSs, the agents)
/// and macro users (MUs). SCBS n charges its users a price x_n^i on MU i's
/// subchannel; users answer with the power of power_allocation().
struct PricingConfig {
  std::size_t M = 2;  // MUs (one subchannel each)
  std::size_t N = 3;  // SCBSs
  /// SCBSs interfering with MU i, 0-based.
  std::vector<std::vector<NodeId>> assignment{{0, 1}, {1, 2}};
  /// Means of the exponential gains: g_{ni} toward the MU, h_n^i inside the cell.
  double interference_gain_mean = 3.0;
  double channel_gain_mean = 3.0;
  /// Bandwidth per subcarrier, in MHz.
  double W = 1.0;
  double c = 0.1;
  std::vector<double> mu{1.0, 1.0, 1.0};
  std::vector<double> nu{1.0, 1.0, 1.0};
  std::vector<double> gamma_db{-3.0, -3.0};
  double C_min = 0.9;
  double C_max = 20.0;
  /// MU receiver model used for SINR reporting only.
  double noise_power = 1.0;
  double mu_tx_power = 370.0;
  double direct_gain_mean = 3.0;
  /// Starting price on every channel; nonpositive means the domain center.
  double initial_price = 4.0;

  static PricingConfig reference_defaults() { return {}; }

  /// Throws InvalidConfig.
  void validate() const;
  double gamma_linear(std::size_t i) const;
  /// MUs whose subchannel SCBS n prices, ascending. Index k of x_n refers to
  /// channels(n)[k].
  std::vector<std::size_t> channels(NodeId n) const;
  /// SCBSs are linked when they interfere with a common MU.
  NetworkGraph graph() const;
};

/// p = (W / (c mu_n + nu_n x) - 1/h)_+.
double power_allocation(const PricingConfig& cfg, NodeId n, double x, double h);

/// Minimizes minus the expected revenue sum x g p subject to one interference
/// row per MU, owned by its lowest-index SCBS. theta^n = (g per channel,
/// h per channel).
ProblemSpec build_pricing_problem(const PricingConfig& cfg);

/// Row hook recording "revenue", "interference_<i>" and "signal_<i>" extras.
RowHook pricing_recorder(const PricingConfig& cfg);

/// Time-average SINR (dB) per MU when every SCBS transmits at unit power.
std::vector<double> naive_baseline(const PricingConfig& cfg, std::uint64_t seed, long T);

/// SINR (dB) per MU from a recorded run, averaged over the final half.
std::vector<double> sinr_report(const PricingConfig& cfg, const RunTrace& trace);

/// Prefix mean of the instantaneous revenue over rows 1..T.
Series revenue_series(const PricingConfig& cfg, const RunTrace& trace);

/// Mean instantaneous revenue over the final `fraction` of rows 1..T.
double limiting_revenue(const RunTrace& trace, double fraction = 0.25);

}  // namespace assp::apps
