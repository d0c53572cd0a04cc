#include "assp/apps/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "assp/error.hpp"

namespace assp::apps {

namespace {

std::string mu_key(const char* what, std::size_t i) { return std::string(what) + "_" + std::to_string(i); }

double mu_signal(const PricingConfig& cfg, std::uint64_t seed, std::size_t i, long t) {
  CounterRng rng(seed, Stream::app, i, static_cast<std::uint64_t>(t));
  return cfg.mu_tx_power * rng.exponential(cfg.direct_gain_mean);
}

double sinr_db(double signal, double noise, double interference) {
  return 10.0 * std::log10(signal / (noise + interference));
}

// Per-SCBS lookup: position of MU i within x_n, or npos.
struct Layout {
  std::vector<std::vector<std::size_t>> channels;
  std::vector<std::vector<std::size_t>> slot;

  explicit Layout(const PricingConfig& cfg) {
    for (NodeId n = 0; n < cfg.N; ++n) {
      channels.push_back(cfg.channels(n));
      std::vector<std::size_t> s(cfg.M, static_cast<std::size_t>(-1));
      for (std::size_t k = 0; k < channels.back().size(); ++k) s[channels.back()[k]] = k;
      slot.push_back(std::move(s));
    }
  }
};

}  // namespace

void PricingConfig::validate() const {
  if (M == 0 || N == 0) throw InvalidConfig("pricing: M and N must be positive");
  if (assignment.size() != M) throw InvalidConfig("pricing: assignment needs one set per MU");
  for (const auto& set : assignment) {
    if (set.empty()) throw InvalidConfig("pricing: every MU needs at least one SCBS");
    for (NodeId n : set) {
      if (n >= N) throw InvalidConfig("pricing: assignment names an unknown SCBS");
    }
    if (std::set<NodeId>(set.begin(), set.end()).size() != set.size()) {
      throw InvalidConfig("pricing: assignment lists an SCBS twice");
    }
  }
  for (NodeId n = 0; n < N; ++n) {
    if (channels(n).empty()) throw InvalidConfig("pricing: SCBS " + std::to_string(n) + " serves no MU");
  }
  if (mu.size() != N || nu.size() != N) throw InvalidConfig("pricing: mu and nu need N entries");
  if (gamma_db.size() != M) throw InvalidConfig("pricing: gamma_db needs M entries");
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  for (std::size_t n = 0; n < N; ++n) {
    if (!positive(mu[n]) || !positive(nu[n])) throw InvalidConfig("pricing: mu and nu must be positive");
  }
  for (double g : gamma_db) {
    if (!std::isfinite(g)) throw InvalidConfig("pricing: gamma_db must be finite");
  }
  if (!positive(W) || !positive(c)) throw InvalidConfig("pricing: W and c must be positive");
  if (!positive(C_min) || !positive(C_max) || C_min > C_max) {
    throw InvalidConfig("pricing: need 0 < C_min <= C_max");
  }
  if (!(interference_gain_mean >= 0.0) || !(channel_gain_mean >= 0.0) ||
      !(direct_gain_mean >= 0.0)) {
    throw InvalidConfig("pricing: gain means must be nonnegative");
  }
  if (!positive(noise_power) || !positive(mu_tx_power)) {
    throw InvalidConfig("pricing: noise_power and mu_tx_power must be positive");
  }
  try {
    graph();
  } catch (const Error& e) {
    throw InvalidConfig(std::string("pricing: interference graph: ") + e.what());
  }
}

double PricingConfig::gamma_linear(std::size_t i) const {
  return std::pow(10.0, gamma_db.at(i) / 10.0);
}

std::vector<std::size_t> PricingConfig::channels(NodeId n) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (std::find(assignment[i].begin(), assignment[i].end(), n) != assignment[i].end()) {
      out.push_back(i);
    }
  }
  return out;
}

NetworkGraph PricingConfig::graph() const {
  std::set<Edge> edges;
  for (const auto& set : assignment) {
    for (NodeId a : set) {
      for (NodeId b : set) {
        if (a < b) edges.insert({a, b});
      }
    }
  }
  return build_graph(N, {edges.begin(), edges.end()});
}

double power_allocation(const PricingConfig& cfg, NodeId n, double x, double h) {
  const double p = cfg.W / (cfg.c * cfg.mu.at(n) + cfg.nu.at(n) * x) - 1.0 / h;
  return std::max(p, 0.0);
}

ProblemSpec build_pricing_problem(const PricingConfig& cfg) {
  cfg.validate();
  const Layout layout(cfg);
  ProblemSpec spec;
  spec.name = "pricing";
  spec.graph = cfg.graph();

  for (NodeId n = 0; n < cfg.N; ++n) {
    const std::size_t k_n = layout.channels[n].size();
    const auto K = static_cast<Eigen::Index>(k_n);
    spec.dims.push_back(k_n);
    spec.domains.push_back(DomainSpec::sum_interval(k_n, cfg.C_min, cfg.C_max, 0.0, cfg.C_max));

    const double g_mean = cfg.interference_gain_mean;
    const double h_mean = cfg.channel_gain_mean;
    spec.samplers.push_back([K, g_mean, h_mean](CounterRng& rng) {
      Observation theta(2 * K);
      for (Eigen::Index k = 0; k < K; ++k) theta[k] = rng.exponential(g_mean);
      for (Eigen::Index k = 0; k < K; ++k) theta[K + k] = rng.exponential(h_mean);
      return theta;
    });

    NodeObjective obj;
    obj.value = [cfg, n, K](const Vector& x, const Observation& theta) {
      double revenue = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) {
        const double p = power_allocation(cfg, n, x[k], theta[K + k]);
        if (p > 0.0) revenue += x[k] * theta[k] * p;
      }
      return -revenue;
    };
    obj.gradient = [cfg, n, K](const Vector& x, const Observation& theta) {
      Vector g = Vector::Zero(K);
      const double cm = cfg.c * cfg.mu[n];
      for (Eigen::Index k = 0; k < K; ++k) {
        if (power_allocation(cfg, n, x[k], theta[K + k]) <= 0.0) continue;
        const double a = cm + cfg.nu[n] * x[k];
        g[k] = -theta[k] * (cfg.W * cm / (a * a) - 1.0 / theta[K + k]);
      }
      return g;
    };
    spec.objectives.push_back(std::move(obj));

    if (cfg.initial_price > 0.0) {
      spec.initial.push_back(Vector::Constant(K, cfg.initial_price));
    }
  }

  // Each MU row sits with its lowest-index interferer; all interferers of one
  // MU are pairwise adjacent, hence inside that node's closed neighborhood.
  spec.constraints = ConstraintFamily::none(cfg.N);
  std::vector<std::vector<std::size_t>> owned(cfg.N);
  for (std::size_t i = 0; i < cfg.M; ++i) {
    owned[*std::min_element(cfg.assignment[i].begin(), cfg.assignment[i].end())].push_back(i);
  }
  for (NodeId owner = 0; owner < cfg.N; ++owner) {
    const auto& rows = owned[owner];
    if (rows.empty()) continue;
    std::set<NodeId> members;
    for (std::size_t i : rows) members.insert(cfg.assignment[i].begin(), cfg.assignment[i].end());
    NeighborhoodConstraint block;
    block.participants.assign(members.begin(), members.end());
    block.count = rows.size();
    const auto participants = block.participants;

    block.value = [cfg, layout, rows, participants](const std::vector<Vector>& xs,
                                                    const std::vector<Observation>& thetas) {
      Vector slack(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t i = rows[r];
        double interference = 0.0;
        for (std::size_t k = 0; k < participants.size(); ++k) {
          const NodeId n = participants[k];
          const std::size_t s = layout.slot[n][i];
          if (s == static_cast<std::size_t>(-1)) continue;
          const auto K = static_cast<Eigen::Index>(layout.channels[n].size());
          const auto e = static_cast<Eigen::Index>(s);
          interference += thetas[k][e] * power_allocation(cfg, n, xs[k][e], thetas[k][K + e]);
        }
        slack[static_cast<Eigen::Index>(r)] = interference - cfg.gamma_linear(i);
      }
      return slack;
    };
    block.jacobian = [cfg, layout, rows, participants](std::size_t k, const std::vector<Vector>& xs,
                                                       const std::vector<Observation>& thetas) {
      const NodeId n = participants[k];
      const auto K = static_cast<Eigen::Index>(layout.channels[n].size());
      Matrix jac = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), K);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t s = layout.slot[n][rows[r]];
        if (s == static_cast<std::size_t>(-1)) continue;
        const auto e = static_cast<Eigen::Index>(s);
        const double x = xs[k][e];
        if (power_allocation(cfg, n, x, thetas[k][K + e]) <= 0.0) continue;
        const double a = cfg.c * cfg.mu[n] + cfg.nu[n] * x;
        jac(static_cast<Eigen::Index>(r), e) = -thetas[k][e] * cfg.nu[n] * cfg.W / (a * a);
      }
      return jac;
    };
    spec.constraints.neighborhood[owner] = std::move(block);
  }

  spec.validate();
  return spec;
}

RowHook pricing_recorder(const PricingConfig& cfg) {
  const Layout layout(cfg);
  return [cfg, layout](long t, const std::vector<Vector>& x, const std::vector<Observation>& theta,
                       RunTrace& trace) {
    double revenue = 0.0;
    std::vector<double> interference(cfg.M, 0.0);
    for (NodeId n = 0; n < cfg.N; ++n) {
      const auto K = static_cast<Eigen::Index>(layout.channels[n].size());
      for (Eigen::Index k = 0; k < K; ++k) {
        const double p = power_allocation(cfg, n, x[n][k], theta[n][K + k]);
        const double gp = theta[n][k] * p;
        revenue += x[n][k] * gp;
        interference[layout.channels[n][static_cast<std::size_t>(k)]] += gp;
      }
    }
    trace.extras["revenue"].push_back(revenue);
    for (std::size_t i = 0; i < cfg.M; ++i) {
      trace.extras[mu_key("interference", i)].push_back(interference[i]);
      trace.extras[mu_key("signal", i)].push_back(mu_signal(cfg, trace.seed, i, t));
    }
  };
}

std::vector<double> naive_baseline(const PricingConfig& cfg, std::uint64_t seed, long T) {
  const ProblemSpec spec = build_pricing_problem(cfg);
  const Layout layout(cfg);
  if (T < 1) throw InvalidConfig("naive_baseline: T must be positive");
  std::vector<double> signal(cfg.M, 0.0), interference(cfg.M, 0.0);
  for (long t = 0; t < T; ++t) {
    for (NodeId n = 0; n < cfg.N; ++n) {
      const Observation theta = sample_observation(spec, seed, n, t);
      for (std::size_t k = 0; k < layout.channels[n].size(); ++k) {
        interference[layout.channels[n][k]] += theta[static_cast<Eigen::Index>(k)];
      }
    }
    for (std::size_t i = 0; i < cfg.M; ++i) signal[i] += mu_signal(cfg, seed, i, t);
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < cfg.M; ++i) {
    out.push_back(sinr_db(signal[i] / T, cfg.noise_power, interference[i] / T));
  }
  return out;
}

std::vector<double> sinr_report(const PricingConfig& cfg, const RunTrace& trace) {
  const long T = trace.horizon();
  const long first = T / 2 + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < cfg.M; ++i) {
    const auto& sig = trace.extras.at(mu_key("signal", i));
    const auto& intf = trace.extras.at(mu_key("interference", i));
    double s = 0.0, f = 0.0;
    long count = 0;
    for (long t = std::max(first, 0L); t <= T; ++t) {
      s += sig[static_cast<std::size_t>(t)];
      f += intf[static_cast<std::size_t>(t)];
      ++count;
    }
    out.push_back(sinr_db(s / count, cfg.noise_power, f / count));
  }
  return out;
}

Series revenue_series(const PricingConfig& cfg, const RunTrace& trace) {
  (void)cfg;
  const auto& revenue = trace.extras.at("revenue");
  Series out;
  double sum = 0.0;
  for (long t = 1; t <= trace.horizon(); ++t) {
    sum += revenue[static_cast<std::size_t>(t)];
    out.t.push_back(t);
    out.value.push_back(sum / static_cast<double>(t));
  }
  return out;
}

double limiting_revenue(const RunTrace& trace, double fraction) {
  const auto& revenue = trace.extras.at("revenue");
  const long T = trace.horizon();
  if (T < 1) throw DegenerateSeries("limiting_revenue needs at least one step");
  const long count = std::max(1L, static_cast<long>(std::floor(fraction * static_cast<double>(T))));
  double sum = 0.0;
  for (long t = T - count + 1; t <= T; ++t) sum += revenue[static_cast<std::size_t>(t)];
  return sum / static_cast<double>(count);
}

}  // namespace assp::apps
