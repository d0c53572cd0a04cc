#include "assp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "assp/error.hpp"

namespace assp {

OptimumEstimate estimate_optimum(const ProblemSpec& spec, const Hyperparams& hp, long budget,
                                 std::uint64_t seed, const MonteCarloObjective& evaluator) {
  Hyperparams reference = hp;
  reference.T = budget;
  reference.tau = 0;

  std::vector<Vector> sum;
  RunOptions options;
  options.thin_every = static_cast<std::size_t>(std::max(budget, 1L)) + 1;
  options.on_row = [&sum](long t, const std::vector<Vector>& x, const std::vector<Observation>&,
                          RunTrace&) {
    if (t == 0) return;
    if (sum.empty()) {
      sum = x;
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) sum[i] += x[i];
    }
  };
  run_synchronous(spec, reference, seed, options);

  OptimumEstimate out;
  if (budget <= 0) {
    out.x_ref = spec.initial_point();
  } else {
    out.x_ref = std::move(sum);
    for (auto& xi : out.x_ref) xi /= static_cast<double>(budget);
  }
  out.f_star = evaluator(out.x_ref);
  return out;
}

namespace {

void require_f_hat(const RunTrace& trace) {
  for (std::size_t k = 1; k < trace.rows.size(); ++k) {
    if (std::isnan(trace.rows[k].f_hat)) {
      throw InvalidConfig("trace was recorded without an objective evaluator");
    }
  }
}

ViolationSeries clipped_prefix(const RunTrace& trace, bool delayed) {
  ViolationSeries out;
  if (trace.rows.size() < 2) return out;
  const auto& first = delayed ? trace.rows[1].delayed_slack : trace.rows[1].current_slack;
  const auto n_duals = static_cast<std::size_t>(first.size());
  out.per_dual.resize(n_duals);
  Vector running = Vector::Zero(first.size());
  for (std::size_t k = 1; k < trace.rows.size(); ++k) {
    const auto& row = trace.rows[k];
    running += delayed ? row.delayed_slack : row.current_slack;
    double total = 0.0;
    for (std::size_t d = 0; d < n_duals; ++d) {
      const double v = std::max(running[static_cast<Eigen::Index>(d)], 0.0);
      out.per_dual[d].t.push_back(row.t);
      out.per_dual[d].value.push_back(v);
      total += v;
    }
    out.aggregate.t.push_back(row.t);
    out.aggregate.value.push_back(total);
  }
  return out;
}

}  // namespace

Series cumulative_suboptimality(const RunTrace& trace, double f_star) {
  require_f_hat(trace);
  Series out;
  double running = 0.0;
  for (std::size_t k = 1; k < trace.rows.size(); ++k) {
    running += trace.rows[k].f_hat - f_star;
    out.t.push_back(trace.rows[k].t);
    out.value.push_back(running);
  }
  return out;
}

Series running_suboptimality(const RunTrace& trace, double f_star) {
  Series out = cumulative_suboptimality(trace, f_star);
  for (std::size_t k = 0; k < out.size(); ++k) out.value[k] /= static_cast<double>(out.t[k]);
  return out;
}

ViolationSeries delayed_violation(const RunTrace& trace) { return clipped_prefix(trace, true); }

ViolationSeries current_violation(const RunTrace& trace) { return clipped_prefix(trace, false); }

double fit_rate(const Series& series, double burn_in) {
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw InvalidConfig("burn_in must lie in [0, 1)");
  const auto start = static_cast<std::size_t>(std::floor(burn_in * static_cast<double>(series.size())));
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t k = start; k < series.size(); ++k) {
    if (series.t[k] > 0 && series.value[k] > 0.0 && std::isfinite(series.value[k])) {
      lx.push_back(std::log(static_cast<double>(series.t[k])));
      ly.push_back(std::log(series.value[k]));
    }
  }
  if (lx.size() < 10) {
    throw DegenerateSeries("only " + std::to_string(lx.size()) +
                           " positive points after burn-in; need 10");
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (sxx == 0.0) throw DegenerateSeries("all retained points share one t");
  return sxy / sxx;
}

Series average_series(const std::vector<Series>& runs) {
  if (runs.empty()) return {};
  Series out = runs.front();
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].t != out.t) throw DimensionMismatch("series are indexed differently");
    for (std::size_t k = 0; k < out.size(); ++k) out.value[k] += runs[r].value[k];
  }
  for (auto& v : out.value) v /= static_cast<double>(runs.size());
  return out;
}

AssumptionEstimates audit_assumptions(const ProblemSpec& spec, std::size_t n_samples,
                                      std::uint64_t seed) {
  spec.validate();
  if (n_samples < 100) throw InvalidConfig("audit needs at least 100 samples");
  constexpr std::uint64_t kPointSeed = 0x5eed5eed;
  constexpr std::size_t kRandomPoints = 16;
  const std::size_t n = spec.n_nodes();

  // Stacked feasible points: the domain center plus fixed random points.
  std::vector<std::vector<Vector>> points;
  points.push_back(spec.initial_point());
  {
    std::vector<Vector> center(n);
    for (NodeId i = 0; i < n; ++i) center[i] = spec.domains[i].center();
    points.push_back(std::move(center));
  }
  for (std::size_t k = 0; k < kRandomPoints; ++k) {
    std::vector<Vector> x(n);
    for (NodeId i = 0; i < n; ++i) {
      CounterRng rng(kPointSeed, Stream::audit, i, k);
      const auto& d = spec.domains[i];
      Vector u(d.lo.size());
      for (Eigen::Index c = 0; c < u.size(); ++c) u[c] = rng.uniform(d.lo[c], d.hi[c]);
      x[i] = project(d, u);
    }
    points.push_back(std::move(x));
  }

  AssumptionEstimates est;
  const std::size_t n_duals = spec.n_duals();
  const auto offsets = spec.dual_offsets();

  // One accumulator per (dual row, differentiated argument).
  std::vector<std::vector<double>> grad_h_slots(n_duals);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& x = points[k];
    std::vector<double> grad_f(n, 0.0);
    Vector slack2 = Vector::Zero(static_cast<Eigen::Index>(n_duals));
    for (auto& slots : grad_h_slots) slots.assign(slots.size(), 0.0);

    for (std::size_t s = 0; s < n_samples; ++s) {
      EvaluationPoint at;
      at.x = x;
      for (NodeId i = 0; i < n; ++i) {
        CounterRng rng(seed, Stream::audit, i, k * n_samples + s);
        at.theta.push_back(spec.samplers[i](rng));
        grad_f[i] += objective_grad(spec, i, x[i], at.theta[i]).squaredNorm();
      }
      if (n_duals == 0) continue;
      slack2 += constraint_slack(spec, at).cwiseAbs2();

      if (spec.constraints.kind == ConstraintFamily::Kind::pairwise) {
        for (std::size_t e = 0; e < spec.graph.n_edges(); ++e) {
          const auto [i, j] = spec.graph.edge(e);
          auto& slots = grad_h_slots[e];
          slots.resize(2, 0.0);
          slots[0] += constraint_grad(spec, e, Argument::first, x[i], x[j], at.theta[i],
                                      at.theta[j])
                          .squaredNorm();
          slots[1] += constraint_grad(spec, e, Argument::second, x[i], x[j], at.theta[i],
                                      at.theta[j])
                          .squaredNorm();
        }
      } else {
        for (NodeId owner = 0; owner < n; ++owner) {
          const auto& block = spec.constraints.neighborhood[owner];
          if (block.count == 0) continue;
          std::vector<Vector> xs;
          std::vector<Observation> thetas;
          for (NodeId j : block.participants) {
            xs.push_back(x[j]);
            thetas.push_back(at.theta[j]);
          }
          for (std::size_t m = 0; m < block.participants.size(); ++m) {
            const Matrix jac = block.jacobian(m, xs, thetas);
            for (Eigen::Index r = 0; r < jac.rows(); ++r) {
              auto& slots = grad_h_slots[offsets[owner] + static_cast<std::size_t>(r)];
              slots.resize(block.participants.size(), 0.0);
              slots[m] += jac.row(r).squaredNorm();
            }
          }
        }
      }
    }

    const double inv = 1.0 / static_cast<double>(n_samples);
    for (double g : grad_f) est.sigma_f2 = std::max(est.sigma_f2, g * inv);
    for (const auto& slots : grad_h_slots) {
      for (double g : slots) est.sigma_h2 = std::max(est.sigma_h2, g * inv);
    }
    if (n_duals > 0) est.sigma_lambda2 = std::max(est.sigma_lambda2, slack2.maxCoeff() * inv);
  }

  // Empirical Lipschitz constant of F over secants between the points.
  MonteCarloObjective objective(spec, n_samples, seed);
  std::vector<double> values;
  for (const auto& x : points) values.push_back(objective(x));
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      double dist2 = 0.0;
      for (NodeId i = 0; i < n; ++i) dist2 += (points[a][i] - points[b][i]).squaredNorm();
      if (dist2 <= 0.0) continue;
      est.lipschitz_f = std::max(est.lipschitz_f, std::abs(values[a] - values[b]) / std::sqrt(dist2));
    }
  }
  return est;
}

}  // namespace assp
