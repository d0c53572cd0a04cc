#include "assp/advisor.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "assp/error.hpp"

namespace assp {

namespace {

struct Base {
  double L2;
  double K1;
  double C;
};

Base base_constants(const AssumptionEstimates& est, std::size_t n_nodes, std::size_t n_duals,
                    int tau) {
  const double N = static_cast<double>(n_nodes);
  const double M = static_cast<double>(n_duals);
  const double t = static_cast<double>(tau);
  Base b{};
  b.L2 = std::max(est.sigma_f2, est.sigma_h2);
  b.K1 = (N + M * M) * b.L2;
  b.C = 2.0 * (N + M * M) * b.L2 + (t + 1.0) * t * (b.K1 + 4.0 * est.lipschitz_f * std::sqrt(b.K1));
  return b;
}

}  // namespace

double k4(const AssumptionEstimates& est, std::size_t n_nodes, std::size_t n_duals, int tau,
          double epsilon, double delta) {
  const Base b = base_constants(est, n_nodes, n_duals, tau);
  const double N = static_cast<double>(n_nodes);
  const double M = static_cast<double>(n_duals);
  const double t = static_cast<double>(tau);
  const double K3 = delta * delta * epsilon * epsilon + (N + M * M) * b.L2;
  return 2.0 * K3 + (t + 1.0) * t * (b.K1 + 4.0 * est.lipschitz_f * std::sqrt(b.K1));
}

Advice advise(const AssumptionEstimates& est, std::size_t n_nodes, std::size_t n_duals, int tau,
              long T) {
  if (T < 1) throw InvalidHyperparams("advise needs T >= 1");
  if (tau < 0) throw InvalidHyperparams("advise needs tau >= 0");
  for (double v : {est.sigma_f2, est.sigma_h2, est.sigma_lambda2, est.lipschitz_f}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidHyperparams("assumption estimates must be finite and nonnegative");
    }
  }

  const double eps = 1.0 / std::sqrt(static_cast<double>(T));
  const Base b = base_constants(est, n_nodes, n_duals, tau);
  const double N = static_cast<double>(n_nodes);
  const double M = static_cast<double>(n_duals);

  Advice out;
  auto& c = out.constants;
  c.L2 = b.L2;
  c.K1 = b.K1;
  c.C = b.C;
  c.discriminant = 1.0 - 8.0 * b.C * eps * eps;
  if (c.discriminant < 0.0) {
    std::ostringstream msg;
    msg << "1 - 8 C eps^2 = " << c.discriminant << " < 0 with C = " << b.C << " and T = " << T
        << "; a horizon of at least T = " << std::ceil(8.0 * b.C) << " is needed";
    throw NoFeasibleDelta(msg.str());
  }

  // Smaller root of 2 eps^2 delta^2 - delta + C = 0, in cancellation-free form.
  double delta = 2.0 * b.C / (1.0 + std::sqrt(c.discriminant));
  // Rounding can leave K4(delta) a few ulps above delta; step up until the
  // inequality holds exactly in floating point.
  for (int k = 0; k < 1024 && k4(est, n_nodes, n_duals, tau, eps, delta) > delta; ++k) {
    delta = std::nextafter(delta, std::numeric_limits<double>::infinity());
  }

  c.K2 = M * est.sigma_lambda2 + (N + M * M) * b.L2 + tau * b.K1;
  c.K3 = delta * delta * eps * eps + (N + M * M) * b.L2;
  c.K4 = k4(est, n_nodes, n_duals, tau, eps, delta);
  c.K = 2.0 * c.K2 + 4.0 * tau * est.lipschitz_f * std::sqrt(b.K1);

  out.hyperparams.epsilon = eps;
  out.hyperparams.delta = delta;
  out.hyperparams.T = T;
  out.hyperparams.tau = tau;
  return out;
}

}  // namespace assp
