#pragma once

#include <cstddef>

#include "assp/saddle.hpp"

namespace assp {

/// Empirical stand-ins for the bounded-moment and Lipschitz assumptions.
struct AssumptionEstimates {
  double sigma_f2 = 0.0;       // max_i E||grad f^i||^2
  double sigma_h2 = 0.0;       // max E||grad h||^2 over constraint rows
  double sigma_lambda2 = 0.0;  // max E[(h - gamma)^2]
  double lipschitz_f = 0.0;    // L_f of F
};

/// Aggregates controlling the dual regularizer choice.
struct AdvisorConstants {
  double L2 = 0.0;  // max(sigma_f2, sigma_h2)
  double K = 0.0;
  double K1 = 0.0;
  double K2 = 0.0;
  double K3 = 0.0;
  double K4 = 0.0;
  /// delta-independent part of K4: K4 = 2 delta^2 eps^2 + C.
  double C = 0.0;
  double discriminant = 0.0;  // 1 - 8 C eps^2
};

struct Advice {
  Hyperparams hyperparams;
  AdvisorConstants constants;
};

/// K4 evaluated at a given delta.
double k4(const AssumptionEstimates& est, std::size_t n_nodes, std::size_t n_duals, int tau,
          double epsilon, double delta);

/// Theory-driven step size and regularizer: eps = 1/sqrt(T) and the smallest
/// delta with K4(delta) - delta <= 0. Throws NoFeasibleDelta when
/// 1 - 8 C eps^2 < 0. `n_duals` is M, the number of multipliers.
Advice advise(const AssumptionEstimates& est, std::size_t n_nodes, std::size_t n_duals, int tau,
              long T);

}  // namespace assp
