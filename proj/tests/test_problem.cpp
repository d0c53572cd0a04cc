#include <doctest.h>

#include <cmath>

#include "assp/error.hpp"
#include "assp/problem.hpp"
#include "oracles.hpp"

using namespace assp;
using oracle::random_vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

ProblemSpec two_node_proximity(double gamma) {
  ProblemSpec spec;
  spec.graph = path_graph(2);
  spec.dims = {2, 2};
  for (int i = 0; i < 2; ++i) {
    spec.objectives.push_back(squared_distance_objective());
    spec.samplers.push_back(point_mass(Vector::Zero(2)));
    spec.domains.push_back(DomainSpec::box(2, -5, 5));
  }
  spec.constraints.pairwise = {proximity_constraint(gamma), proximity_constraint(gamma)};
  spec.validate();
  return spec;
}

}  // namespace

TEST_CASE("projection examples") {
  const auto d = DomainSpec::sum_interval(2, 0.9, 20, 0.0, 20);
  CHECK((project(d, vec({1, 2})) - vec({1, 2})).norm() == 0.0);
  const Vector p = project(d, vec({0.2, 0.3}));
  CHECK(p[0] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
  // Grid search along the active facet x0 + x1 = 0.9.
  double best = 1e300, best_x = 0.0;
  for (long k = 0; k <= 9000000; ++k) {
    const double x0 = 0.9 * static_cast<double>(k) / 9e6;
    const double dist = std::pow(x0 - 0.2, 2) + std::pow(0.9 - x0 - 0.3, 2);
    if (dist < best) best = dist, best_x = x0;
  }
  CHECK(std::abs(p[0] - best_x) <= 1e-6);

  const auto box = DomainSpec::box(2, 0, 1);
  CHECK((project(box, vec({-1, 0.5})) - vec({0, 0.5})).norm() == 0.0);
}

TEST_CASE("projection matches Dykstra and is optimal, 100 random inputs") {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterRng rng(trial, Stream::audit, 2, 0);
    const auto n = static_cast<Eigen::Index>(1 + rng.below(5));
    const double lo = rng.uniform(-1, 0.5), hi = lo + rng.uniform(0.5, 3);
    const double a = rng.uniform(lo * n, hi * n);
    const double b = rng.uniform(a, hi * n + 1);
    const auto d = DomainSpec::sum_interval(static_cast<std::size_t>(n), a, b, lo, hi);
    const Vector u = random_vector(rng, n, lo - 3, hi + 3);
    const Vector p = project(d, u);
    CHECK(d.contains(p, 1e-12));
    CHECK((p - oracle::dykstra(d, u)).norm() <= 1e-6);
    CHECK((project(d, p) - p).norm() <= 1e-12);
    // Variational inequality and distance optimality against feasible points.
    for (int k = 0; k < 100; ++k) {
      const Vector y = project(d, random_vector(rng, n, lo - 1, hi + 1));
      CHECK((u - p).dot(y - p) <= 1e-9);
      CHECK((p - u).norm() <= (y - u).norm() + 1e-9);
    }
  }
}

TEST_CASE("box projection is idempotent clamping") {
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterRng rng(trial, Stream::audit, 3, 0);
    const Vector lo = random_vector(rng, 3, -2, 0), hi = lo + random_vector(rng, 3, 0, 2);
    const auto d = DomainSpec::box(lo, hi);
    const Vector u = random_vector(rng, 3, -4, 4);
    const Vector p = project(d, u);
    CHECK((project(d, p) - p).norm() == 0.0);
    CHECK((p - oracle::dykstra(d, u)).norm() <= 1e-9);
  }
}

TEST_CASE("infeasible domains are rejected") {
  CHECK_THROWS_AS(DomainSpec::sum_interval(2, 5, 1, 0, 10), InfeasibleDomain);
  CHECK_THROWS_AS(DomainSpec::sum_interval(2, 30, 40, 0, 10), InfeasibleDomain);
  CHECK_THROWS_AS(DomainSpec::box(vec({1}), vec({0})), InfeasibleDomain);
  CHECK_THROWS_AS(DomainSpec::box(1, 0, INFINITY), InfeasibleDomain);
}

TEST_CASE("samplers") {
  ProblemSpec spec = two_node_proximity(1.0);
  spec.samplers[0] = exponential_sampler(1, 3.0);
  CHECK(sample_observation(spec, 7, 0, 12)[0] > 0.0);
  CHECK(sample_observation(spec, 7, 0, 12) == sample_observation(spec, 7, 0, 12));
  CHECK(sample_observation(spec, 7, 0, 12) != sample_observation(spec, 8, 0, 12));
  CHECK(sample_observation(spec, 7, 1, 3) == Vector::Zero(2));

  // Regression pairs: empirical means within 1% (absolute for zero means).
  spec.samplers[0] = regression_sampler(vec({2.0, -1.0}), 0.5);
  Vector mean_z = Vector::Zero(2);
  double mean_y2 = 0.0, mean_zy0 = 0.0;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) {
    const Vector th = sample_observation(spec, 3, 0, t);
    mean_z += th.head(2) / draws;
    mean_y2 += th[2] * th[2] / draws;
    mean_zy0 += th[0] * th[2] / draws;
  }
  CHECK(mean_z.cwiseAbs().maxCoeff() < 0.01);
  CHECK(mean_zy0 == doctest::Approx(2.0).epsilon(0.01));
  CHECK(mean_y2 == doctest::Approx(4.0 + 1.0 + 0.25).epsilon(0.01));
}

TEST_CASE("objective gradient examples") {
  ProblemSpec spec = two_node_proximity(1.0);
  spec.objectives[0] = least_squares_objective();
  spec.dims = {2, 2};
  const Vector theta = vec({1, 0, 1});  // z = e1, y = 1
  CHECK(objective_grad(spec, 0, Vector::Zero(2), theta) == vec({-1, 0}));
  spec.objectives[1] = constant_objective(4.0);
  CHECK(objective_grad(spec, 1, vec({3, 1}), theta) == Vector::Zero(2));
  CHECK_THROWS_AS(objective_grad(spec, 0, Vector::Zero(3), theta), DimensionMismatch);
}

TEST_CASE("proximity constraint values and subgradients") {
  ProblemSpec spec = two_node_proximity(1.0);
  const Vector z = Vector::Zero(2);
  CHECK(constraint_value(spec, 0, vec({1, 1}), vec({1, 1}), z, z) == -1.0);
  spec.constraints.pairwise[0] = proximity_constraint(0.0);
  CHECK(constraint_value(spec, 0, vec({1, 0}), vec({0, 0}), z, z) == 1.0);
  const Vector xi = vec({3, 4}), xj = vec({0, 0});
  CHECK((constraint_grad(spec, 0, Argument::first, xi, xj, z, z) - vec({0.6, 0.8})).norm() < 1e-15);
  CHECK((constraint_grad(spec, 0, Argument::second, xi, xj, z, z) + vec({0.6, 0.8})).norm() < 1e-15);
  CHECK(constraint_grad(spec, 0, Argument::first, xi, xi, z, z) == Vector::Zero(2));
  CHECK_THROWS_AS(constraint_value(spec, 0, vec({1}), xj, z, z), DimensionMismatch);
}

TEST_CASE("gradients match central differences at 100 random points") {
  ProblemSpec spec = two_node_proximity(0.5);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    CounterRng rng(trial, Stream::audit, 4, 0);
    const Vector x = random_vector(rng, 2, -3, 3), y = random_vector(rng, 2, -3, 3);
    const Vector theta = random_vector(rng, 3, -2, 2);
    const Vector c = random_vector(rng, 2, -2, 2);

    const auto ls = least_squares_objective();
    CHECK(oracle::gradient_close(ls.gradient(x, theta),
                                 oracle::central_gradient([&](const Vector& v) { return ls.value(v, theta); }, x)));
    const auto sq = squared_distance_objective();
    CHECK(oracle::gradient_close(sq.gradient(x, theta.head(2)),
                                 oracle::central_gradient([&](const Vector& v) { return sq.value(v, theta.head(2)); }, x)));
    const auto lin = linear_objective(c);
    CHECK(oracle::gradient_close(lin.gradient(x, theta),
                                 oracle::central_gradient([&](const Vector& v) { return lin.value(v, theta); }, x)));

    const Vector z = Vector::Zero(2);
    auto h_first = [&](const Vector& v) { return constraint_value(spec, 0, v, y, z, z); };
    auto h_second = [&](const Vector& v) { return constraint_value(spec, 0, x, v, z, z); };
    CHECK(oracle::gradient_close(constraint_grad(spec, 0, Argument::first, x, y, z, z),
                                 oracle::central_gradient(h_first, x)));
    CHECK(oracle::gradient_close(constraint_grad(spec, 0, Argument::second, x, y, z, z),
                                 oracle::central_gradient(h_second, y)));
  }
}

TEST_CASE("neighborhood form reproduces pairwise slacks and gradients") {
  ProblemSpec pairwise;
  pairwise.graph = path_graph(3);
  pairwise.dims = {2, 2, 2};
  for (int i = 0; i < 3; ++i) {
    pairwise.objectives.push_back(squared_distance_objective());
    pairwise.samplers.push_back(point_mass(Vector::Zero(2)));
    pairwise.domains.push_back(DomainSpec::box(2, -5, 5));
  }
  for (std::size_t e = 0; e < pairwise.graph.n_edges(); ++e) {
    pairwise.constraints.pairwise.push_back(proximity_constraint(0.1 * static_cast<double>(e + 1)));
  }
  pairwise.validate();
  const ProblemSpec hood = to_neighborhood_form(pairwise);
  CHECK(hood.n_duals() == pairwise.n_duals());
  CHECK(hood.dual_offsets() == pairwise.dual_offsets());
  const auto& block = hood.constraints.neighborhood[1];
  CHECK(block.participants == std::vector<NodeId>{0, 1, 2});
  CHECK(block.count == 2);
  CounterRng rng(5, Stream::audit, 5, 0);
  std::vector<Vector> xs, th(3, Vector::Zero(2));
  for (int k = 0; k < 3; ++k) xs.push_back(random_vector(rng, 2, -1, 1));
  const Vector v = block.value(xs, th);
  const auto e10 = pairwise.graph.edge_index(1, 0), e12 = pairwise.graph.edge_index(1, 2);
  CHECK(v[0] == constraint_value(pairwise, e10, xs[1], xs[0], th[1], th[0]));
  CHECK(v[1] == constraint_value(pairwise, e12, xs[1], xs[2], th[1], th[2]));
  const Matrix j2 = block.jacobian(2, xs, th);
  CHECK(j2.row(0).norm() == 0.0);
  CHECK((j2.row(1).transpose() -
         constraint_grad(pairwise, e12, Argument::second, xs[1], xs[2], th[1], th[2]))
            .norm() == 0.0);
}

TEST_CASE("spec validation") {
  ProblemSpec spec = two_node_proximity(1.0);
  spec.constraints.pairwise[0].tolerance = -1.0;
  CHECK_THROWS_AS(spec.validate(), InvalidConfig);
  spec = two_node_proximity(1.0);
  spec.samplers.pop_back();
  CHECK_THROWS_AS(spec.validate(), InvalidConfig);
  spec = two_node_proximity(1.0);
  spec.dims = {2, 3};
  CHECK_THROWS(spec.validate());
}

TEST_CASE("Monte Carlo objective uses a fixed draw set") {
  ProblemSpec spec = two_node_proximity(1.0);
  spec.samplers[0] = exponential_sampler(2, 1.0);
  const MonteCarloObjective a(spec, 500, 11), b(spec, 500, 11), c(spec, 500, 12);
  const std::vector<Vector> x{Vector::Ones(2), Vector::Zero(2)};
  CHECK(a(x) == b(x));
  CHECK(a(x) != c(x));
  // E[1/2 ||1 - theta||^2] with theta ~ Exp(1) per coordinate = 2 * 1/2 * (0 + 1) = 1.
  CHECK(MonteCarloObjective(spec, 200000, 3)(x) == doctest::Approx(1.0).epsilon(0.02));
}
