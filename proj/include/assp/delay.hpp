#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "assp/problem.hpp"

namespace assp {

/// Per-node staleness process tau_i(t) with bound tau_max.
struct DelaySchedule {
  enum class Kind { zero, fixed, uniform_random, custom_table };

  Kind kind = Kind::zero;
  int tau_max = 0;
  /// kind == fixed: per-node delay (a single entry applies to every node).
  std::vector<int> fixed;
  /// kind == custom_table: raw delays table[t % rows][node].
  std::vector<std::vector<int>> table;
  std::uint64_t seed = 0;

  static DelaySchedule zero();
  static DelaySchedule fixed_delay(int tau);
  static DelaySchedule uniform_random(int tau_max, std::uint64_t seed);

  /// Raw delay tau_i(t) before the freshness clamp; always in [0, tau_max].
  int raw_delay(long t, NodeId i) const;
  void validate(std::size_t n_nodes) const;
};

DelaySchedule::Kind parse_delay_kind(const std::string& name);
std::string to_string(DelaySchedule::Kind kind);

/// Delayed index [t]_i = max(prev, t - tau_i(t), 0). The max with the
/// previous index keeps only the freshest received copy, so [t]_i never
/// moves backwards.
long resolve(const DelaySchedule& schedule, long t, NodeId i, long prev);

/// Window of the last tau+1 primal iterates of every node.
class StalenessBuffer {
 public:
  StalenessBuffer(std::size_t n_nodes, int tau);

  /// Stores x^i_t. Times must be recorded in increasing order per node;
  /// entries older than t - tau are evicted.
  void record(long t, NodeId i, const Vector& x);
  /// Returns x^i_s; throws OutOfWindow when s is not buffered.
  const Vector& fetch(long s, NodeId i) const;

  std::size_t depth() const { return depth_; }
  long latest(NodeId i) const { return latest_.at(i); }

 private:
  std::size_t depth_;
  std::vector<std::vector<Vector>> slots_;
  std::vector<long> latest_;
};

}  // namespace assp
