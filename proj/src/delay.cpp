#include "assp/delay.hpp"

#include <algorithm>

#include "assp/error.hpp"
#include "assp/rng.hpp"

namespace assp {

DelaySchedule DelaySchedule::zero() { return {}; }

DelaySchedule DelaySchedule::fixed_delay(int tau) {
  DelaySchedule s;
  s.kind = Kind::fixed;
  s.tau_max = tau;
  s.fixed = {tau};
  return s;
}

DelaySchedule DelaySchedule::uniform_random(int tau_max, std::uint64_t seed) {
  DelaySchedule s;
  s.kind = Kind::uniform_random;
  s.tau_max = tau_max;
  s.seed = seed;
  return s;
}

int DelaySchedule::raw_delay(long t, NodeId i) const {
  switch (kind) {
    case Kind::zero:
      return 0;
    case Kind::fixed:
      return fixed.size() == 1 ? fixed[0] : fixed.at(i);
    case Kind::uniform_random: {
      CounterRng rng(seed, Stream::delay, i, static_cast<std::uint64_t>(t));
      return static_cast<int>(rng.below(static_cast<std::uint64_t>(tau_max) + 1));
    }
    case Kind::custom_table:
      return table[static_cast<std::size_t>(t) % table.size()].at(i);
  }
  return 0;
}

void DelaySchedule::validate(std::size_t n_nodes) const {
  if (tau_max < 0) throw InvalidConfig("delay.tau_max must be >= 0");
  auto check = [&](int d) {
    if (d < 0 || d > tau_max) {
      throw InvalidConfig("delay " + std::to_string(d) + " outside [0, tau_max=" +
                          std::to_string(tau_max) + "]");
    }
  };
  switch (kind) {
    case Kind::zero:
      break;
    case Kind::fixed:
      if (fixed.size() != 1 && fixed.size() != n_nodes) {
        throw InvalidConfig("fixed delay needs one entry or one per node");
      }
      std::for_each(fixed.begin(), fixed.end(), check);
      break;
    case Kind::uniform_random:
      break;
    case Kind::custom_table:
      if (table.empty()) throw InvalidConfig("custom delay table is empty");
      for (const auto& row : table) {
        if (row.size() != n_nodes) throw InvalidConfig("custom delay row must cover every node");
        std::for_each(row.begin(), row.end(), check);
      }
      break;
  }
}

DelaySchedule::Kind parse_delay_kind(const std::string& name) {
  if (name == "zero") return DelaySchedule::Kind::zero;
  if (name == "fixed") return DelaySchedule::Kind::fixed;
  if (name == "uniform_random") return DelaySchedule::Kind::uniform_random;
  if (name == "custom_table") return DelaySchedule::Kind::custom_table;
  throw InvalidConfig("unknown delay kind '" + name + "'");
}

std::string to_string(DelaySchedule::Kind kind) {
  switch (kind) {
    case DelaySchedule::Kind::zero:
      return "zero";
    case DelaySchedule::Kind::fixed:
      return "fixed";
    case DelaySchedule::Kind::uniform_random:
      return "uniform_random";
    case DelaySchedule::Kind::custom_table:
      return "custom_table";
  }
  return "unknown";
}

long resolve(const DelaySchedule& schedule, long t, NodeId i, long prev) {
  const long candidate = t - schedule.raw_delay(t, i);
  return std::max({prev, candidate, 0L});
}

StalenessBuffer::StalenessBuffer(std::size_t n_nodes, int tau)
    : depth_(static_cast<std::size_t>(tau) + 1),
      slots_(n_nodes, std::vector<Vector>(depth_)),
      latest_(n_nodes, -1) {
  if (tau < 0) throw InvalidConfig("buffer depth needs tau >= 0");
}

void StalenessBuffer::record(long t, NodeId i, const Vector& x) {
  if (t < 0 || t <= latest_.at(i)) {
    throw OutOfWindow("record at t=" + std::to_string(t) + " after t=" +
                      std::to_string(latest_[i]));
  }
  // Skipped slots would otherwise hold stale data under a valid-looking time.
  if (latest_[i] >= 0 && t != latest_[i] + 1) {
    throw OutOfWindow("records must be consecutive");
  }
  slots_[i][static_cast<std::size_t>(t) % depth_] = x;
  latest_[i] = t;
}

const Vector& StalenessBuffer::fetch(long s, NodeId i) const {
  const long newest = latest_.at(i);
  const long oldest = std::max(0L, newest - static_cast<long>(depth_) + 1);
  if (newest < 0 || s < oldest || s > newest) {
    throw OutOfWindow("index " + std::to_string(s) + " outside [" + std::to_string(oldest) + ", " +
                      std::to_string(newest) + "] for node " + std::to_string(i));
  }
  return slots_[i][static_cast<std::size_t>(s) % depth_];
}

}  // namespace assp
