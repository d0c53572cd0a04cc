#include "assp/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "assp/error.hpp"

namespace assp::cli {

using nlohmann::json;

namespace {

// Reads typed values out of one JSON object and rejects unknown keys.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError(path_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) && !node_.at(key).is_null();
  }

  const json& raw(const std::string& key) { return node_.at(key); }
  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  template <typename T>
  void read(const std::string& k, T& out) {
    if (!has(k)) return;
    out = as<T>(node_.at(k), key(k));
  }

  template <typename T>
  static T as(const json& value, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!value.is_number()) throw ValidationError(where + ": expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!value.is_number_integer()) throw ValidationError(where + ": expected an integer");
        if (std::is_unsigned_v<T> && value.get<long long>() < 0) {
          throw ValidationError(where + ": expected a nonnegative integer");
        }
      }
      return value.get<T>();
    } catch (const json::exception&) {
      throw ValidationError(where + ": wrong type");
    }
  }

  void finish() const {
    for (const auto& [k, v] : node_.items()) {
      if (!seen_.count(k)) throw ValidationError(key(k) + ": unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

// A scalar broadcasts to `count` entries.
std::vector<double> per_item(const json& value, std::size_t count, const std::string& where) {
  if (value.is_number()) return std::vector<double>(count, value.get<double>());
  if (!value.is_array()) throw ValidationError(where + ": expected a number or an array");
  std::vector<double> out;
  for (const auto& v : value) out.push_back(Section::as<double>(v, where));
  return out;
}

std::vector<Edge> read_edges(const json& value, const std::string& where) {
  if (!value.is_array()) throw ValidationError(where + ": expected a list of [i, j] pairs");
  std::vector<Edge> edges;
  for (const auto& e : value) {
    if (!e.is_array() || e.size() != 2) throw ValidationError(where + ": expected [i, j] pairs");
    edges.emplace_back(Section::as<NodeId>(e[0], where), Section::as<NodeId>(e[1], where));
  }
  return edges;
}

void read_consensus(Section& s, ExperimentConfig& cfg) {
  auto& c = cfg.consensus;
  s.read("n_nodes", c.n_nodes);
  s.read("p", c.p);
  s.read("weight_radius", c.weight_radius);
  s.read("noise", c.noise);
  s.read("gamma", c.gamma);
  s.read("box", c.box);
  s.read("shared_observations", c.shared_observations);
  s.read("seed", cfg.problem_seed);
  if (s.has("edge_gamma")) c.edge_gamma = per_item(s.raw("edge_gamma"), 0, s.key("edge_gamma"));
  if (s.has("weights")) {
    const auto& w = s.raw("weights");
    if (!w.is_array()) throw ValidationError(s.key("weights") + ": expected a list of vectors");
    c.weights.clear();
    for (const auto& row : w) {
      const auto v = per_item(row, 0, s.key("weights"));
      c.weights.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
  }
}

void read_pricing(Section& s, ExperimentConfig& cfg) {
  auto& p = cfg.pricing;
  s.read("M", p.M);
  s.read("N", p.N);
  if (s.has("assignment")) {
    const auto& a = s.raw("assignment");
    if (!a.is_array()) throw ValidationError(s.key("assignment") + ": expected a list of SCBS sets");
    p.assignment.clear();
    for (const auto& set : a) {
      if (!set.is_array()) throw ValidationError(s.key("assignment") + ": expected a list of SCBS sets");
      std::vector<NodeId> members;
      for (const auto& n : set) members.push_back(Section::as<NodeId>(n, s.key("assignment")));
      p.assignment.push_back(std::move(members));
    }
  }
  s.read("interference_gain_mean", p.interference_gain_mean);
  s.read("channel_gain_mean", p.channel_gain_mean);
  s.read("W", p.W);
  s.read("c", p.c);
  s.read("C_min", p.C_min);
  s.read("C_max", p.C_max);
  s.read("noise_power", p.noise_power);
  s.read("mu_tx_power", p.mu_tx_power);
  s.read("direct_gain_mean", p.direct_gain_mean);
  s.read("initial_price", p.initial_price);
  // Per-SCBS and per-MU lists resized to the final counts.
  p.mu.assign(p.N, 1.0);
  p.nu.assign(p.N, 1.0);
  p.gamma_db.assign(p.M, -3.0);
  if (s.has("mu")) p.mu = per_item(s.raw("mu"), p.N, s.key("mu"));
  if (s.has("nu")) p.nu = per_item(s.raw("nu"), p.N, s.key("nu"));
  if (s.has("gamma_db")) p.gamma_db = per_item(s.raw("gamma_db"), p.M, s.key("gamma_db"));
}

json problem_params(const ExperimentConfig& cfg) {
  if (cfg.problem == "pricing") {
    const auto& p = cfg.pricing;
    return {{"M", p.M},
            {"N", p.N},
            {"assignment", p.assignment},
            {"interference_gain_mean", p.interference_gain_mean},
            {"channel_gain_mean", p.channel_gain_mean},
            {"W", p.W},
            {"c", p.c},
            {"mu", p.mu},
            {"nu", p.nu},
            {"gamma_db", p.gamma_db},
            {"C_min", p.C_min},
            {"C_max", p.C_max},
            {"noise_power", p.noise_power},
            {"mu_tx_power", p.mu_tx_power},
            {"direct_gain_mean", p.direct_gain_mean},
            {"initial_price", p.initial_price}};
  }
  const auto& c = cfg.consensus;
  json weights = json::array();
  for (const auto& w : c.weights) weights.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  return {{"n_nodes", c.n_nodes},
          {"p", c.p},
          {"weights", weights},
          {"weight_radius", c.weight_radius},
          {"noise", c.noise},
          {"gamma", c.gamma},
          {"edge_gamma", c.edge_gamma},
          {"box", c.box},
          {"shared_observations", c.shared_observations},
          {"seed", cfg.problem_seed}};
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::sync ? "sync" : "async"; }

Hyperparams ExperimentConfig::hyperparams() const {
  Hyperparams hp;
  hp.epsilon = epsilon;
  hp.delta = delta;
  hp.T = T;
  hp.tau = mode == Mode::sync ? 0 : delay.tau_max;
  return hp;
}

DelaySchedule ExperimentConfig::schedule_for(std::uint64_t seed) const {
  if (mode == Mode::sync) return DelaySchedule::zero();
  DelaySchedule s = delay;
  s.seed = delay_seed.value_or(seed);
  return s;
}

ProblemSpec ExperimentConfig::build_problem() const {
  if (problem == "pricing") return apps::build_pricing_problem(pricing);
  return apps::build_consensus_problem(consensus, problem_seed);
}

void ExperimentConfig::validate() const {
  if (problem != "pricing" && problem != "consensus_regression") {
    throw ValidationError("problem.name: unknown problem '" + problem + "'");
  }
  if (T < 1) throw ValidationError("algo.T: must be at least 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("algo.epsilon: must be positive");
  if (!(delta >= 0.0)) throw ValidationError("algo.delta: must be nonnegative");
  try {
    hyperparams().validate();
  } catch (const Error& e) {
    throw ValidationError(std::string("algo: ") + e.what());
  }
  if (mode == Mode::sync && delay.tau_max > 0) {
    throw ValidationError("delay.tau_max: sync mode requires tau_max = 0");
  }
  if (delay.tau_max < 0) throw ValidationError("delay.tau_max: must be nonnegative");
  if (seeds.empty()) throw ValidationError("eval.seeds: at least one seed is required");
  if (mc_samples == 0) throw ValidationError("eval.mc_samples: must be positive");
  if (optimum_budget < 0) throw ValidationError("eval.optimum_budget: must be nonnegative");
  if (thin_every == 0) throw ValidationError("output.thin_every: must be positive");
  try {
    const ProblemSpec spec = build_problem();
    schedule_for(seeds.front()).validate(spec.n_nodes());
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(std::string("problem.params: ") + e.what());
  }
}

ExperimentConfig parse_config_json(const json& doc) {
  ExperimentConfig cfg;
  Section root(doc, "");

  if (!root.has("problem")) throw ValidationError("problem: missing");
  const json& problem = root.raw("problem");
  json params = json::object();
  if (problem.is_string()) {
    cfg.problem = problem.get<std::string>();
  } else {
    Section p(problem, "problem");
    if (!p.has("name")) throw ValidationError("problem.name: missing");
    p.read("name", cfg.problem);
    if (p.has("params")) params = p.raw("params");
    p.finish();
  }
  if (cfg.problem != "pricing" && cfg.problem != "consensus_regression") {
    throw ValidationError("problem.name: unknown problem '" + cfg.problem + "'");
  }
  {
    Section p(params, "problem.params");
    if (cfg.problem == "pricing") {
      read_pricing(p, cfg);
    } else {
      read_consensus(p, cfg);
    }
    p.finish();
  }

  if (root.has("graph")) {
    if (cfg.problem == "pricing") {
      throw ValidationError("graph: the pricing topology follows problem.params.assignment");
    }
    Section g(root.raw("graph"), "graph");
    g.read("n_nodes", cfg.consensus.n_nodes);
    if (g.has("edges")) cfg.consensus.edges = read_edges(g.raw("edges"), "graph.edges");
    g.finish();
  }

  bool epsilon_given = false;
  if (root.has("algo")) {
    Section a(root.raw("algo"), "algo");
    a.read("T", cfg.T);
    if (a.has("epsilon")) {
      epsilon_given = true;
      a.read("epsilon", cfg.epsilon);
    }
    a.read("delta", cfg.delta);
    if (a.has("mode")) {
      const auto m = Section::as<std::string>(a.raw("mode"), "algo.mode");
      if (m == "sync") {
        cfg.mode = Mode::sync;
      } else if (m == "async") {
        cfg.mode = Mode::async;
      } else {
        throw ValidationError("algo.mode: expected 'sync' or 'async'");
      }
    }
    a.finish();
  }
  if (cfg.T < 1) throw ValidationError("algo.T: must be at least 1");
  if (!epsilon_given) cfg.epsilon = 1.0 / std::sqrt(static_cast<double>(cfg.T));

  if (root.has("delay")) {
    Section d(root.raw("delay"), "delay");
    std::string kind = "uniform_random";
    d.read("kind", kind);
    d.read("tau_max", cfg.delay.tau_max);
    if (d.has("seed")) cfg.delay_seed = Section::as<std::uint64_t>(d.raw("seed"), "delay.seed");
    if (d.has("fixed")) {
      cfg.delay.fixed.clear();
      for (double v : per_item(d.raw("fixed"), 1, "delay.fixed")) cfg.delay.fixed.push_back(static_cast<int>(v));
    }
    if (d.has("table")) {
      cfg.delay.table = Section::as<std::vector<std::vector<int>>>(d.raw("table"), "delay.table");
    }
    d.finish();
    try {
      cfg.delay.kind = parse_delay_kind(kind);
    } catch (const Error& e) {
      throw ValidationError(std::string("delay.kind: ") + e.what());
    }
    if (cfg.delay.kind == DelaySchedule::Kind::fixed && cfg.delay.fixed.empty()) {
      cfg.delay.fixed = {cfg.delay.tau_max};
    }
    if (cfg.delay.tau_max == 0) cfg.delay.kind = DelaySchedule::Kind::zero;
  }

  if (root.has("eval")) {
    Section e(root.raw("eval"), "eval");
    e.read("mc_samples", cfg.mc_samples);
    e.read("optimum_budget", cfg.optimum_budget);
    e.read("eval_seed", cfg.eval_seed);
    if (e.has("seeds")) {
      cfg.seeds = Section::as<std::vector<std::uint64_t>>(e.raw("seeds"), "eval.seeds");
    }
    e.finish();
  }

  if (root.has("output")) {
    Section o(root.raw("output"), "output");
    if (o.has("dir")) cfg.output_dir = Section::as<std::string>(o.raw("dir"), "output.dir");
    o.read("thin_every", cfg.thin_every);
    o.finish();
  }
  root.finish();

  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n');
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
  return parse_config_json(doc);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

json to_json(const ExperimentConfig& cfg) {
  json delay = {{"kind", to_string(cfg.delay.kind)}, {"tau_max", cfg.delay.tau_max}};
  if (cfg.delay_seed) delay["seed"] = *cfg.delay_seed;
  json graph = json::object();
  if (cfg.problem == "consensus_regression") {
    graph["n_nodes"] = cfg.consensus.n_nodes;
    json edges = json::array();
    for (const auto& [a, b] : cfg.consensus.edges) edges.push_back({a, b});
    graph["edges"] = edges;
  }
  json doc = {{"problem", {{"name", cfg.problem}, {"params", problem_params(cfg)}}},
          {"algo",
           {{"epsilon", cfg.epsilon}, {"delta", cfg.delta}, {"T", cfg.T}, {"mode", to_string(cfg.mode)}}},
          {"delay", delay},
          {"eval",
           {{"mc_samples", cfg.mc_samples},
            {"optimum_budget", cfg.effective_optimum_budget()},
            {"seeds", cfg.seeds},
            {"eval_seed", cfg.eval_seed}}},
          {"output", {{"dir", cfg.output_dir.string()}, {"thin_every", cfg.thin_every}}}};
  if (!graph.empty()) doc["graph"] = graph;
  return doc;
}

}  // namespace assp::cli
