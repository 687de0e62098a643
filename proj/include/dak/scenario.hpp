#pragma once

#include "dak/mechanisms.hpp"
#include "dak/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dak {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { Exact, MonteCarlo };

// A self-contained instance: network, true valuations, and how to run it.
// Valuations travel as decimal/fraction strings so files stay exact.
struct Scenario {
  SocialNetwork net;
  TrueProfile truth;
  int items = 1;
  MechId mechanism = MechId::Pdm;
  RunMode mode = RunMode::Exact;
  std::uint64_t seed = 0;
  long samples = 10000;
};

inline std::string mode_name(RunMode m) { return m == RunMode::Exact ? "exact" : "mc"; }

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (NodeId i = 0; i < sc.net.n; ++i) j["nodes"].push_back(i);
  j["edges"] = nlohmann::json::array();
  for (auto [u, v] : sc.net.edge_list()) j["edges"].push_back({u, v});
  j["seller_neighbors"] = sc.net.seller_neighbors;
  nlohmann::json vals = nlohmann::json::object();
  for (NodeId i = 0; i < sc.net.n; ++i)
    vals[std::to_string(i)] = rat_to_string(sc.truth.values[i]);
  j["valuations"] = vals;
  j["items"] = sc.items;
  j["mechanism"] = mech_name(sc.mechanism);
  j["mode"] = mode_name(sc.mode);
  j["seed"] = sc.seed;
  j["samples"] = sc.samples;
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc;
  try {
    std::vector<NodeId> nodes = j.at("nodes").get<std::vector<NodeId>>();
    int n = (int)nodes.size();
    for (int i = 0; i < n; ++i)
      if (nodes[i] != i) throw ValidationError("nodes must be 0..n-1 in order");
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("edge must be a [from,to] pair");
      edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    sc.net = SocialNetwork::make(n, edges, j.at("seller_neighbors").get<std::vector<NodeId>>());
    sc.truth.values.assign(n, Rat(0));
    for (auto& [key, val] : j.at("valuations").items()) {
      int id = std::stoi(key);
      if (id < 0 || id >= n) throw ValidationError("valuation for unknown node " + key);
      Rat v = parse_rational(val.get<std::string>());
      if (v < 0 || v > 1) throw ValidationError("valuation out of [0,1] at node " + key);
      sc.truth.values[id] = v;
    }
    if (j.contains("items")) sc.items = j["items"].get<int>();
    if (sc.items < 1) throw ValidationError("items must be >= 1");
    auto mech = parse_mech(j.at("mechanism").get<std::string>());
    if (!mech) throw ValidationError("unknown mechanism: " + j["mechanism"].get<std::string>());
    sc.mechanism = *mech;
    std::string mode = j.value("mode", "exact");
    if (mode == "exact")
      sc.mode = RunMode::Exact;
    else if (mode == "mc")
      sc.mode = RunMode::MonteCarlo;
    else
      throw ValidationError("unknown mode: " + mode);
    if ((sc.mechanism == MechId::RepeatedFpdm || sc.mechanism == MechId::IdmStub) &&
        sc.mode != RunMode::Exact)
      throw ValidationError(mech_name(sc.mechanism) + " supports exact mode only");
    if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("samples")) sc.samples = j["samples"].get<long>();
    if (sc.samples < 1) throw ValidationError("samples must be >= 1");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario schema error: ") + e.what());
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad JSON in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

// FNV-1a over the canonical serialization; reports echo it so a report can
// be matched to its scenario.
inline std::string scenario_hash(const Scenario& sc) {
  std::string s = scenario_to_json(sc).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

struct McEstimate {
  double mean = 0, stddev = 0, ci_low = 0, ci_high = 0;  // 99% normal CI
};

inline nlohmann::json mc_to_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"stddev", e.stddev}, {"ci99", {e.ci_low, e.ci_high}}};
}

namespace detail {

inline McEstimate estimate(double sum, double sumsq, long n) {
  McEstimate e;
  e.mean = sum / n;
  double var = n > 1 ? (sumsq - sum * sum / n) / (n - 1) : 0.0;
  e.stddev = var > 0 ? std::sqrt(var) : 0.0;
  double half = 2.5758293035489004 * e.stddev / std::sqrt((double)n);
  e.ci_low = e.mean - half;
  e.ci_high = e.mean + half;
  return e;
}

}  // namespace detail

struct McReport {
  McEstimate welfare, revenue;
  std::vector<McEstimate> utility;
  long samples = 0;
};

inline McReport run_monte_carlo(const Scenario& sc) {
  auto mech = make_mechanism(sc.mechanism, sc.items);
  if (!mech.sample) throw ValidationError(mech.label + " has no Monte Carlo engine");
  auto profile = truthful_profile(sc.net, sc.truth);
  Rng rng(sc.seed);
  int n = sc.net.n;
  double w_sum = 0, w_sq = 0, r_sum = 0, r_sq = 0;
  std::vector<double> u_sum(n, 0), u_sq(n, 0);
  for (long s = 0; s < sc.samples; ++s) {
    auto draw = mech.sample(sc.net, profile, sc.truth, rng);
    double w = rat_to_double(draw.welfare), r = rat_to_double(draw.revenue);
    w_sum += w;
    w_sq += w * w;
    r_sum += r;
    r_sq += r * r;
    for (int i = 0; i < n; ++i) {
      double u = rat_to_double(draw.utility[i]);
      u_sum[i] += u;
      u_sq[i] += u * u;
    }
  }
  McReport rep;
  rep.samples = sc.samples;
  rep.welfare = detail::estimate(w_sum, w_sq, sc.samples);
  rep.revenue = detail::estimate(r_sum, r_sq, sc.samples);
  for (int i = 0; i < n; ++i) rep.utility.push_back(detail::estimate(u_sum[i], u_sq[i], sc.samples));
  return rep;
}

// The full run: exact expectations (with per-branch breakdown) or Monte
// Carlo estimates, plus the basic property audit in exact mode.
inline nlohmann::json run_report(const Scenario& sc, int cap = kDefaultExactCap,
                                 bool with_breakdown = true) {
  nlohmann::json rep;
  rep["scenario"] = scenario_hash(sc);
  rep["mechanism"] = mech_name(sc.mechanism);
  rep["mode"] = mode_name(sc.mode);
  auto profile = truthful_profile(sc.net, sc.truth);
  if (sc.mode == RunMode::Exact) {
    auto mech = make_mechanism(sc.mechanism, sc.items, cap);
    auto out = mech.evaluate(sc.net, profile, sc.truth);
    rep["welfare"] = rat_to_string(out.welfare);
    rep["revenue"] = rat_to_string(out.revenue);
    nlohmann::json buyers = nlohmann::json::array();
    for (NodeId i = 0; i < sc.net.n; ++i)
      buyers.push_back({{"node", i},
                        {"win_prob", rat_to_string(out.win_prob[i])},
                        {"utility", rat_to_string(out.utility[i])}});
    rep["buyers"] = buyers;
    auto audit = audit_basic(out, profile, sc.items);
    rep["audit"] = {{"feasible", audit.feasible}, {"ir", audit.ir}, {"wbb", audit.wbb}};
    if (with_breakdown) {
      nlohmann::json br = nlohmann::json::array();
      if (sc.mechanism == MechId::Mupdm || sc.mechanism == MechId::Spmupdm) {
        auto multi = sc.mechanism == MechId::Mupdm
                         ? mupdm_expected(sc.net, profile, sc.truth, sc.items, cap)
                         : spmupdm_expected(sc.net, profile, sc.truth, sc.items, cap);
        for (auto& b : multi.breakdown) {
          nlohmann::json paths = nlohmann::json::array();
          for (auto& p : b.assignment.paths) paths.push_back(p);
          br.push_back({{"probability", rat_to_string(b.probability)},
                        {"paths", paths},
                        {"welfare", rat_to_string(b.welfare)},
                        {"revenue", rat_to_string(b.revenue)}});
        }
      } else if (sc.mechanism == MechId::Pdm || sc.mechanism == MechId::FpdmBf ||
                 sc.mechanism == MechId::FpdmGbf || sc.mechanism == MechId::FpdmWgbf ||
                 sc.mechanism == MechId::FpdmBfCp) {
        MapKind kind = sc.mechanism == MechId::FpdmGbf    ? MapKind::generalized_breadth_first()
                       : sc.mechanism == MechId::FpdmWgbf ? MapKind::weighted_gbf()
                                                          : MapKind::breadth_first();
        SurchargeVariant variant = sc.mechanism == MechId::FpdmBfCp
                                       ? SurchargeVariant::CollusionProof
                                       : SurchargeVariant::Standard;
        if (!participation_closure(sc.net, profile).empty()) {
          auto full = fpdm_expected(sc.net, profile, sc.truth, kind, variant, cap);
          for (auto& b : full.breakdown)
            br.push_back({{"probability", rat_to_string(b.probability)},
                          {"ordering", b.ordering},
                          {"welfare", rat_to_string(b.stats.welfare)},
                          {"surcharge", sc.mechanism == MechId::Pdm
                                            ? "0"
                                            : rat_to_string(b.surcharge)}});
        }
      }
      rep["breakdown"] = br;
    }
  } else {
    auto mc = run_monte_carlo(sc);
    rep["samples"] = mc.samples;
    rep["seed"] = sc.seed;
    rep["welfare"] = mc_to_json(mc.welfare);
    rep["revenue"] = mc_to_json(mc.revenue);
    nlohmann::json buyers = nlohmann::json::array();
    for (NodeId i = 0; i < sc.net.n; ++i)
      buyers.push_back({{"node", i}, {"utility", mc_to_json(mc.utility[i])}});
    rep["buyers"] = buyers;
  }
  return rep;
}

}  // namespace dak
