#pragma once

#include "dak/mechanisms.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dak {

// Basic per-outcome audit: allocation feasibility, individual rationality of
// the truthful profile, weak budget balance.
struct BasicAudit {
  bool feasible = true;
  bool ir = true;
  bool wbb = true;
  std::vector<NodeId> ir_violators;
  std::string note;
};

inline BasicAudit audit_basic(const EvalResult& outcome, const ReportProfile& profile,
                              int items = 1) {
  BasicAudit a;
  Rat total = 0;
  for (size_t i = 0; i < outcome.win_prob.size(); ++i) {
    const Rat& p = outcome.win_prob[i];
    if (p < 0 || p > 1) {
      a.feasible = false;
      a.note = "allocation probability out of [0,1] at node " + std::to_string(i);
    }
    total += p;
    if (profile.absent((NodeId)i) && (!(p == 0) || !(outcome.utility[i] == 0))) {
      a.feasible = false;
      a.note = "absent node " + std::to_string(i) + " with nonzero allocation or transfer";
    }
  }
  if (total > items) {
    a.feasible = false;
    a.note = "allocation probabilities sum to " + rat_to_string(total);
  }
  for (size_t i = 0; i < outcome.utility.size(); ++i)
    if (outcome.utility[i] < 0) {
      a.ir = false;
      a.ir_violators.push_back((NodeId)i);
    }
  a.wbb = outcome.revenue >= 0;
  return a;
}

struct DeviationReport {
  bool pass = true;
  Rat best_gain = 0;  // maximum over all searched deviations
  std::string witness;
  long deviations_searched = 0;
  long profiles_evaluated = 0;
};

namespace detail {

inline std::vector<Rat> bid_grid(const Rat& step, const std::vector<Rat>& extra) {
  std::vector<Rat> grid;
  for (Rat b = 0; b <= 1; b += step) grid.push_back(b);
  for (const Rat& e : extra)
    if (e >= 0 && e <= 1) grid.push_back(e);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

inline void record_gain(DeviationReport& rep, const Rat& gain, const std::string& witness) {
  ++rep.deviations_searched;
  if (rep.deviations_searched == 1 || gain > rep.best_gain) {
    rep.best_gain = gain;
    rep.witness = witness;
  }
}

inline std::string set_to_string(const std::vector<NodeId>& s) {
  std::string out = "{";
  for (size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

inline std::vector<NodeId> mask_to_set(std::uint32_t mask, const std::vector<NodeId>& pool) {
  std::vector<NodeId> s;
  for (size_t b = 0; b < pool.size(); ++b)
    if (mask & (std::uint32_t(1) << b)) s.push_back(pool[b]);
  return s;
}

// Deviator utilities are piecewise quadratic in the own bid with breakpoints
// at the other participants' bids, so each interior optimum has a closed
// form. Interpolate each piece through three probes, confirm the fit on a
// fourth (mechanisms outside the quadratic family fail it and are skipped),
// then probe the vertex if it lands inside the piece.
inline void refine_stationary(const std::function<Rat(const Rat&)>& utility_at,
                              const std::vector<Rat>& breakpoints,
                              const std::function<void(const Rat&, const Rat&)>& report) {
  for (size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const Rat& lo = breakpoints[k];
    const Rat& hi = breakpoints[k + 1];
    if (!(lo < hi)) continue;
    Rat w = hi - lo;
    Rat x1 = lo + w / 4, x2 = lo + w / 2, x3 = lo + 3 * w / 4, x4 = lo + w / 8;
    Rat y1 = utility_at(x1), y2 = utility_at(x2), y3 = utility_at(x3);
    Rat s12 = (y2 - y1) / (x2 - x1);
    Rat s13 = (y3 - y1) / (x3 - x1);
    Rat a = (s13 - s12) / (x3 - x2);
    Rat b = s12 - a * (x1 + x2);
    Rat c = y1 - a * x1 * x1 - b * x1;
    if (utility_at(x4) != a * x4 * x4 + b * x4 + c) continue;
    if (a == 0) continue;
    Rat vertex = -b / (2 * a);
    if (vertex > lo && vertex < hi) report(vertex, utility_at(vertex));
  }
}

}  // namespace detail

// Unilateral deviations: every bid on the grid (plus the true value and the
// stationary points of each quadratic piece), every invited subset, and
// staying out entirely.
inline DeviationReport ic_oracle(const SocialNetwork& net, const TrueProfile& truth,
                                 const MechanismUnderTest& mech,
                                 const Rat& grid_step = Rat(1, 8),
                                 bool refine_stationary_points = true) {
  DeviationReport rep;
  auto truthful = truthful_profile(net, truth);
  auto base = mech.evaluate(net, truthful, truth);
  ++rep.profiles_evaluated;
  for (NodeId i = 0; i < net.n; ++i) {
    Rat u0 = base.utility[i];
    auto bids = detail::bid_grid(grid_step, {truth.values[i]});
    std::vector<Rat> breakpoints{Rat(0), Rat(1)};
    for (NodeId j = 0; j < net.n; ++j)
      if (j != i) breakpoints.push_back(truth.values[j]);
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    detail::record_gain(rep, -u0, "buyer " + std::to_string(i) + ": absent");
    for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << net.out[i].size()); ++mask) {
      auto invited = detail::mask_to_set(mask, net.out[i]);
      auto utility_at = [&](const Rat& b) {
        auto profile = truthful;
        profile.reports[i] = Report{b, invited};
        ++rep.profiles_evaluated;
        return mech.evaluate(net, profile, truth).utility[i];
      };
      auto note = [&](const Rat& b) {
        return "buyer " + std::to_string(i) + ": bid " + rat_to_string(b) + ", invites " +
               detail::set_to_string(invited);
      };
      for (const Rat& b : bids) detail::record_gain(rep, utility_at(b) - u0, note(b));
      if (refine_stationary_points)
        detail::refine_stationary(utility_at, breakpoints, [&](const Rat& b, const Rat& u) {
          detail::record_gain(rep, u - u0, note(b));
        });
    }
  }
  rep.pass = rep.best_gain <= 0;
  return rep;
}

namespace detail {

// One Sybil identity: a bid index into the shared grid plus an invite mask
// over the attacker's true neighbors followed by the other Sybils.
struct SybilConfig {
  int bid_index = 0;
  std::uint32_t invite_mask = 0;
  bool operator<(const SybilConfig& o) const {
    return bid_index != o.bid_index ? bid_index < o.bid_index : invite_mask < o.invite_mask;
  }
  bool operator==(const SybilConfig& o) const {
    return bid_index == o.bid_index && invite_mask == o.invite_mask;
  }
};

// For two Sybils, swapping their labels (and the two Sybil bits inside each
// invite mask) yields the same attack; keep only the smaller encoding.
inline bool sybil_canonical(const std::vector<SybilConfig>& cfg, size_t sybil_bit_base) {
  if (cfg.size() != 2) return true;
  auto swap_bits = [&](std::uint32_t m) {
    std::uint32_t b0 = std::uint32_t(1) << sybil_bit_base;
    std::uint32_t b1 = std::uint32_t(1) << (sybil_bit_base + 1);
    std::uint32_t rest = m & ~(b0 | b1);
    if (m & b0) rest |= b1;
    if (m & b1) rest |= b0;
    return rest;
  };
  std::vector<SybilConfig> swapped{{cfg[1].bid_index, swap_bits(cfg[1].invite_mask)},
                                   {cfg[0].bid_index, swap_bits(cfg[0].invite_mask)}};
  return !(swapped < cfg);
}

}  // namespace detail

// Sybil attacks: the attacker spawns up to max_sybils fresh identities with
// her own valuation, rewires her invitations over r_i0 + S, wires each Sybil
// over the same pool, and bids freely for every identity. Cluster utility is
// compared against her truthful stand-alone utility.
inline DeviationReport sybil_oracle(const SocialNetwork& net, const TrueProfile& truth,
                                    const MechanismUnderTest& mech, int max_sybils = 2,
                                    const Rat& grid_step = Rat(1, 8),
                                    NodeId only_attacker = kNoNode) {
  DeviationReport rep;
  auto truthful = truthful_profile(net, truth);
  auto base = mech.evaluate(net, truthful, truth);
  ++rep.profiles_evaluated;
  for (NodeId attacker = 0; attacker < net.n; ++attacker) {
    if (only_attacker != kNoNode && attacker != only_attacker) continue;
    Rat u0 = base.utility[attacker];
    auto bids = detail::bid_grid(grid_step, {truth.values[attacker]});
    for (int s = 0; s <= max_sybils; ++s) {
      // Extended network: Sybil nodes n..n+s-1; the cluster's pool is the
      // attacker's true neighbors plus the Sybils. Outsiders are untouched.
      std::vector<NodeId> pool = net.out[attacker];
      for (int q = 0; q < s; ++q) pool.push_back(net.n + q);
      size_t sybil_bit_base = net.out[attacker].size();
      auto edges = net.edge_list();
      for (NodeId v : pool)
        if (v >= net.n) edges.emplace_back(attacker, v);
      for (int q = 0; q < s; ++q)
        for (NodeId v : pool)
          if (v != net.n + q) edges.emplace_back(net.n + q, v);
      auto ext = SocialNetwork::make(net.n + s, edges, net.seller_neighbors);
      TrueProfile ext_truth = truth;
      for (int q = 0; q < s; ++q) ext_truth.values.push_back(truth.values[attacker]);
      ReportProfile ext_truthful = truthful;
      ext_truthful.reports.resize(net.n + s);

      std::uint32_t full = std::uint32_t(1) << pool.size();
      std::vector<detail::SybilConfig> cfg(s);
      std::function<void(int)> sweep = [&](int q) {
        if (q < s) {
          for (cfg[q].bid_index = 0; cfg[q].bid_index < (int)bids.size(); ++cfg[q].bid_index)
            for (cfg[q].invite_mask = 0; cfg[q].invite_mask < full; ++cfg[q].invite_mask) {
              // a Sybil may not invite itself
              if (cfg[q].invite_mask & (std::uint32_t(1) << (sybil_bit_base + q))) continue;
              sweep(q + 1);
            }
          return;
        }
        if (!detail::sybil_canonical(cfg, sybil_bit_base)) return;
        for (std::uint32_t amask = 0; amask < full; ++amask) {
          // prune clusters whose Sybils can never be discovered
          std::uint32_t reached = amask;
          for (int pass = 0; pass < s; ++pass)
            for (int r = 0; r < s; ++r)
              if (reached & (std::uint32_t(1) << (sybil_bit_base + r)))
                reached |= cfg[r].invite_mask;
          bool all_reached = true;
          for (int r = 0; r < s; ++r)
            if (!(reached & (std::uint32_t(1) << (sybil_bit_base + r)))) all_reached = false;
          if (!all_reached) continue;
          for (const Rat& abid : bids) {
            auto profile = ext_truthful;
            profile.reports[attacker] = Report{abid, detail::mask_to_set(amask, pool)};
            for (int r = 0; r < s; ++r)
              profile.reports[net.n + r] =
                  Report{bids[cfg[r].bid_index], detail::mask_to_set(cfg[r].invite_mask, pool)};
            ++rep.profiles_evaluated;
            auto out = mech.evaluate(ext, profile, ext_truth);
            Rat cluster = out.utility[attacker];
            for (int r = 0; r < s; ++r) cluster += out.utility[net.n + r];
            std::string w = "attacker " + std::to_string(attacker) + " bid " +
                            rat_to_string(abid) + " invites " +
                            detail::set_to_string(profile.invited(attacker));
            for (int r = 0; r < s; ++r)
              w += "; sybil " + std::to_string(net.n + r) + " bid " +
                   rat_to_string(bids[cfg[r].bid_index]) + " invites " +
                   detail::set_to_string(profile.invited(net.n + r));
            detail::record_gain(rep, cluster - u0, w);
          }
        }
      };
      sweep(0);
    }
  }
  rep.pass = rep.best_gain <= 0;
  return rep;
}

namespace detail {

// Connected induced subsets (ignoring edge direction), smallest-first, each
// emitted once in lexicographic order.
inline std::vector<std::vector<NodeId>> connected_subsets(const SocialNetwork& net,
                                                          int max_size) {
  std::vector<std::vector<NodeId>> adj(net.n);
  for (auto [u, v] : net.edge_list()) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<std::vector<NodeId>> out;
  for (std::uint32_t mask = 1; mask < (std::uint32_t(1) << net.n); ++mask) {
    auto nodes = mask_to_set(mask, [&] {
      std::vector<NodeId> all(net.n);
      for (NodeId i = 0; i < net.n; ++i) all[i] = i;
      return all;
    }());
    if ((int)nodes.size() > max_size) continue;
    std::vector<char> in(net.n, 0), seen(net.n, 0);
    for (NodeId v : nodes) in[v] = 1;
    std::vector<NodeId> stack{nodes[0]};
    seen[nodes[0]] = 1;
    size_t count = 1;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : adj[u])
        if (in[v] && !seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    if (count == nodes.size()) out.push_back(nodes);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

}  // namespace detail

// Cartels: connected groups sharing a common (swept) valuation. Each member
// may go absent or report any grid bid with invitations over her true
// neighbors plus the cartel; non-edges inside the cartel become usable.
inline DeviationReport collusion_oracle(const SocialNetwork& net, const TrueProfile& truth,
                                        const MechanismUnderTest& mech, int max_cartel = 3,
                                        const Rat& grid_step = Rat(1, 8),
                                        const Rat& value_step = Rat(1, 4)) {
  DeviationReport rep;
  for (const auto& cartel : detail::connected_subsets(net, max_cartel)) {
    std::vector<char> in_cartel(net.n, 0);
    for (NodeId c : cartel) in_cartel[c] = 1;
    auto edges = net.edge_list();
    for (NodeId u : cartel)
      for (NodeId v : cartel)
        if (u != v && !net.has_edge(u, v)) edges.emplace_back(u, v);
    auto ext = SocialNetwork::make(net.n, edges, net.seller_neighbors);

    for (Rat common = 0; common <= 1; common += value_step) {
      TrueProfile swept = truth;
      for (NodeId c : cartel) swept.values[c] = common;
      auto truthful = truthful_profile(net, swept);
      ++rep.profiles_evaluated;
      auto base = mech.evaluate(net, truthful, swept);
      Rat u0 = 0;
      for (NodeId c : cartel) u0 += base.utility[c];

      auto bids = detail::bid_grid(grid_step, {common});
      // member action: 0 = absent, else (bid, invite mask) pairs
      std::vector<std::vector<std::pair<Rat, std::vector<NodeId>>>> actions(cartel.size());
      for (size_t ci = 0; ci < cartel.size(); ++ci) {
        const auto& pool = ext.out[cartel[ci]];
        for (const Rat& b : bids)
          for (std::uint32_t mask = 0; mask < (std::uint32_t(1) << pool.size()); ++mask)
            actions[ci].emplace_back(b, detail::mask_to_set(mask, pool));
      }
      std::vector<int> pick(cartel.size(), -1);  // -1 = absent
      std::function<void(size_t)> sweep = [&](size_t ci) {
        if (ci < cartel.size()) {
          for (pick[ci] = -1; pick[ci] < (int)actions[ci].size(); ++pick[ci]) sweep(ci + 1);
          return;
        }
        auto profile = truthful;
        std::string w = "cartel " + detail::set_to_string(cartel) + " value " +
                        rat_to_string(common) + ":";
        for (size_t k = 0; k < cartel.size(); ++k) {
          if (pick[k] < 0) {
            profile.reports[cartel[k]].reset();
            w += " " + std::to_string(cartel[k]) + "=absent";
          } else {
            auto& [b, inv] = actions[k][pick[k]];
            profile.reports[cartel[k]] = Report{b, inv};
            w += " " + std::to_string(cartel[k]) + "=(" + rat_to_string(b) + "," +
                 detail::set_to_string(inv) + ")";
          }
        }
        ++rep.profiles_evaluated;
        auto out = mech.evaluate(ext, profile, swept);
        Rat total = 0;
        for (NodeId c : cartel) total += out.utility[c];
        detail::record_gain(rep, total - u0, w);
      };
      sweep(0);
    }
  }
  rep.pass = rep.best_gain <= 0;
  return rep;
}

// Approximation bound checks. Welfare enters as an exact rational or as a
// Monte Carlo lower confidence bound converted to a rational by the caller.
struct BoundCheck {
  Rat delta;
  bool ok = true;
  Rat lhs, rhs;
};

struct EfficiencyRecord {
  bool strong_ok = true;  // E[W] >= v_max^2 / 2
  Rat expected_welfare, v_max, top_m_sum;
  std::vector<BoundCheck> single_unit;  // (1/(2d)) E[W] + d >= v_max
  std::vector<BoundCheck> multi_unit;   // (e/(2(e-1)d)) E[W] + m d >= top-m sum
};

inline EfficiencyRecord efficiency_check(const Rat& expected_welfare, const TrueProfile& truth,
                                         const std::vector<NodeId>& participants,
                                         const std::vector<Rat>& deltas, int m) {
  EfficiencyRecord rec;
  rec.expected_welfare = expected_welfare;
  std::vector<Rat> values;
  for (NodeId v : participants) values.push_back(truth.values[v]);
  std::sort(values.rbegin(), values.rend());
  rec.v_max = values.empty() ? Rat(0) : values[0];
  for (int i = 0; i < m && i < (int)values.size(); ++i) rec.top_m_sum += values[i];
  rec.strong_ok = expected_welfare >= rat_sq_half(rec.v_max);
  const Rat e_lb(2718281, 1000000);  // rational stand-in for e
  for (const Rat& d : deltas) {
    BoundCheck single{d, true, expected_welfare / (2 * d) + d, rec.v_max};
    single.ok = single.lhs >= single.rhs;
    rec.single_unit.push_back(single);
    if (m > 1) {
      BoundCheck multi{d, true, e_lb / (2 * (e_lb - 1) * d) * expected_welfare + m * d,
                       rec.top_m_sum};
      multi.ok = multi.lhs >= multi.rhs;
      rec.multi_unit.push_back(multi);
    }
  }
  return rec;
}

struct RevenueRecord {
  bool corollary_applicable = true;  // needs k >= 2
  Rat expected_revenue, v_star;
  Rat positive_revenue_mass;  // probability of a revenue-generating draw
  std::vector<BoundCheck> bounds;  // (k/(2(k-1)d)) E[u_s] + d >= v*_N
  std::string note;
};

inline RevenueRecord revenue_check(const Rat& expected_revenue, const Rat& v_star, int k,
                                   const std::vector<Rat>& deltas,
                                   const Rat& positive_revenue_mass = 0) {
  RevenueRecord rec;
  rec.expected_revenue = expected_revenue;
  rec.v_star = v_star;
  rec.positive_revenue_mass = positive_revenue_mass;
  if (k < 2) {
    rec.corollary_applicable = false;
    rec.note = "seller degree k < 2: revenue corollary skipped";
    return rec;
  }
  for (const Rat& d : deltas) {
    BoundCheck b{d, true, Rat(k) / (2 * (k - 1) * d) * expected_revenue + d, v_star};
    b.ok = b.lhs >= b.rhs;
    rec.bounds.push_back(b);
  }
  return rec;
}

}  // namespace dak
