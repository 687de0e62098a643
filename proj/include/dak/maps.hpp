#pragma once

#include "dak/graph.hpp"
#include "dak/rng.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dak {

constexpr int kDefaultExactCap = 9;

// Weight of a node for the weighted generalized breadth-first map.
using NodeWeight = std::function<Rat(const SocialNetwork&, const ReportProfile&, NodeId)>;

struct MapKind {
  enum Kind { BreadthFirst, GeneralizedBreadthFirst, WeightedGBF } kind = BreadthFirst;
  NodeWeight weight;  // WeightedGBF only

  static MapKind breadth_first() { return {BreadthFirst, {}}; }
  static MapKind generalized_breadth_first() { return {GeneralizedBreadthFirst, {}}; }
  // Default weight 1 + reported out-degree.
  static MapKind weighted_gbf(NodeWeight w = {}) {
    if (!w)
      w = [](const SocialNetwork&, const ReportProfile& profile, NodeId i) {
        return Rat(1 + (int)profile.invited(i).size());
      };
    return {WeightedGBF, std::move(w)};
  }
};

// Explicit finite distribution over orderings of the participants.
struct PermutationDistribution {
  std::vector<std::pair<std::vector<NodeId>, Rat>> support;  // lexicographically sorted

  Rat total_mass() const {
    Rat s = 0;
    for (auto& [o, p] : support) s += p;
    return s;
  }
};

namespace detail {

inline std::vector<std::vector<NodeId>> participant_layers(const SocialNetwork& net,
                                                           const ReportProfile& profile) {
  auto g = layered_subgraph(net, profile);
  int maxd = 0;
  for (NodeId v : g.order) maxd = std::max(maxd, g.dist[v]);
  std::vector<std::vector<NodeId>> layers(maxd);
  for (NodeId v : g.order) layers[g.dist[v] - 1].push_back(v);
  for (auto& layer : layers) std::sort(layer.begin(), layer.end());
  return layers;
}

inline Rat node_weight(const MapKind& kind, const SocialNetwork& net, const ReportProfile& profile,
                       NodeId i) {
  if (kind.kind != MapKind::WeightedGBF) return 1;
  Rat w = kind.weight(net, profile, i);
  if (w <= 0) throw ValidationError("non-positive map weight at node " + std::to_string(i));
  return w;
}

// Recursive frontier expansion shared by GBF enumeration (weighted or not).
inline void expand_frontier(const MapKind& kind, const SocialNetwork& net,
                            const ReportProfile& profile, const std::vector<char>& participant,
                            std::vector<NodeId>& frontier, std::vector<char>& taken,
                            std::vector<NodeId>& prefix, const Rat& prob,
                            std::vector<std::pair<std::vector<NodeId>, Rat>>& out) {
  if (frontier.empty()) {
    out.emplace_back(prefix, prob);
    return;
  }
  Rat total = 0;
  for (NodeId j : frontier) total += node_weight(kind, net, profile, j);
  for (size_t idx = 0; idx < frontier.size(); ++idx) {
    NodeId j = frontier[idx];
    Rat p = prob * node_weight(kind, net, profile, j) / total;
    std::vector<NodeId> next = frontier;
    next.erase(next.begin() + idx);
    std::vector<NodeId> added;
    for (NodeId k : profile.invited(j))
      if (participant[k] && !taken[k] &&
          std::find(next.begin(), next.end(), k) == next.end()) {
        next.push_back(k);
        added.push_back(k);
      }
    std::sort(next.begin(), next.end());
    taken[j] = 1;
    for (NodeId k : added) taken[k] = 1;  // in frontier, not yet output
    prefix.push_back(j);
    expand_frontier(kind, net, profile, participant, next, taken, prefix, p, out);
    prefix.pop_back();
    taken[j] = 0;
    for (NodeId k : added) taken[k] = 0;
  }
}

}  // namespace detail

// One ordering drawn from the map.
inline std::vector<NodeId> sample_order(const MapKind& kind, const SocialNetwork& net,
                                        const ReportProfile& profile, Rng& rng) {
  auto participants = participation_closure(net, profile);
  if (participants.empty()) throw ValidationError("sample_order: no participants");
  std::vector<NodeId> order;
  if (kind.kind == MapKind::BreadthFirst) {
    for (auto layer : detail::participant_layers(net, profile)) {
      while (!layer.empty()) {
        size_t idx = rng.uniform_index(layer.size());
        order.push_back(layer[idx]);
        layer.erase(layer.begin() + idx);
      }
    }
    return order;
  }
  std::vector<char> participant(net.n, 0), taken(net.n, 0);
  for (NodeId v : participants) participant[v] = 1;
  std::vector<NodeId> frontier;
  for (NodeId v : net.seller_neighbors)
    if (participant[v]) frontier.push_back(v);
  std::sort(frontier.begin(), frontier.end());
  for (NodeId v : frontier) taken[v] = 1;
  while (!frontier.empty()) {
    size_t idx;
    if (kind.kind == MapKind::GeneralizedBreadthFirst) {
      idx = rng.uniform_index(frontier.size());
    } else {
      std::vector<Rat> weights;
      for (NodeId j : frontier) weights.push_back(detail::node_weight(kind, net, profile, j));
      idx = rng.weighted_index(weights);
    }
    NodeId j = frontier[idx];
    frontier.erase(frontier.begin() + idx);
    order.push_back(j);
    for (NodeId k : profile.invited(j))
      if (participant[k] && !taken[k]) {
        taken[k] = 1;
        frontier.push_back(k);
      }
    std::sort(frontier.begin(), frontier.end());
  }
  return order;
}

// Exact support and probabilities. Throws ExactCapExceeded above `cap`
// participants; callers are expected to fall back to Monte Carlo.
inline PermutationDistribution enumerate_distribution(const MapKind& kind,
                                                      const SocialNetwork& net,
                                                      const ReportProfile& profile,
                                                      int cap = kDefaultExactCap) {
  auto participants = participation_closure(net, profile);
  if (participants.empty()) throw ValidationError("enumerate_distribution: no participants");
  if ((int)participants.size() > cap)
    throw ExactCapExceeded("exact mode infeasible: " + std::to_string(participants.size()) +
                           " participants exceed cap " + std::to_string(cap) +
                           "; use Monte Carlo mode");
  PermutationDistribution dist;
  if (kind.kind == MapKind::BreadthFirst) {
    auto layers = detail::participant_layers(net, profile);
    Rat prob = 1;
    for (auto& layer : layers) {
      Int fact = 1;
      for (size_t i = 2; i <= layer.size(); ++i) fact *= i;
      prob /= Rat(fact);
    }
    std::vector<std::pair<std::vector<NodeId>, Rat>> partial{{std::vector<NodeId>{}, prob}};
    for (auto& layer : layers) {
      std::vector<std::pair<std::vector<NodeId>, Rat>> next;
      auto perm = layer;  // sorted
      do {
        for (auto& [prefix, p] : partial) {
          auto ext = prefix;
          ext.insert(ext.end(), perm.begin(), perm.end());
          next.emplace_back(std::move(ext), p);
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      partial = std::move(next);
    }
    dist.support = std::move(partial);
  } else {
    std::vector<char> participant(net.n, 0), taken(net.n, 0);
    for (NodeId v : participants) participant[v] = 1;
    std::vector<NodeId> frontier;
    for (NodeId v : net.seller_neighbors)
      if (participant[v]) frontier.push_back(v);
    std::sort(frontier.begin(), frontier.end());
    for (NodeId v : frontier) taken[v] = 1;
    std::vector<NodeId> prefix;
    detail::expand_frontier(kind, net, profile, participant, frontier, taken, prefix, Rat(1),
                            dist.support);
  }
  std::sort(dist.support.begin(), dist.support.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return dist;
}

struct OrderViolation {
  std::vector<NodeId> ordering;
  NodeId ancestor, descendant;
};

struct OrderPreservingResult {
  bool ok = true;
  std::vector<OrderViolation> violations;
};

// Checks that every support ordering is a linear extension of the
// diffusion-critical partial order.
inline OrderPreservingResult verify_order_preserving(const PermutationDistribution& dist,
                                                     const SocialNetwork& net,
                                                     const ReportProfile& profile) {
  OrderPreservingResult res;
  auto participants = participation_closure(net, profile);
  std::vector<std::pair<NodeId, NodeId>> critical_pairs;
  for (NodeId i : participants) {
    auto rest = participation_closure(net, profile, i);
    std::vector<char> reachable(net.n, 0);
    for (NodeId v : rest) reachable[v] = 1;
    for (NodeId j : participants)
      if (j != i && !reachable[j]) critical_pairs.emplace_back(i, j);
  }
  for (auto& [ordering, p] : dist.support) {
    std::vector<int> pos(net.n, -1);
    for (size_t k = 0; k < ordering.size(); ++k) pos[ordering[k]] = (int)k;
    for (auto [i, j] : critical_pairs)
      if (pos[i] >= 0 && pos[j] >= 0 && pos[i] > pos[j]) {
        res.ok = false;
        res.violations.push_back({ordering, i, j});
      }
  }
  return res;
}

// q_A for buyer i: the probability that the set of buyers ordered strictly
// before i is exactly A. Indexed by bitmask over `universe` minus i.
inline std::map<std::uint64_t, Rat> prefix_set_masses(const PermutationDistribution& dist,
                                                      NodeId i,
                                                      const std::vector<NodeId>& universe) {
  std::vector<int> bit(1 + *std::max_element(universe.begin(), universe.end()), -1);
  int b = 0;
  for (NodeId v : universe)
    if (v != i) bit[v] = b++;
  std::map<std::uint64_t, Rat> q;
  for (auto& [ordering, p] : dist.support) {
    std::uint64_t mask = 0;
    bool found = false;
    for (NodeId v : ordering) {
      if (v == i) {
        found = true;
        break;
      }
      if (v < (NodeId)bit.size() && bit[v] >= 0) mask |= std::uint64_t(1) << bit[v];
    }
    if (found) q[mask] += p;
  }
  return q;
}

// mu1 stochastically dominates mu2 for buyer i iff for every A in the
// universe minus i, sum_{B subset of A} q^1_B >= q^2 likewise.
inline bool stochastically_dominates(const PermutationDistribution& mu1,
                                     const PermutationDistribution& mu2, NodeId i,
                                     const std::vector<NodeId>& universe,
                                     int cap = kDefaultExactCap) {
  int m = 0;
  for (NodeId v : universe)
    if (v != i) ++m;
  if (m > cap) throw ExactCapExceeded("stochastic dominance: universe too large");
  size_t full = size_t(1) << m;
  std::vector<Rat> f1(full, Rat(0)), f2(full, Rat(0));
  for (auto& [mask, p] : prefix_set_masses(mu1, i, universe)) f1[mask] += p;
  for (auto& [mask, p] : prefix_set_masses(mu2, i, universe)) f2[mask] += p;
  // subset-sum transform
  for (int bit = 0; bit < m; ++bit)
    for (size_t mask = 0; mask < full; ++mask)
      if (mask & (size_t(1) << bit)) {
        f1[mask] += f1[mask ^ (size_t(1) << bit)];
        f2[mask] += f2[mask ^ (size_t(1) << bit)];
      }
  for (size_t mask = 0; mask < full; ++mask)
    if (f1[mask] < f2[mask]) return false;
  return true;
}

}  // namespace dak
