#pragma once

#include "dak/fpdm.hpp"
#include "dak/graph.hpp"
#include "dak/maps.hpp"
#include "dak/pdm.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace dak {

// Partition of the participants into ordered path graphs, one per item
// (k = min{m, participating seller neighbors}).
struct PathAssignment {
  std::vector<std::vector<NodeId>> paths;
  std::vector<NodeId> heads;      // heads[i] == paths[i].front()
  std::vector<Rat> surcharges;    // per head
};

struct AssignmentBranch {
  PathAssignment assignment;
  Rat probability;
  Rat welfare;
  Rat revenue;
};

struct MultiOutcome {
  std::vector<Rat> win_prob;   // probability of receiving an item
  std::vector<Rat> utility;
  Rat welfare = 0;
  Rat revenue = 0;
  std::vector<AssignmentBranch> breakdown;
};

namespace detail {

// {l | j <= l} via its complement N_{-j}; the relation lives on the full
// reported graph, not on the individual path.
inline std::vector<char> critical_descendants(const SocialNetwork& net,
                                              const ReportProfile& profile, NodeId j) {
  auto participants = participation_closure(net, profile);
  auto rest = participation_closure(net, profile, j);
  std::vector<char> desc(net.n, 0);
  for (NodeId v : participants) desc[v] = 1;
  for (NodeId v : rest) desc[v] = 0;
  return desc;
}

inline Rat mupdm_surcharge(const SocialNetwork& net, const ReportProfile& profile,
                           const std::vector<NodeId>& path, NodeId head) {
  auto desc = critical_descendants(net, profile, head);
  Rat best = 0;
  for (NodeId v : path)
    if (!desc[v] && profile.bid(v) > best) best = profile.bid(v);
  return rat_sq_half(best);
}

inline std::vector<char> layered_reachable(const LayeredGraph& g, NodeId from) {
  std::vector<char> seen(g.dist.size(), 0);
  std::deque<NodeId> queue{from};
  seen[from] = 1;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.out[u])
      if (!seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
  }
  return seen;
}

inline Rat spmupdm_surcharge(const LayeredGraph& g, const ReportProfile& profile,
                             const std::vector<NodeId>& path, NodeId head) {
  auto reach = layered_reachable(g, head);
  Rat best = 0;
  for (NodeId v : path)
    if (!reach[v] && profile.bid(v) > best) best = profile.bid(v);
  return rat_sq_half(best);
}

inline int head_count(const SocialNetwork& net, const ReportProfile& profile, int m) {
  int layer1 = 0;
  for (NodeId v : net.seller_neighbors)
    if (!profile.absent(v)) ++layer1;
  return std::min(m, layer1);
}

inline std::string assignment_key(const std::vector<std::vector<NodeId>>& paths) {
  // path index is irrelevant to outcomes; canonicalize by head id
  std::vector<const std::vector<NodeId>*> sorted;
  for (auto& p : paths) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(),
            [](auto* a, auto* b) { return a->front() < b->front(); });
  std::string key;
  for (auto* p : sorted) {
    for (NodeId v : *p) key += std::to_string(v) + ",";
    key += ";";
  }
  return key;
}

}  // namespace detail

// MUPDM map realization: breadth-first ordering, first k buyers head the k
// paths, everyone else joins a uniformly random path in arrival order.
inline PathAssignment mupdm_assign(const SocialNetwork& net, const ReportProfile& profile, int m,
                                   Rng& rng) {
  if (m < 1) throw ValidationError("item count must be >= 1");
  auto order = sample_order(MapKind::breadth_first(), net, profile, rng);
  int k = std::min(detail::head_count(net, profile, m), (int)order.size());
  PathAssignment a;
  a.paths.resize(k);
  for (int i = 0; i < k; ++i) {
    a.paths[i] = {order[i]};
    a.heads.push_back(order[i]);
  }
  for (size_t i = k; i < order.size(); ++i)
    a.paths[rng.uniform_index(k)].push_back(order[i]);
  for (int i = 0; i < k; ++i)
    a.surcharges.push_back(detail::mupdm_surcharge(net, profile, a.paths[i], a.heads[i]));
  return a;
}

// SP-MUPDM map realization: the layered subgraph fixes each buyer's path to
// her immediate dominator's unless the dominator is the seller.
inline PathAssignment spmupdm_map(const SocialNetwork& net, const ReportProfile& profile, int m,
                                  Rng& rng) {
  if (m < 1) throw ValidationError("item count must be >= 1");
  auto g = layered_subgraph(net, profile);
  auto dom = dominator_tree(g, net.seller_neighbors);
  auto order = sample_order(MapKind::breadth_first(), net, profile, rng);
  int k = std::min(detail::head_count(net, profile, m), (int)order.size());
  PathAssignment a;
  a.paths.resize(k);
  std::vector<int> path_of(net.n, -1);
  for (int i = 0; i < k; ++i) {
    a.paths[i] = {order[i]};
    a.heads.push_back(order[i]);
    path_of[order[i]] = i;
  }
  for (size_t i = k; i < order.size(); ++i) {
    NodeId v = order[i];
    int j = dom[v] == kSeller ? (int)rng.uniform_index(k) : path_of[dom[v]];
    a.paths[j].push_back(v);
    path_of[v] = j;
  }
  for (int i = 0; i < k; ++i)
    a.surcharges.push_back(detail::spmupdm_surcharge(g, profile, a.paths[i], a.heads[i]));
  return a;
}

namespace detail {

// Shared exact engine: enumerate breadth-first orderings, then the product
// of per-buyer path choices (all k for MUPDM; only dominator-free buyers
// for SP-MUPDM). Branches collapsing to the same partition are merged.
inline MultiOutcome multi_expected(const SocialNetwork& net, const ReportProfile& profile,
                                   const TrueProfile& truth, int m, bool sybil_proof, int cap) {
  if (m < 1) throw ValidationError("item count must be >= 1");
  auto dist = enumerate_distribution(MapKind::breadth_first(), net, profile, cap);
  auto g = layered_subgraph(net, profile);
  std::vector<NodeId> dom;
  if (sybil_proof) dom = dominator_tree(g, net.seller_neighbors);

  std::map<std::string, std::pair<PathAssignment, Rat>> merged;
  for (auto& [order, prob] : dist.support) {
    int k = std::min(head_count(net, profile, m), (int)order.size());
    int free_choices = 0;
    for (size_t i = k; i < order.size(); ++i)
      if (!sybil_proof || dom[order[i]] == kSeller) ++free_choices;
    double branches = (double)dist.support.size();
    for (int c = 0; c < free_choices; ++c) branches *= k;
    if (branches > 2e6)
      throw ExactCapExceeded("exact mode infeasible: too many assignment branches");

    std::vector<std::vector<NodeId>> paths(k);
    std::vector<int> path_of(net.n, -1);
    Rat choice_prob = prob;
    // depth-first product over the undetermined choices
    std::function<void(size_t)> rec = [&](size_t i) {
      if (i == order.size()) {
        auto key = assignment_key(paths);
        auto it = merged.find(key);
        if (it == merged.end()) {
          PathAssignment a;
          a.paths = paths;
          for (auto& p : a.paths) a.heads.push_back(p.front());
          merged.emplace(key, std::make_pair(std::move(a), choice_prob));
        } else {
          it->second.second += choice_prob;
        }
        return;
      }
      NodeId v = order[i];
      if ((int)i < k) {
        paths[i] = {v};
        path_of[v] = (int)i;
        rec(i + 1);
        path_of[v] = -1;
        return;
      }
      if (sybil_proof && dom[v] != kSeller) {
        int j = path_of[dom[v]];
        paths[j].push_back(v);
        path_of[v] = j;
        rec(i + 1);
        path_of[v] = -1;
        paths[j].pop_back();
        return;
      }
      Rat saved = choice_prob;
      choice_prob /= k;
      for (int j = 0; j < k; ++j) {
        paths[j].push_back(v);
        path_of[v] = j;
        rec(i + 1);
        path_of[v] = -1;
        paths[j].pop_back();
      }
      choice_prob = saved;
    };
    rec(0);
  }

  MultiOutcome out;
  out.win_prob.assign(net.n, Rat(0));
  out.utility.assign(net.n, Rat(0));
  for (auto& [key, entry] : merged) {
    auto& [assignment, prob] = entry;
    AssignmentBranch branch;
    branch.probability = prob;
    branch.welfare = 0;
    branch.revenue = 0;
    for (size_t pi = 0; pi < assignment.paths.size(); ++pi) {
      const auto& path = assignment.paths[pi];
      NodeId head = assignment.heads[pi];
      auto inst = path_instance_for(path, profile, truth);
      auto alloc = pdm_allocation(inst);
      auto stats = pdm_expected_stats(inst);
      Rat surcharge = sybil_proof ? spmupdm_surcharge(g, profile, path, head)
                                  : mupdm_surcharge(net, profile, path, head);
      assignment.surcharges.push_back(surcharge);
      for (size_t pos = 0; pos < path.size(); ++pos) {
        out.win_prob[path[pos]] += prob * alloc[pos];
        out.utility[path[pos]] += prob * stats.utility[pos];
      }
      out.utility[head] -= prob * surcharge;
      branch.welfare += stats.welfare;
      branch.revenue += surcharge;
    }
    out.welfare += prob * branch.welfare;
    out.revenue += prob * branch.revenue;
    branch.assignment = assignment;
    out.breakdown.push_back(std::move(branch));
  }
  return out;
}

}  // namespace detail

inline MultiOutcome mupdm_expected(const SocialNetwork& net, const ReportProfile& profile,
                                   const TrueProfile& truth, int m, int cap = kDefaultExactCap) {
  return detail::multi_expected(net, profile, truth, m, false, cap);
}

inline MultiOutcome spmupdm_expected(const SocialNetwork& net, const ReportProfile& profile,
                                     const TrueProfile& truth, int m,
                                     int cap = kDefaultExactCap) {
  return detail::multi_expected(net, profile, truth, m, true, cap);
}

struct RealizedMulti {
  std::vector<NodeId> winners;           // one per path
  std::vector<Rat> transfers;            // per node, to the seller; negative = reward
  Rat welfare = 0;
  Rat revenue = 0;
};

// Independent PDM draw per path; head surcharges always apply.
inline RealizedMulti multi_run(const PathAssignment& assignment, const ReportProfile& profile,
                               const TrueProfile& truth, Rng& rng) {
  RealizedMulti out;
  out.transfers.assign(truth.values.size(), Rat(0));
  for (size_t pi = 0; pi < assignment.paths.size(); ++pi) {
    const auto& path = assignment.paths[pi];
    auto inst = detail::path_instance_for(path, profile, truth);
    auto realized = pdm_sample(inst, rng);
    NodeId w = path[realized.winner];
    out.winners.push_back(w);
    out.welfare += truth.values[w];
    for (size_t pos = 0; pos < path.size(); ++pos)
      out.transfers[path[pos]] += realized.payments[pos];
    out.transfers[assignment.heads[pi]] += assignment.surcharges[pi];
  }
  for (const Rat& t : out.transfers) out.revenue += t;
  return out;
}

}  // namespace dak
