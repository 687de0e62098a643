#pragma once

#include "dak/rational.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dak {

using NodeId = int;

// The seller is not a node; it appears only as the virtual root of rooted
// structures (dominator tree), encoded as kSeller.
constexpr NodeId kSeller = -1;
constexpr NodeId kNoNode = -2;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ExactCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Directed buyer graph plus the seller's neighbor set r_s.
struct SocialNetwork {
  int n = 0;
  std::vector<std::vector<NodeId>> out;  // sorted, no self-loops
  std::vector<NodeId> seller_neighbors;  // sorted subset of nodes

  static SocialNetwork make(int n, const std::vector<std::pair<NodeId, NodeId>>& edges,
                            std::vector<NodeId> seller_neighbors) {
    if (n < 0) throw ValidationError("negative node count");
    SocialNetwork net;
    net.n = n;
    net.out.assign(n, {});
    for (auto [i, j] : edges) {
      if (i < 0 || i >= n || j < 0 || j >= n)
        throw ValidationError("edge endpoint out of range: (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      if (i == j) throw ValidationError("self-loop at node " + std::to_string(i));
      net.out[i].push_back(j);
    }
    for (auto& adj : net.out) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    std::sort(seller_neighbors.begin(), seller_neighbors.end());
    seller_neighbors.erase(std::unique(seller_neighbors.begin(), seller_neighbors.end()),
                           seller_neighbors.end());
    for (NodeId i : seller_neighbors)
      if (i < 0 || i >= n) throw ValidationError("seller neighbor out of range");
    net.seller_neighbors = std::move(seller_neighbors);
    return net;
  }

  std::vector<std::pair<NodeId, NodeId>> edge_list() const {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j : out[i]) edges.emplace_back(i, j);
    return edges;
  }

  bool has_edge(NodeId i, NodeId j) const {
    return std::binary_search(out[i].begin(), out[i].end(), j);
  }
};

// A reported type: bid in [0,1] and invited subset of the true out-neighbors.
struct Report {
  Rat bid;
  std::vector<NodeId> invited;  // sorted
};

struct ReportProfile {
  std::vector<std::optional<Report>> reports;  // nullopt = the paper's nil

  bool absent(NodeId i) const { return !reports[i].has_value(); }
  const Rat& bid(NodeId i) const { return reports[i]->bid; }
  const std::vector<NodeId>& invited(NodeId i) const { return reports[i]->invited; }
};

struct TrueProfile {
  std::vector<Rat> values;
};

inline void validate_profile(const SocialNetwork& net, const ReportProfile& profile) {
  if ((int)profile.reports.size() != net.n) throw ValidationError("profile size mismatch");
  for (NodeId i = 0; i < net.n; ++i) {
    if (profile.absent(i)) continue;
    const Report& r = *profile.reports[i];
    if (r.bid < 0 || r.bid > 1) throw ValidationError("bid out of [0,1] at node " + std::to_string(i));
    for (NodeId j : r.invited)
      if (!net.has_edge(i, j))
        throw ValidationError("invited node " + std::to_string(j) + " is not a true neighbor of " +
                              std::to_string(i));
  }
}

inline ReportProfile truthful_profile(const SocialNetwork& net, const std::vector<Rat>& bids) {
  ReportProfile p;
  p.reports.resize(net.n);
  for (NodeId i = 0; i < net.n; ++i) p.reports[i] = Report{bids[i], net.out[i]};
  return p;
}

inline ReportProfile truthful_profile(const SocialNetwork& net, const TrueProfile& truth) {
  return truthful_profile(net, truth.values);
}

// BFS over invited edges from the seller's neighbors, never traversing
// through (or reporting) absent buyers. Returned in discovery order.
// `blocked`, when >= 0, is treated as uninvited everywhere.
inline std::vector<NodeId> participation_closure(const SocialNetwork& net,
                                                 const ReportProfile& profile,
                                                 NodeId blocked = kNoNode) {
  std::vector<char> seen(net.n, 0);
  std::vector<NodeId> order;
  std::deque<NodeId> queue;
  for (NodeId i : net.seller_neighbors) {
    if (i == blocked || profile.absent(i) || seen[i]) continue;
    seen[i] = 1;
    queue.push_back(i);
  }
  while (!queue.empty()) {
    NodeId j = queue.front();
    queue.pop_front();
    order.push_back(j);
    for (NodeId k : profile.invited(j)) {
      if (k == blocked || seen[k] || profile.absent(k)) continue;
      seen[k] = 1;
      queue.push_back(k);
    }
  }
  return order;
}

inline bool is_participant(const SocialNetwork& net, const ReportProfile& profile, NodeId i) {
  auto closure = participation_closure(net, profile);
  return std::find(closure.begin(), closure.end(), i) != closure.end();
}

inline void require_participant(const SocialNetwork& net, const ReportProfile& profile, NodeId i,
                                const char* what) {
  if (i < 0 || i >= net.n || !is_participant(net, profile, i))
    throw ValidationError(std::string(what) + ": node " + std::to_string(i) +
                          " is not a participant");
}

// N_{-i}: the participants that remain when i is not invited. Sorted.
inline std::vector<NodeId> removed_without(const SocialNetwork& net, const ReportProfile& profile,
                                           NodeId i) {
  require_participant(net, profile, i, "removed_without");
  auto rest = participation_closure(net, profile, i);
  std::sort(rest.begin(), rest.end());
  return rest;
}

// i <= j in the diffusion-critical order: every invitation path from the
// seller to j passes through i. Reflexive by definition.
inline bool is_diffusion_critical(const SocialNetwork& net, const ReportProfile& profile, NodeId i,
                                  NodeId j) {
  require_participant(net, profile, i, "is_diffusion_critical");
  require_participant(net, profile, j, "is_diffusion_critical");
  if (i == j) return true;
  auto rest = participation_closure(net, profile, i);
  return std::find(rest.begin(), rest.end(), j) == rest.end();
}

// The layered shortest-path subgraph G' = (N, E') with d(i) the invited-edge
// distance from the seller (seller neighbors at d = 1). Only participants
// carry a distance; everyone else has dist = 0.
struct LayeredGraph {
  std::vector<int> dist;                     // 0 for non-participants
  std::vector<std::vector<NodeId>> out;      // E' adjacency, sorted
  std::vector<NodeId> order;                 // participants in BFS discovery order
};

inline LayeredGraph layered_subgraph(const SocialNetwork& net, const ReportProfile& profile) {
  LayeredGraph g;
  g.dist.assign(net.n, 0);
  g.out.assign(net.n, {});
  std::deque<NodeId> queue;
  for (NodeId i : net.seller_neighbors) {
    if (profile.absent(i) || g.dist[i] != 0) continue;
    g.dist[i] = 1;
    queue.push_back(i);
  }
  while (!queue.empty()) {
    NodeId j = queue.front();
    queue.pop_front();
    g.order.push_back(j);
    for (NodeId i : profile.invited(j)) {
      if (profile.absent(i)) continue;
      if (g.dist[i] == 0 && !std::binary_search(net.seller_neighbors.begin(),
                                                net.seller_neighbors.end(), i)) {
        g.dist[i] = g.dist[j] + 1;
        g.out[j].push_back(i);
        queue.push_back(i);
      } else if (g.dist[i] == g.dist[j] + 1) {
        g.out[j].push_back(i);
      }
    }
  }
  for (auto& adj : g.out) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

// Immediate dominators of the rooted graph (N + {s}, E' + r_s, s), computed
// by processing nodes in layer order and taking the LCA (in the partial
// tree) of all E'-predecessors. dom[i] = kSeller for seller neighbors,
// kNoNode for non-participants.
inline std::vector<NodeId> dominator_tree(const LayeredGraph& g,
                                          const std::vector<NodeId>& seller_neighbors) {
  int n = (int)g.dist.size();
  std::vector<NodeId> dom(n, kNoNode);
  std::vector<int> depth(n, -1);
  std::vector<std::vector<NodeId>> preds(n);
  for (NodeId j = 0; j < n; ++j)
    for (NodeId i : g.out[j]) preds[i].push_back(j);
  auto lca = [&](NodeId a, NodeId b) {
    while (a != b) {
      int da = a == kSeller ? 0 : depth[a];
      int db = b == kSeller ? 0 : depth[b];
      if (da >= db) a = dom[a]; else b = dom[b];
      if (a == kSeller && b == kSeller) break;
    }
    return a;
  };
  for (NodeId i : g.order) {
    bool root_child = std::binary_search(seller_neighbors.begin(), seller_neighbors.end(), i);
    if (root_child) {
      dom[i] = kSeller;
      depth[i] = 1;
      continue;
    }
    if (preds[i].empty())
      throw ValidationError("dominator_tree: node " + std::to_string(i) +
                            " unreachable in layered graph");
    NodeId d = preds[i][0];
    for (size_t k = 1; k < preds[i].size(); ++k) d = lca(d, preds[i][k]);
    dom[i] = d;
    depth[i] = (d == kSeller ? 0 : depth[d]) + 1;
  }
  return dom;
}

// N_{-C_i}: participants in weakly connected components (of the reported
// graph with the seller removed) other than i's component. Sorted.
inline std::vector<NodeId> components_without_seller(const SocialNetwork& net,
                                                     const ReportProfile& profile, NodeId i) {
  require_participant(net, profile, i, "components_without_seller");
  auto participants = participation_closure(net, profile);
  std::vector<char> in_part(net.n, 0);
  for (NodeId v : participants) in_part[v] = 1;
  // undirected adjacency over participants via reported edges
  std::vector<std::vector<NodeId>> adj(net.n);
  for (NodeId u : participants)
    for (NodeId v : profile.invited(u))
      if (in_part[v]) {
        adj[u].push_back(v);
        adj[v].push_back(u);
      }
  std::vector<int> comp(net.n, -1);
  int ncomp = 0;
  for (NodeId start : participants) {
    if (comp[start] != -1) continue;
    std::deque<NodeId> queue{start};
    comp[start] = ncomp;
    while (!queue.empty()) {
      NodeId u = queue.front();
      queue.pop_front();
      for (NodeId v : adj[u])
        if (comp[v] == -1) {
          comp[v] = ncomp;
          queue.push_back(v);
        }
    }
    ++ncomp;
  }
  std::vector<NodeId> result;
  for (NodeId v : participants)
    if (comp[v] != comp[i]) result.push_back(v);
  std::sort(result.begin(), result.end());
  return result;
}

inline Rat max_bid_over(const ReportProfile& profile, const std::vector<NodeId>& nodes) {
  Rat best = 0;  // max over the empty set is 0
  for (NodeId v : nodes)
    if (!profile.absent(v) && profile.bid(v) > best) best = profile.bid(v);
  return best;
}

}  // namespace dak
