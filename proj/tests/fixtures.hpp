#pragma once

// Shared instances and brute-force reference oracles for the test suites.
// The instances mirror the bundled scenario files in scenarios/ (same node
// numbering: letters map to ids in order, a = 0).

#include "dak/graph.hpp"
#include "dak/maps.hpp"

#include <deque>
#include <vector>

namespace fix {

using namespace dak;

inline Rat R(const char* s) { return parse_rational(s); }

struct Instance {
  SocialNetwork net;
  TrueProfile truth;
};

// scenarios/fig1_path.json: 4-node invitation chain below a single seller
// neighbor, values 0.2 / 0.1 / 0.4 / 1.
inline Instance four_node_path() {
  return {SocialNetwork::make(4, {{0, 1}, {1, 2}, {2, 3}}, {0}),
          {{R("0.2"), R("0.1"), R("0.4"), R("1")}}};
}

// scenarios/fig2_triangle.json: two seller neighbors a, b; a also knows c.
inline Instance triangle() {
  return {SocialNetwork::make(3, {{0, 1}, {0, 2}, {1, 0}}, {0, 1}),
          {{R("0.3"), R("0"), R("0.9")}}};
}

// scenarios/fig4_sybil.json: c hangs below a only; b is a low direct bidder.
inline Instance bridge3() {
  return {SocialNetwork::make(3, {{0, 2}}, {0, 1}), {{R("0"), R("0.1"), R("1")}}};
}

// scenarios/fig5_inefficiency.json: zero-value head, high-value child.
inline Instance two_node_path() {
  return {SocialNetwork::make(2, {{0, 1}}, {0}), {{R("0"), R("1")}}};
}

// scenarios/fig6_collusion.json: a and b both know each other and c.
inline Instance linked_pair() {
  return {SocialNetwork::make(3, {{0, 1}, {0, 2}, {1, 0}, {1, 2}}, {0, 1}),
          {{R("0.1"), R("0.1"), R("1")}}};
}

// scenarios/fig8_spmupdm.json: two seller neighbors with disjoint chains
// a->c->d and b->e, plus a d->e shortcut that the layering drops.
inline Instance layered_five() {
  return {SocialNetwork::make(5, {{0, 2}, {1, 4}, {2, 3}, {3, 4}}, {0, 1}),
          {{R("0.1"), R("0.3"), R("0.1"), R("0.2"), R("0.3")}}};
}

// Brute-force immediate dominators: for every candidate x, delete x from the
// layered graph and test reachability from the seller; the immediate
// dominator is the deepest proper dominator (dominators of a node form a
// chain, so depths are distinct).
inline std::vector<NodeId> brute_idom(const LayeredGraph& g,
                                      const std::vector<NodeId>& seller_neighbors) {
  int n = (int)g.dist.size();
  std::vector<char> participant(n, 0);
  for (NodeId v : g.order) participant[v] = 1;
  auto reach_without = [&](NodeId x) {
    std::vector<char> seen(n, 0);
    std::deque<NodeId> q;
    for (NodeId s : seller_neighbors) {
      if (!participant[s] || s == x || seen[s]) continue;
      seen[s] = 1;
      q.push_back(s);
    }
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      for (NodeId v : g.out[u])
        if (v != x && !seen[v]) {
          seen[v] = 1;
          q.push_back(v);
        }
    }
    return seen;
  };
  std::vector<NodeId> dom(n, kNoNode);
  for (NodeId v : g.order) {
    NodeId best = kSeller;
    int best_depth = 0;
    for (NodeId x : g.order) {
      if (x == v) continue;
      if (!reach_without(x)[v] && g.dist[x] > best_depth) {
        best_depth = g.dist[x];
        best = x;
      }
    }
    dom[v] = best;
  }
  return dom;
}

// Random directed graph with a random seller set; not necessarily connected.
inline SocialNetwork random_net(int n, Rng& rng, int edge_die = 3) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = 0; v < n; ++v)
      if (u != v && rng.uniform_index(edge_die) == 0) edges.emplace_back(u, v);
  std::vector<NodeId> sn;
  for (NodeId u = 0; u < n; ++u)
    if (rng.uniform_index(3) == 0) sn.push_back(u);
  if (sn.empty()) sn.push_back((NodeId)rng.uniform_index(n));
  return SocialNetwork::make(n, edges, sn);
}

}  // namespace fix
