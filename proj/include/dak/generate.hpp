#pragma once

#include "dak/scenario.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace dak {

// Valuations are drawn uniformly from {0, 1/100, ..., 1}.
inline TrueProfile random_valuations(int n, Rng& rng) {
  TrueProfile t;
  for (int i = 0; i < n; ++i) t.values.push_back(Rat(rng.uniform_index(101), 100));
  return t;
}

inline Scenario gen_path(int n, Rng& rng) {
  if (n < 1) throw ValidationError("path needs at least one node");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  Scenario sc;
  sc.net = SocialNetwork::make(n, edges, {0});
  sc.truth = random_valuations(n, rng);
  return sc;
}

// Random recursive tree rooted at the seller: node i attaches below a
// uniform earlier node (or directly to the seller for node 0).
inline Scenario gen_tree(int n, Rng& rng) {
  if (n < 1) throw ValidationError("tree needs at least one node");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back((NodeId)rng.uniform_index(i), i);
  Scenario sc;
  sc.net = SocialNetwork::make(n, edges, {0});
  sc.truth = random_valuations(n, rng);
  return sc;
}

// G(n, p) over directed pairs, rejection-sampled until every node
// participates under truthful reporting.
inline Scenario gen_gnp_connected(int n, const Rat& p, Rng& rng, int max_tries = 10000) {
  if (n < 1 || p <= 0 || p > 1) throw ValidationError("bad gnp parameters");
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = 0; j < n; ++j)
        if (i != j && rng.unit() < p) edges.emplace_back(i, j);
    std::vector<NodeId> sn;
    for (NodeId i = 0; i < n; ++i)
      if (rng.unit() < p) sn.push_back(i);
    if (sn.empty()) sn.push_back((NodeId)rng.uniform_index(n));
    Scenario sc;
    sc.net = SocialNetwork::make(n, edges, sn);
    sc.truth = random_valuations(n, rng);
    if ((int)participation_closure(sc.net, truthful_profile(sc.net, sc.truth)).size() == n)
      return sc;
  }
  throw ValidationError("gnp-connected: no connected sample within retry budget");
}

// Layered instance: `layers` groups of roughly equal size, every node wired
// to at least one node of the next layer, plus random extra bridging edges.
inline Scenario gen_layered(int n, int layers, Rng& rng) {
  if (n < 1 || layers < 1 || layers > n) throw ValidationError("bad layered parameters");
  std::vector<std::vector<NodeId>> layer(layers);
  for (NodeId i = 0; i < n; ++i) layer[i * layers / n].push_back(i);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int l = 0; l + 1 < layers; ++l) {
    for (NodeId v : layer[l + 1])
      edges.emplace_back(layer[l][rng.uniform_index(layer[l].size())], v);
    for (NodeId u : layer[l])
      for (NodeId v : layer[l + 1])
        if (rng.uniform_index(3) == 0) edges.emplace_back(u, v);
  }
  Scenario sc;
  sc.net = SocialNetwork::make(n, edges, layer[0]);
  sc.truth = random_valuations(n, rng);
  return sc;
}

inline Scenario generate(const std::string& kind, int n, const Rat& p, int layers, Rng& rng) {
  if (kind == "path") return gen_path(n, rng);
  if (kind == "tree") return gen_tree(n, rng);
  if (kind == "gnp-connected") return gen_gnp_connected(n, p, rng);
  if (kind == "layered") return gen_layered(n, layers, rng);
  throw ValidationError("unknown generator kind: " + kind);
}

}  // namespace dak
