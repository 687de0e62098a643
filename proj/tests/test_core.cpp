#include <catch2/catch_amalgamated.hpp>

#include "dak/graph.hpp"
#include "dak/rng.hpp"

#include "fixtures.hpp"

#include <algorithm>
#include <set>

using namespace dak;
using fix::R;

TEST_CASE("rational parsing", "[rational]") {
  CHECK(parse_rational("0.405") == Rat(81, 200));
  CHECK(parse_rational("3/8") == Rat(3, 8));
  CHECK(parse_rational("1") == Rat(1));
  CHECK(parse_rational(".5") == Rat(1, 2));
  CHECK(parse_rational("-0.25") == Rat(-1, 4));
  CHECK(parse_rational("+2/6") == Rat(1, 3));
  CHECK(parse_rational("0") == 0);

  CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("."), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1.2.3"), std::invalid_argument);
}

TEST_CASE("rational serialization", "[rational]") {
  CHECK(rat_to_string(Rat(81, 200)) == "0.405");
  CHECK(rat_to_string(Rat(1, 3)) == "1/3");
  CHECK(rat_to_string(Rat(-3, 8)) == "-0.375");
  CHECK(rat_to_string(Rat(5)) == "5");
  CHECK(rat_to_string(Rat(0)) == "0");
  CHECK(rat_to_string(Rat(1, 20)) == "0.05");

  // round trip over a spread of denominators
  for (int num = -7; num <= 7; ++num)
    for (int den = 1; den <= 12; ++den) {
      Rat r(num, den);
      CHECK(parse_rational(rat_to_string(r)) == r);
    }

  CHECK(rat_sq_half(R("0.9")) == R("0.405"));
}

TEST_CASE("rng determinism and ranges", "[rng]") {
  Rng a(42), b(42), c(43);
  bool same = true, diff = false;
  for (int i = 0; i < 100; ++i) {
    auto x = a.next_u64();
    if (x != b.next_u64()) same = false;
    if (x != c.next_u64()) diff = true;
  }
  CHECK(same);
  CHECK(diff);

  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    auto k = rng.uniform_index(6);
    CHECK(k < 6);
    Rat u = rng.unit();
    CHECK(u >= 0);
    CHECK(u < 1);
  }
  CHECK(rng.uniform_index(1) == 0);
  CHECK_THROWS_AS(rng.uniform_index(0), std::invalid_argument);
}

TEST_CASE("rng weighted draws match their weights", "[rng]") {
  Rng rng(99);
  std::vector<Rat> w{Rat(1, 2), Rat(1, 3), Rat(1, 6)};
  const int draws = 30000;
  std::vector<int> count(3, 0);
  for (int i = 0; i < draws; ++i) ++count[rng.weighted_index(w)];
  Rat total = w[0] + w[1] + w[2];
  for (int i = 0; i < 3; ++i) {
    double p = rat_to_double(w[i] / total);
    double sigma = std::sqrt(p * (1 - p) * draws);
    CHECK(std::abs(count[i] - p * draws) < 4 * sigma);
  }
  CHECK_THROWS_AS(rng.weighted_index({Rat(0), Rat(0)}), std::invalid_argument);
  CHECK_THROWS_AS(rng.weighted_index({Rat(-1), Rat(1)}), std::invalid_argument);
}

TEST_CASE("network construction and validation", "[graph]") {
  auto net = SocialNetwork::make(3, {{0, 1}, {0, 1}, {1, 2}}, {0, 0});
  CHECK(net.out[0] == std::vector<NodeId>{1});  // duplicate edge collapsed
  CHECK(net.seller_neighbors == std::vector<NodeId>{0});
  CHECK(net.has_edge(1, 2));
  CHECK_FALSE(net.has_edge(2, 1));

  CHECK_THROWS_AS(SocialNetwork::make(2, {{0, 2}}, {0}), ValidationError);
  CHECK_THROWS_AS(SocialNetwork::make(2, {{0, 0}}, {0}), ValidationError);
  CHECK_THROWS_AS(SocialNetwork::make(2, {}, {5}), ValidationError);

  auto [net2, truth2] = fix::triangle();
  auto profile = truthful_profile(net2, truth2);
  CHECK_NOTHROW(validate_profile(net2, profile));
  profile.reports[0] = Report{R("1.5"), {1}};
  CHECK_THROWS_AS(validate_profile(net2, profile), ValidationError);
  profile.reports[0] = Report{R("0.3"), {1, 2}};
  profile.reports[1] = Report{R("0"), {2}};  // b does not know c
  CHECK_THROWS_AS(validate_profile(net2, profile), ValidationError);
}

TEST_CASE("participation closure follows invitations", "[graph]") {
  auto [path, pt] = fix::four_node_path();
  auto truthful = truthful_profile(path, pt);
  CHECK(participation_closure(path, truthful) == std::vector<NodeId>{0, 1, 2, 3});

  // b keeps its invitation to itself: the chain stops there
  auto cut = truthful;
  cut.reports[1] = Report{pt.values[1], {}};
  CHECK(participation_closure(path, cut) == std::vector<NodeId>{0, 1});

  // absent buyers neither participate nor forward
  auto gone = truthful;
  gone.reports[1].reset();
  CHECK(participation_closure(path, gone) == std::vector<NodeId>{0});

  auto [tri, tt] = fix::triangle();
  auto tp = truthful_profile(tri, tt);
  auto withhold = tp;
  withhold.reports[0] = Report{tt.values[0], {1}};
  CHECK(participation_closure(tri, withhold) == std::vector<NodeId>{0, 1});
  auto no_b = tp;
  no_b.reports[1].reset();
  CHECK(participation_closure(tri, no_b) == std::vector<NodeId>{0, 2});

  CHECK(is_participant(tri, tp, 2));
  CHECK_FALSE(is_participant(tri, withhold, 2));
}

TEST_CASE("diffusion criticality", "[graph]") {
  auto [path, pt] = fix::four_node_path();
  auto pp = truthful_profile(path, pt);
  CHECK(is_diffusion_critical(path, pp, 0, 2));
  CHECK(is_diffusion_critical(path, pp, 1, 3));
  CHECK(is_diffusion_critical(path, pp, 2, 2));  // reflexive
  CHECK_FALSE(is_diffusion_critical(path, pp, 2, 1));

  auto [tri, tt] = fix::triangle();
  auto tp = truthful_profile(tri, tt);
  CHECK(is_diffusion_critical(tri, tp, 0, 2));
  CHECK_FALSE(is_diffusion_critical(tri, tp, 1, 2));
  CHECK_FALSE(is_diffusion_critical(tri, tp, 0, 1));  // b is a seller neighbor

  CHECK_THROWS_AS(is_diffusion_critical(tri, tp, 0, 7), ValidationError);
}

TEST_CASE("removal closure", "[graph]") {
  auto [tri, tt] = fix::triangle();
  auto tp = truthful_profile(tri, tt);
  CHECK(removed_without(tri, tp, 1) == std::vector<NodeId>{0, 2});
  CHECK(removed_without(tri, tp, 0) == std::vector<NodeId>{1});

  auto [path, pt] = fix::four_node_path();
  auto pp = truthful_profile(path, pt);
  CHECK(removed_without(path, pp, 0).empty());
  CHECK(removed_without(path, pp, 3) == (std::vector<NodeId>{0, 1, 2}));

  CHECK_THROWS_AS(removed_without(path, pp, 9), ValidationError);
}

TEST_CASE("criticality partitions the participants", "[graph]") {
  // N_{-i} and {j : i critical for j} split the participant set exactly
  Rng rng(314);
  for (int trial = 0; trial < 200; ++trial) {
    auto net = fix::random_net(3 + (int)rng.uniform_index(4), rng);
    TrueProfile t;
    for (int i = 0; i < net.n; ++i) t.values.push_back(Rat(rng.uniform_index(101), 100));
    auto profile = truthful_profile(net, t);
    auto participants = participation_closure(net, profile);
    for (NodeId i : participants) {
      auto rest = removed_without(net, profile, i);
      std::set<NodeId> seen(rest.begin(), rest.end());
      for (NodeId j : participants) {
        bool crit = is_diffusion_critical(net, profile, i, j);
        REQUIRE(crit != (seen.count(j) > 0));
      }
      REQUIRE(rest.size() + [&] {
        size_t c = 0;
        for (NodeId j : participants)
          if (is_diffusion_critical(net, profile, i, j)) ++c;
        return c;
      }() == participants.size());
    }
  }
}

TEST_CASE("layered subgraph keeps only layer-bridging edges", "[graph]") {
  auto [net, truth] = fix::layered_five();
  auto profile = truthful_profile(net, truth);
  auto g = layered_subgraph(net, profile);
  CHECK(g.dist == std::vector<int>{1, 1, 2, 3, 2});
  CHECK(g.out[0] == std::vector<NodeId>{2});
  CHECK(g.out[1] == std::vector<NodeId>{4});
  CHECK(g.out[2] == std::vector<NodeId>{3});
  CHECK(g.out[3].empty());  // d -> e skips backwards across layers, dropped
  CHECK(g.order == std::vector<NodeId>{0, 1, 2, 4, 3});

  auto [path, pt] = fix::four_node_path();
  auto pg = layered_subgraph(path, truthful_profile(path, pt));
  CHECK(pg.dist == std::vector<int>{1, 2, 3, 4});

  // edges into the first layer never appear in E'
  auto [tri, tt] = fix::triangle();
  auto tg = layered_subgraph(tri, truthful_profile(tri, tt));
  CHECK(tg.out[1].empty());
  CHECK(tg.out[0] == std::vector<NodeId>{2});
}

TEST_CASE("dominator tree on the worked instances", "[graph]") {
  auto [net, truth] = fix::layered_five();
  auto g = layered_subgraph(net, truthful_profile(net, truth));
  auto dom = dominator_tree(g, net.seller_neighbors);
  CHECK(dom == std::vector<NodeId>{kSeller, kSeller, 0, 2, 1});

  // diamond: c reachable through either seller neighbor, dominated by the root
  auto diamond = SocialNetwork::make(3, {{0, 2}, {1, 2}}, {0, 1});
  TrueProfile dt{{R("0.5"), R("0.5"), R("0.5")}};
  auto dg = layered_subgraph(diamond, truthful_profile(diamond, dt));
  CHECK(dominator_tree(dg, diamond.seller_neighbors) ==
        std::vector<NodeId>{kSeller, kSeller, kSeller});

  // single bridge: c only below a
  auto [bridge, bt] = fix::bridge3();
  auto bg = layered_subgraph(bridge, truthful_profile(bridge, bt));
  CHECK(dominator_tree(bg, bridge.seller_neighbors) ==
        std::vector<NodeId>{kSeller, kSeller, 0});
}

TEST_CASE("dominator tree agrees with deletion-based dominance", "[graph]") {
  Rng rng(2718);
  for (int trial = 0; trial < 300; ++trial) {
    auto net = fix::random_net(2 + (int)rng.uniform_index(6), rng);
    TrueProfile t;
    for (int i = 0; i < net.n; ++i) t.values.push_back(Rat(1, 2));
    auto profile = truthful_profile(net, t);
    auto g = layered_subgraph(net, profile);
    REQUIRE(dominator_tree(g, net.seller_neighbors) ==
            fix::brute_idom(g, net.seller_neighbors));
  }
}

TEST_CASE("seller-free components", "[graph]") {
  auto [pair, qt] = fix::linked_pair();
  auto qp = truthful_profile(pair, qt);
  CHECK(components_without_seller(pair, qp, 0).empty());  // one big component

  auto star = SocialNetwork::make(3, {}, {0, 1, 2});
  TrueProfile st{{R("0.2"), R("0.4"), R("0.6")}};
  auto sp = truthful_profile(star, st);
  CHECK(components_without_seller(star, sp, 0) == std::vector<NodeId>{1, 2});
  CHECK(components_without_seller(star, sp, 2) == std::vector<NodeId>{0, 1});

  auto [tri, tt] = fix::triangle();
  CHECK(components_without_seller(tri, truthful_profile(tri, tt), 1).empty());

  CHECK(max_bid_over(sp, {}) == 0);
  CHECK(max_bid_over(sp, {0, 2}) == R("0.6"));
}
