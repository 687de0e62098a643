#pragma once

#include "dak/graph.hpp"
#include "dak/maps.hpp"
#include "dak/pdm.hpp"

#include <vector>

namespace dak {

enum class SurchargeVariant { Standard, CollusionProof };

// Half the squared best bid over the head's surcharge base set:
// N_{-head} (Standard) or N_{-C_head} (CollusionProof).
inline Rat head_surcharge(const SocialNetwork& net, const ReportProfile& profile, NodeId head,
                          SurchargeVariant variant) {
  require_participant(net, profile, head, "head_surcharge");
  auto base = variant == SurchargeVariant::Standard
                  ? removed_without(net, profile, head)
                  : components_without_seller(net, profile, head);
  return rat_sq_half(max_bid_over(profile, base));
}

struct OrderingBranch {
  std::vector<NodeId> ordering;
  Rat probability;
  ExpectedStats stats;  // per-position, PDM only
  Rat surcharge;
};

// Composed-lottery expectation; vectors are indexed by node id, with zeros
// for absent and unreachable buyers.
struct ExpectedOutcome {
  std::vector<Rat> win_prob;
  std::vector<Rat> utility;
  Rat welfare = 0;
  Rat revenue = 0;
  std::vector<OrderingBranch> breakdown;
};

namespace detail {
inline PathInstance path_instance_for(const std::vector<NodeId>& ordering,
                                      const ReportProfile& profile, const TrueProfile& truth) {
  PathInstance inst;
  for (NodeId v : ordering) {
    inst.bids.push_back(profile.bid(v));
    inst.values.push_back(truth.values[v]);
  }
  return inst;
}
}  // namespace detail

inline ExpectedOutcome fpdm_expected(const SocialNetwork& net, const ReportProfile& profile,
                                     const TrueProfile& truth, const MapKind& kind,
                                     SurchargeVariant variant, int cap = kDefaultExactCap) {
  auto dist = enumerate_distribution(kind, net, profile, cap);
  ExpectedOutcome out;
  out.win_prob.assign(net.n, Rat(0));
  out.utility.assign(net.n, Rat(0));
  for (auto& [ordering, prob] : dist.support) {
    auto inst = detail::path_instance_for(ordering, profile, truth);
    auto pi = pdm_allocation(inst);
    auto stats = pdm_expected_stats(inst);
    Rat surcharge = head_surcharge(net, profile, ordering[0], variant);
    for (size_t pos = 0; pos < ordering.size(); ++pos) {
      out.win_prob[ordering[pos]] += prob * pi[pos];
      out.utility[ordering[pos]] += prob * stats.utility[pos];
    }
    out.utility[ordering[0]] -= prob * surcharge;
    out.welfare += prob * stats.welfare;
    out.revenue += prob * surcharge;
    out.breakdown.push_back({ordering, prob, std::move(stats), surcharge});
  }
  return out;
}

struct RealizedFpdm {
  std::vector<NodeId> ordering;
  NodeId winner;
  std::vector<Rat> transfers;  // per node: amount paid to the seller (negative = reward)
  Rat seller_revenue;
};

// One realization of the composed lottery. The head surcharge is applied
// unconditionally; PDM transfers route through the seller and net out.
inline RealizedFpdm fpdm_sample(const SocialNetwork& net, const ReportProfile& profile,
                                const TrueProfile& truth, const MapKind& kind,
                                SurchargeVariant variant, Rng& rng) {
  auto ordering = sample_order(kind, net, profile, rng);
  auto inst = detail::path_instance_for(ordering, profile, truth);
  auto realized = pdm_sample(inst, rng);
  RealizedFpdm out;
  out.ordering = ordering;
  out.winner = ordering[realized.winner];
  out.transfers.assign(net.n, Rat(0));
  for (size_t pos = 0; pos < ordering.size(); ++pos)
    out.transfers[ordering[pos]] = realized.payments[pos];
  Rat surcharge = head_surcharge(net, profile, ordering[0], variant);
  out.transfers[ordering[0]] += surcharge;
  out.seller_revenue = 0;
  for (const Rat& t : out.transfers) out.seller_revenue += t;
  return out;
}

}  // namespace dak
