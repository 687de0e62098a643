#pragma once

#include "dak/fpdm.hpp"
#include "dak/mupdm.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dak {

// Uniform view of an expected outcome, sized by node id. Mechanisms whose
// participants vanish (everyone absent) evaluate to all zeros.
struct EvalResult {
  std::vector<Rat> win_prob;
  std::vector<Rat> utility;
  Rat welfare = 0;
  Rat revenue = 0;
};

// One realized run, for the Monte Carlo engine.
struct RealizedSample {
  std::vector<Rat> utility;
  Rat welfare = 0;
  Rat revenue = 0;
};

struct MechanismUnderTest {
  std::string label;
  bool exact = true;
  std::function<EvalResult(const SocialNetwork&, const ReportProfile&, const TrueProfile&)>
      evaluate;
  // null for the exact-only mechanisms (strawman, stub)
  std::function<RealizedSample(const SocialNetwork&, const ReportProfile&, const TrueProfile&,
                               Rng&)>
      sample;
};

enum class MechId {
  Pdm,
  FpdmBf,
  FpdmGbf,
  FpdmWgbf,
  FpdmBfCp,
  Mupdm,
  Spmupdm,
  RepeatedFpdm,
  IdmStub,
};

inline std::optional<MechId> parse_mech(const std::string& s) {
  if (s == "pdm") return MechId::Pdm;
  if (s == "fpdm-bf") return MechId::FpdmBf;
  if (s == "fpdm-gbf") return MechId::FpdmGbf;
  if (s == "fpdm-wgbf") return MechId::FpdmWgbf;
  if (s == "fpdm-bf-cp") return MechId::FpdmBfCp;
  if (s == "mupdm") return MechId::Mupdm;
  if (s == "spmupdm") return MechId::Spmupdm;
  if (s == "repeated-fpdm-strawman") return MechId::RepeatedFpdm;
  if (s == "idm-stub") return MechId::IdmStub;
  return std::nullopt;
}

inline std::string mech_name(MechId id) {
  switch (id) {
    case MechId::Pdm: return "pdm";
    case MechId::FpdmBf: return "fpdm-bf";
    case MechId::FpdmGbf: return "fpdm-gbf";
    case MechId::FpdmWgbf: return "fpdm-wgbf";
    case MechId::FpdmBfCp: return "fpdm-bf-cp";
    case MechId::Mupdm: return "mupdm";
    case MechId::Spmupdm: return "spmupdm";
    case MechId::RepeatedFpdm: return "repeated-fpdm-strawman";
    case MechId::IdmStub: return "idm-stub";
  }
  return "?";
}

namespace detail {

inline EvalResult zeros(int n) {
  EvalResult r;
  r.win_prob.assign(n, Rat(0));
  r.utility.assign(n, Rat(0));
  return r;
}

inline bool no_participants(const SocialNetwork& net, const ReportProfile& profile) {
  return participation_closure(net, profile).empty();
}

inline EvalResult from_expected(const ExpectedOutcome& o) {
  return {o.win_prob, o.utility, o.welfare, o.revenue};
}

inline EvalResult from_multi(const MultiOutcome& o) {
  return {o.win_prob, o.utility, o.welfare, o.revenue};
}

// f-PDM composed with PDM but without the head surcharge: PDM proper, lifted
// off the path by the (here unique, for actual path networks) map ordering.
inline EvalResult pdm_eval(const SocialNetwork& net, const ReportProfile& profile,
                           const TrueProfile& truth, int cap) {
  auto dist = enumerate_distribution(MapKind::breadth_first(), net, profile, cap);
  EvalResult out = zeros(net.n);
  for (auto& [ordering, prob] : dist.support) {
    auto inst = path_instance_for(ordering, profile, truth);
    auto pi = pdm_allocation(inst);
    auto stats = pdm_expected_stats(inst);
    for (size_t pos = 0; pos < ordering.size(); ++pos) {
      out.win_prob[ordering[pos]] += prob * pi[pos];
      out.utility[ordering[pos]] += prob * stats.utility[pos];
    }
    out.welfare += prob * stats.welfare;
  }
  return out;
}

// The naive "sell m items by re-running f-PDM with the realized winner
// removed" scheme. Exact expectation over every (ordering, winner) branch.
inline void repeated_fpdm_rec(const SocialNetwork& net, ReportProfile profile,
                              const TrueProfile& truth, int rounds, const Rat& scale,
                              int cap, EvalResult& acc) {
  if (rounds == 0 || no_participants(net, profile)) return;
  auto dist = enumerate_distribution(MapKind::breadth_first(), net, profile, cap);
  for (auto& [ordering, prob] : dist.support) {
    auto inst = path_instance_for(ordering, profile, truth);
    auto pi = pdm_allocation(inst);
    auto pay = pdm_payment_matrix(inst);
    Rat surcharge = head_surcharge(net, profile, ordering[0], SurchargeVariant::Standard);
    for (size_t w = 0; w < ordering.size(); ++w) {
      if (pi[w] == 0) continue;
      Rat pe = scale * prob * pi[w];
      NodeId winner = ordering[w];
      acc.win_prob[winner] += pe;
      acc.welfare += pe * truth.values[winner];
      acc.revenue += pe * surcharge;
      for (size_t pos = 0; pos < ordering.size(); ++pos) {
        Rat u = -pay[pos][w];
        if (pos == w) u += truth.values[ordering[pos]];
        if (pos == 0) u -= surcharge;
        if (!(u == 0)) acc.utility[ordering[pos]] += pe * u;
      }
      auto next = profile;
      next.reports[winner].reset();
      repeated_fpdm_rec(net, std::move(next), truth, rounds - 1, pe, cap, acc);
    }
  }
}

// Deterministic IDM-style allocation along the critical path of the top
// bidder, with second-price-style payments. Non-normative; exists only as
// the negative-control mechanism for the Sybil and collusion oracles.
inline EvalResult idm_stub_eval(const SocialNetwork& net, const ReportProfile& profile,
                                const TrueProfile& truth) {
  EvalResult out = zeros(net.n);
  auto participants = participation_closure(net, profile);
  if (participants.empty()) return out;
  NodeId top = participants[0];
  for (NodeId v : participants)
    if (profile.bid(v) > profile.bid(top) || (profile.bid(v) == profile.bid(top) && v < top))
      top = v;
  auto g = layered_subgraph(net, profile);
  std::vector<NodeId> chain;
  for (NodeId i : participants)
    if (is_diffusion_critical(net, profile, i, top)) chain.push_back(i);
  std::sort(chain.begin(), chain.end(),
            [&](NodeId a, NodeId b) { return g.dist[a] < g.dist[b]; });
  std::vector<Rat> outside(chain.size());  // v*_{N_{-c_i}}
  for (size_t i = 0; i < chain.size(); ++i)
    outside[i] = max_bid_over(profile, removed_without(net, profile, chain[i]));
  size_t win = chain.size() - 1;
  for (size_t i = 0; i + 1 < chain.size(); ++i)
    if (profile.bid(chain[i]) >= outside[i + 1]) {
      win = i;
      break;
    }
  NodeId winner = chain[win];
  out.win_prob[winner] = 1;
  out.welfare = truth.values[winner];
  out.utility[winner] = truth.values[winner] - outside[win];
  for (size_t j = 0; j < win; ++j) out.utility[chain[j]] = outside[j + 1] - outside[j];
  out.revenue = outside[0];
  return out;
}

inline RealizedSample fpdm_draw(const SocialNetwork& net, const ReportProfile& profile,
                                const TrueProfile& truth, const MapKind& kind,
                                SurchargeVariant variant, bool with_surcharge, Rng& rng) {
  RealizedSample s;
  s.utility.assign(net.n, Rat(0));
  if (no_participants(net, profile)) return s;
  auto ordering = sample_order(kind, net, profile, rng);
  auto inst = path_instance_for(ordering, profile, truth);
  auto realized = pdm_sample(inst, rng);
  for (size_t pos = 0; pos < ordering.size(); ++pos) {
    s.utility[ordering[pos]] = -realized.payments[pos];
    s.revenue += realized.payments[pos];
  }
  NodeId winner = ordering[realized.winner];
  s.utility[winner] += truth.values[winner];
  s.welfare = truth.values[winner];
  if (with_surcharge) {
    Rat surcharge = head_surcharge(net, profile, ordering[0], variant);
    s.utility[ordering[0]] -= surcharge;
    s.revenue += surcharge;
  }
  return s;
}

inline RealizedSample multi_draw(const SocialNetwork& net, const ReportProfile& profile,
                                 const TrueProfile& truth, int items, bool sybil_proof,
                                 Rng& rng) {
  RealizedSample s;
  s.utility.assign(net.n, Rat(0));
  if (no_participants(net, profile)) return s;
  auto assignment = sybil_proof ? spmupdm_map(net, profile, items, rng)
                                : mupdm_assign(net, profile, items, rng);
  auto run = multi_run(assignment, profile, truth, rng);
  for (NodeId v = 0; v < net.n; ++v) s.utility[v] = -run.transfers[v];
  for (NodeId w : run.winners) s.utility[w] += truth.values[w];
  s.welfare = run.welfare;
  s.revenue = run.revenue;
  return s;
}

}  // namespace detail

inline MechanismUnderTest make_mechanism(MechId id, int items = 1,
                                         int cap = kDefaultExactCap) {
  MechanismUnderTest m;
  m.label = mech_name(id);
  auto fpdm = [cap](const MapKind& kind, SurchargeVariant variant) {
    return [kind, variant, cap](const SocialNetwork& net, const ReportProfile& profile,
                                const TrueProfile& truth) {
      if (detail::no_participants(net, profile)) return detail::zeros(net.n);
      return detail::from_expected(fpdm_expected(net, profile, truth, kind, variant, cap));
    };
  };
  auto fpdm_sampler = [](const MapKind& kind, SurchargeVariant variant, bool with_surcharge) {
    return [kind, variant, with_surcharge](const SocialNetwork& net,
                                           const ReportProfile& profile,
                                           const TrueProfile& truth, Rng& rng) {
      return detail::fpdm_draw(net, profile, truth, kind, variant, with_surcharge, rng);
    };
  };
  switch (id) {
    case MechId::Pdm:
      m.evaluate = [cap](const SocialNetwork& net, const ReportProfile& profile,
                         const TrueProfile& truth) {
        if (detail::no_participants(net, profile)) return detail::zeros(net.n);
        return detail::pdm_eval(net, profile, truth, cap);
      };
      m.sample = fpdm_sampler(MapKind::breadth_first(), SurchargeVariant::Standard, false);
      break;
    case MechId::FpdmBf:
      m.evaluate = fpdm(MapKind::breadth_first(), SurchargeVariant::Standard);
      m.sample = fpdm_sampler(MapKind::breadth_first(), SurchargeVariant::Standard, true);
      break;
    case MechId::FpdmGbf:
      m.evaluate = fpdm(MapKind::generalized_breadth_first(), SurchargeVariant::Standard);
      m.sample = fpdm_sampler(MapKind::generalized_breadth_first(), SurchargeVariant::Standard, true);
      break;
    case MechId::FpdmWgbf:
      m.evaluate = fpdm(MapKind::weighted_gbf(), SurchargeVariant::Standard);
      m.sample = fpdm_sampler(MapKind::weighted_gbf(), SurchargeVariant::Standard, true);
      break;
    case MechId::FpdmBfCp:
      // Thm. coverage is stated for the breadth-first map only.
      m.evaluate = fpdm(MapKind::breadth_first(), SurchargeVariant::CollusionProof);
      m.sample = fpdm_sampler(MapKind::breadth_first(), SurchargeVariant::CollusionProof, true);
      break;
    case MechId::Mupdm:
      m.evaluate = [items, cap](const SocialNetwork& net, const ReportProfile& profile,
                                const TrueProfile& truth) {
        if (detail::no_participants(net, profile)) return detail::zeros(net.n);
        return detail::from_multi(mupdm_expected(net, profile, truth, items, cap));
      };
      m.sample = [items](const SocialNetwork& net, const ReportProfile& profile,
                         const TrueProfile& truth, Rng& rng) {
        return detail::multi_draw(net, profile, truth, items, false, rng);
      };
      break;
    case MechId::Spmupdm:
      m.evaluate = [items, cap](const SocialNetwork& net, const ReportProfile& profile,
                                const TrueProfile& truth) {
        if (detail::no_participants(net, profile)) return detail::zeros(net.n);
        return detail::from_multi(spmupdm_expected(net, profile, truth, items, cap));
      };
      m.sample = [items](const SocialNetwork& net, const ReportProfile& profile,
                         const TrueProfile& truth, Rng& rng) {
        return detail::multi_draw(net, profile, truth, items, true, rng);
      };
      break;
    case MechId::RepeatedFpdm:
      m.evaluate = [items, cap](const SocialNetwork& net, const ReportProfile& profile,
                                const TrueProfile& truth) {
        EvalResult acc = detail::zeros(net.n);
        detail::repeated_fpdm_rec(net, profile, truth, items, Rat(1), cap, acc);
        return acc;
      };
      break;
    case MechId::IdmStub:
      m.evaluate = [](const SocialNetwork& net, const ReportProfile& profile,
                      const TrueProfile& truth) {
        return detail::idm_stub_eval(net, profile, truth);
      };
      break;
  }
  return m;
}

}  // namespace dak
