#pragma once

#include "dak/rational.hpp"
#include "dak/rng.hpp"

#include <stdexcept>
#include <vector>

namespace dak {

// A path graph 1..n with ordered bids; true values ride along when expected
// utilities are wanted.
struct PathInstance {
  std::vector<Rat> bids;
  std::vector<Rat> values;  // empty or parallel to bids

  int size() const { return (int)bids.size(); }
  bool has_values() const { return values.size() == bids.size(); }
};

using Allocation = std::vector<Rat>;
using PaymentMatrix = std::vector<std::vector<Rat>>;  // (payer, winner)

struct ExpectedStats {
  std::vector<Rat> utility;
  Rat welfare = 0;
  Rat revenue = 0;
};

struct RealizedPdm {
  int winner = 0;                  // 0-based index into the path
  std::vector<Rat> payments;       // per buyer, negative = reward
};

namespace detail {
inline void check_nonempty(const PathInstance& inst) {
  if (inst.size() < 1) throw std::invalid_argument("PDM needs at least one buyer");
}
// prior[i] = max bid strictly before position i (0 for i = 0).
inline std::vector<Rat> running_prior_max(const std::vector<Rat>& bids) {
  std::vector<Rat> prior(bids.size());
  Rat best = 0;
  for (size_t i = 0; i < bids.size(); ++i) {
    prior[i] = best;
    if (bids[i] > best) best = bids[i];
  }
  return prior;
}
}  // namespace detail

// pi_1 = 1 - v*_N + b_1; pi_i = max{0, b_i - max_{j<i} b_j} for i > 1.
inline Allocation pdm_allocation(const PathInstance& inst) {
  detail::check_nonempty(inst);
  auto prior = detail::running_prior_max(inst.bids);
  Rat vstar = prior.back() > inst.bids.back() ? prior.back() : inst.bids.back();
  Allocation pi(inst.size());
  pi[0] = Rat(1) - vstar + inst.bids[0];
  for (int i = 1; i < inst.size(); ++i) {
    Rat gain = inst.bids[i] - prior[i];
    pi[i] = gain > 0 ? gain : Rat(0);
  }
  return pi;
}

// Winner j > 1 pays (v*_{N_-j} + b_j)/2 to the seller, who forwards it to
// buyer 1; a buyer-1 win is free.
inline PaymentMatrix pdm_payment_matrix(const PathInstance& inst) {
  detail::check_nonempty(inst);
  auto prior = detail::running_prior_max(inst.bids);
  auto pi = pdm_allocation(inst);
  int n = inst.size();
  PaymentMatrix p(n, std::vector<Rat>(n, Rat(0)));
  for (int j = 1; j < n; ++j) {
    if (pi[j] == 0) continue;
    Rat charge = (prior[j] + inst.bids[j]) / 2;
    p[j][j] = charge;
    p[0][j] = -charge;
  }
  return p;
}

// Exact expectations straight from the allocation/payment definitions:
// E[u_i] = pi_i v_i - sum_j p_i^j pi_j, welfare = sum pi_i v_i,
// revenue = sum_{i,j} pi_i p_j^i.
inline ExpectedStats pdm_expected_stats(const PathInstance& inst) {
  detail::check_nonempty(inst);
  if (!inst.has_values()) throw std::invalid_argument("pdm_expected_stats needs true values");
  auto pi = pdm_allocation(inst);
  auto pay = pdm_payment_matrix(inst);
  int n = inst.size();
  ExpectedStats st;
  st.utility.assign(n, Rat(0));
  for (int i = 0; i < n; ++i) {
    Rat u = pi[i] * inst.values[i];
    for (int j = 0; j < n; ++j)
      if (!(pay[i][j] == 0)) u -= pay[i][j] * pi[j];
    st.utility[i] = u;
    st.welfare += pi[i] * inst.values[i];
    for (int j = 0; j < n; ++j)
      if (!(pay[j][i] == 0)) st.revenue += pi[i] * pay[j][i];
  }
  return st;
}

// One draw of the PDM lottery: a single uniform variate against cumulative
// thresholds in path order.
inline RealizedPdm pdm_sample(const PathInstance& inst, Rng& rng) {
  detail::check_nonempty(inst);
  auto pi = pdm_allocation(inst);
  auto pay = pdm_payment_matrix(inst);
  Rat u = rng.unit();
  Rat cum = 0;
  int winner = inst.size() - 1;
  for (int i = 0; i < inst.size(); ++i) {
    cum += pi[i];
    if (u < cum) {
      winner = i;
      break;
    }
  }
  RealizedPdm out;
  out.winner = winner;
  out.payments.resize(inst.size());
  for (int i = 0; i < inst.size(); ++i) out.payments[i] = pay[i][winner];
  return out;
}

// Experimental ex-post variant: the head's lump surcharge (base bid s, paid
// amount s^2/2 in the standard rule) is spread over winning events in
// proportion to the head's per-event proceeds, so she pays s^2/2 in
// expectation and never more than the event compensates.
inline PaymentMatrix expost_payment_matrix(const PathInstance& inst, const Rat& surcharge_base) {
  detail::check_nonempty(inst);
  auto pay = pdm_payment_matrix(inst);
  Rat target = rat_sq_half(surcharge_base);
  if (target == 0) return pay;
  auto pi = pdm_allocation(inst);
  int n = inst.size();
  // Head proceeds per winning event, valued at her own bid when she wins.
  std::vector<Rat> proceeds(n, Rat(0));
  proceeds[0] = inst.bids[0];
  for (int j = 1; j < n; ++j) proceeds[j] = -pay[0][j];
  Rat total = 0;
  for (int j = 0; j < n; ++j) total += pi[j] * proceeds[j];
  if (total == 0) throw std::invalid_argument("ex-post variant: surcharge with no head proceeds");
  for (int j = 0; j < n; ++j) {
    if (pi[j] == 0) continue;  // zero-probability events carry no charge
    pay[0][j] += proceeds[j] * target / total;
  }
  return pay;
}

}  // namespace dak
