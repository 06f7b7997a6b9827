#include "secjam/unknown_ecsi.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace secjam::unknown_ecsi {

using scenario::ChannelSet;

namespace {

int numeric_rank(const CMat& m, double tol) {
  if (m.size() == 0) return 0;
  return static_cast<int>(numerics::range_basis(m, tol).cols());
}

// Right singular vectors past the first `skip`, or an empty block.
CMat trailing_right(const CMat& m, int skip) {
  const auto n = m.cols();
  if (skip >= n) return CMat(n, 0);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n - skip);
}

RVec squared_singular_values(const CMat& m) {
  return Eigen::JacobiSVD<CMat>(m).singularValues().array().square();
}

CMat scale_columns(const CMat& a, const RVec& q) {
  return a * q.cwiseMax(0.0).cwiseSqrt().cast<cplx>().asDiagonal();
}

// σ²I plus the received covariance of every jammer in `blocks`.
CMat jam_covariance(Eigen::Index rows, double noise, std::initializer_list<std::pair<CMat, RVec>> blocks) {
  CMat k = noise * CMat::Identity(rows, rows);
  for (const auto& [eff, q] : blocks) {
    if (eff.cols() == 0) continue;
    const CMat w = scale_columns(eff, q);
    k += w * w.adjoint();
  }
  return k;
}

double relative_norm(const CMat& product, const CMat& link) {
  if (product.size() == 0) return 0.0;
  const double scale = link.norm();
  return scale > 0.0 ? product.norm() / scale : product.norm();
}

}  // namespace

int stream_limit(const ChannelSet& ch, double tol) {
  return std::min(numeric_rank(ch.H_ar, tol), numeric_rank(ch.H_rb, tol));
}

SubspacePlan plan_for_dimension(const ChannelSet& ch, int dim, JamMode mode, double tol) {
  const int s = stream_limit(ch, tol);
  if (dim < 1 || dim > s) {
    throw ArgumentError("plan_for_dimension: dimension " + std::to_string(dim) + " outside [1, " +
                        std::to_string(s) + "]");
  }
  Eigen::JacobiSVD<CMat> ar(ch.H_ar, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::JacobiSVD<CMat> rb(ch.H_rb, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SubspacePlan p;
  p.k = dim;
  p.mode = mode;
  p.W_r = ar.matrixU().leftCols(dim);
  p.T_a = ar.matrixV().leftCols(dim);
  p.T_a_jam = ar.matrixV().rightCols(ch.H_ar.cols() - dim);
  p.W_b = rb.matrixU().leftCols(dim);
  p.T_r = rb.matrixV().leftCols(dim);
  p.T_r_jam = rb.matrixV().rightCols(ch.H_rb.cols() - dim);
  p.T_b_jam = trailing_right(p.W_r.adjoint() * ch.H_br, dim);
  p.T_a2_jam = trailing_right(p.W_b.adjoint() * ch.H_ab, dim);
  p.relay_gains = squared_singular_values(p.W_r.adjoint() * ch.H_ar * p.T_a);
  p.bob_gains = squared_singular_values(p.W_b.adjoint() * ch.H_rb * p.T_r);
  return p;
}

PowerNeed min_power_for_rate(const SubspacePlan& plan, double target_rate, double noise, double budget) {
  if (!(target_rate >= 0.0)) throw ArgumentError("min_power_for_rate: negative target rate");
  auto fill = [&](const RVec& gains, RVec& q) {
    const std::vector<double> g(gains.data(), gains.data() + gains.size());
    const auto wf = numerics::water_fill_min_power(g, target_rate, noise);
    q = Eigen::Map<const RVec>(wf.powers.data(), static_cast<Eigen::Index>(wf.powers.size()));
    return wf.feasible ? q.sum() : std::numeric_limits<double>::infinity();
  };
  PowerNeed need;
  need.p_a = fill(plan.relay_gains, need.q_a);
  need.p_r = fill(plan.bob_gains, need.q_r);
  need.feasible = need.p_a <= budget && need.p_r <= budget;
  return need;
}

Selection select_dimension(const ChannelSet& ch, double target_rate, double noise, double budget,
                           JamMode mode, Criterion criterion) {
  const int s = stream_limit(ch);
  if (s < 1) throw DegenerateError("select_dimension: a hop has rank zero");
  Selection best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= s; ++i) {
    SubspacePlan plan = plan_for_dimension(ch, i, mode);
    PowerNeed need = min_power_for_rate(plan, target_rate, noise, budget);
    if (!need.feasible) continue;
    const double total = need.p_a + need.p_r;
    const double cost = criterion == Criterion::Product ? total * i : total;
    if (cost < best_cost * (1.0 - 1e-12)) {
      best_cost = cost;
      best.plan = std::move(plan);
      best.need = std::move(need);
      best.outage = false;
    }
  }
  return best;
}

JammingAllocation allocate(const SubspacePlan& plan, const PowerNeed& need, const PowerBudget& budget,
                           double target_rate, bool jamming) {
  if (!need.feasible) throw ArgumentError("allocate: selection is infeasible");
  JammingAllocation a;
  a.target_rate = target_rate;
  a.q_a = need.q_a;
  a.q_r = need.q_r;
  a.jam_a = RVec::Zero(plan.T_a_jam.cols());
  a.jam_b = RVec::Zero(plan.T_b_jam.cols());
  a.jam_r = RVec::Zero(plan.T_r_jam.cols());
  a.jam_a2 = RVec::Zero(plan.T_a2_jam.cols());
  const bool own = plan.mode == JamMode::Fcj;
  // Fills `cols` uniformly with `power`; returns what could not be placed.
  auto fill = [&](double power, std::initializer_list<RVec*> cols) {
    power = std::max(0.0, power);
    Eigen::Index dims = 0;
    for (const RVec* c : cols) dims += c->size();
    if (!jamming || dims == 0) return power;
    for (RVec* c : cols) c->setConstant(power / static_cast<double>(dims));
    return 0.0;
  };
  auto phase = [&](double info, RVec& own_jam, RVec& helper_jam) {
    if (!budget.individual) {
      return own ? fill(budget.total - info, {&own_jam, &helper_jam}) : fill(budget.total - info, {&helper_jam});
    }
    const double half = 0.5 * budget.total;
    const double left = own ? fill(half - info, {&own_jam}) : std::max(0.0, half - info);
    return left + fill(half, {&helper_jam});
  };
  a.unused_p1 = phase(need.p_a, a.jam_a, a.jam_b);
  a.unused_p2 = phase(need.p_r, a.jam_r, a.jam_a2);
  return a;
}

JammingAllocation outage_allocation(double target_rate) {
  JammingAllocation a;
  a.target_rate = target_rate;
  a.outage = true;
  return a;
}

MiGap mi_difference(const ChannelSet& ch, const SubspacePlan& plan, const JammingAllocation& alloc,
                    double noise) {
  MiGap g;
  if (alloc.outage) return g;
  const CMat relay_eff = plan.W_r.adjoint() * ch.H_ar * plan.T_a;
  const CMat bob_eff = plan.W_b.adjoint() * ch.H_rb * plan.T_r;
  const CMat relay_noise = noise * CMat::Identity(plan.k, plan.k);
  g.relay_info = 0.5 * numerics::whitened_logdet(relay_noise, scale_columns(relay_eff, alloc.q_a));
  g.bob_info = 0.5 * numerics::whitened_logdet(relay_noise, scale_columns(bob_eff, alloc.q_r));

  const Eigen::Index ne = ch.H_ae.rows();
  const CMat k1 = jam_covariance(ne, noise, {{ch.H_ae * plan.T_a_jam, alloc.jam_a}, {ch.H_be * plan.T_b_jam, alloc.jam_b}});
  const CMat k2 = jam_covariance(ne, noise, {{ch.H_re * plan.T_r_jam, alloc.jam_r}, {ch.H_ae * plan.T_a2_jam, alloc.jam_a2}});
  CMat k = CMat::Zero(2 * ne, 2 * ne);
  k.topLeftCorner(ne, ne) = k1;
  k.bottomRightCorner(ne, ne) = k2;
  CMat stacked(2 * ne, plan.k);
  stacked << scale_columns(ch.H_ae * plan.T_a, alloc.q_a), scale_columns(ch.H_re * plan.T_r, alloc.q_r);
  g.eve_info = 0.5 * numerics::whitened_logdet(k, stacked);

  g.i_d = std::min(g.relay_info, g.bob_info);
  g.i_e = std::min(g.relay_info, g.eve_info);
  g.raw = g.i_d - g.i_e;
  g.clamped = std::max(0.0, g.raw);
  return g;
}

JamFractions jam_fractions(const JammingAllocation& alloc) {
  auto frac = [](double info, double jam) {
    const double total = info + jam;
    return total > 0.0 ? jam / total : 0.0;
  };
  JamFractions f;
  f.phase1 = frac(alloc.q_a.sum(), alloc.jam_a.sum() + alloc.jam_b.sum());
  f.phase2 = frac(alloc.q_r.sum(), alloc.jam_r.sum() + alloc.jam_a2.sum());
  return f;
}

JamDimReport jamming_dim_bound_check(const ChannelSet& ch, const SubspacePlan& plan, double tol) {
  const CMat own = ch.H_ae * plan.T_a_jam;
  const CMat helper = ch.H_be * plan.T_b_jam;
  CMat both(ch.H_ae.rows(), own.cols() + helper.cols());
  both << own, helper;
  const int ne = static_cast<int>(ch.H_ae.rows());
  JamDimReport r;
  r.dimension = numeric_rank(both, tol);
  r.lower = std::min(static_cast<int>(own.cols()), ne);
  r.upper = std::min(static_cast<int>(both.cols()), ne);
  r.within = r.dimension >= r.lower && r.dimension <= r.upper;
  return r;
}

double receiver_leakage(const ChannelSet& ch, const SubspacePlan& plan) {
  return std::max({relative_norm(plan.W_r.adjoint() * ch.H_ar * plan.T_a_jam, ch.H_ar),
                   relative_norm(plan.W_r.adjoint() * ch.H_br * plan.T_b_jam, ch.H_br),
                   relative_norm(plan.W_b.adjoint() * ch.H_rb * plan.T_r_jam, ch.H_rb),
                   relative_norm(plan.W_b.adjoint() * ch.H_ab * plan.T_a2_jam, ch.H_ab)});
}

}  // namespace secjam::unknown_ecsi
