#include "secjam/gsvd_relay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace secjam::gsvd_relay {

using scenario::ChannelSet;

namespace {

constexpr double kLn2 = 0.69314718055994530942;

CMat r_inverse(const numerics::GsvdFactors& f) {
  return f.R.triangularView<Eigen::Upper>().solve(CMat::Identity(f.k, f.k));
}

double spectral_norm(const CMat& m) {
  return Eigen::JacobiSVD<CMat>(m).singularValues()(0);
}

HopPlan make_hop(numerics::GsvdFactors f, int s) {
  HopPlan h;
  const CMat rinv = r_inverse(f);
  h.rinv_norm = spectral_norm(rinv);
  h.T = f.Psi.leftCols(f.k) * rinv.rightCols(s) / h.rinv_norm;
  h.legit_gain = f.gains1().tail(s);
  h.eve_gain = f.gains2().tail(s);
  h.factors = std::move(f);
  return h;
}

// Full-rank R⁻¹ columns scaled to unit spectral norm.
CMat reverse_beamformer(const numerics::GsvdFactors& f) {
  const CMat rinv = r_inverse(f);
  return f.Psi.leftCols(f.k) * rinv / spectral_norm(rinv);
}

// Per-stream SNR coefficient: gain² / (σ² ‖R⁻¹‖²).
RVec stream_coef(const RVec& gain, double rinv_norm, double noise) {
  return gain.array().square() / (noise * rinv_norm * rinv_norm);
}

CMat scale_columns(const CMat& a, const RVec& q) {
  return a * q.cwiseMax(0.0).cwiseSqrt().cast<cplx>().asDiagonal();
}

CMat jam_covariance(const CMat& eff, const RVec& q, double noise) {
  const CMat w = scale_columns(eff, q);
  return noise * CMat::Identity(eff.rows(), eff.rows()) + w * w.adjoint();
}

// ½ log₂ det(I + K^{-1/2} G Gᴴ K^{-1/2}).
double whitened_info(const CMat& k, const CMat& g) { return 0.5 * numerics::whitened_logdet(k, g); }

CMat block_diag(const CMat& a, const CMat& b) {
  CMat m = CMat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

struct Effective {
  CMat relay_data, relay_jam;  // H_ar T_a, H_br T_b
  CMat bob_data, bob_jam;      // H_rb T_r, H_ab T_a2
  CMat eve1_data, eve2_data;   // H_ae T_a, H_re T_r
  CMat eve1_jam, eve2_jam;     // H_be T_b, H_ae T_a2
};

Effective effective(const ChannelSet& ch, const GsvdRelayPlan& plan, const PcjPlan& pcj) {
  Effective e;
  e.relay_data = ch.H_ar * plan.hop1.T;
  e.relay_jam = ch.H_br * pcj.T_b;
  e.bob_data = ch.H_rb * plan.hop2.T;
  e.bob_jam = ch.H_ab * pcj.T_a2;
  e.eve1_data = ch.H_ae * plan.hop1.T;
  e.eve2_data = ch.H_re * plan.hop2.T;
  e.eve1_jam = ch.H_be * pcj.T_b;
  e.eve2_jam = ch.H_ae * pcj.T_a2;
  return e;
}

CMat eve_stack(const Effective& e, const PcjCovariances& cov) {
  const CMat top = scale_columns(e.eve1_data, cov.q_a);
  const CMat bottom = scale_columns(e.eve2_data, cov.q_r);
  CMat h(top.rows() + bottom.rows(), top.cols());
  h << top, bottom;
  return h;
}

}  // namespace

GsvdRelayPlan build_plan(const ChannelSet& ch, double tol) {
  auto f1 = numerics::gsvd(ch.H_ar, ch.H_ae, tol);
  auto f2 = numerics::gsvd(ch.H_rb, ch.H_re, tol);
  if (f1.k == 0 || f2.k == 0) throw DegenerateError("build_plan: a hop has no usable dimension");
  GsvdRelayPlan plan;
  plan.s = std::min(f1.k, f2.k);
  plan.hop1 = make_hop(std::move(f1), plan.s);
  plan.hop2 = make_hop(std::move(f2), plan.s);
  return plan;
}

SimpleRate simple_gsvd_rate(const GsvdRelayPlan& plan, const RVec& p_a, const RVec& p_r, double noise) {
  if (p_a.size() != plan.s || p_r.size() != plan.s) throw ArgumentError("simple_gsvd_rate: need s powers per hop");
  if ((p_a.array() < 0.0).any() || (p_r.array() < 0.0).any()) throw ArgumentError("simple_gsvd_rate: negative power");
  const RVec ar = stream_coef(plan.hop1.legit_gain, plan.hop1.rinv_norm, noise);
  const RVec ae = stream_coef(plan.hop1.eve_gain, plan.hop1.rinv_norm, noise);
  const RVec rb = stream_coef(plan.hop2.legit_gain, plan.hop2.rinv_norm, noise);
  const RVec re = stream_coef(plan.hop2.eve_gain, plan.hop2.rinv_norm, noise);
  SimpleRate r;
  for (int i = 0; i < plan.s; ++i) {
    r.relay_info += std::log1p(p_a(i) * ar(i));
    r.bob_info += std::log1p(p_r(i) * rb(i));
    r.eve_info += std::log1p(p_a(i) * ae(i) + p_r(i) * re(i));
  }
  r.relay_info *= 0.5 / kLn2;
  r.bob_info *= 0.5 / kLn2;
  r.eve_info *= 0.5 / kLn2;
  r.raw = std::min(r.relay_info, r.bob_info) - r.eve_info;
  r.rate = std::max(0.0, r.raw);
  return r;
}

SimpleAllocation uniform_allocation(const GsvdRelayPlan& plan, double p_total, double noise) {
  SimpleAllocation a;
  a.p_a = RVec::Constant(plan.s, p_total / plan.s);
  a.p_r = a.p_a;
  a.rate = simple_gsvd_rate(plan, a.p_a, a.p_r, noise);
  a.converged = true;
  return a;
}

SimpleAllocation optimize_simple(const GsvdRelayPlan& plan, double p_total, double noise,
                                 const SimpleOptions& opts) {
  if (!(p_total > 0.0)) throw ArgumentError("optimize_simple: P must be positive");
  using gp::Posynomial;
  const int s = plan.s;
  // Variables: [x_a, x_r] as fractions of P, then one bound v_i per Eve factor.
  const int n = 3 * s;
  const RVec ar = p_total * stream_coef(plan.hop1.legit_gain, plan.hop1.rinv_norm, noise);
  const RVec ae = p_total * stream_coef(plan.hop1.eve_gain, plan.hop1.rinv_norm, noise);
  const RVec rb = p_total * stream_coef(plan.hop2.legit_gain, plan.hop2.rinv_norm, noise);
  const RVec re = p_total * stream_coef(plan.hop2.eve_gain, plan.hop2.rinv_norm, noise);

  auto hop_factor = [&](int idx, double c) {
    Posynomial f = Posynomial::constant(n, 1.0);
    if (c > 0.0) f = f + Posynomial::variable(n, idx, c);
    return f;
  };
  std::vector<Posynomial> eve_factors;
  Posynomial bound_product = Posynomial::constant(n, 1.0);
  for (int i = 0; i < s; ++i) {
    Posynomial fi = Posynomial::constant(n, 1.0);
    if (ae(i) > 0.0) fi = fi + Posynomial::variable(n, i, ae(i));
    if (re(i) > 0.0) fi = fi + Posynomial::variable(n, s + i, re(i));
    eve_factors.push_back(fi);
    bound_product = bound_product * Posynomial::variable(n, 2 * s + i);
  }
  RVec floors(2 * s);
  std::vector<Posynomial> ineqs;
  {
    Posynomial sa(n), sr(n);
    for (int i = 0; i < s; ++i) {
      sa = sa + Posynomial::variable(n, i);
      sr = sr + Posynomial::variable(n, s + i);
    }
    ineqs.push_back(sa);
    ineqs.push_back(sr);
    // Floors scaled so a stream at its floor changes every factor by at most power_floor.
    for (int i = 0; i < s; ++i) {
      floors(i) = opts.power_floor / std::max({1.0, ar(i), ae(i)});
      floors(s + i) = opts.power_floor / std::max({1.0, rb(i), re(i)});
      ineqs.push_back(Posynomial::variable(n, i, floors(i), -1.0));
      ineqs.push_back(Posynomial::variable(n, s + i, floors(s + i), -1.0));
    }
    for (int i = 0; i < s; ++i) ineqs.push_back(eve_factors[i] * Posynomial::variable(n, 2 * s + i, 1.0, -1.0));
  }

  auto objective = [&](const RVec& x) {
    double fa = 1.0, fr = 1.0, e = 1.0;
    for (int i = 0; i < s; ++i) {
      fa *= 1.0 + ar(i) * x(i);
      fr *= 1.0 + rb(i) * x(s + i);
      e *= 1.0 + ae(i) * x(i) + re(i) * x(s + i);
    }
    return std::max(1.0 / fa, 1.0 / fr) * e;
  };
  auto build = [&](const RVec& x) {
    RVec full(n);
    full.head(2 * s) = x.head(2 * s);
    for (int i = 0; i < s; ++i) full(2 * s + i) = 2.0 * eve_factors[i].eval(full);
    Posynomial ma = Posynomial::constant(n, 1.0);
    Posynomial mr = Posynomial::constant(n, 1.0);
    for (int i = 0; i < s; ++i) {
      ma = ma * gp::condense(hop_factor(i, ar(i)), full);
      mr = mr * gp::condense(hop_factor(s + i, rb(i)), full);
    }
    return gp::max_objective_slack_form({ma.inverse(), mr.inverse()}, bound_product, ineqs, {}, full);
  };

  // Starts: uniform power, then the weakest streams parked at their floors.
  gp::CondensationResult best;
  double best_value = std::numeric_limits<double>::infinity();
  for (int active = s; active >= 1; --active) {
    RVec init(n);
    for (int i = 0; i < s; ++i) {
      const bool on = i >= s - active;
      init(i) = on ? (1.0 - 1e-6) / active : 2.0 * floors(i);
      init(s + i) = on ? (1.0 - 1e-6) / active : 2.0 * floors(s + i);
    }
    init.tail(s).setOnes();
    auto res = gp::successive_condensation(build, objective, init, opts.max_iters, opts.tol, opts.gp);
    const double v = objective(res.x);
    if (v < best_value * (1.0 - 1e-12)) {
      best_value = v;
      best = std::move(res);
    }
  }
  SimpleAllocation out;
  out.p_a = p_total * best.x.head(s);
  out.p_r = p_total * best.x.segment(s, s);
  out.rate = simple_gsvd_rate(plan, out.p_a, out.p_r, noise);
  out.trace = best.trace;
  out.iterations = best.iterations;
  out.converged = best.converged;
  return out;
}

PcjPlan build_pcj(const ChannelSet& ch, double tol) {
  PcjPlan p;
  p.bob_factors = numerics::gsvd(ch.H_be, ch.H_br, tol);
  p.alice_factors = numerics::gsvd(ch.H_ae, ch.H_ab, tol);
  p.k_b = p.bob_factors.k;
  p.k_a = p.alice_factors.k;
  if (p.k_b == 0 || p.k_a == 0) throw DegenerateError("build_pcj: a helper has no usable dimension");
  p.T_b = reverse_beamformer(p.bob_factors);
  p.T_a2 = reverse_beamformer(p.alice_factors);
  return p;
}

NoiseCovariances noise_covariances(const ChannelSet& ch, const PcjPlan& pcj, const PcjCovariances& cov,
                                   double noise) {
  NoiseCovariances n;
  n.relay = jam_covariance(ch.H_br * pcj.T_b, cov.q_b, noise);
  n.bob = jam_covariance(ch.H_ab * pcj.T_a2, cov.q_a2, noise);
  n.eve = block_diag(jam_covariance(ch.H_be * pcj.T_b, cov.q_b, noise),
                     jam_covariance(ch.H_ae * pcj.T_a2, cov.q_a2, noise));
  return n;
}

PcjInfo pcj_mutual_info(const ChannelSet& ch, const GsvdRelayPlan& plan, const PcjPlan& pcj,
                        const PcjCovariances& cov, double noise) {
  const Effective e = effective(ch, plan, pcj);
  const NoiseCovariances k = noise_covariances(ch, pcj, cov, noise);
  PcjInfo info;
  info.relay_info = whitened_info(k.relay, scale_columns(e.relay_data, cov.q_a));
  info.bob_info = whitened_info(k.bob, scale_columns(e.bob_data, cov.q_r));
  info.eve_info = whitened_info(k.eve, eve_stack(e, cov));
  info.i_d = std::min(info.relay_info, info.bob_info);
  info.i_e = std::min(info.relay_info, info.eve_info);
  info.raw = info.i_d - info.i_e;
  info.rate = std::max(0.0, info.raw);
  return info;
}

namespace {

struct LogdetGrad {
  RVec data;
  RVec jam;
};

// Gradient of ½ log₂ det(K + A Q Aᴴ) - ½ log₂ det(K), K = σ²I + B Q' Bᴴ.
LogdetGrad hop_gradient(const CMat& a, const RVec& q, const CMat& b, const RVec& qj, double noise) {
  const CMat k = jam_covariance(b, qj, noise);
  const CMat wa = scale_columns(a, q);
  const CMat m = k + wa * wa.adjoint();
  const CMat m_inv = numerics::hermitian_part(m).llt().solve(CMat::Identity(m.rows(), m.rows()));
  const CMat k_inv = numerics::hermitian_part(k).llt().solve(CMat::Identity(k.rows(), k.rows()));
  LogdetGrad g;
  g.data.resize(a.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) g.data(i) = 0.5 / kLn2 * std::real(a.col(i).dot(m_inv * a.col(i)));
  g.jam.resize(b.cols());
  const CMat diff = m_inv - k_inv;
  for (Eigen::Index j = 0; j < b.cols(); ++j) g.jam(j) = 0.5 / kLn2 * std::real(b.col(j).dot(diff * b.col(j)));
  return g;
}

}  // namespace

PcjCovariances pcj_gradient(const ChannelSet& ch, const GsvdRelayPlan& plan, const PcjPlan& pcj,
                            const PcjCovariances& cov, double noise) {
  const Effective e = effective(ch, plan, pcj);
  const PcjInfo info = pcj_mutual_info(ch, plan, pcj, cov, noise);
  PcjCovariances g{RVec::Zero(cov.q_a.size()), RVec::Zero(cov.q_b.size()), RVec::Zero(cov.q_r.size()),
                   RVec::Zero(cov.q_a2.size())};

  const LogdetGrad relay = hop_gradient(e.relay_data, cov.q_a, e.relay_jam, cov.q_b, noise);
  const LogdetGrad bob = hop_gradient(e.bob_data, cov.q_r, e.bob_jam, cov.q_a2, noise);

  // Eve's stacked observation: K_e block diagonal, data columns couple both phases.
  const auto ne = e.eve1_data.rows();
  const CMat k_e = block_diag(jam_covariance(e.eve1_jam, cov.q_b, noise), jam_covariance(e.eve2_jam, cov.q_a2, noise));
  const CMat h = eve_stack(e, cov);
  const CMat m_e = k_e + h * h.adjoint();
  const auto n2 = m_e.rows();
  const CMat w = numerics::hermitian_part(m_e).llt().solve(CMat::Identity(n2, n2));
  const CMat k_inv = numerics::hermitian_part(k_e).llt().solve(CMat::Identity(n2, n2));
  const CMat diff = w - k_inv;
  const double c = 0.5 / kLn2;
  const auto s = cov.q_a.size();
  RVec eve_a(s), eve_r(s), eve_b(cov.q_b.size()), eve_a2(cov.q_a2.size());
  for (Eigen::Index i = 0; i < s; ++i) {
    CVec xa = CVec::Zero(n2), yr = CVec::Zero(n2);
    xa.head(ne) = e.eve1_data.col(i);
    yr.tail(ne) = e.eve2_data.col(i);
    const double a = cov.q_a(i), r = cov.q_r(i);
    const double cross = std::real(yr.dot(w * xa));
    eve_a(i) = c * (std::real(xa.dot(w * xa)) + (a > 0.0 ? std::sqrt(r / a) * cross : 0.0));
    eve_r(i) = c * (std::real(yr.dot(w * yr)) + (r > 0.0 ? std::sqrt(a / r) * cross : 0.0));
  }
  for (Eigen::Index j = 0; j < eve_b.size(); ++j) {
    CVec v = CVec::Zero(n2);
    v.head(ne) = e.eve1_jam.col(j);
    eve_b(j) = c * std::real(v.dot(diff * v));
  }
  for (Eigen::Index j = 0; j < eve_a2.size(); ++j) {
    CVec v = CVec::Zero(n2);
    v.tail(ne) = e.eve2_jam.col(j);
    eve_a2(j) = c * std::real(v.dot(diff * v));
  }

  // raw = min(relay, bob) - min(relay, eve)
  if (info.relay_info <= info.bob_info) {
    g.q_a += relay.data;
    g.q_b += relay.jam;
  } else {
    g.q_r += bob.data;
    g.q_a2 += bob.jam;
  }
  if (info.relay_info <= info.eve_info) {
    g.q_a -= relay.data;
    g.q_b -= relay.jam;
  } else {
    g.q_a -= eve_a;
    g.q_r -= eve_r;
    g.q_b -= eve_b;
    g.q_a2 -= eve_a2;
  }
  return g;
}

bool covariances_feasible(const PcjCovariances& cov, double p_total, double tol) {
  auto nonneg = [](const RVec& v) { return v.size() == 0 || v.minCoeff() >= 0.0; };
  if (!nonneg(cov.q_a) || !nonneg(cov.q_b) || !nonneg(cov.q_r) || !nonneg(cov.q_a2)) return false;
  return cov.q_a.sum() + cov.q_b.sum() <= p_total * (1.0 + tol) &&
         cov.q_r.sum() + cov.q_a2.sum() <= p_total * (1.0 + tol);
}

PcjCovariances seeded_covariances(const PcjPlan& pcj, double p_total, const SimpleAllocation& init,
                                  double seed_fraction) {
  const double eps = seed_fraction * p_total;
  PcjCovariances cov;
  auto shrink = [&](const RVec& p) {
    const double room = p_total - eps;
    const double sum = p.sum();
    return sum > room && sum > 0.0 ? RVec(p * (room / sum)) : p;
  };
  cov.q_a = shrink(init.p_a);
  cov.q_r = shrink(init.p_r);
  cov.q_b = RVec::Constant(pcj.k_b, eps / pcj.k_b);
  cov.q_a2 = RVec::Constant(pcj.k_a, eps / pcj.k_a);
  return cov;
}

namespace {

// Layout: [q_a, q_b | q_r, q_a2] as fractions of P.
struct Packing {
  Eigen::Index s, kb, ka;
  Eigen::Index phase1() const { return s + kb; }
  Eigen::Index size() const { return 2 * s + kb + ka; }
  RVec pack(const PcjCovariances& c, double scale) const {
    RVec x(size());
    x << c.q_a, c.q_b, c.q_r, c.q_a2;
    return x / scale;
  }
  PcjCovariances unpack(const RVec& x, double scale) const {
    PcjCovariances c;
    c.q_a = scale * x.segment(0, s);
    c.q_b = scale * x.segment(s, kb);
    c.q_r = scale * x.segment(s + kb, s);
    c.q_a2 = scale * x.segment(2 * s + kb, ka);
    return c;
  }
};

// Euclidean projection onto {x >= 0, Σx <= 1}.
RVec project_capped_simplex(const RVec& v) {
  RVec y = v.cwiseMax(0.0);
  if (y.sum() <= 1.0) return y;
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

RVec project(const Packing& pk, const RVec& x) {
  RVec y(x.size());
  y.head(pk.phase1()) = project_capped_simplex(x.head(pk.phase1()));
  y.tail(x.size() - pk.phase1()) = project_capped_simplex(x.tail(x.size() - pk.phase1()));
  return y;
}

}  // namespace

RefineResult pcj_refine(const ChannelSet& ch, const GsvdRelayPlan& plan, const PcjPlan& pcj, double p_total,
                        double noise, const SimpleAllocation& init, const RefineOptions& opts) {
  if (!(p_total > 0.0)) throw ArgumentError("pcj_refine: P must be positive");
  const Packing pk{plan.s, pcj.k_b, pcj.k_a};
  auto value = [&](const RVec& x) { return pcj_mutual_info(ch, plan, pcj, pk.unpack(x, p_total), noise).raw; };
  auto grad = [&](const RVec& x) { return RVec(p_total * pk.pack(pcj_gradient(ch, plan, pcj, pk.unpack(x, p_total), noise), 1.0)); };

  RVec x = project(pk, pk.pack(seeded_covariances(pcj, p_total, init, opts.seed_fraction), p_total));
  double fx = value(x);
  RefineResult out;
  out.trace.push_back(fx);
  const auto n = x.size();
  constexpr double kFd = 1e-6;
  constexpr double kArmijo = 1e-4;

  for (int it = 0; it < opts.max_iters; ++it) {
    out.iterations = it + 1;
    const RVec g = grad(x);
    if ((project(pk, x + g) - x).norm() < opts.grad_tol) {
      out.converged = true;
      break;
    }
    // Free variables: interior, or at zero with an increasing direction.
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (x(j) > 1e-12 || g(j) > 0.0) free.push_back(j);
    }
    RVec dir = RVec::Zero(n);
    if (!free.empty()) {
      const auto m = static_cast<Eigen::Index>(free.size());
      RMat hess(m, m);
      for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index j = free[a];
        RVec xp = x, xm = x;
        xp(j) += kFd;
        RVec col;
        if (x(j) > kFd) {
          xm(j) -= kFd;
          col = (grad(xp) - grad(xm)) / (2.0 * kFd);
        } else {
          col = (grad(xp) - g) / kFd;
        }
        for (Eigen::Index b = 0; b < m; ++b) hess(b, a) = col(free[b]);
      }
      hess = 0.5 * (hess + hess.transpose()).eval();
      const Eigen::SelfAdjointEigenSolver<RMat> es(hess);
      const double scale = std::max(1e-12, es.eigenvalues().cwiseAbs().maxCoeff());
      RVec gf(m);
      for (Eigen::Index a = 0; a < m; ++a) gf(a) = g(free[a]);
      const RVec proj = es.eigenvectors().transpose() * gf;
      RVec step = RVec::Zero(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        step(a) = proj(a) / std::max(std::abs(es.eigenvalues()(a)), 1e-8 * scale);
      }
      const RVec df = es.eigenvectors() * step;
      for (Eigen::Index a = 0; a < m; ++a) dir(free[a]) = df(a);
    }

    auto search = [&](const RVec& d, RVec& x_new, double& f_new) {
      double t = 1.0;
      for (int k = 0; k < 40; ++k, t *= 0.5) {
        x_new = project(pk, x + t * d);
        f_new = value(x_new);
        if (f_new >= fx + kArmijo * g.dot(x_new - x) && f_new > fx) return true;
      }
      return false;
    };
    RVec x_new;
    double f_new = fx;
    if (!search(dir, x_new, f_new) && !search(g, x_new, f_new)) {
      out.stalled = true;
      break;
    }
    const double gain = f_new - fx;
    x = x_new;
    fx = f_new;
    out.trace.push_back(fx);
    if (gain <= 1e-13 * std::max(1.0, std::abs(fx))) {
      out.converged = true;
      break;
    }
  }

  // The unjammed simple optimum is also feasible.
  const RVec x0 = project(pk, pk.pack(PcjCovariances{init.p_a, RVec::Zero(pcj.k_b), init.p_r, RVec::Zero(pcj.k_a)},
                                      p_total));
  if (value(x0) > fx) {
    x = x0;
    fx = value(x0);
    out.trace.push_back(fx);
  }
  out.cov = pk.unpack(x, p_total);
  out.info = pcj_mutual_info(ch, plan, pcj, out.cov, noise);
  return out;
}

}  // namespace secjam::gsvd_relay
