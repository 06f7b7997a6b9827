#include "secjam/single_stream.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "secjam/numerics.hpp"

namespace secjam::single {

using scenario::ChannelSet;

Budget Budget::global(double p) { return {PowerMode::Global, p, p, p, p}; }
Budget Budget::individual(double p) { return {PowerMode::Individual, p, p / 2, p / 2, p / 2}; }
Budget Budget::uniform(double p) { return {PowerMode::Uniform, p, p, p, p}; }

namespace {

void require_single_relay(const ChannelSet& ch) {
  if (ch.H_ar.rows() != 1 || ch.H_rb.cols() != 1) {
    throw ArgumentError("single-stream schemes require a single-antenna relay");
  }
}

// vᴴ (noise·I + p·u uᴴ)⁻¹ v, split along u so strong jamming does not cancel catastrophically.
double quad_inv_rank1(const CVec& v, const CVec& u, double p, double noise) {
  const double uu = u.squaredNorm();
  if (!(p > 0.0) || uu == 0.0) return v.squaredNorm() / noise;
  const cplx proj = u.dot(v);
  const CVec perp = v - u * (proj / uu);
  return perp.squaredNorm() / noise + std::norm(proj) / uu / (noise + p * uu);
}

CVec h_ar_row(const ChannelSet& ch) { return ch.H_ar.row(0).transpose(); }  // entries of h_ar

double info_gain(const ChannelSet& ch, const CVec& t_a) { return std::norm((ch.H_ar.row(0) * t_a)(0)); }

double relay_gain(const ChannelSet& ch) { return ch.H_rb.col(0).squaredNorm(); }

Jammer rank_one_jammer(const CMat& null_b, const CVec& eve_signal, const CMat& jam_to_eve, double p,
                       double noise) {
  Jammer j;
  if (null_b.cols() == 0) {
    j.no_null_space = true;
    return j;
  }
  const CMat b = jam_to_eve * null_b;
  const CVec a = b.adjoint() * eve_signal;
  const double scale = std::max(1e-300, b.norm() * eve_signal.norm());
  if (a.norm() <= 1e-12 * scale) {
    j.unjammable = true;
    j.t = null_b.col(0);
    return j;
  }
  CVec c;
  if (!(p > 0.0)) {
    c = a / a.norm();
  } else {
    const auto m = null_b.cols();
    const CMat pencil_b = (noise / p) * CMat::Identity(m, m) + b.adjoint() * b;
    c = numerics::max_rank1_gen_eigvec(a, pencil_b);
  }
  j.t = null_b * c;
  j.t /= j.t.norm();
  return j;
}

}  // namespace

CVec info_beamformer(const ChannelSet& ch, double p_a, double noise) {
  require_single_relay(ch);
  if (!(p_a > 0.0)) throw ArgumentError("info_beamformer: p_a must be positive");
  const auto na = ch.H_ar.cols();
  const double snr = p_a / noise;
  const CMat a = CMat::Identity(na, na) + snr * ch.H_ar.adjoint() * ch.H_ar;
  const CMat b = CMat::Identity(na, na) + snr * ch.H_ae.adjoint() * ch.H_ae;
  return numerics::principal_gen_eigvec(numerics::hermitian_part(a), numerics::hermitian_part(b)).vector;
}

CVec null_steering_beamformer(const ChannelSet& ch, double p_a, double noise) {
  require_single_relay(ch);
  const CMat g = numerics::null_basis(ch.H_ae);
  if (g.cols() == 0) return info_beamformer(ch, p_a, noise);
  CVec t = g * (g.adjoint() * h_ar_row(ch).conjugate());
  if (t.norm() == 0.0) return info_beamformer(ch, p_a, noise);
  t /= t.norm();
  numerics::normalize_phase(t);
  return t;
}

Jammer bob_jammer(const ChannelSet& ch, const CVec& t_a, double p_b, double noise) {
  require_single_relay(ch);
  return rank_one_jammer(numerics::null_basis(ch.H_br), ch.H_ae * t_a, ch.H_be, p_b, noise);
}

Jammer alice_jammer(const ChannelSet& ch, double p_a2, double noise) {
  require_single_relay(ch);
  const CMat protect = ch.H_rb.adjoint() * ch.H_ab;  // h_rbᴴ H_ab
  return rank_one_jammer(numerics::null_basis(protect), ch.H_re.col(0), ch.H_ae, p_a2, noise);
}

Beamformers build_beamformers(const ChannelSet& ch, const CVec& t_a, const Powers& p, double noise) {
  Beamformers bf;
  bf.t_a = t_a;
  bf.bob = bob_jammer(ch, t_a, p.p_b, noise);
  bf.alice = alice_jammer(ch, p.p_a2, noise);
  const auto ne = ch.H_ae.rows();
  const CVec v1 = ch.H_ae * t_a;
  CMat k1 = noise * CMat::Identity(ne, ne);
  if (bf.bob.t.size() > 0 && p.p_b > 0.0) {
    const CVec u = ch.H_be * bf.bob.t;
    k1 += p.p_b * u * u.adjoint();
  }
  bf.w_e1 = k1.llt().solve(v1);
  const CVec v2 = ch.H_re.col(0);
  CMat k2 = noise * CMat::Identity(ne, ne);
  if (bf.alice.t.size() > 0 && p.p_a2 > 0.0) {
    const CVec u = ch.H_ae * bf.alice.t;
    k2 += p.p_a2 * u * u.adjoint();
  }
  bf.w_e2 = k2.llt().solve(v2);
  return bf;
}

Sinrs sinrs(const ChannelSet& ch, const Beamformers& bf, const Powers& p, double noise) {
  require_single_relay(ch);
  Sinrs g;
  g.ar = p.p_a / noise * info_gain(ch, bf.t_a);
  g.rb = p.p_r / noise * relay_gain(ch);
  const CVec v1 = ch.H_ae * bf.t_a;
  const CVec u1 = bf.bob.t.size() > 0 ? CVec(ch.H_be * bf.bob.t) : CVec::Zero(v1.size());
  g.ae = p.p_a * quad_inv_rank1(v1, u1, p.p_b, noise);
  const CVec v2 = ch.H_re.col(0);
  const CVec u2 = bf.alice.t.size() > 0 ? CVec(ch.H_ae * bf.alice.t) : CVec::Zero(v2.size());
  g.re = p.p_r * quad_inv_rank1(v2, u2, p.p_a2, noise);
  return g;
}

double gamma_ae_expanded(const ChannelSet& ch, const CVec& t_a, double p_a, double p_b, double noise) {
  const CMat g = numerics::null_basis(ch.H_br);
  const CVec v = ch.H_ae * t_a;
  if (g.cols() == 0 || !(p_b > 0.0)) return p_a / noise * v.squaredNorm();
  const CMat b = ch.H_be * g;
  const CVec a = b.adjoint() * v;
  const auto m = g.cols();
  const CMat k = (noise / p_b) * CMat::Identity(m, m) + b.adjoint() * b;
  const double quad = std::real(a.dot(k.llt().solve(a)));
  return p_a / noise * (v.squaredNorm() - quad);
}

double gamma_ae_with_covariance(const ChannelSet& ch, const CVec& t_a, double p_a, const CMat& q,
                                double noise) {
  const CVec v = ch.H_ae * t_a;
  const auto ne = v.size();
  const CMat k = noise * CMat::Identity(ne, ne) + ch.H_be * q * ch.H_be.adjoint();
  return p_a * std::real(v.dot(numerics::hermitian_part(k).llt().solve(v)));
}

SecrecyRate secrecy_rate_single(double g_ar, double g_rb, double g_ae, double g_re) {
  SecrecyRate out;
  const double g_e = g_ae + g_re;
  const bool case1 = g_e <= g_ar && g_ar < g_rb;
  const bool case2 = g_ar >= std::max(g_rb, g_e);
  out.power_adjusted = std::abs(g_ar - g_rb) <= 1e-9 * std::max({1.0, g_ar, g_rb});
  if (case1 || case2) {
    out.secure_case = true;
    out.raw = 0.5 * std::log2(std::min(1.0 + g_ar, 1.0 + g_rb) / (1.0 + g_e));
  }
  out.rate = std::max(0.0, out.raw);
  return out;
}

double rate_lower_bound(const Sinrs& g) {
  const double weaker = std::min(g.ar, g.rb);
  if (!(weaker > 0.0)) return -std::numeric_limits<double>::infinity();
  return 0.5 * std::log2(weaker / (1.0 + g.ae + g.re));
}

double bob_residual_gain(const ChannelSet& ch, const CVec& t_a, double p_b, double noise) {
  const CVec v = ch.H_ae * t_a;
  const Jammer j = bob_jammer(ch, t_a, p_b, noise);
  if (j.t.size() == 0) return v.squaredNorm();
  return noise * quad_inv_rank1(v, ch.H_be * j.t, p_b, noise);
}

double alice_residual_gain(const ChannelSet& ch, double p_a2, double noise) {
  const CVec v = ch.H_re.col(0);
  const Jammer j = alice_jammer(ch, p_a2, noise);
  if (j.t.size() == 0) return v.squaredNorm();
  return noise * quad_inv_rank1(v, ch.H_ae * j.t, p_a2, noise);
}

LinearFit fit_effective_power(const std::function<double(double)>& residual_gain, double budget) {
  if (!(budget > 0.0)) throw ArgumentError("fit_effective_power: budget must be positive");
  for (const double lo_frac : {1e-2, 1e-1}) {
    constexpr int kSamples = 16;
    const double lo = lo_frac * budget;
    Eigen::MatrixXd a(kSamples, 2);
    RVec y(kSamples), w(kSamples), xs(kSamples);
    for (int i = 0; i < kSamples; ++i) {
      const double x = lo * std::pow(budget / lo, static_cast<double>(i) / (kSamples - 1));
      const double q = residual_gain(x);
      y(i) = 1.0 / q;
      xs(i) = x;
      w(i) = q;  // relative residuals: weight by 1/y
      a(i, 0) = x * w(i);
      a(i, 1) = w(i);
    }
    const RVec coef = a.colPivHouseholderQr().solve((y.array() * w.array()).matrix());
    if (coef.allFinite() && coef(0) > 0.0 && coef(1) > 0.0) {
      LinearFit f{coef(0), coef(1), lo, budget, 0.0};
      for (int i = 0; i < kSamples; ++i) {
        f.max_rel_error = std::max(f.max_rel_error, std::abs(f.slope * xs(i) + f.intercept - y(i)) / y(i));
      }
      return f;
    }
  }
  throw FitDomainError("fit_effective_power: linear model has a non-positive coefficient");
}

namespace {

struct BoundGp {
  Powers powers;
  double objective = 0.0;  // noise/p_a + 1/p̃_b + p_r/(p_a p̃_a2)
  bool bob_pinned = false;
  bool alice_pinned = false;
  LinearFit fit_bob;
  LinearFit fit_alice;
};

// Minimizes the lower-bound denominator for a fixed information beamformer.
BoundGp solve_bound_gp(const ChannelSet& ch, const CVec& t_a, const Budget& budget, double noise,
                       bool allow_jamming, const gp::GpOptions& gopts) {
  BoundGp out;
  const bool individual = budget.mode == PowerMode::Individual;
  const double cap_a = individual ? budget.alice : budget.total;
  const double cap_r = individual ? budget.relay : budget.total;
  const double cap_b = individual ? budget.bob : budget.total;
  const double cap_a2 = individual ? budget.alice : budget.total;

  const double q_b0 = bob_residual_gain(ch, t_a, 0.0, noise);
  const double q_a0 = alice_residual_gain(ch, 0.0, noise);
  const Jammer jb = bob_jammer(ch, t_a, cap_b, noise);
  const Jammer ja = alice_jammer(ch, cap_a2, noise);
  const double eve_scale = 1e-14 * std::max(1.0, ch.H_ae.squaredNorm() + ch.H_re.squaredNorm());
  out.bob_pinned = !allow_jamming || jb.t.size() == 0 || jb.unjammable || q_b0 <= eve_scale;
  out.alice_pinned = !allow_jamming || ja.t.size() == 0 || ja.unjammable || q_a0 <= eve_scale;
  if (!out.bob_pinned) {
    out.fit_bob = fit_effective_power([&](double p) { return bob_residual_gain(ch, t_a, p, noise); }, cap_b);
  }
  if (!out.alice_pinned) {
    out.fit_alice = fit_effective_power([&](double p) { return alice_residual_gain(ch, p, noise); }, cap_a2);
  }

  const int ia = 0, ir = 1;
  int n = 2;
  const int ib = out.bob_pinned ? -1 : n++;
  const int ia2 = out.alice_pinned ? -1 : n++;
  using gp::Posynomial;
  auto var = [&](int idx, double coef = 1.0, double pw = 1.0) { return Posynomial::variable(n, idx, coef, pw); };

  gp::GpProblem prob;
  prob.n = n;
  prob.objective = var(ia, noise, -1.0);
  if (ib >= 0) {
    prob.objective = prob.objective + var(ib, 1.0, -1.0);
  } else if (q_b0 > 0.0) {
    prob.objective = prob.objective + Posynomial::constant(n, q_b0);
  }
  if (ia2 >= 0) {
    prob.objective = prob.objective + var(ia, 1.0, -1.0) * var(ir) * var(ia2, 1.0, -1.0);
  } else if (q_a0 > 0.0) {
    prob.objective = prob.objective + var(ia, q_a0, -1.0) * var(ir);
  }

  const auto& fb = out.fit_bob;
  const auto& fa = out.fit_alice;
  if (!individual) {
    if (ib >= 0) {
      const double rhs = cap_a + fb.intercept / fb.slope;
      prob.inequalities.push_back(var(ia, 1.0 / rhs) + var(ib, 1.0 / (fb.slope * rhs)));
    } else {
      prob.inequalities.push_back(var(ia, 1.0 / cap_a));
    }
    if (ia2 >= 0) {
      const double rhs = cap_r + fa.intercept / fa.slope;
      prob.inequalities.push_back(var(ir, 1.0 / rhs) + var(ia2, 1.0 / (fa.slope * rhs)));
    } else {
      prob.inequalities.push_back(var(ir, 1.0 / cap_r));
    }
  } else {
    prob.inequalities.push_back(var(ia, 1.0 / cap_a));
    prob.inequalities.push_back(var(ir, 1.0 / cap_r));
    if (ib >= 0) {
      prob.inequalities.push_back(var(ib, 1.0 / (fb.slope * cap_b + fb.intercept)));
    }
    if (ia2 >= 0) {
      prob.inequalities.push_back(var(ia2, 1.0 / (fa.slope * cap_a2 + fa.intercept)));
    }
  }
  // Nonnegative jamming power: p̃ >= intercept.
  if (ib >= 0) prob.inequalities.push_back(var(ib, fb.intercept, -1.0));
  if (ia2 >= 0) prob.inequalities.push_back(var(ia2, fa.intercept, -1.0));

  // Hop balance: p_a |h_ar t_a|² = p_r ‖h_rb‖².
  {
    RVec e = RVec::Zero(n);
    e(ia) = 1.0;
    e(ir) = -1.0;
    prob.equalities.push_back(Posynomial::monomial(info_gain(ch, t_a) / relay_gain(ch), e));
  }

  // Start from powers shrunk to 1e-3 of their caps.
  prob.initial = RVec(n);
  prob.initial(ia) = 1e-3 * cap_a;
  prob.initial(ir) = 1e-3 * cap_r;
  if (ib >= 0) prob.initial(ib) = fb.slope * 1e-3 * cap_b + 2.0 * fb.intercept;
  if (ia2 >= 0) prob.initial(ia2) = fa.slope * 1e-3 * cap_a2 + 2.0 * fa.intercept;

  const auto sol = gp::solve_gp(prob, gopts);
  out.objective = sol.value;
  out.powers.p_a = std::min(sol.x(ia), cap_a);
  out.powers.p_r = std::min(sol.x(ir), cap_r);
  if (ib >= 0) {
    const double room = individual ? cap_b : std::max(0.0, cap_a - out.powers.p_a);
    out.powers.p_b = std::clamp((sol.x(ib) - fb.intercept) / fb.slope, 0.0, room);
  }
  if (ia2 >= 0) {
    const double room = individual ? cap_a2 : std::max(0.0, cap_r - out.powers.p_r);
    out.powers.p_a2 = std::clamp((sol.x(ia2) - fa.intercept) / fa.slope, 0.0, room);
  }
  return out;
}

CVec pick_info_beamformer(const ChannelSet& ch, double p_a, double noise, const Options& opts) {
  return opts.null_steering_info ? null_steering_beamformer(ch, p_a, noise) : info_beamformer(ch, p_a, noise);
}

}  // namespace

RateResult evaluate(const ChannelSet& ch, const CVec& t_a, const Powers& p, double noise) {
  require_single_relay(ch);
  RateResult r;
  r.powers = p;
  r.bf = build_beamformers(ch, t_a, p, noise);
  r.gammas = sinrs(ch, r.bf, p, noise);
  r.secrecy = secrecy_rate_single(r.gammas.ar, r.gammas.rb, r.gammas.ae, r.gammas.re);
  r.lower_bound = rate_lower_bound(r.gammas);
  r.insecure_flag = !r.secrecy.secure_case;
  const double t1 = p.p_a + p.p_b;
  const double t2 = p.p_r + p.p_a2;
  r.jam_fraction_p1 = t1 > 0.0 ? p.p_b / t1 : 0.0;
  r.jam_fraction_p2 = t2 > 0.0 ? p.p_a2 / t2 : 0.0;
  return r;
}

RateResult maximize_rate(const ChannelSet& ch, const Budget& budget, double noise, const Options& opts) {
  require_single_relay(ch);
  if (!(budget.total > 0.0)) throw ArgumentError("maximize_rate: budget must be positive");

  if (budget.mode == PowerMode::Uniform) {
    const double half = budget.total / 2.0;
    const CVec t_a0 = pick_info_beamformer(ch, half, noise, opts);
    const bool bob_ok = opts.allow_jamming && !bob_jammer(ch, t_a0, half, noise).no_null_space;
    const bool alice_ok = opts.allow_jamming && !alice_jammer(ch, half, noise).no_null_space;
    Powers p;
    p.p_a = bob_ok ? half : budget.total;
    p.p_b = bob_ok ? half : 0.0;
    p.p_r = alice_ok ? half : budget.total;
    p.p_a2 = alice_ok ? half : 0.0;
    RateResult r = evaluate(ch, pick_info_beamformer(ch, p.p_a, noise, opts), p, noise);
    r.beamformer_iters = 1;
    return r;
  }

  const double start_pa = budget.mode == PowerMode::Individual ? budget.alice : budget.total;
  CVec t_a = pick_info_beamformer(ch, start_pa, noise, opts);
  RateResult best;
  bool have_best = false;
  int iters = 0;
  for (int it = 0; it < std::max(1, opts.max_beamformer_iters); ++it) {
    ++iters;
    const BoundGp bg = solve_bound_gp(ch, t_a, budget, noise, opts.allow_jamming, opts.gp);
    RateResult cand = evaluate(ch, t_a, bg.powers, noise);
    cand.bob_pinned = bg.bob_pinned;
    cand.alice_pinned = bg.alice_pinned;
    cand.fit_bob = bg.fit_bob;
    cand.fit_alice = bg.fit_alice;
    if (!have_best || cand.secrecy.rate > best.secrecy.rate ||
        (cand.secrecy.rate == best.secrecy.rate && cand.lower_bound > best.lower_bound)) {
      best = cand;
      have_best = true;
    }
    if (!(bg.powers.p_a > 0.0)) break;
    const CVec next = pick_info_beamformer(ch, bg.powers.p_a, noise, opts);
    const double delta = (next - t_a).norm();
    t_a = next;
    if (delta < opts.beamformer_tol) break;
  }
  best.beamformer_iters = iters;

  if (opts.allow_jamming) {
    Options off = opts;
    off.allow_jamming = false;
    RateResult plain = maximize_rate(ch, budget, noise, off);
    if (plain.secrecy.rate > best.secrecy.rate) {
      plain.beamformer_iters += iters;
      return plain;
    }
  }
  return best;
}

PowerMinResult minimize_power(const ChannelSet& ch, double target_rate, double noise, PowerMode mode,
                              const Options& opts) {
  require_single_relay(ch);
  if (!(target_rate >= 0.0)) throw ArgumentError("minimize_power: negative target rate");
  PowerMinResult out;
  if (target_rate == 0.0) {
    out.feasible = true;
    out.t_a = info_beamformer(ch, 1.0, noise);
    return out;
  }
  auto budget_for = [&](double u) {
    return mode == PowerMode::Individual ? Budget{PowerMode::Individual, 2.0 * u, u, u, u} : Budget::global(u);
  };
  // Largest lower-bound rate achievable within cap u.
  auto bound_at = [&](double u, RateResult* keep) {
    Options o = opts;
    const RateResult r = maximize_rate(ch, budget_for(u), noise, o);
    if (keep) *keep = r;
    return std::max(r.lower_bound, r.secrecy.rate);
  };

  double hi = 1.0;
  double lo = 0.0;
  while (bound_at(hi, nullptr) < target_rate) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e12) return out;  // target beyond the jamming-saturated bound
  }
  while (hi - lo > 1e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    (bound_at(mid, nullptr) >= target_rate ? hi : lo) = mid;
  }
  RateResult r;
  bound_at(hi, &r);
  out.feasible = true;
  out.powers = r.powers;
  out.t_a = r.bf.t_a;
  out.achieved_rate = r.secrecy.rate;
  out.objective = mode == PowerMode::Individual
                      ? std::max({r.powers.p_a, r.powers.p_b, r.powers.p_r, r.powers.p_a2})
                      : std::max(r.powers.p_a + r.powers.p_b, r.powers.p_r + r.powers.p_a2);
  return out;
}

RankOneReport rank_one_optimality_check(const ChannelSet& ch, const CVec& t_a, double p_a, double p_b,
                                        double noise, int n_samples, std::uint64_t seed) {
  require_single_relay(ch);
  RankOneReport rep;
  const CMat g = numerics::null_basis(ch.H_br);
  if (g.cols() == 0) return rep;
  const Jammer j = bob_jammer(ch, t_a, p_b, noise);
  const CMat q_star = p_b * j.t * j.t.adjoint();
  rep.closed_form_gamma = gamma_ae_with_covariance(ch, t_a, p_a, q_star, noise);
  const auto m = g.cols();
  rep.uniform_gamma = gamma_ae_with_covariance(ch, t_a, p_a, (p_b / static_cast<double>(m)) * g * g.adjoint(), noise);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::uniform_int_distribution<int> rank_pick(1, static_cast<int>(m));
  rep.min_sampled_gamma = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n_samples; ++s) {
    const int r = rank_pick(rng);
    CMat x(m, r);
    for (Eigen::Index i = 0; i < m; ++i)
      for (int k = 0; k < r; ++k) x(i, k) = {nd(rng), nd(rng)};
    CMat q = g * x * x.adjoint() * g.adjoint();
    q *= p_b * (1.0 - frac(rng)) / std::real(q.trace());
    const double gq = gamma_ae_with_covariance(ch, t_a, p_a, q, noise);
    rep.min_sampled_gamma = std::min(rep.min_sampled_gamma, gq);
    if (rep.closed_form_gamma > gq * (1.0 + 1e-9)) ++rep.violations;
    ++rep.samples;
  }
  return rep;
}

}  // namespace secjam::single
