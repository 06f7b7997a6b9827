#pragma once

#include <cstdint>

#include "secjam/gp.hpp"
#include "secjam/scenario.hpp"
#include "secjam/types.hpp"

/// Single-antenna relay with partial cooperative jamming: Bob jams during the first hop,
/// Alice during the second, both from the null space of the legitimate receiver.
namespace secjam::single {

enum class PowerMode { Global, Individual, Uniform };

/// Per-phase budgets. Global: each phase shares P. Individual: every node gets its own cap.
struct Budget {
  PowerMode mode = PowerMode::Global;
  double total = 1.0;   // per-phase budget P (mW)
  double alice = 1.0;   // individual caps (mW)
  double bob = 1.0;
  double relay = 1.0;

  static Budget global(double p);
  /// Even split between the two transmitting nodes of each phase.
  static Budget individual(double p);
  static Budget uniform(double p);
};

struct Powers {
  double p_a = 0.0;   // Alice information, phase 1
  double p_b = 0.0;   // Bob jamming, phase 1
  double p_r = 0.0;   // Relay information, phase 2
  double p_a2 = 0.0;  // Alice jamming, phase 2
};

struct Jammer {
  CVec t;                    // unit vector, or empty when the helper has no null space
  bool unjammable = false;   // projection of Eve's signal onto the null space vanished
  bool no_null_space = false;
};

struct Beamformers {
  CVec t_a;
  Jammer bob;
  Jammer alice;
  CVec w_e1;
  CVec w_e2;
};

struct Sinrs {
  double ar = 0.0;
  double rb = 0.0;
  double ae = 0.0;
  double re = 0.0;
};

struct SecrecyRate {
  double rate = 0.0;       // clamped at 0
  double raw = 0.0;        // case expression before clamping; 0 in the insecure branch
  bool secure_case = false;
  bool power_adjusted = false;  // gamma_ar == gamma_rb
};

/// Principal generalized eigenvector of (I + p_a/noise h_arᴴh_ar, I + p_a/noise H_aeᴴH_ae).
CVec info_beamformer(const scenario::ChannelSet& ch, double p_a, double noise);

/// Unit vector along the projection of h_arᴴ onto N(H_ae); falls back to the pencil beamformer
/// when H_ae has no null space.
CVec null_steering_beamformer(const scenario::ChannelSet& ch, double p_a, double noise);

/// Bob's rank-one jammer in N(h_br) minimizing Eve's phase-1 SINR.
Jammer bob_jammer(const scenario::ChannelSet& ch, const CVec& t_a, double p_b, double noise);

/// Alice's phase-2 jammer in N(h_rbᴴ H_ab) minimizing Eve's phase-2 SINR.
Jammer alice_jammer(const scenario::ChannelSet& ch, double p_a2, double noise);

/// Builds all beamformers and Eve's MMSE combiners for the given powers.
Beamformers build_beamformers(const scenario::ChannelSet& ch, const CVec& t_a, const Powers& p,
                              double noise);

/// SINRs with Eve's MMSE combiners in the direct inverse form.
Sinrs sinrs(const scenario::ChannelSet& ch, const Beamformers& bf, const Powers& p, double noise);

/// Eve's phase-1 SINR through the matrix-inversion-lemma expansion.
double gamma_ae_expanded(const scenario::ChannelSet& ch, const CVec& t_a, double p_a, double p_b,
                         double noise);

/// Eve's phase-1 SINR for an arbitrary jamming covariance Q (N_b x N_b) from Bob.
double gamma_ae_with_covariance(const scenario::ChannelSet& ch, const CVec& t_a, double p_a,
                                const CMat& q, double noise);

SecrecyRate secrecy_rate_single(double g_ar, double g_rb, double g_ae, double g_re);

/// ½ log₂(γ_ar / (1 + γ_ae + γ_re)), may be negative.
double rate_lower_bound(const Sinrs& g);

/// 1/p̃ as a function of jamming power: Eve's residual phase-1 gain per unit information power.
double bob_residual_gain(const scenario::ChannelSet& ch, const CVec& t_a, double p_b, double noise);
/// Same for phase 2, per unit relay power.
double alice_residual_gain(const scenario::ChannelSet& ch, double p_a2, double noise);

/// Effective-power model p̃(p) ≈ slope·p + intercept.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double max_rel_error = 0.0;
};

class FitDomainError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Least-squares fit (relative residuals) of 1/residual_gain over 16 log-spaced powers in
/// [1e-2·budget, budget]; retries once on [1e-1·budget, budget] if a coefficient is not positive.
LinearFit fit_effective_power(const std::function<double(double)>& residual_gain, double budget);

struct Options {
  int max_beamformer_iters = 10;
  double beamformer_tol = 1e-6;
  bool null_steering_info = false;
  bool allow_jamming = true;
  gp::GpOptions gp;
};

struct RateResult {
  Powers powers;
  Beamformers bf;
  Sinrs gammas;
  SecrecyRate secrecy;
  double lower_bound = 0.0;
  double jam_fraction_p1 = 0.0;
  double jam_fraction_p2 = 0.0;
  int beamformer_iters = 0;
  bool bob_pinned = false;
  bool alice_pinned = false;
  /// GP left Eve's SINR above the relay's, so the rate collapsed to 0.
  bool insecure_flag = false;
  LinearFit fit_bob;
  LinearFit fit_alice;
};

/// Evaluates a fixed power vector with freshly computed jammers.
RateResult evaluate(const scenario::ChannelSet& ch, const CVec& t_a, const Powers& p, double noise);

/// GP-based rate maximization with the beamformer/power iteration.
RateResult maximize_rate(const scenario::ChannelSet& ch, const Budget& budget, double noise,
                         const Options& opts = {});

struct PowerMinResult {
  Powers powers;
  bool feasible = false;
  double objective = 0.0;  // the minimized max-of-powers value
  double achieved_rate = 0.0;
  CVec t_a;
};

/// Minimum power achieving the target secrecy rate R0 (bits/channel use) under the bound.
PowerMinResult minimize_power(const scenario::ChannelSet& ch, double target_rate, double noise,
                              PowerMode mode, const Options& opts = {});

struct RankOneReport {
  int samples = 0;
  int violations = 0;
  double closed_form_gamma = 0.0;
  double min_sampled_gamma = 0.0;
  double uniform_gamma = 0.0;
};

/// Compares the closed-form jammer against random feasible covariances supported on N(h_br).
RankOneReport rank_one_optimality_check(const scenario::ChannelSet& ch, const CVec& t_a, double p_a,
                                        double p_b, double noise, int n_samples, std::uint64_t seed);

}  // namespace secjam::single
