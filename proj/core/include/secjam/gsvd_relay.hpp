#pragma once

#include <vector>

#include "secjam/gp.hpp"
#include "secjam/numerics.hpp"
#include "secjam/scenario.hpp"
#include "secjam/types.hpp"

namespace secjam::gsvd_relay {

/// One hop's GSVD transmit plan: streams use the last `s` GSVD columns.
struct HopPlan {
  numerics::GsvdFactors factors;
  CMat T;              // N_tx x s, unit-spectral-norm scaled R⁻¹ columns
  RVec legit_gain;     // per-stream gain toward the intended receiver
  RVec eve_gain;       // per-stream gain toward Eve
  double rinv_norm = 0.0;  // spectral norm of the full R⁻¹
};

struct GsvdRelayPlan {
  HopPlan hop1;  // Alice -> relay vs Eve
  HopPlan hop2;  // relay -> Bob vs Eve
  int s = 0;
};

/// Throws DegenerateError when either stacked channel has rank zero.
GsvdRelayPlan build_plan(const scenario::ChannelSet& ch, double tol = numerics::kDefaultRankTol);

struct SimpleRate {
  double relay_info = 0.0;  // ½ log₂ det, hop 1
  double bob_info = 0.0;    // ½ log₂ det, hop 2
  double eve_info = 0.0;    // ½ log₂ det of Eve's two-phase observation
  double raw = 0.0;         // min(relay, bob) - eve
  double rate = 0.0;        // max(raw, 0)
};

/// Closed-form per-stream product expression.
SimpleRate simple_gsvd_rate(const GsvdRelayPlan& plan, const RVec& p_a, const RVec& p_r, double noise);

struct SimpleOptions {
  int max_iters = 50;
  double tol = 1e-7;
  double power_floor = 1e-9;  // largest SNR a stream may keep at its floor, so the GP stays bounded
  gp::GpOptions gp;
};

struct SimpleAllocation {
  RVec p_a;
  RVec p_r;
  SimpleRate rate;
  std::vector<double> trace;  // 2^{-2 raw} after each accepted iterate
  int iterations = 0;
  bool converged = false;
};

/// Successive monomial condensation of the hop-rate products.
SimpleAllocation optimize_simple(const GsvdRelayPlan& plan, double p_total, double noise,
                                 const SimpleOptions& opts = {});

/// Equal power on every stream in both hops.
SimpleAllocation uniform_allocation(const GsvdRelayPlan& plan, double p_total, double noise);

/// Helper jammers built from the GSVD with Eve as the intended receiver.
struct PcjPlan {
  numerics::GsvdFactors bob_factors;    // (H_be, H_br)
  numerics::GsvdFactors alice_factors;  // (H_ae, H_ab)
  CMat T_b;   // N_b x k_b
  CMat T_a2;  // N_a x k_a
  int k_b = 0;
  int k_a = 0;
};

PcjPlan build_pcj(const scenario::ChannelSet& ch, double tol = numerics::kDefaultRankTol);

/// Diagonal entries of the four stream covariances, in mW.
struct PcjCovariances {
  RVec q_a;   // Alice data, s
  RVec q_b;   // Bob jamming, k_b
  RVec q_r;   // relay data, s
  RVec q_a2;  // Alice jamming, k_a
};

struct NoiseCovariances {
  CMat relay;  // N_r x N_r
  CMat bob;    // N_b x N_b
  CMat eve;    // 2N_e x 2N_e, block diagonal
};

NoiseCovariances noise_covariances(const scenario::ChannelSet& ch, const PcjPlan& pcj,
                                   const PcjCovariances& cov, double noise);

struct PcjInfo {
  double relay_info = 0.0;
  double bob_info = 0.0;
  double eve_info = 0.0;  // stacked two-phase observation
  double i_d = 0.0;       // min(relay, bob)
  double i_e = 0.0;       // min(relay, eve)
  double raw = 0.0;
  double rate = 0.0;
};

PcjInfo pcj_mutual_info(const scenario::ChannelSet& ch, const GsvdRelayPlan& plan, const PcjPlan& pcj,
                        const PcjCovariances& cov, double noise);

/// Partial derivatives of the raw rate with respect to each diagonal entry (active min branches).
PcjCovariances pcj_gradient(const scenario::ChannelSet& ch, const GsvdRelayPlan& plan, const PcjPlan& pcj,
                            const PcjCovariances& cov, double noise);

struct RefineOptions {
  int max_iters = 100;
  double grad_tol = 1e-6;       // projected gradient norm, in bits per unit fraction of P
  double seed_fraction = 1e-3;  // initial jamming as a fraction of P
};

struct RefineResult {
  PcjCovariances cov;
  PcjInfo info;
  std::vector<double> trace;  // raw rate after each accepted iterate
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

/// Seeds jamming at seed_fraction·P on top of `init` and runs projected Newton ascent under the
/// per-phase trace budgets.
RefineResult pcj_refine(const scenario::ChannelSet& ch, const GsvdRelayPlan& plan, const PcjPlan& pcj,
                        double p_total, double noise, const SimpleAllocation& init,
                        const RefineOptions& opts = {});

/// Seed covariances used by pcj_refine.
PcjCovariances seeded_covariances(const PcjPlan& pcj, double p_total, const SimpleAllocation& init,
                                  double seed_fraction);

/// True when both per-phase trace budgets hold within tol·P and entries are nonnegative.
bool covariances_feasible(const PcjCovariances& cov, double p_total, double tol = 1e-10);

}  // namespace secjam::gsvd_relay
