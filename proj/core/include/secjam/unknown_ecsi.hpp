#pragma once

#include "secjam/numerics.hpp"
#include "secjam/scenario.hpp"
#include "secjam/types.hpp"

/// Fixed-rate relaying when Eve's channels are unknown: information rides on the
/// strongest singular directions of each hop and all leftover power jams the
/// orthogonal complement seen by the legitimate receiver.
namespace secjam::unknown_ecsi {

/// Fcj: transmitter and idle helper both jam. Pcj: only the idle helper jams.
enum class JamMode { Fcj, Pcj };

struct SubspacePlan {
  int k = 0;
  JamMode mode = JamMode::Fcj;
  CMat W_r, W_b;          // receive combiners, k columns each
  CMat T_a, T_r;          // information precoders, k columns each
  CMat T_a_jam, T_r_jam;  // transmitter jammers (N_a - k, N_r - k columns)
  CMat T_b_jam, T_a2_jam; // helper jammers (N_b - k, N_a - k columns; possibly empty)
  RVec relay_gains;       // squared singular values of W_rᴴ H_ar T_a
  RVec bob_gains;         // squared singular values of W_bᴴ H_rb T_r
};

/// Number of usable information dimensions: min(rank H_ar, rank H_rb).
int stream_limit(const scenario::ChannelSet& ch, double tol = numerics::kDefaultRankTol);

/// Throws ArgumentError unless 1 ≤ dim ≤ stream_limit.
SubspacePlan plan_for_dimension(const scenario::ChannelSet& ch, int dim, JamMode mode,
                                double tol = numerics::kDefaultRankTol);

struct PowerNeed {
  double p_a = 0.0;
  double p_r = 0.0;
  RVec q_a;  // water-filled information powers, phase 1
  RVec q_r;  // phase 2
  bool feasible = false;  // both phases within the budget
};

/// Minimum per-phase information power reaching target_rate on both hops.
PowerNeed min_power_for_rate(const SubspacePlan& plan, double target_rate, double noise,
                             double budget);

/// Product: minimize (p_a + p_r)·k. Naive: minimize p_a + p_r.
enum class Criterion { Product, Naive };

struct Selection {
  SubspacePlan plan;
  PowerNeed need;
  bool outage = true;  // no dimension meets the target within budget
};

Selection select_dimension(const scenario::ChannelSet& ch, double target_rate, double noise,
                           double budget, JamMode mode, Criterion criterion = Criterion::Product);

struct JammingAllocation {
  RVec q_a, q_r;                     // information (diagonal)
  RVec jam_a, jam_b, jam_r, jam_a2;  // jamming per column of the matching precoder
  double target_rate = 0.0;
  bool outage = false;
  double unused_p1 = 0.0;  // residual with nowhere to go
  double unused_p2 = 0.0;
};

/// Global: each phase shares `total`. Individual: transmitter and helper each get total / 2.
struct PowerBudget {
  double total = 1.0;
  bool individual = false;

  static PowerBudget global(double p) { return {p, false}; }
  static PowerBudget split(double p) { return {p, true}; }
  /// Cap on the information power of either hop's transmitter.
  double info_cap() const { return individual ? 0.5 * total : total; }
};

/// Uniform split of each phase's residual over the active jamming columns.
/// With jamming disabled the residual is reported as unused.
JammingAllocation allocate(const SubspacePlan& plan, const PowerNeed& need, const PowerBudget& budget,
                           double target_rate, bool jamming = true);

/// Allocation for a link in outage: nothing is transmitted.
JammingAllocation outage_allocation(double target_rate);

struct MiGap {
  double relay_info = 0.0;  // ½ log₂ det at the relay combiner output
  double bob_info = 0.0;
  double eve_info = 0.0;    // ½ log₂ det of Eve's stacked two-phase observation
  double i_d = 0.0;         // min(relay, bob)
  double i_e = 0.0;         // min(relay, eve)
  double raw = 0.0;
  double clamped = 0.0;
};

MiGap mi_difference(const scenario::ChannelSet& ch, const SubspacePlan& plan,
                    const JammingAllocation& alloc, double noise);

/// Jamming power / total power per phase; zero for an idle phase.
struct JamFractions {
  double phase1 = 0.0;
  double phase2 = 0.0;
};
JamFractions jam_fractions(const JammingAllocation& alloc);

struct JamDimReport {
  int dimension = 0;  // rank of Eve's combined phase-1 jamming image
  int lower = 0;
  int upper = 0;
  bool within = false;
};

/// Phase-1 jamming dimension seen by Eve against [min(N_a-k, N_e), min(#jam columns, N_e)].
JamDimReport jamming_dim_bound_check(const scenario::ChannelSet& ch, const SubspacePlan& plan,
                                     double tol = numerics::kDefaultRankTol);

/// Largest ‖W_rᴴ H_ar T_a′‖, ‖W_rᴴ H_br T_b′‖ and phase-2 analogues, relative to the link norms.
double receiver_leakage(const scenario::ChannelSet& ch, const SubspacePlan& plan);

}  // namespace secjam::unknown_ecsi
