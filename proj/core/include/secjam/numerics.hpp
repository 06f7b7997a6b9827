#pragma once

#include <utility>
#include <vector>

#include "secjam/types.hpp"

namespace secjam::numerics {

/// Generalized SVD of a pair sharing a column space:
///   Uᴴ H1 Psi = S1 [R, 0],  Vᴴ H2 Psi = S2 [R, 0].
/// Gains in S1 are nondecreasing along the diagonal, gains in S2 nonincreasing.
struct GsvdFactors {
  CMat U;    // N1 x N1
  CMat V;    // N2 x N2
  CMat Psi;  // Na x Na
  CMat R;    // k x k, upper triangular
  RMat S1;   // N1 x k
  RMat S2;   // N2 x k
  int k = 0;

  /// Diagonal gains c_j with S1(j - shift, j) = c_j, one per column of R.
  RVec gains1() const;
  /// Diagonal gains s_j with S2(j, j) = s_j, one per column of R.
  RVec gains2() const;
};

constexpr double kDefaultRankTol = 1e-10;

GsvdFactors gsvd(const CMat& h1, const CMat& h2, double tol = kDefaultRankTol);

struct GenEig {
  CVec vector;
  double value = 0.0;
};

/// Principal eigenpair of the Hermitian pencil (A, B) with B positive definite.
GenEig principal_gen_eigvec(const CMat& a, const CMat& b);

/// Maximizer of |aᴴc|² / (cᴴBc) over unit vectors: B⁻¹a / ‖B⁻¹a‖.
CVec max_rank1_gen_eigvec(const CVec& a, const CMat& b);

/// Orthonormal basis of the right null space of M (possibly 0 columns).
CMat null_basis(const CMat& m, double tol = kDefaultRankTol);

/// Orthonormal basis of the column space of M.
CMat range_basis(const CMat& m, double tol = kDefaultRankTol);

struct WaterFill {
  std::vector<double> powers;
  bool feasible = true;
  double water_level = 0.0;
};

/// Minimum total power achieving ½ Σ log₂(1 + g p / noise) = target_rate.
WaterFill water_fill_min_power(const std::vector<double>& gains, double target_rate,
                               double noise);

/// log₂ det(I + M) for Hermitian PSD M.
double logdet_psd(const CMat& m);

/// log₂ det(I + Gᴴ K⁻¹ G) for Hermitian positive definite K.
double whitened_logdet(const CMat& k, const CMat& g);

/// Makes the first component with magnitude above tol real and nonnegative.
void normalize_phase(CVec& v, double tol = 1e-14);
void normalize_column_phases(CMat& m, double tol = 1e-14);

/// Extends orthonormal columns to a full unitary.
CMat complete_unitary(const CMat& q, int n);

/// ½(M + Mᴴ).
CMat hermitian_part(const CMat& m);

}  // namespace secjam::numerics
