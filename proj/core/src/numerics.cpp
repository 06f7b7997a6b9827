#include "secjam/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace secjam::numerics {

namespace {

double max_abs(const CMat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_square(const CMat& m, const char* what) {
  if (m.rows() != m.cols()) throw ArgumentError(std::string(what) + ": matrix must be square");
}

void require_hermitian(const CMat& m, double rel_tol, const char* what) {
  require_square(m, what);
  const double asym = max_abs(m - m.adjoint());
  if (asym > rel_tol * std::max(1.0, max_abs(m))) {
    throw ArgumentError(std::string(what) + ": matrix is not Hermitian");
  }
}

// Gram-Schmidt of `v` against the first `count` columns of `basis`, twice for stability.
CVec orthogonalize(CVec v, const CMat& basis, int count) {
  for (int pass = 0; pass < 2; ++pass) {
    for (int i = 0; i < count; ++i) v -= basis.col(i) * basis.col(i).dot(v);
  }
  return v;
}

}  // namespace

RVec GsvdFactors::gains1() const {
  RVec g(k);
  for (int j = 0; j < k; ++j) g(j) = S1.col(j).norm();
  return g;
}

RVec GsvdFactors::gains2() const {
  RVec g(k);
  for (int j = 0; j < k; ++j) g(j) = S2.col(j).norm();
  return g;
}

CMat hermitian_part(const CMat& m) { return 0.5 * (m + m.adjoint()); }

void normalize_phase(CVec& v, double tol) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > tol) {
      v *= std::conj(v(i)) / mag;
      v(i) = mag;
      return;
    }
  }
}

void normalize_column_phases(CMat& m, double tol) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    CVec c = m.col(j);
    normalize_phase(c, tol);
    m.col(j) = c;
  }
}

CMat complete_unitary(const CMat& q, int n) {
  const auto m = static_cast<int>(q.cols());
  if (q.rows() != n || m > n) throw ArgumentError("complete_unitary: shape mismatch");
  CMat out(n, n);
  out.leftCols(m) = q;
  if (m == n) return out;
  CMat seed = CMat::Identity(n, n);
  if (m > 0) {
    Eigen::HouseholderQR<CMat> qr(q);
    seed = qr.householderQ() * CMat::Identity(n, n);
  }
  int filled = m;
  // Columns m.. of the Householder Q already span the complement; the loop guards rank loss.
  for (int j = (m > 0 ? m : 0); j < n && filled < n; ++j) {
    CVec v = orthogonalize(seed.col(j), out, filled);
    const double nv = v.norm();
    if (nv > 1e-8) out.col(filled++) = v / nv;
  }
  for (int j = 0; j < n && filled < n; ++j) {
    CVec v = orthogonalize(CVec::Unit(n, j), out, filled);
    const double nv = v.norm();
    if (nv > 1e-8) out.col(filled++) = v / nv;
  }
  return out;
}

GsvdFactors gsvd(const CMat& h1, const CMat& h2, double tol) {
  if (h1.cols() != h2.cols()) throw ArgumentError("gsvd: column counts differ");
  if (!(tol > 0.0 && tol <= 1e-4)) throw ArgumentError("gsvd: tolerance out of range");
  const int n1 = static_cast<int>(h1.rows());
  const int n2 = static_cast<int>(h2.rows());
  const int na = static_cast<int>(h1.cols());
  if (na == 0) throw ArgumentError("gsvd: empty column space");

  CMat stacked(n1 + n2, na);
  stacked.topRows(n1) = h1;
  stacked.bottomRows(n2) = h2;

  Eigen::JacobiSVD<CMat> outer(stacked, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVec& sigma = outer.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  int k = 0;
  while (k < sigma.size() && smax > 0.0 && sigma(k) > tol * smax) ++k;
  if (k == 0) throw DegenerateError("gsvd: both matrices are numerically zero");

  const CMat q = outer.matrixU().leftCols(k);
  const CMat q1 = q.topRows(n1);
  const CMat q2 = q.bottomRows(n2);

  // CS decomposition of the orthonormal blocks.
  CMat z = CMat::Identity(k, k);
  RVec s = RVec::Zero(k);
  CMat v_dirs = CMat::Zero(n2, k);
  if (n2 > 0) {
    Eigen::JacobiSVD<CMat> sv2(q2, Eigen::ComputeFullU | Eigen::ComputeFullV);
    z = sv2.matrixV();
    const int m2 = std::min(n2, k);
    for (int j = 0; j < m2; ++j) {
      s(j) = sv2.singularValues()(j);
      v_dirs.col(j) = sv2.matrixU().col(j);
    }
  }

  // Columns where H2 dominates leave small, poorly resolved cosines; re-resolve them by an
  // SVD of the corresponding slice of Q1 so the sines and cosines stay mutually orthogonal.
  int n_low = 0;
  while (n_low < k && s(n_low) > M_SQRT1_2) ++n_low;
  if (n_low > 0 && n1 > 0) {
    const CMat xl = q1 * z.leftCols(n_low);
    Eigen::JacobiSVD<CMat> svl(xl, Eigen::ComputeFullV);
    CMat w = svl.matrixV().rowwise().reverse();  // ascending cosines
    z.leftCols(n_low) = (z.leftCols(n_low) * w).eval();
    const CMat yl = q2 * z.leftCols(n_low);
    for (int j = 0; j < n_low; ++j) {
      const double nrm = yl.col(j).norm();
      s(j) = nrm;
      if (nrm > 0.0) v_dirs.col(j) = yl.col(j) / nrm;
    }
  }

  const CMat x = q1 * z;
  RVec c(k);
  for (int j = 0; j < k; ++j) {
    c(j) = j < x.cols() ? x.col(j).norm() : 0.0;
    const double len = std::hypot(c(j), s(j));
    c(j) /= len;
    s(j) /= len;
  }
  const int shift = std::max(0, k - n1);
  for (int j = 0; j < shift; ++j) {
    c(j) = 0.0;
    s(j) = 1.0;
  }
  for (int j = n2; j < k; ++j) {
    s(j) = 0.0;
    c(j) = 1.0;
  }
  // Enforce the ordering that exact arithmetic guarantees.
  for (int j = 1; j < k; ++j) {
    c(j) = std::max(c(j), c(j - 1));
    s(j) = std::min(s(j), s(j - 1));
  }

  // U: columns in order of decreasing cosine so well-resolved directions anchor the basis.
  CMat u_cols = CMat::Zero(n1, std::max(0, k - shift));
  {
    CMat accepted(n1, std::max(1, k - shift));
    int count = 0;
    std::vector<int> slot(k, -1);
    for (int j = k - 1; j >= shift; --j) {
      CVec v = orthogonalize(x.col(j), accepted, count);
      double nv = v.norm();
      if (nv <= 1e-300) {
        v = orthogonalize(CVec::Unit(n1, count % std::max(1, n1)), accepted, count);
        for (int t = 0; t < n1 && v.norm() < 1e-8; ++t)
          v = orthogonalize(CVec::Unit(n1, t), accepted, count);
        nv = v.norm();
      }
      accepted.col(count) = v / nv;
      slot[j] = count++;
    }
    for (int j = shift; j < k; ++j) u_cols.col(j - shift) = accepted.col(slot[j]);
  }

  CMat v_cols = CMat::Zero(n2, std::min(n2, k));
  {
    CMat accepted(n2, std::max(1, std::min(n2, k)));
    int count = 0;
    for (int j = 0; j < std::min(n2, k); ++j) {
      CVec v = orthogonalize(v_dirs.col(j), accepted, count);
      double nv = v.norm();
      if (nv < 1e-8) {
        for (int t = 0; t < n2 && nv < 1e-8; ++t) {
          v = orthogonalize(CVec::Unit(n2, t), accepted, count);
          nv = v.norm();
        }
      }
      accepted.col(count++) = v / nv;
    }
    v_cols = accepted.leftCols(std::min(n2, k));
  }

  GsvdFactors f;
  f.k = k;
  f.U = n1 > 0 ? complete_unitary(u_cols, n1) : CMat(0, 0);
  f.V = n2 > 0 ? complete_unitary(v_cols, n2) : CMat(0, 0);
  f.S1 = RMat::Zero(n1, k);
  f.S2 = RMat::Zero(n2, k);
  for (int j = shift; j < k; ++j) f.S1(j - shift, j) = c(j);
  for (int j = 0; j < std::min(n2, k); ++j) f.S2(j, j) = s(j);

  // RQ of Zᴴ diag(sigma) through a QR of the row-reversed adjoint.
  const CMat m = z.adjoint() * sigma.head(k).cast<cplx>().asDiagonal();
  const CMat pm_h = m.colwise().reverse().adjoint();
  Eigen::HouseholderQR<CMat> qr(pm_h);
  const CMat qt = qr.householderQ() * CMat::Identity(k, k);
  const CMat rt = qr.matrixQR().triangularView<Eigen::Upper>();
  CMat r = rt.adjoint().colwise().reverse().rowwise().reverse();
  CMat omega_h = qt.adjoint().colwise().reverse();
  // Positive diagonal on R.
  for (int i = 0; i < k; ++i) {
    const double mag = std::abs(r(i, i));
    if (mag > 0.0) {
      const cplx ph = r(i, i) / mag;
      r.col(i) *= std::conj(ph);
      omega_h.row(i) *= ph;
    }
  }
  f.R = r.triangularView<Eigen::Upper>();

  CMat block = CMat::Identity(na, na);
  block.topLeftCorner(k, k) = omega_h.adjoint();
  f.Psi = outer.matrixV() * block;
  return f;
}

GenEig principal_gen_eigvec(const CMat& a, const CMat& b) {
  require_hermitian(a, 1e-10, "principal_gen_eigvec(A)");
  require_hermitian(b, 1e-10, "principal_gen_eigvec(B)");
  if (a.rows() != b.rows()) throw ArgumentError("principal_gen_eigvec: size mismatch");
  const CMat bh = hermitian_part(b);
  Eigen::SelfAdjointEigenSolver<CMat> eb(bh, Eigen::EigenvaluesOnly);
  const double lmin = eb.eigenvalues().minCoeff();
  const double lmax = eb.eigenvalues().maxCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    throw IllConditionedError("principal_gen_eigvec: B is numerically singular");
  }
  Eigen::LLT<CMat> llt(bh);
  if (llt.info() != Eigen::Success) throw IllConditionedError("principal_gen_eigvec: Cholesky failed");
  const auto l = llt.matrixL();
  const auto n = a.rows();
  CMat linv_a = l.solve(hermitian_part(a));
  CMat c = l.solve(linv_a.adjoint()).adjoint();
  Eigen::SelfAdjointEigenSolver<CMat> ec(hermitian_part(c));
  const CVec y = ec.eigenvectors().col(n - 1);
  CVec x = llt.matrixU().solve(y);
  x.normalize();
  normalize_phase(x);
  const double num = std::real(x.dot(a * x));
  const double den = std::real(x.dot(b * x));
  return {x, num / den};
}

CVec max_rank1_gen_eigvec(const CVec& a, const CMat& b) {
  require_square(b, "max_rank1_gen_eigvec");
  if (a.size() != b.rows()) throw ArgumentError("max_rank1_gen_eigvec: size mismatch");
  if (a.norm() == 0.0) throw DegenerateError("max_rank1_gen_eigvec: zero vector");
  Eigen::LLT<CMat> llt(hermitian_part(b));
  if (llt.info() != Eigen::Success) throw IllConditionedError("max_rank1_gen_eigvec: B not PD");
  CVec x = llt.solve(a);
  const double nx = x.norm();
  if (!(nx > 0.0) || !std::isfinite(nx)) throw DegenerateError("max_rank1_gen_eigvec: B⁻¹a vanished");
  return x / nx;
}

CMat null_basis(const CMat& m, double tol) {
  const auto n = m.cols();
  if (n == 0) throw ArgumentError("null_basis: zero columns");
  if (m.rows() == 0) return CMat::Identity(n, n);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
  const RVec& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && smax > 0.0 && sv(rank) > tol * smax) ++rank;
  CMat g = svd.matrixV().rightCols(n - rank);
  normalize_column_phases(g);
  return g;
}

CMat range_basis(const CMat& m, double tol) {
  if (m.size() == 0) return CMat(m.rows(), 0);
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullU);
  const RVec& sv = svd.singularValues();
  const double smax = sv(0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && smax > 0.0 && sv(rank) > tol * smax) ++rank;
  CMat g = svd.matrixU().leftCols(rank);
  normalize_column_phases(g);
  return g;
}

WaterFill water_fill_min_power(const std::vector<double>& gains, double target_rate,
                               double noise) {
  if (!(noise > 0.0)) throw ArgumentError("water_fill_min_power: noise must be positive");
  if (!(target_rate >= 0.0)) throw ArgumentError("water_fill_min_power: negative target rate");
  for (double g : gains) {
    if (!(g > 0.0) || !std::isfinite(g)) throw ArgumentError("water_fill_min_power: gains must be positive");
  }
  WaterFill out;
  out.powers.assign(gains.size(), 0.0);
  if (target_rate == 0.0) return out;
  if (gains.empty()) {
    out.feasible = false;
    return out;
  }

  auto rate_at = [&](double level) {
    double r = 0.0;
    for (double g : gains) {
      const double x = g * level / noise;
      if (x > 1.0) r += 0.5 * std::log2(x);
    }
    return r;
  };

  double lo = noise / *std::max_element(gains.begin(), gains.end());
  double hi = std::max(lo, 1e-300) * 2.0;
  while (rate_at(hi) < target_rate) {
    lo = hi;
    hi *= 2.0;
  }
  while ((hi - lo) > 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    (rate_at(mid) < target_rate ? lo : hi) = mid;
  }

  // Closed-form level on the active set identified by bisection.
  double level = hi;
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (gains[i] * level > noise) active.push_back(i);
  }
  for (int iter = 0; iter < 4 && !active.empty(); ++iter) {
    double sum_log = 0.0;
    for (auto i : active) sum_log += std::log2(gains[i] / noise);
    const double exact = std::exp2((2.0 * target_rate - sum_log) / static_cast<double>(active.size()));
    bool consistent = true;
    for (auto i : active) consistent &= gains[i] * exact >= noise;
    if (!consistent) break;
    level = exact;
    break;
  }
  out.water_level = level;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    out.powers[i] = std::max(0.0, level - noise / gains[i]);
  }
  return out;
}

double logdet_psd(const CMat& m) {
  require_hermitian(m, 1e-10, "logdet_psd");
  const auto n = m.rows();
  if (n == 0) return 0.0;
  const CMat a = CMat::Identity(n, n) + hermitian_part(m);
  Eigen::LLT<CMat> llt(a);
  if (llt.info() == Eigen::Success) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += std::log2(std::real(llt.matrixLLT()(i, i)));
    return 2.0 * acc;
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(a, Eigen::EigenvaluesOnly);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ev = es.eigenvalues()(i);
    if (!(ev > 0.0)) throw ArgumentError("logdet_psd: I + M is not positive definite");
    acc += std::log2(ev);
  }
  return acc;
}

double whitened_logdet(const CMat& k, const CMat& g) {
  if (k.rows() != k.cols() || k.rows() != g.rows()) throw ArgumentError("whitened_logdet: shape mismatch");
  if (g.cols() == 0) return 0.0;
  const Eigen::LLT<CMat> llt(hermitian_part(k));
  if (llt.info() != Eigen::Success) throw IllConditionedError("whitened_logdet: K is not positive definite");
  const CMat w = llt.matrixL().solve(g);
  return w.cols() <= w.rows() ? logdet_psd(w.adjoint() * w) : logdet_psd(w * w.adjoint());
}

}  // namespace secjam::numerics
