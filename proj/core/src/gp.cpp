#include "secjam/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace secjam::gp {

Posynomial Posynomial::constant(int n_vars, double c) {
  Posynomial p(n_vars);
  p.add_term(c, RVec::Zero(n_vars));
  return p;
}

Posynomial Posynomial::monomial(double coef, const RVec& exps) {
  Posynomial p(static_cast<int>(exps.size()));
  p.add_term(coef, exps);
  return p;
}

Posynomial Posynomial::variable(int n_vars, int idx, double coef, double power) {
  if (idx < 0 || idx >= n_vars) throw ArgumentError("Posynomial::variable: index out of range");
  RVec e = RVec::Zero(n_vars);
  e(idx) = power;
  return monomial(coef, e);
}

Posynomial& Posynomial::add_term(double coef, const RVec& exps) {
  if (!(coef > 0.0) || !std::isfinite(coef)) throw ArgumentError("Posynomial: coefficients must be positive");
  if (exps.size() != n_) throw ArgumentError("Posynomial: exponent length mismatch");
  terms_.push_back({coef, exps});
  return *this;
}

double Posynomial::eval(const RVec& x) const {
  double acc = 0.0;
  for (const auto& t : terms_) {
    double v = t.coef;
    for (int j = 0; j < n_; ++j) {
      if (t.exps(j) != 0.0) v *= std::pow(x(j), t.exps(j));
    }
    acc += v;
  }
  return acc;
}

RVec Posynomial::log_gradient(const RVec& x) const {
  RVec g = RVec::Zero(n_);
  const RVec w = condensation_weights(*this, x);
  for (std::size_t k = 0; k < terms_.size(); ++k) g += w(static_cast<Eigen::Index>(k)) * terms_[k].exps;
  return g;
}

Posynomial Posynomial::inverse() const { return pow(-1.0); }

Posynomial Posynomial::pow(double k) const {
  if (!is_monomial()) throw ArgumentError("Posynomial::pow: only monomials");
  return monomial(std::pow(terms_[0].coef, k), k * terms_[0].exps);
}

Posynomial Posynomial::extended(int n_vars) const {
  if (n_vars < n_) throw ArgumentError("Posynomial::extended: cannot shrink");
  Posynomial p(n_vars);
  for (const auto& t : terms_) {
    RVec e = RVec::Zero(n_vars);
    e.head(n_) = t.exps;
    p.add_term(t.coef, e);
  }
  return p;
}

Posynomial Posynomial::operator+(const Posynomial& o) const {
  if (o.n_ != n_) throw ArgumentError("Posynomial: variable count mismatch");
  Posynomial p = *this;
  for (const auto& t : o.terms_) p.terms_.push_back(t);
  return p;
}

Posynomial Posynomial::operator*(const Posynomial& o) const {
  if (o.n_ != n_) throw ArgumentError("Posynomial: variable count mismatch");
  Posynomial p(n_);
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) p.add_term(a.coef * b.coef, a.exps + b.exps);
  return p;
}

Posynomial Posynomial::operator*(double c) const {
  Posynomial p(n_);
  for (const auto& t : terms_) p.add_term(t.coef * c, t.exps);
  return p;
}

RVec condensation_weights(const Posynomial& f, const RVec& x) {
  const auto& terms = f.terms();
  if (terms.empty()) throw ArgumentError("condensation_weights: empty posynomial");
  if ((x.array() <= 0.0).any()) throw ArgumentError("condensation_weights: point must be positive");
  // Log-domain evaluation avoids overflow for large exponents.
  RVec logs(static_cast<Eigen::Index>(terms.size()));
  const RVec lx = x.array().log().matrix();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    logs(static_cast<Eigen::Index>(k)) = std::log(terms[k].coef) + terms[k].exps.dot(lx);
  }
  const double m = logs.maxCoeff();
  RVec w = (logs.array() - m).exp().matrix();
  return w / w.sum();
}

Posynomial condense(const Posynomial& f, const RVec& x) {
  const RVec w = condensation_weights(f, x);
  const int n = f.num_vars();
  double log_coef = 0.0;
  RVec exps = RVec::Zero(n);
  const auto& terms = f.terms();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const double a = w(static_cast<Eigen::Index>(k));
    if (a <= 0.0) continue;
    log_coef += a * (std::log(terms[k].coef) - std::log(a));
    exps += a * terms[k].exps;
  }
  return Posynomial::monomial(std::exp(log_coef), exps);
}

namespace {

// log sum_k exp(A_k . z + b_k)
struct Lse {
  RMat A;
  RVec b;

  double value(const RVec& z) const {
    v_.noalias() = A * z;
    v_ += b;
    const double m = v_.maxCoeff();
    return m + std::log((v_.array() - m).exp().sum());
  }

  void derivatives(const RVec& z, double& val, RVec& grad, RMat& hess) const {
    const RVec v = A * z + b;
    const double m = v.maxCoeff();
    RVec w = (v.array() - m).exp().matrix();
    const double s = w.sum();
    val = m + std::log(s);
    w /= s;
    grad = A.transpose() * w;
    hess = A.transpose() * w.asDiagonal() * A - grad * grad.transpose();
  }

  // Adds the barrier term -log(-f) to (g, h); returns false outside the domain.
  bool add_log_barrier(const RVec& z, RVec& g, RMat& h) const {
    v_.noalias() = A * z;
    v_ += b;
    const double m = v_.maxCoeff();
    w_ = (v_.array() - m).exp().matrix();
    const double s = w_.sum();
    const double f = m + std::log(s);
    if (!(f < 0.0)) return false;
    w_ /= s;
    const double inv = -1.0 / f;
    grad_.noalias() = A.transpose() * w_;
    g.noalias() += inv * grad_;
    if (A.rows() > 1) {
      wa_.noalias() = w_.asDiagonal() * A;
      h.noalias() += inv * (A.transpose() * wa_);
      h.noalias() += (inv * inv - inv) * (grad_ * grad_.transpose());
    } else {
      h.noalias() += (inv * inv) * (grad_ * grad_.transpose());
    }
    return true;
  }

 private:
  mutable RVec v_, w_, grad_;
  mutable RMat wa_;
};

Lse to_lse(const Posynomial& p) {
  Lse f;
  const auto& terms = p.terms();
  f.A.resize(static_cast<Eigen::Index>(terms.size()), p.num_vars());
  f.b.resize(static_cast<Eigen::Index>(terms.size()));
  for (std::size_t k = 0; k < terms.size(); ++k) {
    f.A.row(static_cast<Eigen::Index>(k)) = terms[k].exps.transpose();
    f.b(static_cast<Eigen::Index>(k)) = std::log(terms[k].coef);
  }
  return f;
}

// Restricts an LSE in y to the affine set y = y0 + N z.
Lse reduce(const Lse& f, const RVec& y0, const RMat& basis) {
  Lse r;
  r.A = f.A * basis;
  r.b = f.b + f.A * y0;
  return r;
}

constexpr double kUnboundedLog = 500.0;
constexpr double kMaxLogStep = 5.0;

struct BarrierState {
  RVec z;
  double t = 1.0;
  int newton_steps = 0;
};

class Barrier {
 public:
  Barrier(Lse obj, std::vector<Lse> cons, const GpOptions& opts, const RVec& y0, const RMat& basis,
          bool check_unbounded)
      : obj_(std::move(obj)), cons_(std::move(cons)), opts_(opts), y0_(y0), basis_(basis),
        check_unbounded_(check_unbounded) {}

  bool strictly_feasible(const RVec& z) const {
    for (const auto& c : cons_)
      if (!(c.value(z) < 0.0)) return false;
    return true;
  }

  double phi(const RVec& z, double t) const {
    double v = t * obj_.value(z);
    for (const auto& c : cons_) {
      const double f = c.value(z);
      if (!(f < 0.0)) return std::numeric_limits<double>::infinity();
      v -= std::log(-f);
    }
    return v;
  }

  // Returns true if `stop` fired.
  bool center(BarrierState& st, const std::function<bool(const RVec&)>& stop) {
    for (int it = 0; it < opts_.max_inner; ++it) {
      double f0;
      RVec g;
      RMat h;
      obj_.derivatives(st.z, f0, g, h);
      g *= st.t;
      h *= st.t;
      for (const auto& c : cons_) c.add_log_barrier(st.z, g, h);
      const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
      // Symmetric diagonal scaling keeps badly scaled barrier terms from swamping the rest.
      const RVec d = h.diagonal().cwiseAbs().cwiseMax(1e-13 * scale).cwiseSqrt().cwiseInverse();
      RMat hr = d.asDiagonal() * h * d.asDiagonal();
      hr.diagonal().array() += 1e-13;
      Eigen::LDLT<RMat> ldlt(hr);
      RVec dz = -(d.asDiagonal() * ldlt.solve(d.asDiagonal() * g)).eval();
      if (!dz.allFinite() || g.dot(dz) > 0.0) dz = -g / scale;
      const double dec2 = -g.dot(dz);
      if (dec2 / 2.0 <= opts_.kkt_tol) return stop && stop(st.z);

      const double base = phi(st.z, st.t);
      // Log-domain trust cap: at most a factor e^kMaxLogStep per variable per step.
      const double longest = dz.cwiseAbs().maxCoeff();
      double step = longest > kMaxLogStep ? kMaxLogStep / longest : 1.0;
      bool moved = false;
      double decrease = 0.0;
      for (int ls = 0; ls < 80; ++ls) {
        const RVec trial = st.z + step * dz;
        const double v = phi(trial, st.t);
        if (std::isfinite(v) && v <= base - 0.01 * step * dec2) {
          st.z = trial;
          moved = true;
          decrease = base - v;
          break;
        }
        step *= 0.5;
      }
      ++st.newton_steps;
      if (check_unbounded_) {
        const RVec y = y0_ + basis_ * st.z;
        if (y.cwiseAbs().maxCoeff() > kUnboundedLog || obj_.value(st.z) < -kUnboundedLog) {
          throw GpUnbounded("solve_gp: objective is unbounded below");
        }
      }
      if (stop && stop(st.z)) return true;
      if (!moved) return false;
      // Progress below rounding of phi: the center is as good as it gets at this t.
      if (decrease <= 1e-13 * std::max(1.0, std::abs(base))) return false;
    }
    return false;
  }

  // Full barrier path; returns true if `stop` fired.
  bool run(BarrierState& st, const std::function<bool(const RVec&)>& stop) {
    const double m = static_cast<double>(cons_.size());
    if (cons_.empty()) {
      st.t = 1.0;
      return center(st, stop);
    }
    for (int outer = 0; outer < opts_.max_outer; ++outer) {
      if (center(st, stop)) return true;
      if (m / st.t < opts_.tol) break;
      st.t *= opts_.mu;
    }
    return false;
  }

  const std::vector<Lse>& constraints() const { return cons_; }

 private:
  Lse obj_;
  std::vector<Lse> cons_;
  GpOptions opts_;
  RVec y0_;
  RMat basis_;
  bool check_unbounded_;
};

}  // namespace

GpSolution solve_gp(const GpProblem& problem, const GpOptions& opts) {
  const int n = problem.n;
  if (n <= 0) throw ArgumentError("solve_gp: no variables");
  auto check_vars = [&](const Posynomial& p) {
    if (p.num_vars() != n) throw ArgumentError("solve_gp: posynomial variable count mismatch");
    if (p.terms().empty()) throw ArgumentError("solve_gp: empty posynomial");
  };
  check_vars(problem.objective);
  for (const auto& p : problem.inequalities) check_vars(p);
  for (const auto& p : problem.equalities) {
    check_vars(p);
    if (!p.is_monomial()) throw ArgumentError("solve_gp: equality constraints must be monomials");
  }

  RVec y_init = RVec::Zero(n);
  if (problem.initial.size() > 0) {
    if (problem.initial.size() != n || (problem.initial.array() <= 0.0).any()) {
      throw ArgumentError("solve_gp: initial point must be positive with n entries");
    }
    y_init = problem.initial.array().log().matrix();
  }

  // Equalities a_j . y = -log c_j, eliminated by an affine parametrization.
  RVec y0 = y_init;
  RMat basis = RMat::Identity(n, n);
  if (!problem.equalities.empty()) {
    const auto me = static_cast<Eigen::Index>(problem.equalities.size());
    RMat aeq(me, n);
    RVec beq(me);
    for (Eigen::Index j = 0; j < me; ++j) {
      const auto& t = problem.equalities[static_cast<std::size_t>(j)].terms()[0];
      aeq.row(j) = t.exps.transpose();
      beq(j) = -std::log(t.coef);
    }
    Eigen::JacobiSVD<RMat> svd(aeq, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVec& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-12 * std::max(1.0, smax)) ++rank;
    const RVec resid = beq - aeq * y_init;
    RVec corr = RVec::Zero(n);
    const RVec ut = svd.matrixU().transpose() * resid;
    for (Eigen::Index i = 0; i < rank; ++i) corr += svd.matrixV().col(i) * (ut(i) / sv(i));
    y0 = y_init + corr;
    const RVec after = aeq * y0 - beq;
    for (Eigen::Index j = 0; j < me; ++j) {
      if (std::abs(after(j)) > 1e-9 * (1.0 + std::abs(beq(j)))) {
        throw GpInfeasible("solve_gp: inconsistent equality constraints", static_cast<int>(j), true);
      }
    }
    basis = svd.matrixV().rightCols(n - rank);
  }
  const auto nz = basis.cols();

  auto map_x = [&](const RVec& z) -> RVec {
    return (y0 + basis * z).array().exp().matrix();
  };

  if (nz == 0) {
    // Fully determined by equalities.
    GpSolution sol;
    sol.x = map_x(RVec::Zero(0));
    for (std::size_t i = 0; i < problem.inequalities.size(); ++i) {
      if (problem.inequalities[i].eval(sol.x) > 1.0 + 1e-12) {
        throw GpInfeasible("solve_gp: equality-determined point violates an inequality", static_cast<int>(i), false);
      }
    }
    sol.value = problem.objective.eval(sol.x);
    sol.duals = RVec::Zero(static_cast<Eigen::Index>(problem.inequalities.size()));
    return sol;
  }

  const Lse obj = reduce(to_lse(problem.objective), y0, basis);
  std::vector<Lse> cons;
  for (const auto& p : problem.inequalities) cons.push_back(reduce(to_lse(p), y0, basis));

  RVec z = RVec::Zero(nz);
  int phase1_steps = 0;
  auto max_violation = [&](const RVec& zz, int* arg) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cons.size(); ++i) {
      const double v = cons[i].value(zz);
      if (v > worst) {
        worst = v;
        if (arg) *arg = static_cast<int>(i);
      }
    }
    return worst;
  };

  if (!cons.empty() && !(max_violation(z, nullptr) < 0.0)) {
    // Phase 1: minimize s subject to F_i(z) - s <= 0, stop once strictly feasible with margin.
    Lse p1_obj;
    p1_obj.A = RMat::Zero(1, nz + 1);
    p1_obj.A(0, nz) = 1.0;
    p1_obj.b = RVec::Zero(1);
    std::vector<Lse> p1_cons;
    for (const auto& c : cons) {
      Lse a;
      a.A.resize(c.A.rows(), nz + 1);
      a.A.leftCols(nz) = c.A;
      a.A.col(nz).setConstant(-1.0);
      a.b = c.b;
      p1_cons.push_back(a);
    }
    GpOptions p1_opts = opts;
    p1_opts.tol = 1e-10;
    Barrier p1(p1_obj, p1_cons, p1_opts, RVec::Zero(nz + 1), RMat::Identity(nz + 1, nz + 1), false);
    BarrierState st;
    st.z = RVec::Zero(nz + 1);
    st.z(nz) = max_violation(z, nullptr) + 1.0;
    const double margin = 1e-4;
    const bool hit = p1.run(st, [&](const RVec& w) { return max_violation(w.head(nz), nullptr) < -margin; });
    phase1_steps = st.newton_steps;
    z = st.z.head(nz);
    int worst_idx = 0;
    const double worst = max_violation(z, &worst_idx);
    if (!hit && !(worst < 0.0)) {
      throw GpInfeasible("solve_gp: no strictly feasible point (constraint " + std::to_string(worst_idx) + ")",
                         worst_idx, false);
    }
  }

  Barrier main(obj, cons, opts, y0, basis, true);
  BarrierState st;
  st.z = z;
  st.t = opts.t0;
  main.run(st, nullptr);

  GpSolution sol;
  sol.x = map_x(st.z);
  sol.value = problem.objective.eval(sol.x);
  sol.newton_steps = st.newton_steps + phase1_steps;
  sol.gap = cons.empty() ? 0.0 : static_cast<double>(cons.size()) / st.t;
  sol.duals.resize(static_cast<Eigen::Index>(cons.size()));
  for (std::size_t i = 0; i < cons.size(); ++i) {
    sol.duals(static_cast<Eigen::Index>(i)) = 1.0 / (st.t * -cons[i].value(st.z));
  }
  return sol;
}

GpProblem max_objective_slack_form(const std::vector<Posynomial>& branches, const Posynomial& factor,
                                   const std::vector<Posynomial>& inequalities,
                                   const std::vector<Posynomial>& equalities, const RVec& initial) {
  if (branches.empty()) throw ArgumentError("max_objective_slack_form: no branches");
  const int n = factor.num_vars();
  const int n2 = n + 1;
  const Posynomial u = Posynomial::variable(n2, n);
  const Posynomial u_inv = Posynomial::variable(n2, n, 1.0, -1.0);
  GpProblem p;
  p.n = n2;
  p.objective = u * factor.extended(n2);
  for (const auto& q : inequalities) p.inequalities.push_back(q.extended(n2));
  for (const auto& b : branches) p.inequalities.push_back(b.extended(n2) * u_inv);
  for (const auto& e : equalities) p.equalities.push_back(e.extended(n2));
  if (initial.size() == n) {
    p.initial.resize(n2);
    p.initial.head(n) = initial;
    double top = 0.0;
    for (const auto& b : branches) top = std::max(top, b.eval(initial));
    p.initial(n) = 2.0 * top + 1e-300;
  }
  return p;
}

GpSolution minimize_max_by_cases(const std::vector<Posynomial>& branches, const Posynomial& factor,
                                 const std::vector<Posynomial>& inequalities,
                                 const std::vector<Posynomial>& equalities, const RVec& initial,
                                 const GpOptions& opts) {
  if (branches.empty()) throw ArgumentError("minimize_max_by_cases: no branches");
  for (const auto& b : branches) {
    if (!b.is_monomial()) throw ArgumentError("minimize_max_by_cases: branches must be monomials");
  }
  GpSolution best;
  bool found = false;
  for (std::size_t j = 0; j < branches.size(); ++j) {
    GpProblem p;
    p.n = factor.num_vars();
    p.objective = branches[j] * factor;
    p.inequalities = inequalities;
    const Posynomial inv = branches[j].inverse();
    for (std::size_t i = 0; i < branches.size(); ++i) {
      if (i != j) p.inequalities.push_back(branches[i] * inv);
    }
    p.equalities = equalities;
    p.initial = initial;
    try {
      GpSolution s = solve_gp(p, opts);
      if (!found || s.value < best.value) {
        best = s;
        found = true;
      }
    } catch (const GpInfeasible&) {
    }
  }
  if (!found) throw GpInfeasible("minimize_max_by_cases: every case is infeasible", -1, false);
  return best;
}

CondensationResult successive_condensation(const std::function<GpProblem(const RVec&)>& build,
                                           const std::function<double(const RVec&)>& objective,
                                           const RVec& init, int max_iters, double tol,
                                           const GpOptions& opts) {
  CondensationResult res;
  res.x = init;
  double current = objective(init);
  res.trace.push_back(current);
  GpOptions warm = opts;
  for (int it = 1; it <= max_iters; ++it) {
    GpSolution sol;
    try {
      sol = solve_gp(build(res.x), warm);
    } catch (const GpInfeasible& e) {
      throw GpInfeasible(std::string(e.what()) + " at condensation iteration " + std::to_string(it),
                         e.constraint_index(), e.is_equality());
    }
    const RVec next = sol.x.head(init.size());
    const double value = objective(next);
    res.iterations = it;
    if (!(value <= current)) {
      res.converged = true;
      break;
    }
    const double change = std::abs(current - value) / std::max(std::abs(current), 1e-300);
    const double model_gap = std::abs(value - sol.value) / std::max(std::abs(sol.value), 1e-300);
    res.x = next;
    current = value;
    res.trace.push_back(current);
    // Later models start near the previous optimum, so skip the early barrier weights.
    warm.t0 = std::max(opts.t0, 1e-3 / opts.tol);
    if (change < tol || model_gap < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace secjam::gp
