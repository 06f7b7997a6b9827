#pragma once

#include <functional>
#include <string>
#include <vector>

#include "secjam/types.hpp"

namespace secjam::gp {

/// coef * prod_j x_j^exps(j), coef > 0.
struct Term {
  double coef = 1.0;
  RVec exps;
};

/// Sum of positive-coefficient power-law terms over a fixed number of variables.
class Posynomial {
 public:
  Posynomial() = default;
  explicit Posynomial(int n_vars) : n_(n_vars) {}

  static Posynomial constant(int n_vars, double c);
  static Posynomial monomial(double coef, const RVec& exps);
  /// coef * x_idx^power.
  static Posynomial variable(int n_vars, int idx, double coef = 1.0, double power = 1.0);

  Posynomial& add_term(double coef, const RVec& exps);

  int num_vars() const { return n_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_monomial() const { return terms_.size() == 1; }

  double eval(const RVec& x) const;
  /// d log f / d log x at x.
  RVec log_gradient(const RVec& x) const;

  /// Only valid for monomials.
  Posynomial inverse() const;
  Posynomial pow(double k) const;
  /// Pads exponent vectors with zeros up to `n_vars`.
  Posynomial extended(int n_vars) const;

  Posynomial operator+(const Posynomial& o) const;
  Posynomial operator*(const Posynomial& o) const;
  Posynomial operator*(double c) const;

 private:
  int n_ = 0;
  std::vector<Term> terms_;
};

/// minimize objective  s.t.  inequalities[i] <= 1,  equalities[j] == 1 (monomials).
struct GpProblem {
  int n = 0;
  Posynomial objective;
  std::vector<Posynomial> inequalities;
  std::vector<Posynomial> equalities;
  /// Optional starting point (strictly positive); empty means all ones.
  RVec initial;
};

struct GpOptions {
  double tol = 1e-8;       // duality gap on log(objective)
  double kkt_tol = 1e-8;   // Newton decrement for centering
  double t0 = 1.0;
  double mu = 10.0;
  int max_outer = 60;
  int max_inner = 200;
};

struct GpSolution {
  RVec x;
  double value = 0.0;
  double gap = 0.0;
  int newton_steps = 0;
  RVec duals;  // one per inequality, for the log-domain problem
};

class GpInfeasible : public SolverError {
 public:
  GpInfeasible(const std::string& what, int index, bool equality)
      : SolverError(what), index_(index), equality_(equality) {}
  int constraint_index() const { return index_; }
  bool is_equality() const { return equality_; }

 private:
  int index_;
  bool equality_;
};

class GpUnbounded : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Log-domain barrier method; phase-1 runs automatically when `initial` is not strictly feasible.
GpSolution solve_gp(const GpProblem& problem, const GpOptions& opts = {});

/// Per-term AM-GM weights term_k(x)/f(x).
RVec condensation_weights(const Posynomial& f, const RVec& x);

/// Best local monomial under-estimator of f at x.
Posynomial condense(const Posynomial& f, const RVec& x);

/// Adds one trailing slack variable u and returns
///   minimize u * factor  s.t.  branch_j / u <= 1, original constraints.
GpProblem max_objective_slack_form(const std::vector<Posynomial>& branches, const Posynomial& factor,
                                   const std::vector<Posynomial>& inequalities,
                                   const std::vector<Posynomial>& equalities, const RVec& initial = {});

/// Same optimum by enumerating which monomial branch attains the max.
GpSolution minimize_max_by_cases(const std::vector<Posynomial>& monomial_branches,
                                 const Posynomial& factor, const std::vector<Posynomial>& inequalities,
                                 const std::vector<Posynomial>& equalities, const RVec& initial = {},
                                 const GpOptions& opts = {});

struct CondensationResult {
  RVec x;
  std::vector<double> trace;  // true objective after each accepted iterate, starting with init
  int iterations = 0;
  bool converged = false;
};

/// Iterates: build the condensed GP at the current point, solve, keep the point only if the
/// true objective does not increase. `build` may add trailing auxiliary variables; only the
/// first init.size() entries of each solution are carried forward. Stops when the true objective
/// changes by less than `tol` relative, or when the condensed model is already exact at the new
/// point (model value equals the true objective to `tol`).
CondensationResult successive_condensation(
    const std::function<GpProblem(const RVec&)>& build,
    const std::function<double(const RVec&)>& objective, const RVec& init, int max_iters = 50,
    double tol = 1e-6, const GpOptions& opts = {});

}  // namespace secjam::gp
