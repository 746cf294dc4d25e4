#pragma once

// Bounded-variable simplex on a dense tableau.
//
// Rows are kept as a x - s = 0 with the slack s boxed by the row bounds, so
// every structural variable and every nonbasic slack sits at a finite bound.
// Any basis is then dual feasible once nonbasic variables are placed on the
// bound matching their reduced cost, which lets the dual simplex restart
// from a stored basis after bound changes or appended rows.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace gridseer::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  int var;
  double coef;
};

struct Row {
  std::vector<Term> terms;
  double lower = -kInf;
  double upper = kInf;
};

class Model {
 public:
  int add_variable(double lower, double upper, double cost) {
    lower_.push_back(lower);
    upper_.push_back(upper);
    cost_.push_back(cost);
    return static_cast<int>(cost_.size()) - 1;
  }

  int add_row(std::vector<Term> terms, double lower, double upper) {
    rows_.push_back({std::move(terms), lower, upper});
    return static_cast<int>(rows_.size()) - 1;
  }

  std::size_t variable_count() const { return cost_.size(); }
  std::size_t row_count() const { return rows_.size(); }
  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }
  double cost(int j) const { return cost_[j]; }
  const Row& row(int i) const { return rows_[i]; }

 private:
  std::vector<double> lower_, upper_, cost_;
  std::vector<Row> rows_;
};

enum class Status { kOptimal, kInfeasible, kLimit };

enum class VarState : std::uint8_t { kBasic, kLower, kUpper };

// Variables are numbered structurals first, then one slack per row.
struct Basis {
  std::vector<VarState> state;
  std::vector<int> head;  // basic variable of each row
};

class Simplex {
 public:
  using Clock = std::chrono::steady_clock;

  explicit Simplex(const Model& model)
      : n_(static_cast<int>(model.variable_count())) {
    lo_.reserve(n_);
    for (int j = 0; j < n_; ++j) {
      lo_.push_back(model.lower(j));
      hi_.push_back(model.upper(j));
      cost_.push_back(model.cost(j));
      state_.push_back(model.cost(j) >= 0.0 || !std::isfinite(model.upper(j))
                           ? VarState::kLower
                           : VarState::kUpper);
    }
    m_ = static_cast<int>(model.row_count());
    a_ = Eigen::MatrixXd::Zero(m_, n_);
    for (int i = 0; i < m_; ++i) {
      const Row& row = model.row(i);
      for (const Term& t : row.terms) a_(i, t.var) += t.coef;
      lo_.push_back(row.lower);
      hi_.push_back(row.upper);
      cost_.push_back(0.0);
      head_.push_back(n_ + i);
    }
    state_.resize(n_ + m_, VarState::kBasic);
    t_.resize(m_, n_ + m_);
    t_.leftCols(n_) = -a_;
    t_.rightCols(m_).setIdentity();
    d_ = Eigen::Map<const Eigen::VectorXd>(cost_.data(), n_ + m_);
    beta_ = Eigen::VectorXd::Zero(m_);
  }

  int structural_count() const { return n_; }
  int row_count() const { return m_; }
  long iterations() const { return iterations_; }
  double lower(int j) const { return lo_[j]; }
  double upper(int j) const { return hi_[j]; }

  void set_bounds(int j, double lower, double upper) {
    lo_[j] = lower;
    hi_[j] = upper;
    if (state_[j] == VarState::kUpper && !std::isfinite(upper)) state_[j] = VarState::kLower;
  }

  // Appends a row; its slack enters the basis so the current basis stays
  // valid and only primal feasibility can be lost.
  int add_row(const Row& row) {
    Eigen::RowVectorXd coef = Eigen::RowVectorXd::Zero(n_);
    for (const Term& t : row.terms) coef(t.var) += t.coef;
    const int cols = n_ + m_;
    Eigen::RowVectorXd trow = Eigen::RowVectorXd::Zero(cols + 1);
    for (int i = 0; i < m_; ++i) {
      int h = head_[i];
      if (h < n_ && coef(h) != 0.0) trow.head(cols) += coef(h) * t_.row(i);
    }
    trow.head(n_) -= coef;
    trow(cols) = 1.0;
    t_.conservativeResize(m_ + 1, cols + 1);
    t_.col(cols).setZero();
    t_.row(m_) = trow;
    a_.conservativeResize(m_ + 1, Eigen::NoChange);
    a_.row(m_) = coef;
    lo_.push_back(row.lower);
    hi_.push_back(row.upper);
    cost_.push_back(0.0);
    state_.push_back(VarState::kBasic);
    head_.push_back(cols);
    d_.conservativeResize(cols + 1);
    d_(cols) = 0.0;
    beta_.conservativeResize(m_ + 1);
    ++m_;
    return m_ - 1;
  }

  Basis basis() const { return {state_, head_}; }

  // Rebuilds the tableau for `b`, extended with basic slacks for rows added
  // after it was taken. Returns false if the basis matrix is singular.
  bool load(const Basis& b) {
    std::vector<VarState> state = b.state;
    std::vector<int> head = b.head;
    const int old_rows = static_cast<int>(head.size());
    for (int i = old_rows; i < m_; ++i) {
      state.insert(state.begin() + n_ + i, VarState::kBasic);
      head.push_back(n_ + i);
    }
    if (static_cast<int>(state.size()) != n_ + m_) return false;
    Eigen::MatrixXd full(m_, n_ + m_);
    full.leftCols(n_) = a_;
    full.rightCols(m_) = -Eigen::MatrixXd::Identity(m_, m_);
    Eigen::MatrixXd bmat(m_, m_);
    for (int i = 0; i < m_; ++i) bmat.col(i) = full.col(head[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
    if (m_ > 0 && !(lu.rcond() > 1e-12)) return false;
    t_ = m_ > 0 ? Eigen::MatrixXd(lu.solve(full)) : Eigen::MatrixXd(0, n_);
    state_ = std::move(state);
    head_ = std::move(head);
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::kUpper && !std::isfinite(hi_[j])) state_[j] = VarState::kLower;
    }
    recompute_reduced_costs();
    since_refactor_ = 0;
    return true;
  }

  void reset_to_slack_basis() {
    Basis b;
    b.state.assign(n_ + m_, VarState::kBasic);
    for (int j = 0; j < n_; ++j) {
      b.state[j] = cost_[j] >= 0.0 ? VarState::kLower : VarState::kUpper;
    }
    for (int i = 0; i < m_; ++i) b.head.push_back(n_ + i);
    load(b);
  }

  Status solve(Clock::time_point deadline = Clock::time_point::max()) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      Status st = solve_once(deadline);
      if (st != Status::kOptimal) return st;
      if (max_row_violation() <= 1e-6) return st;
      // Accumulated round-off: refactor and polish.
      if (!load(basis())) reset_to_slack_basis();
    }
    return solve_once(deadline);
  }

  double value(int j) const {
    switch (state_[j]) {
      case VarState::kLower:
        return lo_[j];
      case VarState::kUpper:
        return hi_[j];
      case VarState::kBasic:
        break;
    }
    for (int i = 0; i < m_; ++i) {
      if (head_[i] == j) return beta_(i);
    }
    return 0.0;
  }

  std::vector<double> primal() const {
    std::vector<double> x(n_);
    for (int j = 0; j < n_; ++j) {
      if (state_[j] != VarState::kBasic) x[j] = state_[j] == VarState::kLower ? lo_[j] : hi_[j];
    }
    for (int i = 0; i < m_; ++i) {
      if (head_[i] < n_) x[head_[i]] = beta_(i);
    }
    return x;
  }

  double objective() const {
    std::vector<double> x = primal();
    double z = 0.0;
    for (int j = 0; j < n_; ++j) z += cost_[j] * x[j];
    return z;
  }

 private:
  static constexpr double kPrimalTol = 1e-9;
  static constexpr double kDualTol = 1e-9;
  static constexpr double kPivotTol = 1e-9;
  static constexpr int kRefactorInterval = 400;

  bool fixed(int j) const { return hi_[j] - lo_[j] <= 0.0; }

  double nonbasic_value(int j) const {
    return state_[j] == VarState::kUpper ? hi_[j] : lo_[j];
  }

  void compute_beta() {
    Eigen::VectorXd xn = Eigen::VectorXd::Zero(n_ + m_);
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] != VarState::kBasic) xn(j) = nonbasic_value(j);
    }
    beta_ = -(t_ * xn);
  }

  void recompute_reduced_costs() {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb(i) = cost_[head_[i]];
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(cost_.data(), n_ + m_);
    d_ = c - t_.transpose() * cb;
    for (int i = 0; i < m_; ++i) d_(head_[i]) = 0.0;
  }

  double max_row_violation() const {
    std::vector<double> x = primal();
    Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), n_);
    Eigen::VectorXd act = a_ * xv;
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      worst = std::max({worst, lo_[n_ + i] - act(i), act(i) - hi_[n_ + i]});
    }
    for (int j = 0; j < n_; ++j) worst = std::max({worst, lo_[j] - x[j], x[j] - hi_[j]});
    return worst;
  }

  void pivot(int r, int q, VarState leaving_state) {
    const double alpha = t_(r, q);
    Eigen::RowVectorXd prow = t_.row(r) / alpha;
    Eigen::VectorXd col = t_.col(q);
    col(r) = 0.0;
    t_.noalias() -= col * prow;
    t_.row(r) = prow;
    const double dq = d_(q);
    d_ -= dq * prow.transpose();
    d_(q) = 0.0;
    const int leaving = head_[r];
    head_[r] = q;
    state_[q] = VarState::kBasic;
    state_[leaving] = leaving_state;
    ++iterations_;
    ++since_refactor_;
  }

  // Deterministic per-variable perturbation against dual degeneracy.
  double perturbation(int j) const {
    const std::uint64_t h = static_cast<std::uint64_t>(j) * 2654435761ULL;
    return 1e-7 * (1.0 + static_cast<double>(h % 1000) / 1000.0) * (1.0 + std::abs(cost_[j]));
  }

  Status solve_once(Clock::time_point deadline) {
    const long limit = iterations_ + 50L * (n_ + m_) + 10000;
    // Restore dual feasibility by bound flips and perturb.
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::kBasic || fixed(j)) continue;
      if (state_[j] == VarState::kLower && d_(j) < -kDualTol && std::isfinite(hi_[j])) {
        state_[j] = VarState::kUpper;
      } else if (state_[j] == VarState::kUpper && d_(j) > kDualTol && std::isfinite(lo_[j])) {
        state_[j] = VarState::kLower;
      }
      d_(j) += state_[j] == VarState::kLower ? perturbation(j) : -perturbation(j);
    }

    Status status = Status::kOptimal;
    while (true) {
      if (since_refactor_ >= kRefactorInterval) {
        if (!load(basis())) reset_to_slack_basis();
        perturb_nonbasic();
      }
      compute_beta();
      int r = -1;
      double worst = kPrimalTol;
      for (int i = 0; i < m_; ++i) {
        const int h = head_[i];
        const double tol = kPrimalTol * (1.0 + std::abs(beta_(i)));
        double viol = std::max(lo_[h] - beta_(i), beta_(i) - hi_[h]);
        if (viol > tol && viol > worst) {
          worst = viol;
          r = i;
        }
      }
      if (r < 0) break;
      if (iterations_ >= limit || Clock::now() > deadline) {
        status = Status::kLimit;
        break;
      }
      const bool below = beta_(r) < lo_[head_[r]];
      const double s = below ? -1.0 : 1.0;
      double bound = kInf;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::kBasic || fixed(j)) continue;
        const double a = t_(r, j) * s;
        const bool cand = state_[j] == VarState::kLower ? a > kPivotTol : a < -kPivotTol;
        if (!cand) continue;
        const double dj = state_[j] == VarState::kLower ? std::max(d_(j), 0.0)
                                                         : std::max(-d_(j), 0.0);
        bound = std::min(bound, (dj + kDualTol) / std::abs(a));
      }
      if (bound == kInf) {
        status = Status::kInfeasible;
        break;
      }
      int q = -1;
      double best_alpha = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::kBasic || fixed(j)) continue;
        const double a = t_(r, j) * s;
        const bool cand = state_[j] == VarState::kLower ? a > kPivotTol : a < -kPivotTol;
        if (!cand) continue;
        const double dj = state_[j] == VarState::kLower ? std::max(d_(j), 0.0)
                                                         : std::max(-d_(j), 0.0);
        if (dj / std::abs(a) <= bound && std::abs(a) > best_alpha) {
          best_alpha = std::abs(a);
          q = j;
        }
      }
      pivot(r, q, below ? VarState::kLower : VarState::kUpper);
    }
    recompute_reduced_costs();
    if (status != Status::kOptimal) return status;
    return primal_cleanup(deadline);
  }

  void perturb_nonbasic() {
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::kBasic || fixed(j)) continue;
      d_(j) += state_[j] == VarState::kLower ? perturbation(j) : -perturbation(j);
    }
  }

  // Primal simplex from a primal feasible basis with the true costs.
  Status primal_cleanup(Clock::time_point deadline) {
    const long limit = iterations_ + 50L * (n_ + m_) + 10000;
    int degenerate = 0;
    while (true) {
      compute_beta();
      const bool bland = degenerate > 50;
      int q = -1;
      double best = kDualTol;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::kBasic || fixed(j)) continue;
        double gain = state_[j] == VarState::kLower ? -d_(j) : d_(j);
        if (gain > kDualTol * (1.0 + std::abs(cost_[j])) && gain > best) {
          best = gain;
          q = j;
          if (bland) break;
        }
      }
      if (q < 0) return Status::kOptimal;
      if (iterations_ >= limit || Clock::now() > deadline) return Status::kLimit;
      const double sigma = state_[q] == VarState::kLower ? 1.0 : -1.0;
      const double flip = hi_[q] - lo_[q];
      double exact = kInf, bound = kInf;
      for (int i = 0; i < m_; ++i) {
        const double rate = -sigma * t_(i, q);
        const int h = head_[i];
        if (rate > kPivotTol && std::isfinite(hi_[h])) {
          exact = std::min(exact, (hi_[h] - beta_(i)) / rate);
          bound = std::min(bound, (hi_[h] + kPrimalTol - beta_(i)) / rate);
        } else if (rate < -kPivotTol && std::isfinite(lo_[h])) {
          exact = std::min(exact, (lo_[h] - beta_(i)) / rate);
          bound = std::min(bound, (lo_[h] - kPrimalTol - beta_(i)) / rate);
        }
      }
      if (flip <= exact) {
        if (!std::isfinite(flip)) return Status::kLimit;  // unbounded ray
        state_[q] = state_[q] == VarState::kLower ? VarState::kUpper : VarState::kLower;
        degenerate = 0;
        continue;
      }
      int r = -1;
      double best_rate = 0.0, step = 0.0;
      VarState leaving_state = VarState::kLower;
      for (int i = 0; i < m_; ++i) {
        const double rate = -sigma * t_(i, q);
        const int h = head_[i];
        double ratio = kInf;
        VarState to = VarState::kLower;
        if (rate > kPivotTol && std::isfinite(hi_[h])) {
          ratio = (hi_[h] - beta_(i)) / rate;
          to = VarState::kUpper;
        } else if (rate < -kPivotTol && std::isfinite(lo_[h])) {
          ratio = (lo_[h] - beta_(i)) / rate;
        }
        if (ratio <= bound && std::abs(rate) > best_rate) {
          best_rate = std::abs(rate);
          r = i;
          leaving_state = to;
          step = std::max(ratio, 0.0);
        }
      }
      degenerate = step <= 1e-12 ? degenerate + 1 : 0;
      pivot(r, q, leaving_state);
      if (since_refactor_ >= kRefactorInterval) {
        if (!load(basis())) reset_to_slack_basis();
      }
    }
  }

  int n_, m_;
  std::vector<double> lo_, hi_, cost_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  Eigen::MatrixXd a_;  // m x n structural coefficients
  Eigen::MatrixXd t_;  // m x (n + m) tableau B^-1 [A, -I]
  Eigen::VectorXd d_;
  Eigen::VectorXd beta_;
  long iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace gridseer::lp
