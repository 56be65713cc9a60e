// Copyright 2026 The vilcb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vilcb/matrix_nash.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "vilcb/errors.h"

namespace vilcb {
namespace {

// Total regret-matching iterations before giving up on the no-regret path.
constexpr int kMaxIterations = 1 << 20;
constexpr int kFirstChunk = 32;
// Support enumeration is only attempted when it needs at most this many
// square solves.
constexpr double kMaxEnumeratedSupports = 2e5;

struct Bounds {
  double lower;
  double upper;
};

double RowPayoff(MatrixView m, int i, std::span<const double> z) {
  double acc = 0.0;
  for (int j = 0; j < m.cols; ++j) acc += m(i, j) * z[j];
  return acc;
}

double ColPayoff(MatrixView m, int j, std::span<const double> w) {
  double acc = 0.0;
  for (int i = 0; i < m.rows; ++i) acc += w[i] * m(i, j);
  return acc;
}

double LowerBound(MatrixView m, std::span<const double> w) {
  double lower = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.cols; ++j) lower = std::min(lower, ColPayoff(m, j, w));
  return lower;
}

double UpperBound(MatrixView m, std::span<const double> z) {
  double upper = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.rows; ++i) upper = std::max(upper, RowPayoff(m, i, z));
  return upper;
}

NashCertificate MakeCertificate(std::vector<double> w, std::vector<double> z,
                                Bounds b, int iterations) {
  NashCertificate cert;
  cert.row_strategy = std::move(w);
  cert.col_strategy = std::move(z);
  cert.lower_bound = b.lower;
  cert.upper_bound = b.upper;
  cert.exploitability_gap = b.upper - b.lower;
  cert.value = 0.5 * (b.lower + b.upper);
  // The midpoint can round just outside [lower, upper].
  if (b.lower <= b.upper) cert.value = std::clamp(cert.value, b.lower, b.upper);
  cert.iterations = iterations;
  return cert;
}

std::vector<double> PureStrategy(int n, int k) {
  std::vector<double> s(n, 0.0);
  s[k] = 1.0;
  return s;
}

// Positive part of `regrets`, normalized; uniform when all are zero.
void RegretMatch(const std::vector<double>& regrets, std::vector<double>& out) {
  double total = 0.0;
  for (double r : regrets) total += r;
  const int n = static_cast<int>(regrets.size());
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), 1.0 / n);
    return;
  }
  for (int k = 0; k < n; ++k) out[k] = regrets[k] / total;
}

// Alternating regret-matching+ with linear averaging.
class RegretMatchingPlus {
 public:
  explicit RegretMatchingPlus(MatrixView m)
      : m_(m),
        row_regret_(m.rows, 0.0),
        col_regret_(m.cols, 0.0),
        w_(m.rows, 1.0 / m.rows),
        z_(m.cols, 1.0 / m.cols),
        w_sum_(m.rows, 0.0),
        z_sum_(m.cols, 0.0),
        utility_(std::max(m.rows, m.cols), 0.0) {}

  void Run(int iterations) {
    for (int k = 0; k < iterations; ++k) {
      ++t_;
      // Column player minimizes, so its utility is the negated payoff.
      double mean = 0.0;
      for (int j = 0; j < m_.cols; ++j) {
        utility_[j] = -ColPayoff(m_, j, w_);
        mean += z_[j] * utility_[j];
      }
      for (int j = 0; j < m_.cols; ++j) {
        col_regret_[j] = std::max(0.0, col_regret_[j] + utility_[j] - mean);
      }
      RegretMatch(col_regret_, z_);

      mean = 0.0;
      for (int i = 0; i < m_.rows; ++i) {
        utility_[i] = RowPayoff(m_, i, z_);
        mean += w_[i] * utility_[i];
      }
      for (int i = 0; i < m_.rows; ++i) {
        row_regret_[i] = std::max(0.0, row_regret_[i] + utility_[i] - mean);
      }
      RegretMatch(row_regret_, w_);

      const double weight = static_cast<double>(t_);
      for (int i = 0; i < m_.rows; ++i) w_sum_[i] += weight * w_[i];
      for (int j = 0; j < m_.cols; ++j) z_sum_[j] += weight * z_[j];
    }
  }

  std::vector<double> AverageRow() const { return Normalize(w_sum_); }
  std::vector<double> AverageCol() const { return Normalize(z_sum_); }
  int iterations() const { return static_cast<int>(t_); }

 private:
  static std::vector<double> Normalize(const std::vector<double>& v) {
    const double total = std::accumulate(v.begin(), v.end(), 0.0);
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] / total;
    return out;
  }

  MatrixView m_;
  std::vector<double> row_regret_, col_regret_;
  std::vector<double> w_, z_;
  std::vector<double> w_sum_, z_sum_;
  std::vector<double> utility_;
  std::int64_t t_ = 0;
};

// Finds a distribution x over `vars` that makes the opponent indifferent
// across `eqs`:  sum_k payoff(e, vars[k]) x_k = v  for every e in eqs,
// sum_k x_k = 1. Uses the minimum-norm least-squares solution and drops the
// most negative coordinate until the solution is nonnegative. Returns an
// empty vector on failure. `payoff(e, x)` indexes the matrix as seen by the
// equalizing player.
template <typename Payoff>
std::vector<double> Equalize(const std::vector<int>& eqs, std::vector<int> vars,
                             int full_size, Payoff payoff) {
  while (!vars.empty()) {
    const int n_eq = static_cast<int>(eqs.size()) + 1;
    const int n_var = static_cast<int>(vars.size()) + 1;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(n_eq, n_var);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_eq);
    for (int r = 0; r < n_eq - 1; ++r) {
      for (int c = 0; c < n_var - 1; ++c) lhs(r, c) = payoff(eqs[r], vars[c]);
      lhs(r, n_var - 1) = -1.0;
    }
    for (int c = 0; c < n_var - 1; ++c) lhs(n_eq - 1, c) = 1.0;
    rhs(n_eq - 1) = 1.0;
    const Eigen::VectorXd sol =
        lhs.completeOrthogonalDecomposition().solve(rhs);
    if (!sol.allFinite()) return {};

    int worst = -1;
    double worst_value = -1e-12;
    for (int c = 0; c < n_var - 1; ++c) {
      if (sol(c) < worst_value) {
        worst_value = sol(c);
        worst = c;
      }
    }
    if (worst < 0) {
      std::vector<double> x(full_size, 0.0);
      double total = 0.0;
      for (int c = 0; c < n_var - 1; ++c) {
        x[vars[c]] = std::max(0.0, sol(c));
        total += x[vars[c]];
      }
      if (!(total > 0.0)) return {};
      for (double& xi : x) xi /= total;
      return x;
    }
    vars.erase(vars.begin() + worst);
  }
  return {};
}

// Tracks the best row strategy (largest guaranteed lower bound) and best
// column strategy (smallest upper bound) seen so far. The gap of the pair
// is upper - lower, so the two sides can be improved independently.
class BestPair {
 public:
  explicit BestPair(MatrixView m) : m_(m) {}

  void OfferRow(std::vector<double> w) {
    if (w.empty()) return;
    const double lower = LowerBound(m_, w);
    if (w_.empty() || lower > lower_) {
      lower_ = lower;
      w_ = std::move(w);
    }
  }
  void OfferCol(std::vector<double> z) {
    if (z.empty()) return;
    const double upper = UpperBound(m_, z);
    if (z_.empty() || upper < upper_) {
      upper_ = upper;
      z_ = std::move(z);
    }
  }
  double gap() const { return upper_ - lower_; }
  Bounds bounds() const { return {lower_, upper_}; }
  const std::vector<double>& w() const { return w_; }
  const std::vector<double>& z() const { return z_; }

 private:
  MatrixView m_;
  std::vector<double> w_, z_;
  double lower_ = 0.0;
  double upper_ = 0.0;
};

// Polishes the averaged strategies by solving equalizer systems on supports
// read off from the averages and from the near-best-response sets.
void Polish(MatrixView m, BestPair& best, double scale) {
  const std::vector<double> w = best.w();
  const std::vector<double> z = best.z();
  std::vector<double> row_pay(m.rows), col_pay(m.cols);
  for (int i = 0; i < m.rows; ++i) row_pay[i] = RowPayoff(m, i, z);
  for (int j = 0; j < m.cols; ++j) col_pay[j] = ColPayoff(m, j, w);
  const double upper = *std::max_element(row_pay.begin(), row_pay.end());
  const double lower = *std::min_element(col_pay.begin(), col_pay.end());
  const double gap = std::max(upper - lower, 1e-12 * scale);

  auto row_player = [&](int j, int i) { return m(i, j); };
  auto col_player = [&](int i, int j) { return m(i, j); };

  std::vector<std::pair<std::vector<int>, std::vector<int>>> candidates;
  for (double slack : {0.5 * gap, 2.0 * gap}) {
    std::vector<int> rows, cols;
    for (int i = 0; i < m.rows; ++i) {
      if (row_pay[i] >= upper - slack) rows.push_back(i);
    }
    for (int j = 0; j < m.cols; ++j) {
      if (col_pay[j] <= lower + slack) cols.push_back(j);
    }
    candidates.emplace_back(std::move(rows), std::move(cols));
  }
  for (double rel : {1e-2, 1e-4}) {
    const double w_max = *std::max_element(w.begin(), w.end());
    const double z_max = *std::max_element(z.begin(), z.end());
    std::vector<int> rows, cols;
    for (int i = 0; i < m.rows; ++i) {
      if (w[i] >= rel * w_max) rows.push_back(i);
    }
    for (int j = 0; j < m.cols; ++j) {
      if (z[j] >= rel * z_max) cols.push_back(j);
    }
    candidates.emplace_back(std::move(rows), std::move(cols));
  }
  for (const auto& [rows, cols] : candidates) {
    best.OfferRow(Equalize(cols, rows, m.rows, row_player));
    best.OfferCol(Equalize(rows, cols, m.cols, col_player));
  }
}

double Binomial(int n, int k) {
  double c = 1.0;
  for (int t = 1; t <= k; ++t) c = c * (n - k + t) / t;
  return c;
}

// Enumerates equal-size support pairs. Some optimal strategy pair is
// determined by a square subsystem, so this is exhaustive for small games.
void EnumerateSupports(MatrixView m, BestPair& best, double tol) {
  const int kmax = std::min(m.rows, m.cols);
  double work = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    work += Binomial(m.rows, k) * Binomial(m.cols, k);
  }
  if (work > kMaxEnumeratedSupports) return;

  auto row_player = [&](int j, int i) { return m(i, j); };
  auto col_player = [&](int i, int j) { return m(i, j); };
  auto combos = [](int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      out.push_back(idx);
      int p = k - 1;
      while (p >= 0 && idx[p] == n - k + p) --p;
      if (p < 0) break;
      ++idx[p];
      for (int q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
    }
    return out;
  };
  for (int k = 1; k <= kmax && best.gap() > tol; ++k) {
    const auto row_sets = combos(m.rows, k);
    const auto col_sets = combos(m.cols, k);
    for (const auto& rows : row_sets) {
      for (const auto& cols : col_sets) {
        best.OfferRow(Equalize(cols, rows, m.rows, row_player));
        best.OfferCol(Equalize(rows, cols, m.cols, col_player));
        if (best.gap() <= tol) return;
      }
    }
  }
}

}  // namespace

PayoffMatrix::PayoffMatrix(int rows, int cols, double fill)
    : rows_(rows),
      cols_(cols),
      entries_(static_cast<std::size_t>(rows) * cols, fill) {
  if (rows < 1 || cols < 1) {
    throw ValidationError("payoff matrix needs at least one row and column");
  }
}

PayoffMatrix PayoffMatrix::FromRows(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw ValidationError("payoff matrix needs at least one row and column");
  }
  PayoffMatrix m(static_cast<int>(rows.size()),
                 static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows(); ++i) {
    if (static_cast<int>(rows[i].size()) != m.cols()) {
      throw ValidationError("ragged payoff matrix at row " + std::to_string(i));
    }
    for (int j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

double ExpectedPayoff(MatrixView m, std::span<const double> w,
                      std::span<const double> z) {
  double acc = 0.0;
  for (int i = 0; i < m.rows; ++i) {
    if (w[i] != 0.0) acc += w[i] * RowPayoff(m, i, z);
  }
  return acc;
}

double Exploitability(MatrixView m, std::span<const double> w,
                      std::span<const double> z) {
  if (static_cast<int>(w.size()) != m.rows ||
      static_cast<int>(z.size()) != m.cols) {
    throw ValidationError("strategy dimensions do not match the matrix");
  }
  return UpperBound(m, z) - LowerBound(m, w);
}

NashCertificate SolveMatrixNash(MatrixView m, double tol) {
  if (!(tol > 0.0)) throw ValidationError("matrix_nash tol must be positive");
  if (m.rows < 1 || m.cols < 1 ||
      m.data.size() != static_cast<std::size_t>(m.rows) * m.cols) {
    throw ValidationError("payoff matrix has inconsistent dimensions");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double x : m.data) {
    if (!std::isfinite(x)) throw ValidationError("non-finite payoff entry");
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }

  if (lo == hi) {
    return MakeCertificate(std::vector<double>(m.rows, 1.0 / m.rows),
                           std::vector<double>(m.cols, 1.0 / m.cols),
                           {lo, lo}, 0);
  }

  // Pure saddle point, which also covers every 1xn and nx1 matrix.
  int best_row = 0;
  double maxmin = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.rows; ++i) {
    double row_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < m.cols; ++j) row_min = std::min(row_min, m(i, j));
    if (row_min > maxmin) {
      maxmin = row_min;
      best_row = i;
    }
  }
  int best_col = 0;
  double minmax = std::numeric_limits<double>::infinity();
  for (int j = 0; j < m.cols; ++j) {
    double col_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.rows; ++i) col_max = std::max(col_max, m(i, j));
    if (col_max < minmax) {
      minmax = col_max;
      best_col = j;
    }
  }
  if (maxmin == minmax) {
    return MakeCertificate(PureStrategy(m.rows, best_row),
                           PureStrategy(m.cols, best_col), {maxmin, minmax}, 0);
  }

  const double scale = hi - lo;
  RegretMatchingPlus solver(m);
  BestPair best(m);
  int chunk = kFirstChunk;
  while (solver.iterations() < kMaxIterations) {
    solver.Run(chunk);
    best.OfferRow(solver.AverageRow());
    best.OfferCol(solver.AverageCol());
    if (best.gap() <= tol) break;
    Polish(m, best, scale);
    if (best.gap() <= tol) break;
    chunk *= 2;
  }
  if (best.gap() > tol) EnumerateSupports(m, best, tol);
  if (best.gap() > tol) {
    throw NumericalError("matrix_nash did not reach gap " +
                         std::to_string(tol) + " (best " +
                         std::to_string(best.gap()) + ")");
  }
  return MakeCertificate(best.w(), best.z(), best.bounds(),
                         solver.iterations());
}

}  // namespace vilcb
