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

#ifndef VILCB_MATRIX_NASH_H_
#define VILCB_MATRIX_NASH_H_

#include <span>
#include <vector>

namespace vilcb {

inline constexpr double kDefaultMatrixNashTol = 1e-6;

// Non-owning row-major view of a payoff matrix. The row player maximizes.
struct MatrixView {
  std::span<const double> data;
  int rows = 0;
  int cols = 0;

  double operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
};

// Owning payoff matrix.
class PayoffMatrix {
 public:
  PayoffMatrix() = default;
  PayoffMatrix(int rows, int cols, double fill = 0.0);
  // Throws ValidationError on ragged or empty input.
  static PayoffMatrix FromRows(const std::vector<std::vector<double>>& rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double operator()(int i, int j) const {
    return entries_[static_cast<std::size_t>(i) * cols_ + j];
  }
  double& operator()(int i, int j) {
    return entries_[static_cast<std::size_t>(i) * cols_ + j];
  }
  MatrixView view() const { return {entries_, rows_, cols_}; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> entries_;
};

// A mixed-strategy pair together with the primal/dual bounds it certifies.
//   lower = min_b w'M e_b   (what the row strategy guarantees)
//   upper = max_a e_a'M z   (what the column strategy concedes at most)
// exploitability_gap = upper - lower; value is their midpoint.
struct NashCertificate {
  std::vector<double> row_strategy;
  std::vector<double> col_strategy;
  double value = 0.0;
  double exploitability_gap = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  // Regret-matching iterations spent; zero when a closed form applied.
  int iterations = 0;
};

// Solves max_w min_z w'Mz to within `tol` exploitability.
//
// Closed forms handle 1xn, nx1, constant matrices, and matrices with a pure
// saddle point. Otherwise runs alternating regret-matching+ self-play with
// linearly weighted averages under a doubling iteration budget. After each
// budget chunk the averaged strategies are polished by solving the
// equalizer system on their estimated supports; whichever candidate has the
// smaller measured gap is kept. Output is a deterministic function of
// (M, tol).
//
// Throws ValidationError for non-finite entries, empty matrices, or
// tol <= 0, and NumericalError if the budget is exhausted.
NashCertificate SolveMatrixNash(MatrixView m, double tol = kDefaultMatrixNashTol);
inline NashCertificate SolveMatrixNash(const PayoffMatrix& m,
                                       double tol = kDefaultMatrixNashTol) {
  return SolveMatrixNash(m.view(), tol);
}

// max_a (Mz)_a - min_b (w'M)_b. Throws ValidationError on size mismatch.
double Exploitability(MatrixView m, std::span<const double> w,
                      std::span<const double> z);

// w'Mz.
double ExpectedPayoff(MatrixView m, std::span<const double> w,
                      std::span<const double> z);

}  // namespace vilcb

#endif  // VILCB_MATRIX_NASH_H_
