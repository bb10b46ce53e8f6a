/*
 * Copyright 2026 The pairrank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PAIRRANK_LP_HPP_
#define PAIRRANK_LP_HPP_

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <utility>
#include <vector>

namespace pairrank {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct SparseEntry {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Coordinate-list sparse matrix. Duplicate coordinates are summed.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  void add(std::size_t row, std::size_t col, double value);
  // Appends a row and returns its index.
  std::size_t add_row(const std::vector<std::pair<std::size_t, double>>& coeffs);
  void resize_cols(std::size_t cols) { cols_ = cols; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<SparseEntry>& entries() const { return entries_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<SparseEntry> entries_;
};

/// minimize c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper.
/// Bounds may be infinite; a variable defaults to [0, +inf).
struct LinearProgram {
  std::vector<double> objective;
  SparseMatrix inequality;
  std::vector<double> inequality_rhs;
  SparseMatrix equality;
  std::vector<double> equality_rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  LinearProgram() = default;
  explicit LinearProgram(std::size_t num_variables);

  std::size_t num_variables() const { return objective.size(); }
  void add_inequality(const std::vector<std::pair<std::size_t, double>>& coeffs,
                      double rhs);
  void add_equality(const std::vector<std::pair<std::size_t, double>>& coeffs,
                    double rhs);
  // Throws std::invalid_argument on inconsistent dimensions or bounds.
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  // Simplex multipliers of the final basis: c_j - sum_i y_i a_ij is the
  // reduced cost of x_j. Inequality rows first, then equality rows.
  std::vector<double> row_duals;
  std::size_t iterations = 0;
};

struct LpOptions {
  std::size_t max_iterations = 5'000'000;
  // Recompute the basis inverse from scratch after this many pivots.
  std::size_t refactor_interval = 100;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-10;
};

// Dense revised simplex over bounded variables, two phases, Bland's rule.
LpSolution lp_solve(const LinearProgram& lp, const LpOptions& options = {});

// Plain-text standard-form listing, for debugging.
void write_lp(std::ostream& out, const LinearProgram& lp);

}  // namespace pairrank

#endif  // PAIRRANK_LP_HPP_
