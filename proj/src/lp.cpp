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

#include "pairrank/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

namespace pairrank {

void SparseMatrix::add(std::size_t row, std::size_t col, double value) {
  if (row >= rows_ || col >= cols_) {
    throw std::out_of_range("sparse matrix coordinate out of range");
  }
  if (value != 0.0) entries_.push_back({row, col, value});
}

std::size_t SparseMatrix::add_row(
    const std::vector<std::pair<std::size_t, double>>& coeffs) {
  const std::size_t row = rows_++;
  for (const auto& [col, value] : coeffs) add(row, col, value);
  return row;
}

LinearProgram::LinearProgram(std::size_t num_variables)
    : objective(num_variables, 0.0),
      inequality(0, num_variables),
      equality(0, num_variables),
      lower(num_variables, 0.0),
      upper(num_variables, kInf) {}

void LinearProgram::add_inequality(
    const std::vector<std::pair<std::size_t, double>>& coeffs, double rhs) {
  inequality.add_row(coeffs);
  inequality_rhs.push_back(rhs);
}

void LinearProgram::add_equality(
    const std::vector<std::pair<std::size_t, double>>& coeffs, double rhs) {
  equality.add_row(coeffs);
  equality_rhs.push_back(rhs);
}

void LinearProgram::validate() const {
  const std::size_t n = objective.size();
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("LP bounds do not match the variable count");
  }
  if (inequality.cols() != n || equality.cols() != n) {
    throw std::invalid_argument("LP constraint width does not match the variable count");
  }
  if (inequality.rows() != inequality_rhs.size() ||
      equality.rows() != equality_rhs.size()) {
    throw std::invalid_argument("LP right-hand side does not match the row count");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
        lower[j] == kInf || upper[j] == -kInf) {
      throw std::invalid_argument("LP variable " + std::to_string(j) +
                                  " has inconsistent bounds");
    }
    if (!std::isfinite(objective[j])) {
      throw std::invalid_argument("LP objective must be finite");
    }
  }
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration_limit";
  }
  return "unknown";
}

namespace {

enum class VarState { kBasic, kAtLower, kAtUpper, kFree };

using Column = std::vector<std::pair<std::size_t, double>>;

class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const LpOptions& options)
      : options_(options),
        n_struct_(lp.num_variables()),
        m_ub_(lp.inequality.rows()),
        m_(lp.inequality.rows() + lp.equality.rows()) {
    const std::size_t n_slack = m_ub_;
    first_artificial_ = n_struct_ + n_slack;
    const std::size_t n_total = first_artificial_ + m_;

    columns_.assign(n_total, {});
    for (const auto& e : lp.inequality.entries()) {
      columns_[e.col].push_back({e.row, e.value});
    }
    for (const auto& e : lp.equality.entries()) {
      columns_[e.col].push_back({m_ub_ + e.row, e.value});
    }
    for (std::size_t j = 0; j < n_struct_; ++j) merge_duplicates(columns_[j]);

    rhs_.resize(m_);
    std::copy(lp.inequality_rhs.begin(), lp.inequality_rhs.end(), rhs_.begin());
    std::copy(lp.equality_rhs.begin(), lp.equality_rhs.end(),
              rhs_.begin() + static_cast<std::ptrdiff_t>(m_ub_));

    lower_.assign(n_total, 0.0);
    upper_.assign(n_total, kInf);
    std::copy(lp.lower.begin(), lp.lower.end(), lower_.begin());
    std::copy(lp.upper.begin(), lp.upper.end(), upper_.begin());
    for (std::size_t r = 0; r < n_slack; ++r) {
      columns_[n_struct_ + r].push_back({r, 1.0});
    }

    x_.assign(n_total, 0.0);
    state_.assign(n_total, VarState::kAtLower);
    for (std::size_t j = 0; j < first_artificial_; ++j) {
      if (std::isfinite(lower_[j])) {
        x_[j] = lower_[j];
        state_[j] = VarState::kAtLower;
      } else if (std::isfinite(upper_[j])) {
        x_[j] = upper_[j];
        state_[j] = VarState::kAtUpper;
      } else {
        x_[j] = 0.0;
        state_[j] = VarState::kFree;
      }
    }

    // Artificial columns carry the sign of the initial residual so that
    // every artificial starts feasible at |residual|.
    std::vector<double> residual = rhs_;
    for (std::size_t j = 0; j < first_artificial_; ++j) {
      if (x_[j] == 0.0) continue;
      for (const auto& [row, value] : columns_[j]) residual[row] -= value * x_[j];
    }
    basis_.resize(m_);
    binv_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_),
                                  static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t art = first_artificial_ + i;
      const double sign = residual[i] >= 0.0 ? 1.0 : -1.0;
      columns_[art].push_back({i, sign});
      x_[art] = std::abs(residual[i]);
      state_[art] = VarState::kBasic;
      basis_[i] = art;
      binv_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = sign;
    }
    double scale = 1.0;
    for (double b : rhs_) scale = std::max(scale, std::abs(b));
    rhs_scale_ = scale;
  }

  LpSolution solve(const std::vector<double>& objective) {
    LpSolution solution;

    // Phase 1: drive the artificials to zero.
    cost_.assign(columns_.size(), 0.0);
    for (std::size_t j = first_artificial_; j < columns_.size(); ++j) cost_[j] = 1.0;
    LpStatus status = iterate();
    solution.iterations = iterations_;
    if (status == LpStatus::kIterationLimit) {
      solution.status = status;
      return solution;
    }
    double infeasibility = 0.0;
    for (std::size_t j = first_artificial_; j < columns_.size(); ++j) {
      infeasibility += x_[j];
    }
    if (infeasibility > 1e-7 * rhs_scale_) {
      solution.status = LpStatus::kInfeasible;
      return solution;
    }

    // Phase 2: artificials are pinned at zero; basic ones leave on the
    // first pivot that would move them.
    for (std::size_t j = first_artificial_; j < columns_.size(); ++j) {
      upper_[j] = 0.0;
      x_[j] = 0.0;
      if (state_[j] != VarState::kBasic) state_[j] = VarState::kAtLower;
    }
    refactor();
    cost_.assign(columns_.size(), 0.0);
    std::copy(objective.begin(), objective.end(), cost_.begin());
    status = iterate();
    solution.iterations = iterations_;
    solution.status = status;
    if (status != LpStatus::kOptimal) return solution;

    solution.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_struct_));
    for (std::size_t j = 0; j < n_struct_; ++j) {
      solution.objective += objective[j] * solution.x[j];
    }
    const Eigen::VectorXd duals = prices();
    solution.row_duals.assign(duals.data(), duals.data() + duals.size());
    return solution;
  }

 private:
  static void merge_duplicates(Column& col) {
    std::sort(col.begin(), col.end());
    Column merged;
    for (const auto& entry : col) {
      if (!merged.empty() && merged.back().first == entry.first) {
        merged.back().second += entry.second;
      } else {
        merged.push_back(entry);
      }
    }
    std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
    col = std::move(merged);
  }

  Eigen::VectorXd prices() const {
    Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
    for (std::size_t i = 0; i < m_; ++i) {
      cb(static_cast<Eigen::Index>(i)) = cost_[basis_[i]];
    }
    return binv_.transpose() * cb;
  }

  double reduced_cost(std::size_t j, const Eigen::VectorXd& pi) const {
    double d = cost_[j];
    for (const auto& [row, value] : columns_[j]) {
      d -= pi(static_cast<Eigen::Index>(row)) * value;
    }
    return d;
  }

  void refactor() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t i = 0; i < m_; ++i) {
      for (const auto& [row, value] : columns_[basis_[i]]) {
        basis_matrix(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) = value;
      }
    }
    binv_ = basis_matrix.partialPivLu().inverse();

    Eigen::VectorXd residual = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), m);
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      for (const auto& [row, value] : columns_[j]) {
        residual(static_cast<Eigen::Index>(row)) -= value * x_[j];
      }
    }
    const Eigen::VectorXd xb = binv_ * residual;
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = xb(static_cast<Eigen::Index>(i));
    since_refactor_ = 0;
  }

  LpStatus iterate() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::VectorXd alpha(m);
    for (;;) {
      if (iterations_ >= options_.max_iterations) return LpStatus::kIterationLimit;
      if (since_refactor_ >= options_.refactor_interval) refactor();

      // Bland: lowest-index improving column.
      const Eigen::VectorXd pi = prices();
      std::size_t entering = columns_.size();
      double direction = 0.0;
      for (std::size_t j = 0; j < columns_.size(); ++j) {
        const VarState s = state_[j];
        if (s == VarState::kBasic || lower_[j] == upper_[j]) continue;
        const double d = reduced_cost(j, pi);
        if ((s == VarState::kAtLower || s == VarState::kFree) &&
            d < -options_.optimality_tol) {
          entering = j;
          direction = 1.0;
          break;
        }
        if ((s == VarState::kAtUpper || s == VarState::kFree) &&
            d > options_.optimality_tol) {
          entering = j;
          direction = -1.0;
          break;
        }
      }
      if (entering == columns_.size()) return LpStatus::kOptimal;

      alpha.setZero();
      for (const auto& [row, value] : columns_[entering]) {
        alpha += value * binv_.col(static_cast<Eigen::Index>(row));
      }

      // Ratio test; x_B moves by -theta * direction * alpha.
      ratios_.assign(m_, kInf);
      double row_theta = kInf;
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = direction * alpha(static_cast<Eigen::Index>(i));
        if (std::abs(a) <= options_.pivot_tol) continue;
        const std::size_t var = basis_[i];
        if (a > 0.0 && std::isfinite(lower_[var])) {
          ratios_[i] = std::max(0.0, (x_[var] - lower_[var]) / a);
        } else if (a < 0.0 && std::isfinite(upper_[var])) {
          ratios_[i] = std::max(0.0, (upper_[var] - x_[var]) / -a);
        }
        row_theta = std::min(row_theta, ratios_[i]);
      }
      const double flip_theta =
          std::isfinite(lower_[entering]) && std::isfinite(upper_[entering])
              ? upper_[entering] - lower_[entering]
              : kInf;
      const double tie_tol = 1e-12 * std::max(1.0, row_theta);
      const bool flip = flip_theta <= row_theta + tie_tol;
      const double theta = flip ? flip_theta : row_theta;
      std::size_t leave_row = m_;
      if (!flip) {
        // Bland: among tied rows, the lowest basic variable index leaves.
        for (std::size_t i = 0; i < m_; ++i) {
          if (ratios_[i] > row_theta + tie_tol) continue;
          if (leave_row == m_ || basis_[i] < basis_[leave_row]) leave_row = i;
        }
      }
      if (!std::isfinite(theta)) return LpStatus::kUnbounded;

      ++iterations_;
      ++since_refactor_;
      const double step = direction * theta;
      x_[entering] += step;
      for (std::size_t i = 0; i < m_; ++i) {
        x_[basis_[i]] -= step * alpha(static_cast<Eigen::Index>(i));
      }

      if (flip) {
        state_[entering] = direction > 0.0 ? VarState::kAtUpper : VarState::kAtLower;
        x_[entering] = direction > 0.0 ? upper_[entering] : lower_[entering];
        continue;
      }

      const std::size_t leaving = basis_[leave_row];
      const bool leave_to_upper =
          direction * alpha(static_cast<Eigen::Index>(leave_row)) < 0.0;
      x_[leaving] = leave_to_upper ? upper_[leaving] : lower_[leaving];
      state_[leaving] = leave_to_upper ? VarState::kAtUpper : VarState::kAtLower;
      state_[entering] = VarState::kBasic;
      basis_[leave_row] = entering;

      const auto r = static_cast<Eigen::Index>(leave_row);
      const Eigen::RowVectorXd pivot_row = binv_.row(r) / alpha(r);
      binv_.noalias() -= alpha * pivot_row;
      binv_.row(r) = pivot_row;
    }
  }

  LpOptions options_;
  std::size_t n_struct_;
  std::size_t m_ub_;
  std::size_t m_;
  std::size_t first_artificial_ = 0;
  std::vector<Column> columns_;
  std::vector<double> rhs_;
  double rhs_scale_ = 1.0;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> x_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  Eigen::MatrixXd binv_;
  std::vector<double> ratios_;
  std::size_t iterations_ = 0;
  std::size_t since_refactor_ = 0;
};

void write_terms(std::ostream& out, const std::vector<SparseEntry>& entries,
                 std::size_t row) {
  bool any = false;
  for (const auto& e : entries) {
    if (e.row != row) continue;
    out << (e.value < 0 ? " - " : (any ? " + " : " ")) << std::abs(e.value)
        << " x" << e.col;
    any = true;
  }
  if (!any) out << " 0";
}

void write_bound(std::ostream& out, double value) {
  if (value == kInf) {
    out << "+inf";
  } else if (value == -kInf) {
    out << "-inf";
  } else {
    out << value;
  }
}

}  // namespace

LpSolution lp_solve(const LinearProgram& lp, const LpOptions& options) {
  lp.validate();
  BoundedSimplex simplex(lp, options);
  return simplex.solve(lp.objective);
}

void write_lp(std::ostream& out, const LinearProgram& lp) {
  const auto precision = out.precision(17);
  out << "minimize\n  obj:";
  bool any = false;
  for (std::size_t j = 0; j < lp.objective.size(); ++j) {
    const double c = lp.objective[j];
    if (c == 0.0) continue;
    out << (c < 0 ? " - " : (any ? " + " : " ")) << std::abs(c) << " x" << j;
    any = true;
  }
  if (!any) out << " 0";
  out << "\nsubject to\n";
  for (std::size_t r = 0; r < lp.inequality.rows(); ++r) {
    out << "  ub" << r << ":";
    write_terms(out, lp.inequality.entries(), r);
    out << " <= " << lp.inequality_rhs[r] << '\n';
  }
  for (std::size_t r = 0; r < lp.equality.rows(); ++r) {
    out << "  eq" << r << ":";
    write_terms(out, lp.equality.entries(), r);
    out << " = " << lp.equality_rhs[r] << '\n';
  }
  out << "bounds\n";
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    out << "  ";
    write_bound(out, lp.lower[j]);
    out << " <= x" << j << " <= ";
    write_bound(out, lp.upper[j]);
    out << '\n';
  }
  out << "end\n";
  out.precision(precision);
}

}  // namespace pairrank
