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

#include "pairrank/gaussian.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace pairrank {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
// Below this normalized margin the draw band is treated as a point.
constexpr double kPointMargin = 1e-7;

struct DrawMoments {
  double v;
  double w;
};

// Draw moments for t >= 0, margin > 0, written in terms of Mills ratios so
// that neither numerator nor denominator underflows for large t.
DrawMoments draw_moments_nonneg(double t, double margin) {
  const double lo = t - margin;
  const double hi = t + margin;
  const double r = std::exp(-2.0 * t * margin);  // phi(hi) / phi(lo)
  const double denom = mills_ratio(lo) - r * mills_ratio(hi);
  if (!(denom > 0.0)) {
    // Band probability lost to rounding; fall back to the boundary limit.
    return {-lo, 1.0};
  }
  const double v = (r - 1.0) / denom;
  const double w = v * v + (hi * r - lo) / denom;
  return {v, w};
}

DrawMoments draw_moments(double t, double margin) {
  if (margin < 0.0) throw std::invalid_argument("draw margin must be >= 0");
  if (margin < kPointMargin) return {-t, 1.0};
  if (t < 0.0) {
    auto m = draw_moments_nonneg(-t, margin);
    return {-m.v, m.w};
  }
  return draw_moments_nonneg(t, margin);
}

}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal quantile needs p in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double mills_ratio(double z) {
  if (z < 8.0) {
    // Log domain keeps phi(z) from underflowing before erfc does.
    const double log_tail = std::log(0.5 * std::erfc(z / std::numbers::sqrt2));
    const double log_pdf = std::log(kInvSqrt2Pi) - 0.5 * z * z;
    return std::exp(log_tail - log_pdf);
  }
  double f = z;
  for (int k = 200; k >= 1; --k) f = z + k / f;
  return 1.0 / f;
}

double v_win(double t, double margin) {
  const double x = t - margin;
  // phi(x) / Phi(x) = 1 / mills(-x)
  return 1.0 / mills_ratio(-x);
}

double w_win(double t, double margin) {
  const double v = v_win(t, margin);
  const double w = v * (v + t - margin);
  // Exact w lies in (0, 1); rounding can push it just outside.
  if (w <= 0.0) return std::numeric_limits<double>::min();
  return w < 1.0 ? w : std::nextafter(1.0, 0.0);
}

double v_draw(double t, double margin) { return draw_moments(t, margin).v; }

double w_draw(double t, double margin) {
  const double w = draw_moments(t, margin).w;
  if (w <= 0.0) return std::numeric_limits<double>::min();
  return w <= 1.0 ? w : 1.0;
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_logistic(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace pairrank
