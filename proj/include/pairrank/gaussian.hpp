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

#ifndef PAIRRANK_GAUSSIAN_HPP_
#define PAIRRANK_GAUSSIAN_HPP_

namespace pairrank {

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

// Mills ratio (1 - Phi(z)) / phi(z). Continued fraction in the upper tail so
// that the truncated-Gaussian corrections below stay finite far from the mean.
double mills_ratio(double z);

// Truncated-Gaussian moment corrections for a two-player comparison, with
// t the normalized mean difference and margin the normalized draw margin.
//   win:  v = phi(t - margin) / Phi(t - margin),  w = v (v + t - margin)
//   draw: moments of the difference restricted to |d| <= margin
double v_win(double t, double margin);
double w_win(double t, double margin);
double v_draw(double t, double margin);
double w_draw(double t, double margin);

double logistic(double x);
// log(logistic(x)) without overflow for large |x|.
double log_logistic(double x);

}  // namespace pairrank

#endif  // PAIRRANK_GAUSSIAN_HPP_
