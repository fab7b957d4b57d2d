// Copyright 2026 The kerrgate Authors
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

#pragma once

// Parameter scans over the photon bandwidth and the number of sites,
// bandwidth maximisation, power-law fits and the saturation and deformation
// studies built on top of them.

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kerrgate/fidelity.hpp"

namespace kerrgate {

/// A chain plus everything about the input photons except their bandwidth.
struct Experiment {
  ChainConfig chain;
  double omega0 = 0.0;  // carrier detuning from the first site's delta
  int deformation_rounds = 0;

  /// Input packet of bandwidth sigma; deformation, if any, is that of
  /// `deformation_rounds` passes through this chain.
  WavePacket packet(double sigma) const;
  double gamma() const { return chain.site(0).gamma; }
};

/// On-resonance counter-propagating chain of n identical sites.
Experiment counter_chain_experiment(int n_sites, double gamma, double omega0, const Coupling& chi,
                                    int deformation_rounds = 0);

enum class Spacing { Linear, Log };

struct SweepRecord {
  double sigma = 0.0;
  FidelityResult result;
};

std::vector<double> sigma_grid(double sigma_min, double sigma_max, int points, Spacing spacing);

/// One evaluation per bandwidth. Points run in parallel into fixed slots;
/// a non-converged point is recorded as such and does not stop the scan.
std::vector<SweepRecord> scan_sigma(const Experiment& experiment, double sigma_min,
                                    double sigma_max, int points, Spacing spacing,
                                    const QuadratureSpec& spec, int threads = 0);

class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SigmaBracket {
  double lo = 0.0;
  double hi = 0.0;
};

struct SigmaMaximum {
  double sigma_max = 0.0;
  double f_max = 0.0;  // F1(pi) at sigma_max
  FidelityResult result;
  SigmaBracket bracket;
  int evaluations = 0;
};

/// Default coarse pre-scan: 40 log-spaced points over [1e-3, 10] gamma.
inline constexpr int kCoarsePoints = 40;
inline constexpr double kCoarseLo = 1e-3;
inline constexpr double kCoarseHi = 10.0;
/// Relative bandwidth tolerance of the golden-section search.
inline constexpr double kSigmaRelTol = 1e-4;

/// Brackets the maximum of F1(pi) by a log scan over [lo, hi]. Throws
/// BracketError (naming the interval) when the scan peaks at an end point.
SigmaBracket find_bracket(const Experiment& experiment, double lo, double hi, int points,
                          const QuadratureSpec& spec, int threads = 0);

/// Golden-section search for the maximum of F1(pi) over log sigma inside
/// the bracket. Throws BracketError if the best point does not beat both
/// bracket ends.
SigmaMaximum maximize_over_sigma(const Experiment& experiment, const SigmaBracket& bracket,
                                 const QuadratureSpec& spec, int threads = 0);

/// Coarse pre-scan over [1e-3, 10] gamma followed by the golden search.
SigmaMaximum maximize_over_sigma(const Experiment& experiment, const QuadratureSpec& spec,
                                 int threads = 0);

struct SiteScanRow {
  int n_sites = 0;
  int deformation_rounds = 0;
  SigmaMaximum maximum;
};

/// Per-N bandwidth maximisation for counter-propagating chains.
std::vector<SiteScanRow> scan_n(std::span<const int> n_values, double gamma, double omega0,
                                const Coupling& chi, const QuadratureSpec& spec,
                                int threads = 0);

/// scan_n with input packets already deformed by `rounds` passes (0, 1 or 2).
std::vector<SiteScanRow> deformed_input_study(std::span<const int> n_values, int rounds,
                                              double gamma, double omega0, const Coupling& chi,
                                              const QuadratureSpec& spec, int threads = 0);

struct PowerLawFit {
  double amplitude = 0.0;
  double exponent = 0.0;
  double residual = 0.0;  // RMS in log-log space
  double n_lo = 0.0;
  double n_hi = 0.0;
  int points = 0;

  double operator()(double n) const;
};

struct FitPoint {
  double n = 0.0;
  double y = 0.0;
};

/// Least squares on (ln n, ln y) for the points with n_lo <= n <= n_hi.
PowerLawFit fit_power_law(std::span<const FitPoint> points, double n_lo, double n_hi);

struct TargetPrediction {
  double n_exact = 0.0;
  int n_required = 0;
  double sigma = 0.0;  // sigma_max fit at n_required
};

/// Smallest n with fit(n) <= y_target. Requires a negative exponent.
int required_sites(const PowerLawFit& fit, double y_target);
TargetPrediction predict_target(const PowerLawFit& infidelity_fit, const PowerLawFit& sigma_fit,
                                double y_target);

struct SaturationPoint {
  int n_sites = 0;
  FidelityResult result;
};

struct SaturationCurve {
  int anchor = 0;
  double sigma = 0.0;           // sigma_max of the anchor chain
  double saturation_n = 0.0;    // gamma / sigma
  std::vector<SaturationPoint> points;  // N = 1 .. N_max
};

/// For each anchor n, fixes sigma at the anchor's optimum and sweeps the
/// chain length from 1 to n_max.
std::vector<SaturationCurve> saturation_study(std::span<const int> anchors, int n_max,
                                              double gamma, const QuadratureSpec& spec,
                                              int threads = 0);

struct SaturationCheck {
  double max_decrease = 0.0;     // largest F(N-1) - F(N) along the curve
  int reference_n = 0;           // round(saturation_n)
  double reference_gain = 0.0;   // F(ref) - F(ref - 1)
  int late_from = 0;             // first N > 2 saturation_n
  double max_late_gain = 0.0;    // max |F(N) - F(N-1)| for N >= late_from
};

SaturationCheck check_saturation(const SaturationCurve& curve);

struct NelderMeadOptions {
  int max_iterations = 200;
  double f_tol = 1e-8;
  double x_tol = 1e-6;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free minimisation.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, std::vector<double> step,
                             const NelderMeadOptions& options = {});

struct ParameterOptimum {
  double omega0 = 0.0;
  double gamma = 0.0;
  double chi = 0.0;
  double sigma = 0.0;
  double f_pi = 0.0;
  int iterations = 0;
};

/// Maximises F1(pi) jointly over (omega0, log gamma, log chi, log sigma) for
/// finite chi. Local search from the given start.
ParameterOptimum optimize_parameters(Arrangement arrangement, int n_sites,
                                     const ParameterOptimum& start, const QuadratureSpec& spec,
                                     const NelderMeadOptions& options = {}, int threads = 0);

}  // namespace kerrgate
