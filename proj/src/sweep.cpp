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

#include "kerrgate/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kerrgate/parallel.hpp"

namespace kerrgate {

WavePacket Experiment::packet(double sigma) const {
  WavePacket p;
  p.carrier = chain.site(0).delta + omega0;
  p.bandwidth = sigma;
  p.deformation_rounds = deformation_rounds;
  if (deformation_rounds > 0) {
    if (!chain.uniform()) {
      throw std::invalid_argument("input deformation needs a chain of identical sites");
    }
    p.deformation_sites = chain.n_sites();
    p.deformation_site = chain.site(0);
  }
  p.validate();
  return p;
}

Experiment counter_chain_experiment(int n_sites, double gamma, double omega0, const Coupling& chi,
                                    int deformation_rounds) {
  SiteParams site;
  site.gamma = gamma;
  site.delta = 0.0;
  site.chi = chi;
  Experiment e{ChainConfig::counter_chain(site, n_sites), omega0, deformation_rounds};
  return e;
}

std::vector<double> sigma_grid(double sigma_min, double sigma_max, int points, Spacing spacing) {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || !std::isfinite(sigma_max)) {
    throw std::invalid_argument("sigma range must satisfy 0 < sigma_min < sigma_max");
  }
  if (points < 2) throw std::invalid_argument("sigma scan needs at least 2 points");
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    out[i] = spacing == Spacing::Log
                 ? std::exp(std::log(sigma_min) + t * (std::log(sigma_max) - std::log(sigma_min)))
                 : sigma_min + t * (sigma_max - sigma_min);
  }
  out.front() = sigma_min;
  out.back() = sigma_max;
  return out;
}

std::vector<SweepRecord> scan_sigma(const Experiment& experiment, double sigma_min,
                                    double sigma_max, int points, Spacing spacing,
                                    const QuadratureSpec& spec, int threads) {
  spec.validate();
  const std::vector<double> sigmas = sigma_grid(sigma_min, sigma_max, points, spacing);
  std::vector<SweepRecord> out(sigmas.size());
  parallel_for(sigmas.size(), threads, [&](std::size_t i) {
    out[i].sigma = sigmas[i];
    out[i].result = evaluate(experiment.packet(sigmas[i]), experiment.chain, spec, 1);
  });
  return out;
}

namespace {

std::string interval_text(double lo, double hi) {
  std::ostringstream os;
  os.precision(6);
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace

SigmaBracket find_bracket(const Experiment& experiment, double lo, double hi, int points,
                          const QuadratureSpec& spec, int threads) {
  if (points < 3) throw std::invalid_argument("bracketing scan needs at least 3 points");
  const std::vector<SweepRecord> scan =
      scan_sigma(experiment, lo, hi, points, Spacing::Log, spec, threads);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scan.size(); ++i) {
    if (scan[i].result.f_pi > scan[best].result.f_pi) best = i;
  }
  if (best == 0 || best + 1 == scan.size()) {
    throw BracketError("F1(pi) peaks at the edge of the sigma interval " + interval_text(lo, hi) +
                       "; widen the interval");
  }
  return {scan[best - 1].sigma, scan[best + 1].sigma};
}

SigmaMaximum maximize_over_sigma(const Experiment& experiment, const SigmaBracket& bracket,
                                 const QuadratureSpec& spec, int threads) {
  if (!(bracket.lo > 0.0) || !(bracket.hi > bracket.lo)) {
    throw std::invalid_argument("sigma bracket must satisfy 0 < lo < hi");
  }
  spec.validate();
  SigmaMaximum out;
  out.bracket = bracket;
  auto eval = [&](double log_sigma) {
    ++out.evaluations;
    return evaluate(experiment.packet(std::exp(log_sigma)), experiment.chain, spec, threads);
  };
  auto keep_best = [&](double log_sigma, const FidelityResult& r) {
    if (out.evaluations == 1 || r.f_pi > out.f_max) {
      out.sigma_max = std::exp(log_sigma);
      out.f_max = r.f_pi;
      out.result = r;
    }
  };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double tol = std::log1p(kSigmaRelTol);
  double a = std::log(bracket.lo);
  double b = std::log(bracket.hi);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  FidelityResult fc = eval(c);
  keep_best(c, fc);
  FidelityResult fd = eval(d);
  keep_best(d, fd);
  while (b - a > tol) {
    if (fc.f_pi >= fd.f_pi) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
      keep_best(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
      keep_best(d, fd);
    }
  }

  const double f_lo = eval(std::log(bracket.lo)).f_pi;
  const double f_hi = eval(std::log(bracket.hi)).f_pi;
  if (!(out.f_max > f_lo && out.f_max > f_hi)) {
    throw BracketError("no interior maximum of F1(pi) in sigma interval " +
                       interval_text(bracket.lo, bracket.hi));
  }
  return out;
}

SigmaMaximum maximize_over_sigma(const Experiment& experiment, const QuadratureSpec& spec,
                                 int threads) {
  const double g = experiment.gamma();
  const SigmaBracket bracket =
      find_bracket(experiment, kCoarseLo * g, kCoarseHi * g, kCoarsePoints, spec, threads);
  SigmaMaximum m = maximize_over_sigma(experiment, bracket, spec, threads);
  m.evaluations += kCoarsePoints;
  return m;
}

std::vector<SiteScanRow> deformed_input_study(std::span<const int> n_values, int rounds,
                                              double gamma, double omega0, const Coupling& chi,
                                              const QuadratureSpec& spec, int threads) {
  if (rounds < 0 || rounds > 2) throw std::invalid_argument("deformation rounds must be 0, 1 or 2");
  std::vector<SiteScanRow> out;
  out.reserve(n_values.size());
  for (const int n : n_values) {
    const Experiment e = counter_chain_experiment(n, gamma, omega0, chi, rounds);
    out.push_back({n, rounds, maximize_over_sigma(e, spec, threads)});
  }
  return out;
}

std::vector<SiteScanRow> scan_n(std::span<const int> n_values, double gamma, double omega0,
                                const Coupling& chi, const QuadratureSpec& spec, int threads) {
  return deformed_input_study(n_values, 0, gamma, omega0, chi, spec, threads);
}

double PowerLawFit::operator()(double n) const { return amplitude * std::pow(n, exponent); }

PowerLawFit fit_power_law(std::span<const FitPoint> points, double n_lo, double n_hi) {
  if (!(n_lo <= n_hi)) throw std::invalid_argument("fit range must satisfy n_lo <= n_hi");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const FitPoint& p : points) {
    if (p.n < n_lo || p.n > n_hi) continue;
    if (!(p.n > 0.0) || !(p.y > 0.0)) {
      throw std::invalid_argument("power-law fit needs positive n and y inside the fit range");
    }
    xs.push_back(std::log(p.n));
    ys.push_back(std::log(p.y));
  }
  const std::size_t m = xs.size();
  if (m < 3) throw std::invalid_argument("power-law fit needs at least 3 points in range");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("power-law fit needs at least two distinct n");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.amplitude = std::exp(intercept);
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ys[i] - (intercept + fit.exponent * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  fit.n_lo = n_lo;
  fit.n_hi = n_hi;
  fit.points = static_cast<int>(m);
  return fit;
}

int required_sites(const PowerLawFit& fit, double y_target) {
  if (!(fit.exponent < 0.0)) {
    throw std::invalid_argument("target prediction needs a decreasing power law (exponent < 0)");
  }
  if (!(y_target > 0.0) || !(fit.amplitude > 0.0)) {
    throw std::invalid_argument("target and fit amplitude must be > 0");
  }
  const double n = std::pow(y_target / fit.amplitude, 1.0 / fit.exponent);
  // Absorb round-off so that an exact hit is not pushed to the next integer.
  return std::max(1, static_cast<int>(std::ceil(n * (1.0 - 1e-12))));
}

TargetPrediction predict_target(const PowerLawFit& infidelity_fit, const PowerLawFit& sigma_fit,
                                double y_target) {
  TargetPrediction p;
  p.n_required = required_sites(infidelity_fit, y_target);
  p.n_exact = std::pow(y_target / infidelity_fit.amplitude, 1.0 / infidelity_fit.exponent);
  p.sigma = sigma_fit(p.n_required);
  return p;
}

std::vector<SaturationCurve> saturation_study(std::span<const int> anchors, int n_max,
                                              double gamma, const QuadratureSpec& spec,
                                              int threads) {
  if (n_max < 2) throw std::invalid_argument("saturation study needs n_max >= 2");
  std::vector<SaturationCurve> out;
  for (const int anchor : anchors) {
    if (anchor < 1 || anchor > n_max) {
      throw std::invalid_argument("saturation anchor must lie in [1, n_max]");
    }
    const Experiment e = counter_chain_experiment(anchor, gamma, 0.0, Coupling::infinite());
    SaturationCurve curve;
    curve.anchor = anchor;
    curve.sigma = maximize_over_sigma(e, spec, threads).sigma_max;
    curve.saturation_n = gamma / curve.sigma;
    curve.points.resize(n_max);
    parallel_for(static_cast<std::size_t>(n_max), threads, [&](std::size_t i) {
      const int n = static_cast<int>(i) + 1;
      const Experiment en = counter_chain_experiment(n, gamma, 0.0, Coupling::infinite());
      curve.points[i].n_sites = n;
      curve.points[i].result = evaluate(en.packet(curve.sigma), en.chain, spec, 1);
    });
    out.push_back(std::move(curve));
  }
  return out;
}

SaturationCheck check_saturation(const SaturationCurve& curve) {
  SaturationCheck c;
  const auto& pts = curve.points;
  if (pts.size() < 2) throw std::invalid_argument("saturation curve needs at least 2 points");
  auto f = [&](int n) { return pts[n - 1].result.f_pi; };
  const int n_max = static_cast<int>(pts.size());
  for (int n = 2; n <= n_max; ++n) c.max_decrease = std::max(c.max_decrease, f(n - 1) - f(n));
  c.reference_n = std::clamp(static_cast<int>(std::lround(curve.saturation_n)), 2, n_max);
  c.reference_gain = f(c.reference_n) - f(c.reference_n - 1);
  c.late_from = std::max(2, static_cast<int>(std::floor(2.0 * curve.saturation_n)) + 1);
  for (int n = c.late_from; n <= n_max; ++n) {
    c.max_late_gain = std::max(c.max_late_gain, std::abs(f(n) - f(n - 1)));
  }
  return c;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, std::vector<double> step,
                             const NelderMeadOptions& options) {
  const std::size_t dim = start.size();
  if (dim == 0 || step.size() != dim) {
    throw std::invalid_argument("Nelder-Mead needs matching, non-empty start and step vectors");
  }
  std::vector<std::vector<double>> simplex(dim + 1, start);
  for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += step[i];
  std::vector<double> values(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) values[i] = objective(simplex[i]);

  auto along = [&](const std::vector<double>& centroid, const std::vector<double>& worst,
                   double t) {
    std::vector<double> x(dim);
    for (std::size_t k = 0; k < dim; ++k) x[k] = centroid[k] + t * (worst[k] - centroid[k]);
    return x;
  };

  NelderMeadResult out;
  std::vector<std::size_t> order(dim + 1);
  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - 1];

    double spread = 0.0;
    for (std::size_t i = 0; i <= dim; ++i) {
      for (std::size_t k = 0; k < dim; ++k) {
        spread = std::max(spread, std::abs(simplex[i][k] - simplex[best][k]));
      }
    }
    if (values[worst] - values[best] <= options.f_tol && spread <= options.x_tol) {
      out.converged = true;
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k] / dim;
    }
    const std::vector<double> xr = along(centroid, simplex[worst], -1.0);
    const double fr = objective(xr);
    if (fr < values[best]) {
      const std::vector<double> xe = along(centroid, simplex[worst], -2.0);
      const double fe = objective(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = xr;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const std::vector<double> xc = along(centroid, simplex[worst], outside ? -0.5 : 0.5);
    const double fc = objective(xc);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = xc;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      for (std::size_t k = 0; k < dim; ++k) {
        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
      }
      values[i] = objective(simplex[i]);
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  out.x = simplex[best_it - values.begin()];
  out.value = *best_it;
  return out;
}

ParameterOptimum optimize_parameters(Arrangement arrangement, int n_sites,
                                     const ParameterOptimum& start, const QuadratureSpec& spec,
                                     const NelderMeadOptions& options, int threads) {
  if (!(start.gamma > 0.0) || !(start.chi > 0.0) || !(start.sigma > 0.0)) {
    throw std::invalid_argument("parameter search needs gamma, chi and sigma > 0");
  }
  auto experiment = [&](std::span<const double> x) {
    SiteParams site;
    site.gamma = std::exp(x[1]);
    site.chi = Coupling::finite(std::exp(x[2]));
    return Experiment{ChainConfig::make(arrangement, site, n_sites), x[0]};
  };
  auto objective = [&](std::span<const double> x) {
    const Experiment e = experiment(x);
    return -evaluate(e.packet(std::exp(x[3])), e.chain, spec, threads).f_pi;
  };
  const std::vector<double> x0{start.omega0, std::log(start.gamma), std::log(start.chi),
                               std::log(start.sigma)};
  const std::vector<double> step{0.25 * start.gamma, 0.2, 0.2, 0.2};
  const NelderMeadResult r = nelder_mead(objective, x0, step, options);
  ParameterOptimum out;
  out.omega0 = r.x[0];
  out.gamma = std::exp(r.x[1]);
  out.chi = std::exp(r.x[2]);
  out.sigma = std::exp(r.x[3]);
  out.f_pi = -r.value;
  out.iterations = r.iterations;
  return out;
}

}  // namespace kerrgate
