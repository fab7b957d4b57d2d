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

#include "kerrgate/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "kerrgate/parallel.hpp"

namespace kerrgate {

namespace {

// Terms whose Gaussian envelope is below exp(-kNegligibleExponent) are skipped.
constexpr double kNegligibleExponent = 46.0;

// Truncation of the difference-frequency line, in half linewidths.
constexpr double kLineCutoff = 1e6;

struct Resonance {
  double pole = 0.0;   // atomic frequency of the first site
  double scale = 0.5;  // smallest half linewidth in the chain
};

Resonance resonance_of(const ChainConfig& config) {
  Resonance r;
  r.pole = config.site(0).delta;
  r.scale = 0.5 * config.site(0).gamma;
  if (config.n_sites() == 2) r.scale = std::min(r.scale, 0.5 * config.site(1).gamma);
  return r;
}

void check_inputs(const WavePacket& packet, const QuadratureSpec& spec) {
  packet.validate();
  spec.validate();
}

// xi(E/2 + y) xi(E/2 - y) for a Gaussian packet, with deformation phases.
class PairAmplitude {
 public:
  explicit PairAmplitude(const WavePacket& p)
      : packet_(p),
        inv_two_var_(1.0 / (2.0 * p.bandwidth * p.bandwidth)),
        norm_(1.0 / std::sqrt(2.0 * std::numbers::pi * p.bandwidth * p.bandwidth)) {}

  // Energy-dependent part.
  double envelope(double energy) const {
    const double u = 0.5 * energy - packet_.carrier;
    return norm_ * std::exp(-u * u * inv_two_var_);
  }
  double offset_factor(double y) const { return std::exp(-y * y * inv_two_var_); }
  bool deformed() const { return packet_.deformation_rounds > 0; }
  Complex phase(double omega) const {
    return deform_phase(omega, packet_.deformation_site, packet_.deformation_sites,
                        packet_.deformation_rounds);
  }

 private:
  const WavePacket& packet_;
  double inv_two_var_;
  double norm_;
};

// Inner rule over y = omega_a - E/2 >= 0, for poles at |y| = q.
void inner_half_rule(double q, double halfwidth, const Resonance& res, const QuadratureRule& ref,
                     std::vector<double>& y, std::vector<double>& w) {
  const double ta = std::asinh(-q / res.scale);
  const double tb = std::asinh((halfwidth - q) / res.scale);
  const double mid = 0.5 * (ta + tb);
  const double half = 0.5 * (tb - ta);
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const double t = mid + half * ref.nodes[k];
    y[k] = q + res.scale * std::sinh(t);
    w[k] = half * ref.weights[k] * res.scale * std::cosh(t);
  }
}

// int domega_a K(row, omega_a) xi(omega_a) xi(E - omega_a), without the
// energy envelope (multiplied in by the caller).
Complex inner_integral(const KernelEvaluator& kernel, const KernelEvaluator::Row& row,
                       const PairAmplitude& pair, const std::vector<double>& y,
                       const std::vector<double>& w) {
  const double centre = 0.5 * row.energy;
  Complex sum = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double up = centre + y[k];
    const double down = centre - y[k];
    // xi(up) xi(down) is shared by both mirrored nodes.
    Complex terms = kernel(row, up) + kernel(row, down);
    if (pair.deformed()) terms *= pair.phase(up) * pair.phase(down);
    sum += w[k] * pair.offset_factor(y[k]) * terms;
  }
  return sum;
}

// The base level is judged against a half-resolution probe; after that each
// refinement doubles the node count.
template <typename T>
Estimate<T> refine(const QuadratureSpec& spec, const auto& level) {
  Estimate<T> est;
  const int base = spec.nodes_at(0);
  T previous = level(std::max(2, (base + 1) / 2));
  est.last_change = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= spec.max_refinements; ++r) {
    const int n = spec.nodes_at(r);
    const T current = level(n);
    est.value = current;
    est.nodes_used = n;
    est.refinements = r;
    est.last_change = std::abs(current - previous);
    if (est.last_change < spec.convergence_tol) {
      est.converged = true;
      return est;
    }
    previous = current;
  }
  return est;
}

}  // namespace

Complex overlap_at_level(const WavePacket& packet, const ChainConfig& config,
                         const QuadratureSpec& spec, int threads) {
  check_inputs(packet, spec);
  const int n = spec.nodes_per_axis;
  const double sigma = packet.bandwidth;
  const double halfwidth = spec.window_halfwidth * sigma;
  const Resonance res = resonance_of(config);
  const KernelEvaluator kernel(config, /*remove_deformation=*/true);
  const PairAmplitude pair(packet);

  // Outer integral in E = nu_a + nu_b and x = (nu_a - nu_b)/2. The inner
  // integral has a ridge at E = 2 delta (both poles merge), and poles in x
  // and y at |E/2 - delta|.
  const QuadratureRule energy = build_resonance_grid(
      2.0 * (packet.carrier - halfwidth), 2.0 * (packet.carrier + halfwidth), 2.0 * res.pole,
      2.0 * res.scale, n);
  const QuadratureRule& half_ref = gauss_legendre((n + 1) / 2);

  std::vector<Complex> rows(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t e) {
    const double big_e = energy.nodes[e];
    const double u = (0.5 * big_e - packet.carrier) / sigma;
    const double q = std::abs(0.5 * big_e - res.pole);
    std::vector<double> y(half_ref.size());
    std::vector<double> w(half_ref.size());
    inner_half_rule(q, halfwidth, res, half_ref, y, w);
    const double env = pair.envelope(big_e);

    Complex sum = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double x = y[k];
      const double v = x / sigma;
      if (u * u + 0.5 * v * v > kNegligibleExponent) continue;
      for (const double sign : {1.0, -1.0}) {
        const double nu_a = 0.5 * big_e + sign * x;
        const double nu_b = 0.5 * big_e - sign * x;
        Complex outer = env * pair.offset_factor(x);
        if (pair.deformed()) outer *= pair.phase(nu_a) * pair.phase(nu_b);
        const KernelEvaluator::Row row = kernel.prepare(nu_a, nu_b);
        const Complex c = env * inner_integral(kernel, row, pair, y, w);
        sum += w[k] * std::conj(outer) * c;
      }
    }
    rows[e] = energy.weights[e] * sum;
  });

  Complex total = 0.0;
  for (const Complex& r : rows) total += r;
  return 1.0 + total;
}

Complex overlap_tensor_reference(const WavePacket& packet, const ChainConfig& config,
                                 const QuadratureSpec& spec) {
  check_inputs(packet, spec);
  const QuadratureRule outer = build_grid(packet.carrier, packet.bandwidth, spec);
  const QuadratureRule inner = build_grid(0.0, packet.bandwidth, spec);
  const KernelEvaluator kernel(config, /*remove_deformation=*/true);
  Complex total = 0.0;
  for (std::size_t i = 0; i < outer.size(); ++i) {
    for (std::size_t j = 0; j < outer.size(); ++j) {
      const double nu_a = outer.nodes[i];
      const double nu_b = outer.nodes[j];
      const double energy = nu_a + nu_b;
      const KernelEvaluator::Row row = kernel.prepare(nu_a, nu_b);
      Complex c = 0.0;
      for (std::size_t k = 0; k < inner.size(); ++k) {
        const double omega_a = 0.5 * energy + inner.nodes[k];
        c += inner.weights[k] * kernel(row, omega_a) * gaussian_amplitude(omega_a, packet) *
             gaussian_amplitude(energy - omega_a, packet);
      }
      total += outer.weights[i] * outer.weights[j] *
               std::conj(gaussian_amplitude(nu_a, packet) * gaussian_amplitude(nu_b, packet)) * c;
    }
  }
  return 1.0 + total;
}

Estimate<Complex> two_photon_overlap(const WavePacket& packet, const ChainConfig& config,
                                     const QuadratureSpec& spec, int threads) {
  check_inputs(packet, spec);
  return refine<Complex>(spec, [&](int n) {
    return overlap_at_level(packet, config, spec.with_nodes(n), threads);
  });
}

double scattered_weight_at_level(const WavePacket& packet, const ChainConfig& config,
                                 const QuadratureSpec& spec, int threads) {
  check_inputs(packet, spec);
  const int n = spec.nodes_per_axis;
  const double sigma = packet.bandwidth;
  const double halfwidth = spec.window_halfwidth * sigma;
  const Resonance res = resonance_of(config);
  const KernelEvaluator kernel(config, /*remove_deformation=*/true);
  const PairAmplitude pair(packet);

  // E = nu_a + nu_b carries the Gaussian envelope of width 2 sigma.
  Resonance energy_res{2.0 * res.pole, 2.0 * res.scale};
  const QuadratureRule energy =
      build_resonance_grid(2.0 * packet.carrier - 2.0 * halfwidth,
                           2.0 * packet.carrier + 2.0 * halfwidth, energy_res.pole,
                           energy_res.scale, n);
  const QuadratureRule& half_ref = gauss_legendre((n + 1) / 2);
  const QuadratureRule& line_ref = gauss_legendre(n);

  std::vector<double> rows(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t e) {
    const double big_e = energy.nodes[e];
    const double env = pair.envelope(big_e);
    if (env == 0.0) {
      rows[e] = 0.0;
      return;
    }
    const double q = std::abs(0.5 * big_e - res.pole);
    std::vector<double> y(half_ref.size());
    std::vector<double> w(half_ref.size());
    inner_half_rule(q, halfwidth, res, half_ref, y, w);

    // x = (nu_a - nu_b)/2 >= 0, with the poles of Gamma(nu_a), Gamma(nu_b)
    // at x = q. |c|^2 falls off as x^-4, so the line is cut at kLineCutoff
    // half linewidths.
    const double ta = std::asinh(-q / res.scale);
    const double tb = std::asinh(kLineCutoff);
    double sum = 0.0;
    for (std::size_t k = 0; k < line_ref.size(); ++k) {
      const double t = 0.5 * (ta + tb) + 0.5 * (tb - ta) * line_ref.nodes[k];
      const double x = q + res.scale * std::sinh(t);
      const double wx = 0.5 * (tb - ta) * line_ref.weights[k] * res.scale * std::cosh(t);
      for (const double sign : {1.0, -1.0}) {
        const double nu_a = 0.5 * big_e + sign * x;
        const double nu_b = 0.5 * big_e - sign * x;
        const KernelEvaluator::Row row = kernel.prepare(nu_a, nu_b);
        const Complex c = env * inner_integral(kernel, row, pair, y, w);
        sum += wx * std::norm(c);
      }
    }
    rows[e] = energy.weights[e] * sum;
  });

  double total = 0.0;
  for (const double r : rows) total += r;
  return total;
}

Estimate<double> scattered_weight(const WavePacket& packet, const ChainConfig& config,
                                  const QuadratureSpec& spec, int threads) {
  check_inputs(packet, spec);
  return refine<double>(spec, [&](int n) {
    return scattered_weight_at_level(packet, config, spec.with_nodes(n), threads);
  });
}

NormCheck two_photon_norm(const WavePacket& packet, const ChainConfig& config,
                          const QuadratureSpec& spec, int threads) {
  const Estimate<Complex> overlap = two_photon_overlap(packet, config, spec, threads);
  const Estimate<double> weight = scattered_weight(packet, config, spec, threads);
  NormCheck check;
  check.overlap = overlap.value;
  check.scattered = weight.value;
  check.norm = 1.0 + 2.0 * (overlap.value.real() - 1.0) + weight.value;
  check.converged = overlap.converged && weight.converged;
  return check;
}

double avg_fidelity_full(Complex overlap, double phi) {
  return (6.0 + 3.0 * (std::polar(1.0, phi) * overlap).real() + std::norm(overlap)) / 10.0;
}

double avg_fidelity_product(Complex overlap, double phi) {
  return (11.0 + 5.0 * (std::polar(1.0, phi) * overlap).real() + 2.0 * std::norm(overlap)) /
         18.0;
}

std::optional<double> optimal_phase(Complex overlap) {
  if (overlap == Complex(0.0, 0.0)) return std::nullopt;
  double phi = -std::arg(overlap);
  if (phi <= -std::numbers::pi) phi += 2.0 * std::numbers::pi;
  return phi;
}

FidelityResult fidelity_from_overlap(const Estimate<Complex>& overlap) {
  FidelityResult r;
  r.overlap = overlap.value;
  r.f_pi = avg_fidelity_full(overlap.value, std::numbers::pi);
  // With F = 0 every phase is optimal; report the CPHASE phase.
  r.phi_opt = optimal_phase(overlap.value).value_or(std::numbers::pi);
  r.f_opt = avg_fidelity_full(overlap.value, r.phi_opt);
  r.converged = overlap.converged;
  r.nodes_used = overlap.nodes_used;
  r.refinements = overlap.refinements;
  r.last_change = overlap.last_change;
  return r;
}

FidelityResult evaluate(const WavePacket& packet, const ChainConfig& config,
                        const QuadratureSpec& spec, int threads) {
  return fidelity_from_overlap(two_photon_overlap(packet, config, spec, threads));
}

}  // namespace kerrgate
