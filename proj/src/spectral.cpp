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

#include "kerrgate/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kerrgate {

void WavePacket::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw std::invalid_argument("wave packet bandwidth sigma must be > 0");
  }
  if (!std::isfinite(carrier)) throw std::invalid_argument("carrier frequency must be finite");
  if (deformation_rounds < 0) throw std::invalid_argument("deformation rounds must be >= 0");
  if (deformation_sites < 1) throw std::invalid_argument("deformation sites must be >= 1");
  if (deformation_rounds > 0) deformation_site.validate();
}

Complex WavePacket::amplitude(double omega) const { return gaussian_amplitude(omega, *this); }

void QuadratureSpec::validate() const {
  if (nodes_per_axis < 2) throw std::invalid_argument("quadrature needs at least 2 nodes per axis");
  if (!(window_halfwidth > 0.0)) throw std::invalid_argument("window half-width must be > 0");
  if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence tolerance must be > 0");
  if (max_refinements < 0) throw std::invalid_argument("max refinements must be >= 0");
  if (nodes_per_axis << max_refinements > (1 << 16)) {
    throw std::invalid_argument("refinement schedule exceeds 65536 nodes per axis");
  }
}

namespace {

QuadratureRule compute_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs n >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(compute_gauss_legendre(n));
  return *slot;
}

QuadratureRule map_rule(const QuadratureRule& reference, double a, double b) {
  QuadratureRule out;
  out.nodes.resize(reference.size());
  out.weights.resize(reference.size());
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    out.nodes[i] = mid + half * reference.nodes[i];
    out.weights[i] = half * reference.weights[i];
  }
  return out;
}

QuadratureRule build_grid(double center, double packet_sigma, const QuadratureSpec& spec) {
  const double w = spec.window_halfwidth * packet_sigma;
  return map_rule(gauss_legendre(spec.nodes_per_axis), center - w, center + w);
}

QuadratureRule build_resonance_grid(double a, double b, double pole, double scale, int n) {
  const double ta = std::asinh((a - pole) / scale);
  const double tb = std::asinh((b - pole) / scale);
  QuadratureRule rule = map_rule(gauss_legendre(n), ta, tb);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double t = rule.nodes[i];
    rule.nodes[i] = pole + scale * std::sinh(t);
    rule.weights[i] *= scale * std::cosh(t);
  }
  return rule;
}

Complex deform_phase(double omega, const SiteParams& site, int n_sites, int rounds) {
  if (rounds < 0) throw std::invalid_argument("deformation rounds must be >= 0");
  if (n_sites < 1) throw std::invalid_argument("deformation sites must be >= 1");
  site.validate();
  if (rounds == 0) return 1.0;
  const Complex g = gamma_fn(omega, site);
  const Complex single = -std::conj(g) * std::conj(g) / std::norm(g);
  return ipow(ipow(single, n_sites), rounds);
}

Complex gaussian_amplitude(double omega, const WavePacket& packet) {
  const double s = packet.bandwidth;
  const double x = omega - packet.carrier;
  const double envelope =
      std::pow(2.0 * std::numbers::pi * s * s, -0.25) * std::exp(-x * x / (4.0 * s * s));
  if (packet.deformation_rounds == 0) return envelope;
  return envelope * deform_phase(omega, packet.deformation_site, packet.deformation_sites,
                                 packet.deformation_rounds);
}

double packet_norm(const WavePacket& packet, const QuadratureSpec& spec) {
  const QuadratureRule grid = build_grid(packet.carrier, packet.bandwidth, spec);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    sum += grid.weights[i] * std::norm(gaussian_amplitude(grid.nodes[i], packet));
  }
  return sum;
}

}  // namespace kerrgate
