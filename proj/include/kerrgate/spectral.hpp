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

// Single-photon spectral amplitudes and the quadrature grids that every
// frequency integral in the library is evaluated on.

#include <vector>

#include "kerrgate/kerr.hpp"

namespace kerrgate {

/// Gaussian single-photon wave packet, optionally carrying the phase picked
/// up by `deformation_rounds` full traversals of an N-site chain.
struct WavePacket {
  double carrier = 0.0;    // omega_c = delta + omega_0
  double bandwidth = 1.0;  // sigma
  int deformation_rounds = 0;
  int deformation_sites = 1;
  SiteParams deformation_site{};

  void validate() const;
  /// Closed-form amplitude xi(omega), including the deformation phase.
  Complex amplitude(double omega) const;
};

struct QuadratureSpec {
  int nodes_per_axis = 129;
  double window_halfwidth = 8.0;  // in units of sigma
  double convergence_tol = 1e-6;
  int max_refinements = 4;

  void validate() const;
  /// Node count after `level` doublings.
  int nodes_at(int level) const { return nodes_per_axis << level; }
  QuadratureSpec with_nodes(int n) const {
    QuadratureSpec s = *this;
    s.nodes_per_axis = n;
    return s;
  }
};

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are cached per n.
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Legendre rule mapped onto [a, b].
QuadratureRule map_rule(const QuadratureRule& reference, double a, double b);

/// Gauss-Legendre grid on [center - W sigma, center + W sigma].
QuadratureRule build_grid(double center, double packet_sigma, const QuadratureSpec& spec);

/// Gauss-Legendre rule in t for the substitution
///   omega = pole + scale * sinh(t)
/// over omega in [a, b]. Nodes crowd geometrically towards `pole`, so a
/// Lorentzian of half width `scale` there is resolved while Gaussian tails
/// far from it stay cheap. Reduces to a plain rule when |b - a| << scale.
QuadratureRule build_resonance_grid(double a, double b, double pole, double scale, int n);

/// (2 pi sigma^2)^(-1/4) exp(-(omega - omega_c)^2 / (4 sigma^2)) times the
/// deformation phase of the packet.
Complex gaussian_amplitude(double omega, const WavePacket& packet);

/// [(-conj(Gamma)/Gamma)^N]^m: phase of m traversals of an N-site chain.
Complex deform_phase(double omega, const SiteParams& site, int n_sites, int rounds);

/// int |xi|^2 over the default window of build_grid.
double packet_norm(const WavePacket& packet, const QuadratureSpec& spec);

}  // namespace kerrgate
