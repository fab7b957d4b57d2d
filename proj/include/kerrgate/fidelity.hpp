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

// Overlap between the scattered two-photon state and the undistorted product
// of single-photon packets, and the average gate fidelities derived from it.

#include <optional>

#include "kerrgate/kerr.hpp"
#include "kerrgate/spectral.hpp"

namespace kerrgate {

/// A quadrature value together with how it was obtained.
template <typename T>
struct Estimate {
  T value{};
  bool converged = false;
  int nodes_used = 0;    // nodes per axis at the accepted level
  int refinements = 0;   // doublings beyond the base level
  double last_change = 0.0;
};

struct FidelityResult {
  Complex overlap{1.0, 0.0};
  double f_pi = 0.0;     // F1(pi)
  double phi_opt = 0.0;  // in (-pi, pi]
  double f_opt = 0.0;    // F1(phi_opt)
  bool converged = false;
  int nodes_used = 0;
  int refinements = 0;
  double last_change = 0.0;
};

/// 1 + int dnu_a dnu_b conj(xi(nu_a) xi(nu_b)) int domega K xi(omega) xi(E - omega),
/// at a single node count (spec.nodes_per_axis), with deformation removed.
Complex overlap_at_level(const WavePacket& packet, const ChainConfig& config,
                         const QuadratureSpec& spec, int threads = 0);

/// The same integral on the plain tensor grid: nodes_per_axis Gauss-Legendre
/// points per axis on +-W sigma in nu_a, nu_b and in omega around E/2.
/// Single threaded, no refinement. Only accurate while sigma is well below
/// gamma; kept as an independent check of overlap_at_level.
Complex overlap_tensor_reference(const WavePacket& packet, const ChainConfig& config,
                                 const QuadratureSpec& spec);

/// Overlap with convergence control. The base level (nodes_per_axis) is
/// compared against a half-resolution probe; while the change exceeds
/// spec.convergence_tol the node count is doubled, at most max_refinements
/// times. A result that never meets the tolerance has converged == false.
Estimate<Complex> two_photon_overlap(const WavePacket& packet, const ChainConfig& config,
                                     const QuadratureSpec& spec, int threads = 0);

/// int |c(nu_a, nu_b)|^2 of the scattered correction
/// c = int domega K xi(omega) xi(E - omega), integrated over the whole
/// (nu_a, nu_b) plane in sum/difference coordinates.
double scattered_weight_at_level(const WavePacket& packet, const ChainConfig& config,
                                 const QuadratureSpec& spec, int threads = 0);
Estimate<double> scattered_weight(const WavePacket& packet, const ChainConfig& config,
                                  const QuadratureSpec& spec, int threads = 0);

/// Norm of the scattered two-photon state,
/// 1 + 2 Re(overlap - 1) + int |c|^2. Unitarity makes it 1.
struct NormCheck {
  double norm = 0.0;
  Complex overlap{};
  double scattered = 0.0;
  bool converged = false;
};
NormCheck two_photon_norm(const WavePacket& packet, const ChainConfig& config,
                          const QuadratureSpec& spec, int threads = 0);

/// Haar average over the full two-qubit space:
/// (6 + 3 Re(e^{i phi} F) + |F|^2) / 10.
double avg_fidelity_full(Complex overlap, double phi);

/// Average over product states: (11 + 5 Re(e^{i phi} F) + 2 |F|^2) / 18.
double avg_fidelity_product(Complex overlap, double phi);

/// -arg(F) mapped into (-pi, pi]; empty when F == 0 (phase undefined).
std::optional<double> optimal_phase(Complex overlap);

/// Fills every field of FidelityResult from an overlap estimate.
FidelityResult fidelity_from_overlap(const Estimate<Complex>& overlap);

FidelityResult evaluate(const WavePacket& packet, const ChainConfig& config,
                        const QuadratureSpec& spec, int threads = 0);

}  // namespace kerrgate
