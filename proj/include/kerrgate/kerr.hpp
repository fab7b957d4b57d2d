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

// Scattering kernels for photons passing through chains of cross-Kerr
// interaction sites.
//
// Conventions used throughout the library:
//   * nu_a, nu_b are the outgoing frequencies, omega_a the incoming frequency
//     of photon a. The incoming frequency of photon b is fixed by energy
//     conservation, omega_b = nu_a + nu_b - omega_a.
//   * The two-photon amplitude after scattering is
//       xi_out(nu_a, nu_b) = P xi(nu_a) xi(nu_b)
//                            + int d omega_a K(nu_a, nu_b, omega_a) xi(omega_a) xi(omega_b)
//     where P is the product of the single-photon phases and K is the
//     "reduced kernel" returned by reduced_kernel(). The 1/pi prefactor and
//     the energy-conserving delta are folded into K.
//
// Each site is a pair of coupled two-level atoms with decay rate gamma,
// transition frequency delta and cross-Kerr coupling chi (optionally
// infinite, the V-atom limit).

#include <complex>
#include <optional>
#include <string>
#include <string_view>

namespace kerrgate {

using Complex = std::complex<double>;

/// Cross-Kerr coupling strength; either a finite value >= 0 or the
/// infinite-coupling limit.
class Coupling {
 public:
  static Coupling finite(double chi);
  static Coupling infinite() { return Coupling(0.0, true); }

  bool is_infinite() const { return infinite_; }
  /// Finite value; +inf for the infinite limit.
  double value() const;

  bool operator==(const Coupling&) const = default;

 private:
  Coupling(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

/// Parses "inf" (case-insensitive) or a non-negative decimal number.
Coupling parse_coupling(std::string_view text);
std::string to_string(const Coupling& chi);

struct SiteParams {
  double gamma = 1.0;
  double delta = 0.0;
  Coupling chi = Coupling::infinite();

  /// Throws std::invalid_argument unless gamma > 0 (and finite).
  void validate() const;
  bool operator==(const SiteParams&) const = default;
};

enum class Arrangement { Single, CoProp2, CounterProp2, CounterPropN };

std::string_view to_string(Arrangement a);
/// Accepts the CLI spellings: single, co-2, counter-2, counter-n.
Arrangement parse_arrangement(std::string_view text);

/// A validated chain of interaction sites.
class ChainConfig {
 public:
  static ChainConfig single(const SiteParams& site);
  static ChainConfig co_propagating(const SiteParams& first, const SiteParams& second);
  static ChainConfig counter_propagating(const SiteParams& first, const SiteParams& second);
  static ChainConfig counter_chain(const SiteParams& site, int n_sites);
  /// Generic factory used by parsers. Two-site arrangements use `site` for
  /// both positions.
  static ChainConfig make(Arrangement arrangement, const SiteParams& site, int n_sites);

  Arrangement arrangement() const { return arrangement_; }
  int n_sites() const { return n_sites_; }
  /// Site j (0-based). Translation-invariant chains return the same site.
  const SiteParams& site(int j = 0) const;
  bool uniform() const { return !second_ || *second_ == first_; }

 private:
  ChainConfig(Arrangement a, int n, SiteParams first, std::optional<SiteParams> second);

  Arrangement arrangement_;
  int n_sites_;
  SiteParams first_;
  std::optional<SiteParams> second_;
};

/// Gamma(omega) = gamma/2 + i (delta - omega).
inline Complex gamma_fn(double omega, const SiteParams& site) {
  return {0.5 * site.gamma, site.delta - omega};
}

/// Scalar multiplying delta(omega - nu) in the single-photon S-matrix of the
/// whole chain. Unit modulus.
Complex single_photon_phase(double omega, const ChainConfig& config);

/// Integer power by repeated squaring.
Complex ipow(Complex z, int n);

/// sum_{j=1}^{n} r1^(n-j) r2^(j-1), evaluated as (r1^n - r2^n)/(r1 - r2),
/// with the degenerate branch n r^(n-1) when r1 and r2 coincide to 1e-12.
Complex geometric_pair_sum(Complex r1, Complex r2, int n);
/// The same sum term by term; reference for geometric_pair_sum.
Complex explicit_pair_sum(Complex r1, Complex r2, int n);

/// chi (1 + 2 i chi / D)^-1, or its chi -> inf limit D / (2i).
Complex interaction_factor(const Coupling& chi, Complex denominator_sum);

/// Evaluates the reduced kernel for a fixed chain. Output-frequency
/// dependent pieces are factored into a Row so that integrals over the
/// incoming frequency only pay for the omega-dependent part.
class KernelEvaluator {
 public:
  KernelEvaluator(const ChainConfig& config, bool remove_deformation);

  struct Row {
    double nu_a = 0.0;
    double nu_b = 0.0;
    double energy = 0.0;
    // Output-side quantities per site (two-site arrangements use both).
    Complex rho_nu_a[2];
    Complex rho_nu_b[2];
    Complex prefactor[2];   // everything not depending on omega_a
    Complex mixed = 0.0;    // co-propagating double-interaction prefactor
  };

  Row prepare(double nu_a, double nu_b) const;
  Complex operator()(const Row& row, double omega_a) const;
  Complex operator()(double nu_a, double nu_b, double omega_a) const {
    return (*this)(prepare(nu_a, nu_b), omega_a);
  }

  const ChainConfig& config() const { return config_; }

 private:
  ChainConfig config_;
  bool remove_deformation_;
};

/// K(nu_a, nu_b, omega_a); see the file comment for the convention. When
/// remove_deformation is set, K is multiplied by the conjugated
/// single-photon phases of both outgoing photons.
Complex reduced_kernel(double nu_a, double nu_b, double omega_a, const ChainConfig& config,
                       bool remove_deformation);

}  // namespace kerrgate
