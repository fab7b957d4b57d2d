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

#include "kerrgate/kerr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace kerrgate {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kInvPi = std::numbers::inv_pi;

// conj(Gamma) / Gamma for a known Gamma.
inline Complex conj_ratio(Complex g) { return std::conj(g) * std::conj(g) / std::norm(g); }

inline Complex inverse(Complex z) { return std::conj(z) / std::norm(z); }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Coupling Coupling::finite(double chi) {
  if (!std::isfinite(chi) || chi < 0.0) {
    throw std::invalid_argument("coupling chi must be finite and >= 0 (use Coupling::infinite())");
  }
  return Coupling(chi, false);
}

double Coupling::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : value_;
}

Coupling parse_coupling(std::string_view text) {
  const std::string t = lower(text);
  if (t == "inf" || t == "infinity" || t == "+inf") return Coupling::infinite();
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("cannot parse coupling '" + std::string(text) + "'");
  }
  return Coupling::finite(v);
}

std::string to_string(const Coupling& chi) {
  if (chi.is_infinite()) return "inf";
  std::ostringstream os;
  os.precision(12);
  os << chi.value();
  return os.str();
}

void SiteParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("site decay rate gamma must be > 0");
  }
  if (!std::isfinite(delta)) throw std::invalid_argument("site frequency delta must be finite");
}

std::string_view to_string(Arrangement a) {
  switch (a) {
    case Arrangement::Single: return "single";
    case Arrangement::CoProp2: return "co-2";
    case Arrangement::CounterProp2: return "counter-2";
    case Arrangement::CounterPropN: return "counter-n";
  }
  return "?";
}

Arrangement parse_arrangement(std::string_view text) {
  const std::string t = lower(text);
  if (t == "single") return Arrangement::Single;
  if (t == "co-2" || t == "co") return Arrangement::CoProp2;
  if (t == "counter-2") return Arrangement::CounterProp2;
  if (t == "counter-n" || t == "counter") return Arrangement::CounterPropN;
  throw std::invalid_argument("unknown arrangement '" + std::string(text) +
                              "' (expected single, co-2, counter-2 or counter-n)");
}

ChainConfig::ChainConfig(Arrangement a, int n, SiteParams first, std::optional<SiteParams> second)
    : arrangement_(a), n_sites_(n), first_(first), second_(second) {
  first_.validate();
  if (second_) second_->validate();
  switch (a) {
    case Arrangement::Single:
      if (n != 1) throw std::invalid_argument("single arrangement requires N = 1");
      break;
    case Arrangement::CoProp2:
    case Arrangement::CounterProp2:
      if (n != 2) throw std::invalid_argument("two-site arrangements require N = 2");
      if (first_.chi.is_infinite() || (second_ && second_->chi.is_infinite())) {
        throw std::invalid_argument(
            "infinite chi is only available for the single and counter-n arrangements");
      }
      break;
    case Arrangement::CounterPropN:
      if (n < 1) throw std::invalid_argument("counter-n arrangement requires N >= 1");
      if (second_ && !(*second_ == first_)) {
        throw std::invalid_argument("counter-n arrangement requires identical sites");
      }
      break;
  }
}

ChainConfig ChainConfig::single(const SiteParams& site) {
  return ChainConfig(Arrangement::Single, 1, site, std::nullopt);
}

ChainConfig ChainConfig::co_propagating(const SiteParams& first, const SiteParams& second) {
  return ChainConfig(Arrangement::CoProp2, 2, first, second);
}

ChainConfig ChainConfig::counter_propagating(const SiteParams& first, const SiteParams& second) {
  return ChainConfig(Arrangement::CounterProp2, 2, first, second);
}

ChainConfig ChainConfig::counter_chain(const SiteParams& site, int n_sites) {
  return ChainConfig(Arrangement::CounterPropN, n_sites, site, std::nullopt);
}

ChainConfig ChainConfig::make(Arrangement arrangement, const SiteParams& site, int n_sites) {
  switch (arrangement) {
    case Arrangement::Single:
      if (n_sites != 1) throw std::invalid_argument("single arrangement requires N = 1");
      return single(site);
    case Arrangement::CoProp2:
      if (n_sites != 2) throw std::invalid_argument("two-site arrangements require N = 2");
      return co_propagating(site, site);
    case Arrangement::CounterProp2:
      if (n_sites != 2) throw std::invalid_argument("two-site arrangements require N = 2");
      return counter_propagating(site, site);
    case Arrangement::CounterPropN:
      return counter_chain(site, n_sites);
  }
  throw std::invalid_argument("unknown arrangement");
}

const SiteParams& ChainConfig::site(int j) const {
  if (j < 0 || j >= n_sites_) throw std::out_of_range("site index out of range");
  if (j == 1 && second_) return *second_;
  return first_;
}

Complex ipow(Complex z, int n) {
  if (n < 0) return ipow(inverse(z), -n);
  Complex result{1.0, 0.0};
  while (n > 0) {
    if (n & 1) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

Complex single_photon_phase(double omega, const ChainConfig& config) {
  switch (config.arrangement()) {
    case Arrangement::Single:
      return -conj_ratio(gamma_fn(omega, config.site(0)));
    case Arrangement::CoProp2:
    case Arrangement::CounterProp2:
      return conj_ratio(gamma_fn(omega, config.site(0))) *
             conj_ratio(gamma_fn(omega, config.site(1)));
    case Arrangement::CounterPropN:
      return ipow(-conj_ratio(gamma_fn(omega, config.site(0))), config.n_sites());
  }
  return 1.0;
}

Complex geometric_pair_sum(Complex r1, Complex r2, int n) {
  if (n < 1) throw std::invalid_argument("geometric_pair_sum requires n >= 1");
  const Complex diff = r1 - r2;
  if (std::abs(diff) < 1e-12 * (std::abs(r1) + std::abs(r2))) {
    return static_cast<double>(n) * ipow(0.5 * (r1 + r2), n - 1);
  }
  return (ipow(r1, n) - ipow(r2, n)) / diff;
}

Complex explicit_pair_sum(Complex r1, Complex r2, int n) {
  Complex sum = 0.0;
  for (int j = 1; j <= n; ++j) sum += ipow(r1, n - j) * ipow(r2, j - 1);
  return sum;
}

Complex interaction_factor(const Coupling& chi, Complex denominator_sum) {
  if (chi.is_infinite()) return denominator_sum / (2.0 * kI);
  const double c = chi.value();
  // chi / (1 + 2 i chi / D) = chi D / (D + 2 i chi)
  return c * denominator_sum * inverse(denominator_sum + 2.0 * kI * c);
}

KernelEvaluator::KernelEvaluator(const ChainConfig& config, bool remove_deformation)
    : config_(config), remove_deformation_(remove_deformation) {}

KernelEvaluator::Row KernelEvaluator::prepare(double nu_a, double nu_b) const {
  Row row;
  row.nu_a = nu_a;
  row.nu_b = nu_b;
  row.energy = nu_a + nu_b;

  Complex removal = 1.0;
  if (remove_deformation_) {
    removal = std::conj(single_photon_phase(nu_a, config_) * single_photon_phase(nu_b, config_));
  }

  const int n_distinct = (config_.arrangement() == Arrangement::CoProp2 ||
                          config_.arrangement() == Arrangement::CounterProp2)
                             ? 2
                             : 1;
  Complex g_a[2], g_b[2], f[2];
  for (int s = 0; s < n_distinct; ++s) {
    const SiteParams& site = config_.site(s);
    g_a[s] = gamma_fn(nu_a, site);
    g_b[s] = gamma_fn(nu_b, site);
    row.rho_nu_a[s] = conj_ratio(g_a[s]);
    row.rho_nu_b[s] = conj_ratio(g_b[s]);
    f[s] = interaction_factor(site.chi, g_a[s] + g_b[s]);
  }

  const Complex minus_i_over_pi = -kI * kInvPi;
  switch (config_.arrangement()) {
    case Arrangement::Single:
    case Arrangement::CounterPropN: {
      const double g = config_.site(0).gamma;
      row.prefactor[0] = minus_i_over_pi * g * g * f[0] * inverse(g_a[0] * g_b[0]) * removal;
      break;
    }
    case Arrangement::CounterProp2: {
      const double g1 = config_.site(0).gamma;
      const double g2 = config_.site(1).gamma;
      // Interaction at site 1: photon a then crosses site 2 on its way out,
      // photon b crossed site 2 on its way in (and vice versa for site 2).
      row.prefactor[0] = minus_i_over_pi * row.rho_nu_a[1] * f[0] * g1 * g1 *
                         inverse(g_a[0] * g_b[0]) * removal;
      row.prefactor[1] = minus_i_over_pi * row.rho_nu_b[0] * f[1] * g2 * g2 *
                         inverse(g_a[1] * g_b[1]) * removal;
      break;
    }
    case Arrangement::CoProp2: {
      const SiteParams& s1 = config_.site(0);
      const SiteParams& s2 = config_.site(1);
      const double g1 = s1.gamma;
      const double g2 = s2.gamma;
      // Interaction at site 1, then both photons cross site 2 outgoing.
      row.prefactor[0] = minus_i_over_pi * row.rho_nu_a[1] * row.rho_nu_b[1] * f[0] * g1 * g1 *
                         inverse(g_a[0] * g_b[0]) * removal;
      // Both photons cross site 1 incoming, then interact at site 2.
      row.prefactor[1] = minus_i_over_pi * f[1] * g2 * g2 * inverse(g_a[1] * g_b[1]) * removal;
      // Interaction at both sites. On shell, Gamma_1(w_a) + Gamma_2(w_b) is
      // independent of the split of the energy.
      const Complex d1 = g_a[0] + g_b[0];
      const Complex d2 = g_a[1] + g_b[1];
      const Complex mid{0.5 * (g1 + g2), s1.delta + s2.delta - row.energy};
      row.mixed = -kInvPi * 4.0 * f[0] * f[1] * g1 * g1 * g2 * g2 *
                  inverse(g_a[1] * g_b[1] * d1 * mid * d2) * removal;
      break;
    }
  }
  return row;
}

Complex KernelEvaluator::operator()(const Row& row, double omega_a) const {
  const double omega_b = row.energy - omega_a;
  switch (config_.arrangement()) {
    case Arrangement::Single: {
      const SiteParams& s = config_.site(0);
      return row.prefactor[0] * inverse(gamma_fn(omega_a, s) * gamma_fn(omega_b, s));
    }
    case Arrangement::CounterPropN: {
      const SiteParams& s = config_.site(0);
      const Complex ga = gamma_fn(omega_a, s);
      const Complex gb = gamma_fn(omega_b, s);
      const Complex r1 = conj_ratio(ga) * row.rho_nu_b[0];
      const Complex r2 = conj_ratio(gb) * row.rho_nu_a[0];
      return row.prefactor[0] * inverse(ga * gb) *
             geometric_pair_sum(r1, r2, config_.n_sites());
    }
    case Arrangement::CounterProp2: {
      const SiteParams& s1 = config_.site(0);
      const SiteParams& s2 = config_.site(1);
      const Complex t1 = row.prefactor[0] * conj_ratio(gamma_fn(omega_b, s2)) *
                         inverse(gamma_fn(omega_a, s1) * gamma_fn(omega_b, s1));
      const Complex t2 = row.prefactor[1] * conj_ratio(gamma_fn(omega_a, s1)) *
                         inverse(gamma_fn(omega_a, s2) * gamma_fn(omega_b, s2));
      return t1 + t2;
    }
    case Arrangement::CoProp2: {
      const SiteParams& s1 = config_.site(0);
      const SiteParams& s2 = config_.site(1);
      const Complex ga1 = gamma_fn(omega_a, s1);
      const Complex gb1 = gamma_fn(omega_b, s1);
      const Complex inv1 = inverse(ga1 * gb1);
      const Complex t1 = row.prefactor[0] * inv1;
      const Complex t2 = row.prefactor[1] * conj_ratio(ga1) * conj_ratio(gb1) *
                         inverse(gamma_fn(omega_a, s2) * gamma_fn(omega_b, s2));
      const Complex t3 = row.mixed * inv1;
      return t1 + t2 + t3;
    }
  }
  return 0.0;
}

Complex reduced_kernel(double nu_a, double nu_b, double omega_a, const ChainConfig& config,
                       bool remove_deformation) {
  return KernelEvaluator(config, remove_deformation)(nu_a, nu_b, omega_a);
}

}  // namespace kerrgate
