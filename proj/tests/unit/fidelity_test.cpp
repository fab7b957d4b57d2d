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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kerrgate/fidelity.hpp"

using namespace kerrgate;

namespace {

constexpr double kPi = std::numbers::pi;

SiteParams site(double gamma, const Coupling& chi, double delta = 0.0) {
  SiteParams s;
  s.gamma = gamma;
  s.delta = delta;
  s.chi = chi;
  return s;
}

WavePacket packet(double sigma, double carrier = 0.0, int rounds = 0, int sites = 1,
                  SiteParams deform = {}) {
  WavePacket p;
  p.bandwidth = sigma;
  p.carrier = carrier;
  p.deformation_rounds = rounds;
  p.deformation_sites = sites;
  p.deformation_site = deform;
  return p;
}

struct OracleCase {
  const char* name;
  ChainConfig chain;
  WavePacket packet;
  Complex overlap;
};

}  // namespace

TEST_SUITE("fidelity") {
  TEST_CASE("overlap against the independent tensor-grid oracle") {
    // Reference values from a separate NumPy implementation on a plain
    // (nu_a, nu_b, omega) Gauss-Legendre grid, converged to 1e-12 between
    // 129, 193 and 257 nodes.
    const SiteParams inf1 = site(1.0, Coupling::infinite());
    const OracleCase cases[] = {
        {"single", ChainConfig::single(inf1), packet(0.2), {-0.275272564389, 0.0}},
        {"counter-5", ChainConfig::counter_chain(inf1, 5), packet(0.09365), {-0.919837236011, 0.0}},
        {"counter-2", ChainConfig::counter_propagating(site(10, Coupling::finite(1e4)), site(10, Coupling::finite(1e4))),
         packet(1.8367), {-0.708641777753, -0.000804202312}},
        {"co-2", ChainConfig::co_propagating(site(6, Coupling::finite(2.67)), site(6, Coupling::finite(2.67))),
         packet(1.0), {-0.111430261786, -0.211496489639}},
        {"single detuned", ChainConfig::single(site(4.5, Coupling::finite(5.0))), packet(0.5, 1.1),
         {0.246911399099, -0.065157535763}},
        {"counter-6 two rounds", ChainConfig::counter_chain(inf1, 6), packet(0.08, 0.0, 2, 6, inf1),
         {-0.931356501779, 0.0}},
        {"counter-6 one round detuned", ChainConfig::counter_chain(inf1, 6), packet(0.08, 0.3, 1, 6, inf1),
         {-0.339164308744, 0.784203071993}},
        {"counter-4 finite chi", ChainConfig::counter_chain(site(1.0, Coupling::finite(3.0)), 4), packet(0.1),
         {-0.832506497786, -0.299889244679}},
    };
    for (const OracleCase& c : cases) {
      CAPTURE(c.name);
      const Estimate<Complex> e = two_photon_overlap(c.packet, c.chain, QuadratureSpec{}, 1);
      CHECK(e.converged);
      CHECK(std::abs(e.value - c.overlap) < 1e-9);
    }
  }

  TEST_CASE("zero coupling leaves the overlap at exactly one") {
    for (Arrangement a : {Arrangement::Single, Arrangement::CounterPropN, Arrangement::CoProp2}) {
      const int n = a == Arrangement::CoProp2 ? 2 : (a == Arrangement::Single ? 1 : 9);
      const ChainConfig c = ChainConfig::make(a, site(1.0, Coupling::finite(0.0)), n);
      const FidelityResult r = evaluate(packet(0.3, 0.2), c, QuadratureSpec{}, 1);
      CHECK(r.overlap == Complex(1.0, 0.0));
      CHECK(r.converged);
    }
  }

  TEST_CASE("scattered state keeps unit norm") {
    const SiteParams a = site(1.0, Coupling::finite(2.0), 0.1);
    const SiteParams b = site(2.5, Coupling::finite(0.8), -0.4);
    const std::pair<ChainConfig, WavePacket> cases[] = {
        {ChainConfig::single(site(1.0, Coupling::infinite())), packet(0.35)},
        {ChainConfig::counter_chain(site(1.0, Coupling::infinite()), 8), packet(0.06, 0.05)},
        {ChainConfig::co_propagating(a, b), packet(0.7, 0.3)},
        {ChainConfig::counter_propagating(a, b), packet(1.2, -0.2)},
        {ChainConfig::co_propagating(site(6, Coupling::finite(2.67)), site(6, Coupling::finite(2.67))),
         packet(2.0)},
    };
    for (const auto& [chain, p] : cases) {
      const NormCheck n = two_photon_norm(p, chain, QuadratureSpec{}, 1);
      CHECK(n.converged);
      CHECK(std::abs(n.norm - 1.0) < 1e-9);
      CHECK(std::abs(n.overlap) <= 1.0 + 1e-9);
    }
  }

  TEST_CASE("plain tensor grid agrees for narrow packets") {
    const ChainConfig c = ChainConfig::counter_chain(site(1.0, Coupling::finite(4.0)), 3);
    const WavePacket p = packet(0.1, 0.05);
    const QuadratureSpec s = QuadratureSpec{}.with_nodes(97);
    CHECK(std::abs(overlap_at_level(p, c, s, 1) - overlap_tensor_reference(p, c, s)) < 1e-9);
  }

  TEST_CASE("quadrature error shrinks as nodes are added") {
    const ChainConfig c = ChainConfig::counter_chain(site(1.0, Coupling::infinite()), 4);
    const WavePacket p = packet(0.5, 0.2);
    const Complex ref = overlap_at_level(p, c, QuadratureSpec{}.with_nodes(257), 1);
    double previous = 1e300;
    for (int n : {5, 9, 17, 33, 65}) {
      const double err = std::abs(overlap_at_level(p, c, QuadratureSpec{}.with_nodes(n), 1) - ref);
      CAPTURE(n);
      CHECK(err < previous);
      previous = err;
    }
    CHECK(previous < 1e-8);
  }

  TEST_CASE("non-convergence is reported, not hidden") {
    QuadratureSpec s;
    s.nodes_per_axis = 3;
    s.max_refinements = 0;
    s.convergence_tol = 1e-14;
    const ChainConfig c = ChainConfig::counter_chain(site(1.0, Coupling::infinite()), 10);
    const FidelityResult r = evaluate(packet(2.0), c, s, 1);
    CHECK_FALSE(r.converged);
    CHECK(r.nodes_used == 3);
  }

  TEST_CASE("results do not depend on the thread count") {
    const ChainConfig c = ChainConfig::counter_chain(site(1.0, Coupling::infinite()), 5);
    const WavePacket p = packet(0.4, 0.1);
    const Complex one = two_photon_overlap(p, c, QuadratureSpec{}, 1).value;
    for (int t : {2, 3, 8}) CHECK(two_photon_overlap(p, c, QuadratureSpec{}, t).value == one);
  }

  TEST_CASE("bandwidth and decay rate rescale together on resonance") {
    for (double c : {2.0, 10.0}) {
      for (int n : {1, 4}) {
        const ChainConfig base = ChainConfig::counter_chain(site(1.0, Coupling::infinite()), n);
        const ChainConfig scaled = ChainConfig::counter_chain(site(c, Coupling::infinite()), n);
        for (double sigma : {0.05, 0.3, 2.0}) {
          const Complex a = two_photon_overlap(packet(sigma), base, QuadratureSpec{}, 1).value;
          const Complex b = two_photon_overlap(packet(c * sigma), scaled, QuadratureSpec{}, 1).value;
          CHECK(std::abs(a - b) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("fidelity formulas at known overlaps") {
    CHECK(avg_fidelity_full(-1.0, kPi) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(avg_fidelity_product(-1.0, kPi) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(avg_fidelity_full(1.0, kPi) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(avg_fidelity_product(1.0, kPi) == doctest::Approx(8.0 / 18.0).epsilon(1e-15));
    CHECK(avg_fidelity_full(0.0, 1.0) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(avg_fidelity_product(0.0, 1.0) == doctest::Approx(11.0 / 18.0).epsilon(1e-15));
  }

  TEST_CASE("optimal phase matches a fine grid search") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> radius(0.05, 1.0);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    const double step = 1e-6;
    const long steps = static_cast<long>(std::floor(2.0 * kPi / step));
    for (int k = 0; k < 4; ++k) {
      const Complex f = std::polar(radius(rng), angle(rng));
      double best_phi = 0.0;
      double best = -1.0;
      for (long i = 1; i <= steps; ++i) {
        const double phi = -kPi + i * step;
        const double v = avg_fidelity_full(f, phi);
        if (v > best) {
          best = v;
          best_phi = phi;
        }
      }
      const auto opt = optimal_phase(f);
      REQUIRE(opt.has_value());
      CHECK(std::abs(*opt - best_phi) < 1e-5);
      CHECK(*opt > -kPi);
      CHECK(*opt <= kPi);
    }
    CHECK(*optimal_phase(Complex(-1.0, 0.0)) == doctest::Approx(kPi));
    CHECK_FALSE(optimal_phase(Complex(0.0, 0.0)).has_value());
  }

  TEST_CASE("vanishing overlap falls back to the target phase") {
    Estimate<Complex> e;
    e.value = 0.0;
    e.converged = true;
    const FidelityResult r = fidelity_from_overlap(e);
    CHECK(r.phi_opt == doctest::Approx(kPi));
    CHECK(r.f_opt == doctest::Approx(0.6));
  }

  TEST_CASE("product-state average never falls below the full average") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
      const Complex f = std::polar(std::sqrt(u(rng)), 2.0 * kPi * u(rng));
      const double phi = 2.0 * kPi * u(rng) - kPi;
      CHECK(avg_fidelity_product(f, phi) >= avg_fidelity_full(f, phi) - 1e-15);
      CHECK(avg_fidelity_product(f, kPi) >= avg_fidelity_full(f, kPi) - 1e-15);
    }
  }
}
