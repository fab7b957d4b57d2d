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

#include "kerrgate/kerr.hpp"

using namespace kerrgate;

namespace {

SiteParams site(double gamma, const Coupling& chi, double delta = 0.0) {
  SiteParams s;
  s.gamma = gamma;
  s.delta = delta;
  s.chi = chi;
  return s;
}

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace

TEST_SUITE("kerr") {
  TEST_CASE("coupling parsing and validation") {
    CHECK(parse_coupling("inf").is_infinite());
    CHECK(parse_coupling("2.5").value() == 2.5);
    CHECK(parse_coupling("0").value() == 0.0);
    CHECK_THROWS_AS(parse_coupling("abc"), std::invalid_argument);
    CHECK_THROWS_AS(Coupling::finite(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(Coupling::finite(std::nan("")), std::invalid_argument);
    CHECK(to_string(Coupling::infinite()) == "inf");
  }

  TEST_CASE("chain validation") {
    const SiteParams inf_site = site(1.0, Coupling::infinite());
    const SiteParams fin_site = site(1.0, Coupling::finite(3.0));
    CHECK_THROWS_AS(ChainConfig::co_propagating(inf_site, inf_site), std::invalid_argument);
    CHECK_THROWS_AS(ChainConfig::counter_propagating(inf_site, fin_site), std::invalid_argument);
    CHECK_THROWS_AS(ChainConfig::counter_chain(inf_site, 0), std::invalid_argument);
    CHECK_THROWS_AS(ChainConfig::make(Arrangement::Single, fin_site, 2), std::invalid_argument);
    CHECK_THROWS_AS(ChainConfig::make(Arrangement::CoProp2, fin_site, 3), std::invalid_argument);
    CHECK_THROWS_AS(ChainConfig::single(site(0.0, Coupling::infinite())), std::invalid_argument);
    CHECK_NOTHROW(ChainConfig::counter_propagating(fin_site, site(2.0, Coupling::finite(1.0))));
    for (Arrangement a : {Arrangement::Single, Arrangement::CoProp2, Arrangement::CounterProp2,
                          Arrangement::CounterPropN}) {
      CHECK(parse_arrangement(to_string(a)) == a);
    }
    CHECK_THROWS_AS(parse_arrangement("triangle"), std::invalid_argument);
  }

  TEST_CASE("single site kernel in the strong coupling limit") {
    // Gamma = 1/2 everywhere, D = 1, factor D / 2i = -i/2:
    // K = -i/pi * (-i/2) * 16 = -8/pi.
    const ChainConfig c = ChainConfig::single(site(1.0, Coupling::infinite()));
    CHECK(std::abs(reduced_kernel(0.0, 0.0, 0.0, c, true) - Complex(-8.0 / std::numbers::pi, 0.0)) <
          1e-14);
    CHECK(std::abs(reduced_kernel(0.0, 0.0, 0.0, c, false) - Complex(-8.0 / std::numbers::pi, 0.0)) <
          1e-14);
  }

  TEST_CASE("zero coupling gives a vanishing kernel") {
    const ChainConfig c = ChainConfig::counter_chain(site(1.0, Coupling::finite(0.0)), 4);
    CHECK(reduced_kernel(0.3, -0.1, 0.05, c, true) == Complex(0.0, 0.0));
  }

  TEST_CASE("interaction factor approaches its limit") {
    const Complex d(1.3, -0.4);
    const Complex lim = interaction_factor(Coupling::infinite(), d);
    CHECK(std::abs(lim - d / Complex(0.0, 2.0)) < 1e-15);
    CHECK(rel(interaction_factor(Coupling::finite(1e8), d), lim) < 1e-7);
  }

  TEST_CASE("large finite coupling matches the analytic limit") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (Arrangement a : {Arrangement::Single, Arrangement::CounterPropN}) {
      const int n = a == Arrangement::Single ? 1 : 6;
      const ChainConfig lim = ChainConfig::make(a, site(1.0, Coupling::infinite()), n);
      for (double chi : {1e4, 1e6}) {
        const ChainConfig big = ChainConfig::make(a, site(1.0, Coupling::finite(chi)), n);
        for (int k = 0; k < 20; ++k) {
          const double na = u(rng), nb = u(rng), wa = u(rng);
          CHECK(rel(reduced_kernel(na, nb, wa, big, true), reduced_kernel(na, nb, wa, lim, true)) <
                1e-2);
        }
      }
    }
  }

  TEST_CASE("closed form geometric sum equals the explicit sum") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (int n = 1; n <= 20; ++n) {
      for (int k = 0; k < 10; ++k) {
        const Complex r1 = std::polar(1.0, phase(rng));
        const Complex r2 = std::polar(1.0, phase(rng));
        CHECK(rel(geometric_pair_sum(r1, r2, n), explicit_pair_sum(r1, r2, n)) < 1e-10);
        // Nearly and exactly coincident ratios take the degenerate branch.
        const Complex r3 = r1 * std::polar(1.0, 1e-14);
        CHECK(std::abs(geometric_pair_sum(r1, r3, n) - explicit_pair_sum(r1, r3, n)) < 1e-10 * n);
        CHECK(std::abs(geometric_pair_sum(r1, r1, n) - explicit_pair_sum(r1, r1, n)) < 1e-12 * n);
      }
    }
    CHECK_THROWS_AS(geometric_pair_sum(1.0, 1.0, 0), std::invalid_argument);
  }

  TEST_CASE("N-site chain reduces to the single and two-site kernels") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (double chi : {0.7, 3.0, 1e4}) {
      for (double gamma : {1.0, 4.5}) {
        const SiteParams s = site(gamma, Coupling::finite(chi));
        const ChainConfig n1 = ChainConfig::counter_chain(s, 1);
        const ChainConfig single = ChainConfig::single(s);
        const ChainConfig n2 = ChainConfig::counter_chain(s, 2);
        const ChainConfig two = ChainConfig::counter_propagating(s, s);
        for (int k = 0; k < 25; ++k) {
          const double na = gamma * u(rng), nb = gamma * u(rng), wa = gamma * u(rng);
          for (bool remove : {true, false}) {
            CHECK(rel(reduced_kernel(na, nb, wa, n1, remove),
                      reduced_kernel(na, nb, wa, single, remove)) < 1e-10);
            CHECK(rel(reduced_kernel(na, nb, wa, n2, remove),
                      reduced_kernel(na, nb, wa, two, remove)) < 1e-10);
          }
        }
      }
    }
  }

  TEST_CASE("kernel is symmetric under relabelling the photons") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const SiteParams s = site(1.0, Coupling::finite(2.67));
    const ChainConfig chains[] = {ChainConfig::single(s), ChainConfig::co_propagating(s, s),
                                  ChainConfig::counter_propagating(s, s),
                                  ChainConfig::counter_chain(site(1.0, Coupling::infinite()), 7)};
    for (const ChainConfig& c : chains) {
      for (int k = 0; k < 20; ++k) {
        const double na = u(rng), nb = u(rng), wa = u(rng);
        const double wb = na + nb - wa;
        CHECK(rel(reduced_kernel(na, nb, wa, c, true), reduced_kernel(nb, na, wb, c, true)) < 1e-12);
      }
    }
  }

  TEST_CASE("single-photon phase has unit modulus") {
    const SiteParams a = site(1.0, Coupling::finite(1.0), 0.2);
    const SiteParams b = site(3.0, Coupling::finite(1.0), -0.5);
    const ChainConfig chains[] = {ChainConfig::single(a), ChainConfig::co_propagating(a, b),
                                  ChainConfig::counter_chain(a, 13)};
    for (const ChainConfig& c : chains) {
      for (double w : {-4.0, -0.1, 0.0, 0.2, 9.0}) {
        CHECK(std::abs(std::abs(single_photon_phase(w, c)) - 1.0) < 1e-13);
      }
    }
    // On resonance each site contributes -1.
    CHECK(std::abs(single_photon_phase(0.2, ChainConfig::counter_chain(a, 3)) - Complex(-1.0, 0.0)) <
          1e-14);
  }

  TEST_CASE("evaluator rows agree with the direct kernel") {
    const SiteParams a = site(1.0, Coupling::finite(2.0), 0.1);
    const SiteParams b = site(2.0, Coupling::finite(0.5), -0.3);
    const ChainConfig chains[] = {ChainConfig::co_propagating(a, b),
                                  ChainConfig::counter_propagating(a, b)};
    for (const ChainConfig& c : chains) {
      const KernelEvaluator k(c, true);
      const auto row = k.prepare(0.4, -0.2);
      for (double wa : {-1.0, 0.0, 0.3}) {
        CHECK(k(row, wa) == reduced_kernel(0.4, -0.2, wa, c, true));
      }
    }
  }
}
