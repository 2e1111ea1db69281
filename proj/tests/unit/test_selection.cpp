/*
   Copyright 2026 The ubu-sampling Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ubu/selection.hpp"

using namespace ubu;

namespace {

// Independent oracle: scan a fine log grid for the largest h satisfying both
// inequalities, then refine by bisection on the feasibility predicate.
double oracle_h(double eps, double d, double N, double p) {
    auto feasible = [&](double h) {
        const double var = (d * h / p) * std::min(1.0, N * N * h * h / (p * p));
        return var <= eps && d * h * h <= eps;
    };
    double best = 0.0;
    for (int i = 0; i <= 40000; ++i) {
        const double h = std::exp(std::log(1e-12) + (std::log(1e6) - std::log(1e-12)) * i / 40000.0);
        if (feasible(h)) best = h;
    }
    double lo = best, hi = best * 1.01;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("d = 10, N = 100, p = 4, eps = 0.01") {
    const Selection s = select_algorithm(0.01, 10, 100, 4);
    CHECK(s.h == doctest::Approx(oracle_h(0.01, 10, 100, 4)).epsilon(1e-9));
    CHECK(s.T == doctest::Approx(1e5));
    CHECK(s.K == static_cast<std::uint64_t>(std::ceil(s.T / s.h)));
    CHECK(s.window_lo == doctest::Approx(4e-3));
    CHECK(s.window_hi == doctest::Approx(4e-2));
    CHECK(s.svrg == (s.h >= s.window_lo && s.h <= s.window_hi));
}

TEST_CASE("property: selection agrees with the scan-and-bisect oracle") {
    testing::Gen gen("selection-oracle");
    for (int trial = 0; trial < 60; ++trial) {
        const double eps = std::exp(gen.uniform(std::log(1e-4), std::log(1.0)));
        const std::uint64_t d = 1 + gen.index(50), N = 1 + gen.index(1000);
        const std::uint64_t p = 1 + gen.index(N);
        CAPTURE(eps);
        CAPTURE(d);
        CAPTURE(N);
        CAPTURE(p);
        const Selection s = select_algorithm(eps, d, N, p);
        CHECK(s.h == doctest::Approx(oracle_h(eps, d, N, p)).epsilon(1e-8));
        const double T = d / (eps * eps);
        CHECK(s.T == doctest::Approx(T));
        const double lo = p / std::sqrt(d * T), hi = static_cast<double>(p) / N;
        CHECK(s.svrg == (s.h >= lo && s.h <= hi));
        CHECK((s.binding == "variance" || s.binding == "bias"));
    }
}

TEST_CASE("large eps with h >= p / N feasible picks mini-batch SG") {
    const Selection s = select_algorithm(0.5, 1, 10, 5);
    CHECK(s.h == doctest::Approx(std::sqrt(0.5)));
    CHECK(s.h > s.window_hi);
    CHECK_FALSE(s.svrg);
    CHECK(s.choice() == "minibatch");
}

TEST_CASE("scaling eps by 4 doubles h when the bias constraint binds") {
    // p = N makes the variance constraint d h^2 N^2 / p^3 <= eps weaker than d h^2 <= eps.
    const Selection a = select_algorithm(1e-3, 4, 8, 8), b = select_algorithm(4e-3, 4, 8, 8);
    REQUIRE(a.binding == "bias");
    REQUIRE(b.binding == "bias");
    CHECK(b.h == doctest::Approx(2.0 * a.h).epsilon(1e-10));
}

}  // TEST_SUITE
