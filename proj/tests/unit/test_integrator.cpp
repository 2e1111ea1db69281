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
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "helpers.hpp"
#include "ubu/benchmarks.hpp"
#include "ubu/error.hpp"
#include "ubu/integrator.hpp"

using namespace ubu;
using testing::Gen;
using testing::rel_err;

namespace {

// Covariance of the OU increment by quadrature of e^{As} B B^T e^{A^T s}
// with A = [[0, 1], [0, -2]], B = [0, 2 / sqrt(M2)].
OuCovariance covariance_by_quadrature(double t, double M2) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto q = [&](auto fn) { return GK::integrate(fn, 0.0, t, 15, 1e-15); };
    const double c = 4.0 / M2;
    OuCovariance out;
    out.xx = c * q([](double s) {
                 const double a = 0.5 * (1.0 - std::exp(-2.0 * s));
                 return a * a;
             });
    out.xv = c * q([](double s) { return 0.5 * (1.0 - std::exp(-2.0 * s)) * std::exp(-2.0 * s); });
    out.vv = c * q([](double s) { return std::exp(-4.0 * s); });
    return out;
}

}  // namespace

TEST_SUITE("integrator") {

TEST_CASE("OU covariance closed form matches quadrature, including tiny t") {
    for (double M2 : {1.0, 3.0, 0.5}) {
        for (double t : {1e-7, 5e-5, 9.9e-5, 1.01e-4, 1e-3, 0.01, 0.1, 0.5, 1.0, 5.0, 20.0}) {
            CAPTURE(t);
            CAPTURE(M2);
            const auto a = ou_covariance(t, M2);
            const auto b = covariance_by_quadrature(t, M2);
            CHECK(rel_err(a.xx, b.xx, 1e-300) < 1e-11);
            CHECK(rel_err(a.xv, b.xv, 1e-300) < 1e-11);
            CHECK(rel_err(a.vv, b.vv, 1e-300) < 1e-11);
        }
    }
}

TEST_CASE("property: OU covariance composes over consecutive intervals") {
    Gen gen("ou-semigroup");
    for (int trial = 0; trial < 200; ++trial) {
        const double t1 = std::exp(gen.uniform(std::log(1e-6), std::log(5.0)));
        const double t2 = std::exp(gen.uniform(std::log(1e-6), std::log(5.0)));
        const double M2 = gen.uniform(0.2, 5.0);
        const auto c1 = ou_covariance(t1, M2), c2 = ou_covariance(t2, M2), c12 = ou_covariance(t1 + t2, M2);
        // C(t1 + t2) = F(t2) C(t1) F(t2)^T + C(t2), F = [[1, a], [0, e]]
        const double e = std::exp(-2.0 * t2), a = 0.5 * (1.0 - e);
        const double xx = c1.xx + 2.0 * a * c1.xv + a * a * c1.vv + c2.xx;
        const double xv = e * c1.xv + a * e * c1.vv + c2.xv;
        const double vv = e * e * c1.vv + c2.vv;
        CHECK(rel_err(c12.xx, xx, 1e-300) < 1e-10);
        CHECK(rel_err(c12.xv, xv, 1e-300) < 1e-10);
        CHECK(rel_err(c12.vv, vv, 1e-300) < 1e-10);
    }
}

TEST_CASE("OU Cholesky factor reproduces the covariance") {
    for (double t : {1e-6, 1e-3, 0.05, 2.0}) {
        const OuFlow fl(t, 2.0);
        const auto c = ou_covariance(t, 2.0);
        CHECK(rel_err(fl.l11 * fl.l11, c.xx, 1e-300) < 1e-12);
        CHECK(rel_err(fl.l21 * fl.l11, c.xv, 1e-300) < 1e-12);
        CHECK(rel_err(fl.l21 * fl.l21 + fl.l22 * fl.l22, c.vv, 1e-300) < 1e-12);
        CHECK(fl.decay == doctest::Approx(std::exp(-2.0 * t)).epsilon(1e-15));
    }
}

TEST_CASE("OU flow sample covariance matches the closed form") {
    const double t = 0.3, M2 = 1.5;
    const OuFlow fl(t, M2);
    const auto c = ou_covariance(t, M2);
    Stream s({3, 3, 3, StreamPurpose::kDynamics});
    const int n = 200000;
    double sxx = 0, sxv = 0, svv = 0;
    for (int i = 0; i < n; ++i) {
        State st{{0.0}, {0.0}};
        flow_u(st, fl, s);
        sxx += st.x[0] * st.x[0];
        sxv += st.x[0] * st.v[0];
        svv += st.v[0] * st.v[0];
    }
    CHECK(std::abs(sxx / n - c.xx) < 5.0 * c.xx * std::sqrt(2.0 / n));
    CHECK(std::abs(svv / n - c.vv) < 5.0 * c.vv * std::sqrt(2.0 / n));
    CHECK(std::abs(sxv / n - c.xv) < 5.0 * std::sqrt((c.xx * c.vv + c.xv * c.xv) / n));
}

TEST_CASE("one step is half OU, kick at the midpoint, half OU") {
    for (const auto& id : {"bench1d", "bench2d", "bench10d-fs:6"}) {
        CAPTURE(id);
        const Benchmark b = make_benchmark(id, 1);
        const std::size_t d = b.model->dim();
        const double h = 0.3, M2 = 1.7;
        Integrator integ(b.model, {h, M2}, make_estimator(EstimatorSpec{}, b.model));
        Stream dyn({1, 1, 1, StreamPurpose::kDynamics}), grad({1, 1, 1, StreamPurpose::kGradient});
        Gen gen(std::string("step-structure/") + id);
        State s{gen.point(d, 1.0), gen.point(d, 1.0)};
        State manual = s;
        StepTrace trace;
        integ.step(s, dyn, grad, &trace);
        const OuFlow half(h / 2, M2);
        flow_u_replay(manual, half, trace.first);
        CHECK(manual.x == trace.y);
        std::vector<double> g(d);
        b.model->gradient(manual.x, g);
        CHECK(g == trace.gradient);
        for (std::size_t k = 0; k < d; ++k) manual.v[k] -= (h / M2) * g[k];
        flow_u_replay(manual, half, trace.second);
        for (std::size_t k = 0; k < d; ++k) {
            CHECK(manual.x[k] == doctest::Approx(s.x[k]).epsilon(1e-15));
            CHECK(manual.v[k] == doctest::Approx(s.v[k]).epsilon(1e-15));
        }
    }
}

TEST_CASE("dynamics draws do not depend on the estimator") {
    const Benchmark b = make_benchmark("bench1d-fs:10", 1);
    auto noises = [&](const std::string& est) {
        Integrator integ(b.model, {0.1, 1.0}, make_estimator(EstimatorSpec::parse(est, *b.model, 0.0), b.model));
        Stream dyn({8, 8, 8, StreamPurpose::kDynamics}), grad({8, 8, 8, StreamPurpose::kGradient});
        State s{{0.0}, {0.0}};
        std::vector<double> out;
        StepTrace tr;
        for (int k = 0; k < 50; ++k) {
            integ.step(s, dyn, grad, &tr);
            out.push_back(tr.first.dx[0]);
            out.push_back(tr.second.dv[0]);
        }
        return out;
    };
    CHECK(noises("full") == noises("sg"));
    CHECK(noises("full") == noises("saga"));
}

TEST_CASE("default initial state: X = 0, V ~ N(0, I / M2)") {
    Stream s({2, 2, 2, StreamPurpose::kInitial});
    const int n = 100000;
    double sv = 0.0;
    for (int i = 0; i < n; ++i) {
        const State st = default_initial(1, 4.0, s);
        REQUIRE(st.x[0] == 0.0);
        sv += st.v[0] * st.v[0];
    }
    CHECK(std::abs(sv / n - 0.25) < 5.0 * 0.25 * std::sqrt(2.0 / n));
}

TEST_CASE("simulate observes states before each step") {
    const Benchmark b = make_quadratic(1, 1.0);
    Integrator integ(b.model, {0.1, 1.0}, make_estimator(EstimatorSpec{}, b.model));
    Stream dyn({1, 0, 0, StreamPurpose::kDynamics}), grad({1, 0, 0, StreamPurpose::kGradient});
    State s{{0.5}, {0.0}};
    std::vector<std::uint64_t> ks;
    double first_x = 0.0;
    const auto st = simulate(integ, s, 10, dyn, grad, [&](std::uint64_t k, ConstVec x, ConstVec) {
        if (k == 0) first_x = x[0];
        ks.push_back(k);
    });
    CHECK(st.steps == 10);
    CHECK(ks.size() == 10);
    CHECK(ks.front() == 0);
    CHECK(ks.back() == 9);
    CHECK(first_x == 0.5);
}

TEST_CASE("unstable step sizes raise a divergence error") {
    const Benchmark b = make_quadratic(1, 1000.0);
    Integrator integ(b.model, {1.0, 1.0}, make_estimator(EstimatorSpec{}, b.model));
    Stream dyn({1, 0, 0, StreamPurpose::kDynamics}), grad({1, 0, 0, StreamPurpose::kGradient});
    State s{{1.0}, {0.0}};
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 1000; ++k) integ.step(s, dyn, grad);
        }(),
        DivergenceError);
}

}  // TEST_SUITE
