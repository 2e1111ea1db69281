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

#include <array>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "ubu/error.hpp"
#include "ubu/integrator.hpp"
#include "ubu/variation.hpp"

using namespace ubu;
using testing::Gen;

namespace {

// X_K from (x0, v0) under full-gradient steps with a fixed dynamics stream.
std::vector<double> endpoint(const Benchmark& b, std::vector<double> x0, std::vector<double> v0, double h,
                             std::uint64_t K, const StreamKey& key) {
    Integrator integ(b.model, StepConfig{h, 1.0}, make_estimator(EstimatorSpec{}, b.model));
    Stream dyn(key), grad(StreamKey{key.seed, key.experiment, key.replica, StreamPurpose::kGradient});
    State s{std::move(x0), std::move(v0)};
    for (std::uint64_t k = 0; k < K; ++k) integ.step(s, dyn, grad);
    return s.x;
}

// Q after K steps via the lock-step propagation.
VariationState propagate(const Benchmark& b, std::vector<double> x0, std::vector<double> v0, double h,
                         std::uint64_t K, const StreamKey& key) {
    const std::size_t d = b.model->dim();
    State s{std::move(x0), std::move(v0)};
    VariationState var = VariationState::velocity(d);
    const OuFlow half(0.5 * h, 1.0);
    Stream dyn(key);
    for (std::uint64_t k = 0; k < K; ++k) step_with_variation(s, var, *b.model, half, h, 1.0, dyn, true);
    return var;
}

using Mat2 = std::array<double, 4>;
Mat2 mul(const Mat2& a, const Mat2& b) {
    return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3]};
}

// Mean map of one step on the quadratic U = m x^2 / 2 with M2 = 1:
// half OU drift, kick, half OU drift.
Mat2 quadratic_step_matrix(double h, double m) {
    const double e = std::exp(-h);  // e^{-2 (h/2)}
    const Mat2 F{1.0, 0.5 * (1.0 - e), 0.0, e};
    const Mat2 kick{1.0, 0.0, -h * m, 1.0};
    return mul(F, mul(kick, F));
}

}  // namespace

TEST_SUITE("variation") {

TEST_CASE("first and second variations match common-noise finite differences") {
    for (const std::string id : {"bench1d", "bench2d", "bench2d-fs:6"}) {
        CAPTURE(id);
        const Benchmark b = make_benchmark(id, 3);
        const std::size_t d = b.model->dim();
        Gen gen("variation-fd/" + id);
        const auto x0 = gen.point(d, 0.7), v0 = gen.point(d, 0.7);
        const StreamKey key{5, 77, 1, StreamPurpose::kDynamics};
        const double h = 0.1, eps = 1e-5;
        const std::uint64_t K = 25;
        const VariationState var = propagate(b, x0, v0, h, K, key);
        for (std::size_t n = 0; n < d; ++n) {
            auto vp = v0, vm = v0;
            vp[n] += eps;
            vm[n] -= eps;
            const auto xp = endpoint(b, x0, vp, h, K, key), xm = endpoint(b, x0, vm, h, K, key);
            for (std::size_t i = 0; i < d; ++i)
                CHECK(testing::rel_err(var.Q[i * d + n], (xp[i] - xm[i]) / (2 * eps), 1e-4) < 1e-6);
            const auto qp = propagate(b, x0, vp, h, K, key), qm = propagate(b, x0, vm, h, K, key);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t m = 0; m < d; ++m) {
                    const double fd = (qp.Q[i * d + m] - qm.Q[i * d + m]) / (2 * eps);
                    CHECK(testing::rel_err(var.Q2[(i * d + m) * d + n], fd, 1e-4) < 1e-5);
                }
        }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t m = 0; m < d; ++m)
                for (std::size_t n = 0; n < d; ++n)
                    CHECK(var.Q2[(i * d + m) * d + n] == doctest::Approx(var.Q2[(i * d + n) * d + m]).epsilon(1e-12));
    }
}

TEST_CASE("quadratic: variations follow powers of the mean step map") {
    const double h = 0.2, m = 0.5;
    const Benchmark b = make_quadratic(2, m);
    const StreamKey key{1, 2, 3, StreamPurpose::kDynamics};
    Mat2 A{1, 0, 0, 1};
    const Mat2 step = quadratic_step_matrix(h, m);
    for (std::uint64_t K = 0; K <= 30; ++K) {
        const VariationState var = propagate(b, {0.3, -1.0}, {0.5, 0.2}, h, K, key);
        CHECK(var.Q[0] == doctest::Approx(A[1]).epsilon(1e-12));
        CHECK(var.P[0] == doctest::Approx(A[3]).epsilon(1e-12));
        CHECK(var.Q[3] == doctest::Approx(A[1]).epsilon(1e-12));
        CHECK(std::abs(var.Q[1]) < 1e-15);
        for (double q2 : var.Q2) CHECK(q2 == 0.0);
        A = mul(step, A);
    }
}

TEST_CASE("quadratic: coefficient equals sigma^2 h sum 2 Q_k^2") {
    const double h = 1.0 / 16.0, m = 1.0, sigma = 1.5;
    const std::uint64_t K = 800;
    Benchmark b = make_quadratic(1, m);
    double expect = 0.0;
    Mat2 A{1, 0, 0, 1};
    for (std::uint64_t k = 0; k < K; ++k) {
        expect += h * 2.0 * A[1] * A[1];
        A = mul(quadratic_step_matrix(h, m), A);
    }
    CoefficientSettings s;
    s.sigma = sigma;
    s.h = h;
    s.K = K;
    s.replicas = 8;
    s.chains = 2;
    s.burnin_T = 1.0;
    const auto res = leading_coefficient(b, s);
    CHECK(res.C0 == doctest::Approx(sigma * sigma * expect).epsilon(1e-12));
    CHECK(res.stderr_ < 1e-12);
    CHECK(res.slope == doctest::Approx(res.C0 / 2.0));
    CHECK(res.K == K);

    s.sigma = 0.0;
    CHECK(leading_coefficient(b, s).C0 == 0.0);
}

TEST_CASE("truncation stops once increments are small") {
    const Benchmark b = make_benchmark("bench1d", 1);
    Stream dyn(StreamKey{1, 9, 0, StreamPurpose::kDynamics});
    const std::vector<double> x0{0.2}, v0{0.1};
    const auto ph = hessian_phi0_vv(*b.model, *b.f, 1.0 / 32.0, 1.0, 0, x0, v0, dyn);
    CHECK(ph.steps > 50);
    CHECK(ph.steps < truncation_cap(*b.model, 1.0 / 32.0, 1.0));
    Stream dyn2(StreamKey{1, 9, 0, StreamPurpose::kDynamics});
    const auto fixed = hessian_phi0_vv(*b.model, *b.f, 1.0 / 32.0, 1.0, ph.steps, x0, v0, dyn2);
    CHECK(fixed.H[0] == ph.H[0]);
}

TEST_CASE("vector-valued test functions and mismatched noise are rejected") {
    const Benchmark b10 = make_benchmark("bench10d-fs:7", 1);
    CoefficientSettings s;
    try {
        leading_coefficient(b10, s);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kInvalidArgument);
    }
    s.noise = NoiseKind::kFiniteSum;
    CHECK_THROWS_AS(leading_coefficient(make_benchmark("bench1d", 1), s), Error);
}

TEST_CASE("twisted form square root") {
    for (std::size_t d : {1u, 3u}) {
        const TwistedForm tf(d);
        const auto S = tf.matrix(), R = tf.sqrt_matrix();
        const std::size_t n = 2 * d;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double v = 0.0;
                for (std::size_t k = 0; k < n; ++k) v += R[i * n + k] * R[k * n + j];
                CHECK(v == doctest::Approx(S[i * n + j]).epsilon(1e-14).scale(1.0));
                CHECK(R[i * n + j] == R[j * n + i]);
            }
    }
    // (Q, P) = (0, I): W^T S W = I.
    const TwistedForm tf(2);
    CHECK(tf.max_eig({0, 0, 0, 0}, {1, 0, 0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("contractivity holds on the strongly convex quadratic") {
    const Benchmark b = make_quadratic(2, 1.0);
    Stream dyn(StreamKey{1, 4, 0, StreamPurpose::kDynamics});
    const auto rep = contractivity_diagnostic(*b.model, 0.1, 1.0, 500, State{{0.0, 0.0}, {0.0, 0.0}}, dyn);
    CHECK(rep.applicable);
    CHECK(rep.steps == 500);
    CHECK(rep.form_violations == 0);
    CHECK(rep.norm_violations == 0);
    CHECK(rep.worst_form_margin <= 1e-12);
}

}  // TEST_SUITE
