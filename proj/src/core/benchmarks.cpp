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

#include "ubu/benchmarks.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "ubu/error.hpp"
#include "ubu/rng.hpp"

namespace ubu {

namespace {

std::vector<std::vector<double>> grid_1d(double lo, double hi, std::size_t n) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(1));
    for (std::size_t i = 0; i < n; ++i)
        pts[i][0] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return pts;
}

std::vector<std::vector<double>> grid_2d(double lo, double hi, std::size_t n) {
    std::vector<std::vector<double>> pts;
    pts.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            pts.push_back({lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1),
                           lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1)});
    return pts;
}

RidgePotential::ConstantsFn grid_constants_1d(double sigma) {
    return [sigma](const RidgePotential& u) {
        return probe_constants(u, grid_1d(-12.0, 12.0, 2401), sigma, "grid of 2401 points on [-12, 12]");
    };
}

RidgePotential::ConstantsFn grid_constants_2d(double sigma) {
    return [sigma](const RidgePotential& u) {
        return probe_constants(u, grid_2d(-6.0, 6.0, 121), sigma, "121 x 121 grid on [-6, 6]^2");
    };
}

// Uniform coefficients on [-a, a], row-major by component, then centred per column.
std::vector<std::array<double, 4>> centred_coefficients(std::size_t n, std::uint64_t seed,
                                                        const char* family, double a) {
    require(n >= 1, "finite-sum models need N >= 1");
    Stream s(StreamKey{seed, fnv1a32(family), 0, StreamPurpose::kModel});
    std::vector<std::array<double, 4>> c(n);
    for (auto& row : c)
        for (double& v : row) v = -a + 2.0 * a * s.uniform();
    for (std::size_t col = 0; col < 4; ++col) {
        double mean = 0.0;
        for (const auto& row : c) mean += row[col];
        mean /= static_cast<double>(n);
        for (auto& row : c) row[col] -= mean;
    }
    return c;
}

RidgeSet bench1d_potential_terms() {
    RidgeSet t(1);
    t.add(0.15, {1.6}, -0.5, Profile::kSin);
    t.add(0.1, {2.4}, 0.4, Profile::kSin);
    return t;
}

std::shared_ptr<const TestFunction> bench1d_test_function() {
    RidgeSet t(1);
    t.add(1.0, {1.0}, 0.0, Profile::kCos);
    t.add(0.5, {2.5}, 0.0, Profile::kSin);
    t.add(0.2, {0.5}, 0.4, Profile::kSin);
    return std::make_shared<RidgeTestFunction>("bench1d-f", std::vector<double>{}, std::move(t));
}

RidgeSet bench2d_potential_terms() {
    // sin(a) cos(b) / 2 = (sin(a + b) + sin(a - b)) / 4
    RidgeSet t(2);
    t.add(0.25, {1.1, -0.4}, 0.0, Profile::kSin);
    t.add(0.25, {0.3, -1.6}, 0.0, Profile::kSin);
    return t;
}

// f(x) = cos(1.4 x1 - 1.1 sin(1.2 x2))
class Bench2dTestFunction final : public TestFunction {
public:
    std::string id() const override { return "bench2d-f"; }
    std::size_t dim() const override { return 2; }

    void value(ConstVec x, MutVec out) const override { out[0] = std::cos(phase(x)); }

    void jacobian(ConstVec x, MutVec J) const override {
        const double s = std::sin(phase(x));
        J[0] = -s * 1.4;
        J[1] = -s * (-1.32 * std::cos(1.2 * x[1]));
    }

    void hessian(ConstVec x, std::size_t c, MutVec H) const override {
        require(c == 0, "scalar test function has a single output");
        const double a = phase(x);
        const double ca = std::cos(a), sa = std::sin(a);
        const double g0 = 1.4, g1 = -1.32 * std::cos(1.2 * x[1]);
        const double a11 = 1.584 * std::sin(1.2 * x[1]);
        H[0] = -ca * g0 * g0;
        H[1] = H[2] = -ca * g0 * g1;
        H[3] = -ca * g1 * g1 - sa * a11;
    }

private:
    static double phase(ConstVec x) { return 1.4 * x[0] - 1.1 * std::sin(1.2 * x[1]); }
};

// f_{3j+r}(x) = exp(-|x|^2/(8d) - (x_j + 2r)^2 / 4), r = 0, 1, 2.
class BumpTestFunction final : public TestFunction {
public:
    explicit BumpTestFunction(std::size_t d) : d_(d) {}

    std::string id() const override { return "bumps"; }
    std::size_t dim() const override { return d_; }
    std::size_t out_dim() const override { return 3 * d_; }

    void value(ConstVec x, MutVec out) const override {
        const double base = -sq(x) / (8.0 * static_cast<double>(d_));
        const double eb = std::exp(base);
        for (std::size_t j = 0; j < d_; ++j) {
            const double xj = x[j];
            // exp(-(x + 2r)^2 / 4) = exp(-x^2 / 4) * exp(-x)^r * exp(-r^2), unless e0 is
            // close enough to underflow to have lost digits
            const double e0 = std::abs(xj) < 50.0 ? eb * std::exp(-0.25 * xj * xj) : 0.0;
            if (e0 > 1e-280) {
                const double t = std::exp(-xj);
                out[3 * j] = e0;
                out[3 * j + 1] = e0 * t * 0.36787944117144233;
                out[3 * j + 2] = e0 * t * t * 0.018315638888734179;
            } else {
                for (std::size_t r = 0; r < 3; ++r) {
                    const double y = xj + 2.0 * static_cast<double>(r);
                    out[3 * j + r] = std::exp(base - 0.25 * y * y);
                }
            }
        }
    }

    void jacobian(ConstVec x, MutVec J) const override {
        const double base = -sq(x) / (8.0 * static_cast<double>(d_));
        const double inv4d = 1.0 / (4.0 * static_cast<double>(d_));
        for (std::size_t j = 0; j < d_; ++j)
            for (std::size_t r = 0; r < 3; ++r) {
                const double y = x[j] + 2.0 * static_cast<double>(r);
                const double f = std::exp(base - 0.25 * y * y);
                double* row = J.data() + (3 * j + r) * d_;
                for (std::size_t k = 0; k < d_; ++k) row[k] = -f * x[k] * inv4d;
                row[j] -= f * 0.5 * y;
            }
    }

    void hessian(ConstVec x, std::size_t c, MutVec H) const override {
        require(c < 3 * d_, "test function output index out of range");
        const std::size_t j = c / 3;
        const double y = x[j] + 2.0 * static_cast<double>(c % 3);
        const double inv4d = 1.0 / (4.0 * static_cast<double>(d_));
        const double f = std::exp(-sq(x) / (8.0 * static_cast<double>(d_)) - 0.25 * y * y);
        std::vector<double> e(d_);
        for (std::size_t k = 0; k < d_; ++k) e[k] = -x[k] * inv4d;
        e[j] -= 0.5 * y;
        for (std::size_t a = 0; a < d_; ++a)
            for (std::size_t b = 0; b < d_; ++b) H[a * d_ + b] = f * e[a] * e[b];
        for (std::size_t a = 0; a < d_; ++a) H[a * d_ + a] -= f * inv4d;
        H[j * d_ + j] -= f * 0.5;
    }

private:
    static double sq(ConstVec x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    }
    std::size_t d_;
};

std::size_t parse_count(const std::string& text, const std::string& id) {
    std::size_t n = 0;
    const auto* end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, n);
    if (r.ec != std::errc() || r.ptr != end || n == 0) fail(ErrorCode::kConfig, "bad component count in model id '" + id + "'");
    return n;
}

}  // namespace

Benchmark make_1d_benchmark() {
    auto u = std::make_shared<RidgePotential>("bench1d", std::vector<double>{1.0}, bench1d_potential_terms(),
                                              std::vector<RidgePotential::Component>{}, false,
                                              grid_constants_1d(3.0));
    return {u, bench1d_test_function(), 3.0};
}

Benchmark make_1d_finite_sum(std::size_t n, std::uint64_t seed) {
    const auto coef = centred_coefficients(n, seed, "bench1d-fs", 6.0);
    std::vector<RidgePotential::Component> comps(n);
    for (std::size_t i = 0; i < n; ++i) {
        RidgeSet t(1);
        t.add(coef[i][0], {1.0}, 0.0, Profile::kSin);
        t.add(coef[i][1], {1.2}, 0.0, Profile::kCos);
        t.add(coef[i][2], {2.0}, 0.0, Profile::kSin);
        t.add(coef[i][3], {2.5}, 0.0, Profile::kCos);
        comps[i].terms = std::move(t);
    }
    auto u = std::make_shared<RidgePotential>("bench1d-fs:" + std::to_string(n), std::vector<double>{1.0},
                                              bench1d_potential_terms(), std::move(comps), true,
                                              grid_constants_1d(0.0));
    return {u, bench1d_test_function(), 0.0};
}

Benchmark make_2d_benchmark() {
    auto u = std::make_shared<RidgePotential>("bench2d", std::vector<double>{1.4, 0.8}, bench2d_potential_terms(),
                                              std::vector<RidgePotential::Component>{}, false,
                                              grid_constants_2d(3.0));
    return {u, std::make_shared<Bench2dTestFunction>(), 3.0};
}

Benchmark make_2d_finite_sum(std::size_t n, std::uint64_t seed) {
    const auto coef = centred_coefficients(n, seed, "bench2d-fs", 8.0);
    const double k = std::sqrt(2.0 / 3.0);
    std::vector<RidgePotential::Component> comps(n);
    for (std::size_t i = 0; i < n; ++i) {
        RidgeSet t(2);
        t.add(coef[i][0], {1.0, 2.0}, 0.0, Profile::kSin);
        t.add(coef[i][1], {1.2, -0.7}, 0.0, Profile::kCos);
        t.add(coef[i][2], {1.0, 0.0}, 0.0, Profile::kGauss);
        t.add(coef[i][3], {0.0, k}, 0.0, Profile::kGauss);
        comps[i].terms = std::move(t);
    }
    auto u = std::make_shared<RidgePotential>("bench2d-fs:" + std::to_string(n), std::vector<double>{1.4, 0.8},
                                              bench2d_potential_terms(), std::move(comps), true,
                                              grid_constants_2d(0.0));
    return {u, std::make_shared<Bench2dTestFunction>(), 0.0};
}

Benchmark make_10d_finite_sum(std::size_t n, std::uint64_t seed) {
    require(n >= 1, "finite-sum models need N >= 1");
    constexpr std::size_t d = 10;
    Stream s(StreamKey{seed, fnv1a32("bench10d-fs"), 0, StreamPurpose::kModel});
    std::vector<RidgePotential::Component> comps(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> xi(d);
        s.fill_normal(xi);
        const double eta = s.normal();
        double norm = 0.0;
        for (std::size_t j = 0; j < d; ++j) norm += std::sqrt(static_cast<double>(j + 1)) * xi[j] * xi[j];
        norm = std::sqrt(norm);
        std::vector<double> w(d);
        for (std::size_t j = 0; j < d; ++j) w[j] = std::pow(static_cast<double>(j + 1), 0.25) * xi[j] / norm;
        const double b = (std::cos(static_cast<double>(i + 1)) + eta) / 10.0;
        RidgeSet t(d);
        t.add(1.0, std::move(w), b, Profile::kWell);
        comps[i].terms = std::move(t);
    }
    auto constants = [](const RidgePotential& u) {
        Stream ps(StreamKey{0x10dULL, fnv1a32("bench10d-fs/probe"), 0, StreamPurpose::kModel});
        std::vector<std::vector<double>> pts(2048, std::vector<double>(d));
        for (auto& p : pts)
            for (double& v : p) v = -5.0 + 10.0 * ps.uniform();
        return probe_constants(u, pts, 0.0, "2048 uniform points in [-5, 5]^10");
    };
    auto u = std::make_shared<RidgePotential>("bench10d-fs:" + std::to_string(n), std::vector<double>(d, 1.0 / 3.0),
                                              RidgeSet(d), std::move(comps), false, constants);
    return {u, make_bump_test_function(d), 0.0};
}

Benchmark make_quadratic(std::size_t d, double m) {
    require(d >= 1 && m > 0.0, "quadratic model needs d >= 1 and m > 0");
    auto constants = [m](const RidgePotential&) {
        ModelConstants c;
        c.m = c.M2 = c.min_hessian_eig = m;
        c.M1 = m;
        c.convex = true;
        c.probe = "exact";
        return c;
    };
    std::string id = "quadratic:" + std::to_string(d) + ":";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, m);
    id.append(buf, r.ptr);
    auto u = std::make_shared<RidgePotential>(id, std::vector<double>(d, m), RidgeSet(d),
                                              std::vector<RidgePotential::Component>{}, false, constants);
    std::vector<double> diag(d, 0.0);
    diag[0] = 2.0;
    auto f = std::make_shared<RidgeTestFunction>("x1^2", std::move(diag), RidgeSet(d));
    return {u, f, 0.0};
}

std::shared_ptr<const TestFunction> make_bump_test_function(std::size_t d) {
    return std::make_shared<BumpTestFunction>(d);
}

Benchmark make_benchmark(const std::string& id, std::uint64_t seed) {
    const auto colon = id.find(':');
    const std::string family = id.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : id.substr(colon + 1);
    if (family == "bench1d" && rest.empty()) return make_1d_benchmark();
    if (family == "bench2d" && rest.empty()) return make_2d_benchmark();
    if (family == "bench1d-fs") return make_1d_finite_sum(parse_count(rest, id), seed);
    if (family == "bench2d-fs") return make_2d_finite_sum(parse_count(rest, id), seed);
    if (family == "bench10d-fs") return make_10d_finite_sum(parse_count(rest, id), seed);
    if (family == "quadratic") {
        std::size_t d = 1;
        double m = 1.0;
        if (!rest.empty()) {
            const auto c2 = rest.find(':');
            d = parse_count(rest.substr(0, c2), id);
            if (c2 != std::string::npos) {
                const std::string ms = rest.substr(c2 + 1);
                const auto r = std::from_chars(ms.data(), ms.data() + ms.size(), m);
                if (r.ec != std::errc() || r.ptr != ms.data() + ms.size() || !(m > 0.0))
                    fail(ErrorCode::kConfig, "bad curvature in model id '" + id + "'");
            }
        }
        return make_quadratic(d, m);
    }
    fail(ErrorCode::kConfig, "unknown model id '" + id + "'");
}

}  // namespace ubu
