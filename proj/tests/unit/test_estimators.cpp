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

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "ubu/benchmarks.hpp"
#include "ubu/error.hpp"
#include "ubu/estimators.hpp"
#include "ubu/integrator.hpp"

using namespace ubu;
using testing::Gen;

namespace {

// All p-subsets of {0..n-1}.
std::vector<std::vector<std::uint32_t>> all_subsets(std::size_t n, std::size_t p) {
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur;
    std::function<void(std::uint32_t)> rec = [&](std::uint32_t start) {
        if (cur.size() == p) {
            out.push_back(cur);
            return;
        }
        for (std::uint32_t i = start; i < n; ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("subset averages of mini-batch, SVRG and SAGA estimates equal the gradient") {
    for (const auto& id : {"bench1d-fs:6", "bench2d-fs:5", "bench10d-fs:4"}) {
        CAPTURE(id);
        const Benchmark b = make_benchmark(id, 5);
        const auto& u = *b.model;
        const std::size_t d = u.dim(), n = u.n_components();
        Gen gen(std::string("unbiased/") + id);
        for (std::size_t p = 1; p <= n; ++p) {
            const auto subsets = all_subsets(n, p);
            const auto x = gen.point(d);
            std::vector<double> g(d), est(d), avg(d);
            u.gradient(x, g);

            std::fill(avg.begin(), avg.end(), 0.0);
            for (const auto& s : subsets) {
                minibatch_grad(u, x, s, est);
                for (std::size_t k = 0; k < d; ++k) avg[k] += est[k] / subsets.size();
            }
            CHECK(max_abs_diff(avg, g) < 1e-12);

            SvrgState sv;
            svrg_refresh(u, sv, gen.point(d));
            std::fill(avg.begin(), avg.end(), 0.0);
            for (const auto& s : subsets) {
                svrg_grad(u, x, sv, s, est);
                for (std::size_t k = 0; k < d; ++k) avg[k] += est[k] / subsets.size();
            }
            CHECK(max_abs_diff(avg, g) < 1e-12);

            // SAGA with a table filled at mixed points.
            SagaState sa = saga_init(u, gen.point(d));
            for (int warm = 0; warm < 3; ++warm) {
                std::vector<std::uint32_t> one{static_cast<std::uint32_t>(gen.index(n))};
                saga_grad_and_update(u, gen.point(d), sa, one, est);
            }
            std::fill(avg.begin(), avg.end(), 0.0);
            for (const auto& s : subsets) {
                SagaState copy = sa;
                saga_grad_and_update(u, x, copy, s, est);
                for (std::size_t k = 0; k < d; ++k) avg[k] += est[k] / subsets.size();
            }
            CHECK(max_abs_diff(avg, g) < 1e-12);
        }
    }
}

TEST_CASE("Gaussian-noise estimator: zero noise is exact, otherwise mean and variance match") {
    const Benchmark b = make_1d_benchmark();
    const std::vector<double> x{0.7};
    std::vector<double> g(1), est(1);
    b.model->gradient(x, g);
    Stream s({1, 1, 1, StreamPurpose::kGradient});
    gaussian_noise_grad(*b.model, x, 0.0, s, est);
    CHECK(est[0] == g[0]);
    const int n = 200000;
    double m1 = 0, m2 = 0;
    for (int i = 0; i < n; ++i) {
        gaussian_noise_grad(*b.model, x, 3.0, s, est);
        const double e = est[0] - g[0];
        m1 += e;
        m2 += e * e;
    }
    CHECK(std::abs(m1 / n) < 5.0 * 3.0 / std::sqrt(n));
    CHECK(std::abs(m2 / n - 9.0) < 5.0 * 9.0 * std::sqrt(2.0 / n));
}

TEST_CASE("subset sampler draws every p-subset uniformly (chi-square)") {
    const std::size_t n = 6, p = 2;
    SubsetSampler sampler(n, p);
    Stream s({9, 9, 9, StreamPurpose::kGradient});
    std::map<std::vector<std::uint32_t>, int> counts;
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) {
        auto v = sampler.sample(s);
        std::vector<std::uint32_t> sub(v.begin(), v.end());
        REQUIRE(std::set<std::uint32_t>(sub.begin(), sub.end()).size() == p);
        for (auto k : sub) REQUIRE(k < n);
        std::sort(sub.begin(), sub.end());
        ++counts[sub];
    }
    CHECK(counts.size() == 15);
    const double e = static_cast<double>(draws) / 15.0;
    double chi2 = 0.0;
    for (const auto& [k, c] : counts) chi2 += (c - e) * (c - e) / e;
    CHECK(chi2 < 36.1);  // 99.9% quantile, 14 dof
}

TEST_CASE("property: subsets are distinct indices for random (n, p)") {
    Gen gen("subset-property");
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + gen.index(40);
        const std::size_t p = 1 + gen.index(n);
        SubsetSampler sampler(n, p);
        for (int k = 0; k < 5; ++k) {
            auto v = sampler.sample(gen.stream());
            REQUIRE(v.size() == p);
            std::set<std::uint32_t> uniq(v.begin(), v.end());
            REQUIRE(uniq.size() == p);
            REQUIRE(*uniq.rbegin() < n);
        }
    }
}

TEST_CASE("work units follow the per-algorithm formulas exactly") {
    const Benchmark b = make_benchmark("bench1d-fs:10", 1);
    const std::uint64_t N = 10;
    struct Case {
        std::string id;
        std::function<std::uint64_t(std::uint64_t)> formula;
    };
    const std::vector<Case> cases = {
        {"full", [&](std::uint64_t K) { return N * K; }},
        {"sg", [&](std::uint64_t K) { return K; }},
        {"minibatch:3", [&](std::uint64_t K) { return 3 * K; }},
        {"svrg:2", [&](std::uint64_t K) {  // q = N / p = 5
             const std::uint64_t refresh = (K + 4) / 5;
             return N * refresh + 2 * (K - refresh);
         }},
        {"svrg:3", [&](std::uint64_t K) {  // q = floor(10 / 3) = 3
             const std::uint64_t refresh = (K + 2) / 3;
             return N * refresh + 3 * (K - refresh);
         }},
        {"svrg:2:7", [&](std::uint64_t K) {
             const std::uint64_t refresh = (K + 6) / 7;
             return N * refresh + 2 * (K - refresh);
         }},
        {"saga", [&](std::uint64_t K) { return N + (K - 1); }},
        {"saga:4", [&](std::uint64_t K) { return N + 4 * (K - 1); }},
    };
    for (const auto& c : cases) {
        for (std::uint64_t K : {1ULL, 2ULL, 7ULL, 100ULL, 1001ULL}) {
            CAPTURE(c.id);
            CAPTURE(K);
            const auto spec = EstimatorSpec::parse(c.id, *b.model, 0.0);
            Integrator integ(b.model, {0.1, 1.0}, make_estimator(spec, b.model));
            Stream dyn({1, 2, 3, StreamPurpose::kDynamics}), grad({1, 2, 3, StreamPurpose::kGradient}),
                init({1, 2, 3, StreamPurpose::kInitial});
            State s = default_initial(1, 1.0, init);
            for (std::uint64_t k = 0; k < K; ++k) integ.step(s, dyn, grad);
            CHECK(integ.work() == c.formula(K));
        }
    }
}

TEST_CASE("SVRG with epoch length 1 reproduces the full-gradient trajectory exactly") {
    for (const auto& id : {"bench1d-fs:8", "bench10d-fs:5"}) {
        CAPTURE(id);
        const Benchmark b = make_benchmark(id, 2);
        const std::size_t d = b.model->dim();
        auto run = [&](const std::string& est) {
            Integrator integ(b.model, {0.2, 1.0}, make_estimator(EstimatorSpec::parse(est, *b.model, 0.0), b.model));
            Stream dyn({4, 5, 6, StreamPurpose::kDynamics}), grad({4, 5, 6, StreamPurpose::kGradient}),
                init({4, 5, 6, StreamPurpose::kInitial});
            State s = default_initial(d, 1.0, init);
            for (int k = 0; k < 500; ++k) integ.step(s, dyn, grad);
            return s;
        };
        const State a = run("full"), c = run("svrg:1:1");
        CHECK(a.x == c.x);
        CHECK(a.v == c.v);
    }
}

TEST_CASE("mini-batch with p = N agrees with the full gradient") {
    const Benchmark b = make_benchmark("bench2d-fs:6", 3);
    Gen gen("p-equals-n");
    SubsetSampler sampler(6, 6);
    Stream s({1, 1, 1, StreamPurpose::kGradient});
    for (int t = 0; t < 10; ++t) {
        const auto x = gen.point(2);
        std::vector<double> g(2), est(2);
        b.model->gradient(x, g);
        minibatch_grad(*b.model, x, sampler.sample(s), est);
        CHECK(max_abs_diff(g, est) < 1e-12);
    }
}

TEST_CASE("SAGA running sum tracks the table") {
    const Benchmark b = make_benchmark("bench10d-fs:20", 1);
    const auto& u = *b.model;
    Gen gen("saga-table");
    SagaState st = saga_init(u, gen.point(10));
    SubsetSampler sampler(20, 3);
    std::vector<double> est(10);
    WorkMeter meter;
    for (int k = 0; k < 2000; ++k) saga_grad_and_update(u, gen.point(10), st, sampler.sample(gen.stream()), est, &meter);
    CHECK(meter.units == 3u * 2000u);
    const auto direct = st.table_sum();
    CHECK(max_abs_diff(direct, st.running_sum) < 1e-10);
}

TEST_CASE("estimator ids parse, print and reject bad input") {
    const Benchmark fs = make_benchmark("bench1d-fs:10", 1);
    const Benchmark g = make_1d_benchmark();
    CHECK(EstimatorSpec::parse("sg", *fs.model, 3.0).kind == EstimatorKind::kMinibatch);
    CHECK(EstimatorSpec::parse("sg", *g.model, 3.0).kind == EstimatorKind::kGaussian);
    CHECK(EstimatorSpec::parse("sg", *g.model, 3.0).sigma == 3.0);
    const auto sv = EstimatorSpec::parse("svrg:4", *fs.model, 0.0);
    CHECK(sv.batch == 4);
    CHECK(sv.epoch == 2);
    for (const auto& id : {"full", "minibatch:3", "svrg:2:5", "saga"}) {
        CAPTURE(id);
        const auto spec = EstimatorSpec::parse(id, *fs.model, 0.0);
        const auto again = EstimatorSpec::parse(spec.id(), *fs.model, 0.0);
        CHECK(again.kind == spec.kind);
        CHECK(again.batch == spec.batch);
    }
    for (const auto& id : {"sgd", "minibatch", "minibatch:0", "minibatch:11", "svrg", "saga:1:2", "full:1"}) {
        CAPTURE(id);
        CHECK_THROWS_AS(EstimatorSpec::parse(id, *fs.model, 0.0), Error);
    }
    CHECK_THROWS_AS(EstimatorSpec::parse("svrg:1", *g.model, 0.0), Error);
}

}  // TEST_SUITE
