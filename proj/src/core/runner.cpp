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

#include "ubu/runner.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "ubu/error.hpp"
#include "ubu/stats.hpp"

namespace ubu {

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

ReplicaResult run_replica(const ReplicaSpec& spec, std::uint32_t replica) {
    require(spec.model && spec.f, "replica spec needs a model and a test function");
    require(spec.f->dim() == spec.model->dim(), "test function and model dimensions differ");
    Stream dyn(StreamKey{spec.seed, spec.experiment, replica, StreamPurpose::kDynamics});
    Stream grad(StreamKey{spec.seed, spec.experiment, replica, StreamPurpose::kGradient});
    Stream init(StreamKey{spec.seed, spec.experiment, replica, StreamPurpose::kInitial});
    Integrator integ(spec.model, spec.step, make_estimator(spec.estimator, spec.model));
    State s = default_initial(spec.model->dim(), spec.step.M2, init);
    const TestFunction& f = *spec.f;
    TimeAverageAccumulator acc(f.out_dim());
    std::vector<double> fx(f.out_dim());
    ReplicaResult r;
    try {
        for (std::uint64_t k = 0; k < spec.burnin; ++k) integ.step(s, dyn, grad);
        for (std::uint64_t k = 0; k < spec.K; ++k) {
            f.value(s.x, fx);
            acc.add(fx);
            integ.step(s, dyn, grad);
        }
        r.mean = acc.mean();
    } catch (const DivergenceError& e) {
        r.diverged = true;
        r.diverged_step = e.step();
        r.mean.assign(f.out_dim(), std::numeric_limits<double>::quiet_NaN());
    }
    r.work = integ.work();
    return r;
}

std::vector<ReplicaResult> run_replicas(const ReplicaSpec& spec, std::uint32_t first, std::uint32_t count,
                                        unsigned workers) {
    std::vector<ReplicaResult> out(count);
    parallel_for(count, workers, [&](std::size_t i) { out[i] = run_replica(spec, first + static_cast<std::uint32_t>(i)); });
    return out;
}

}  // namespace ubu
