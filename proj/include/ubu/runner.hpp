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

// Replica execution: stream derivation per replica and a deterministic
// worker pool. Results are indexed by task, so the worker count never
// changes any value.

#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ubu/benchmarks.hpp"
#include "ubu/estimators.hpp"
#include "ubu/integrator.hpp"
#include "ubu/rng.hpp"

namespace ubu {

// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
// concurrency). The first exception by task index is rethrown after all
// tasks finish.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

struct ReplicaSpec {
    std::shared_ptr<const PotentialModel> model;
    std::shared_ptr<const TestFunction> f;
    EstimatorSpec estimator;
    StepConfig step;
    std::uint64_t K = 1;
    std::uint64_t burnin = 0;  // steps discarded before averaging
    std::uint64_t seed = 0;
    std::uint32_t experiment = 0;
};

struct ReplicaResult {
    std::vector<double> mean;  // (1/K) sum_{k<K} f(X_k)
    std::uint64_t work = 0;
    bool diverged = false;
    std::uint64_t diverged_step = 0;
};

// Streams: dynamics / gradient / initial purposes under
// (seed, experiment, replica). The estimator and dynamics streams are
// separate, so runs with different estimators share Brownian paths.
ReplicaResult run_replica(const ReplicaSpec& spec, std::uint32_t replica);

std::vector<ReplicaResult> run_replicas(const ReplicaSpec& spec, std::uint32_t first, std::uint32_t count,
                                        unsigned workers);

}  // namespace ubu
