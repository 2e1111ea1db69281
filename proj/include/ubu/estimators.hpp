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

// Unbiased gradient oracles b(x) with E b(x) = grad U(x).
//
// Cost is metered in work units: one unit is one component gradient
// evaluation grad U_i, so a full gradient of a finite-sum model costs N.
// Component indices are 0-based.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ubu/potential.hpp"
#include "ubu/rng.hpp"

namespace ubu {

struct WorkMeter {
    std::uint64_t units = 0;
};

// Uniform p-subsets of {0, ..., n-1} by partial Fisher-Yates over a
// permutation that persists between draws.
class SubsetSampler {
public:
    SubsetSampler(std::size_t n, std::size_t p);

    std::size_t n() const { return perm_.size(); }
    std::size_t p() const { return p_; }

    // The returned view is valid until the next call.
    std::span<const std::uint32_t> sample(Stream& s);

private:
    std::size_t p_;
    std::vector<std::uint32_t> perm_;
};

// (1/p) sum_{i in subset} grad U_i(x)
void minibatch_grad(const PotentialModel& u, ConstVec x, std::span<const std::uint32_t> subset, MutVec out,
                    WorkMeter* meter = nullptr);

// grad U(x) + sigma * xi
void gaussian_noise_grad(const PotentialModel& u, ConstVec x, double sigma, Stream& s, MutVec out,
                         WorkMeter* meter = nullptr);

struct SvrgState {
    std::vector<double> anchor;
    std::vector<double> anchor_grad;        // grad U(anchor)
    std::vector<double> anchor_components;  // grad U_i(anchor), row i
    std::size_t steps_since_refresh = 0;
    std::size_t epoch_length = 1;
    bool initialized = false;
};

// Sets the anchor; costs N units. Component gradients at the anchor are
// cached so inner steps cost p units.
void svrg_refresh(const PotentialModel& u, SvrgState& state, ConstVec new_anchor, WorkMeter* meter = nullptr);

// (1/p) sum_{i in subset} [grad U_i(x) - grad U_i(anchor)] + grad U(anchor)
void svrg_grad(const PotentialModel& u, ConstVec x, const SvrgState& state, std::span<const std::uint32_t> subset,
               MutVec out, WorkMeter* meter = nullptr);

struct SagaState {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> table;        // grad U_i(phi_i), row i
    std::vector<double> running_sum;  // sum_i table row i
    bool initialized = false;

    // Direct summation of the table, for bookkeeping checks.
    std::vector<double> table_sum() const;
};

SagaState saga_init(const PotentialModel& u, ConstVec y0, WorkMeter* meter = nullptr);

// Returns the estimate in `out`, then overwrites the table rows of the subset
// with the fresh component gradients and updates running_sum.
void saga_grad_and_update(const PotentialModel& u, ConstVec x, SagaState& state,
                          std::span<const std::uint32_t> subset, MutVec out, WorkMeter* meter = nullptr);

enum class EstimatorKind { kFull, kGaussian, kMinibatch, kSvrg, kSaga };

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::kFull;
    std::size_t batch = 1;   // p
    std::size_t epoch = 0;   // SVRG q; 0 means N/p
    double sigma = 0.0;      // additive noise scale

    // full, sg, minibatch:p, svrg:p[:q], saga. `sg` resolves to additive noise
    // with scale `noise_sigma` on non-finite-sum models and to minibatch:1 otherwise.
    static EstimatorSpec parse(const std::string& id, const PotentialModel& u, double noise_sigma);
    std::string id() const;
};

// Per-trajectory estimator state machine. Not thread-safe; one per replica.
class GradientEstimator {
public:
    virtual ~GradientEstimator() = default;

    // Forget all per-trajectory state.
    virtual void reset() = 0;
    // b(y) for the next step; draws subsets / noise from `s`.
    virtual void evaluate(ConstVec y, Stream& s, MutVec out, WorkMeter& meter) = 0;
    // True when the last evaluation used the exact full gradient.
    virtual bool last_was_full() const { return false; }
};

std::unique_ptr<GradientEstimator> make_estimator(const EstimatorSpec& spec,
                                                  std::shared_ptr<const PotentialModel> u);

}  // namespace ubu
