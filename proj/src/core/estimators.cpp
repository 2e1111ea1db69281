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

#include "ubu/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "ubu/error.hpp"

namespace ubu {

namespace {

inline void charge(WorkMeter* meter, std::uint64_t units) {
    if (meter) meter->units += units;
}

std::size_t parse_size(const std::string& text, const std::string& id) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    const auto r = std::from_chars(text.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end || v == 0) fail(ErrorCode::kConfig, "bad integer in estimator id '" + id + "'");
    return v;
}

}  // namespace

SubsetSampler::SubsetSampler(std::size_t n, std::size_t p) : p_(p), perm_(n) {
    require(n >= 1, "subset sampler needs n >= 1");
    if (p < 1 || p > n) fail(ErrorCode::kInvalidArgument, "batch size must satisfy 1 <= p <= N");
    std::iota(perm_.begin(), perm_.end(), 0u);
}

std::span<const std::uint32_t> SubsetSampler::sample(Stream& s) {
    const std::size_t n = perm_.size();
    if (p_ < n) {
        for (std::size_t i = 0; i < p_; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(s.below(n - i));
            std::swap(perm_[i], perm_[j]);
        }
    }
    return {perm_.data(), p_};
}

void minibatch_grad(const PotentialModel& u, ConstVec x, std::span<const std::uint32_t> subset, MutVec out,
                    WorkMeter* meter) {
    require(!subset.empty(), "empty subset");
    const std::size_t d = u.dim();
    if (subset.size() == 1) {
        u.component_gradient(subset[0], x, out);
        charge(meter, 1);
        return;
    }
    std::fill(out.begin(), out.end(), 0.0);
    std::vector<double> g(d);
    for (std::uint32_t i : subset) {
        u.component_gradient(i, x, g);
        for (std::size_t k = 0; k < d; ++k) out[k] += g[k];
    }
    const double inv = 1.0 / static_cast<double>(subset.size());
    for (std::size_t k = 0; k < d; ++k) out[k] *= inv;
    charge(meter, subset.size());
}

void gaussian_noise_grad(const PotentialModel& u, ConstVec x, double sigma, Stream& s, MutVec out,
                         WorkMeter* meter) {
    u.gradient(x, out);
    charge(meter, u.n_components());
    if (sigma == 0.0) return;
    for (double& g : out) g += sigma * s.normal();
}

void svrg_refresh(const PotentialModel& u, SvrgState& state, ConstVec new_anchor, WorkMeter* meter) {
    const std::size_t d = u.dim(), n = u.n_components();
    state.anchor.assign(new_anchor.begin(), new_anchor.end());
    state.anchor_grad.resize(d);
    u.gradient(state.anchor, state.anchor_grad);
    state.anchor_components.resize(n * d);
    for (std::size_t i = 0; i < n; ++i)
        u.component_gradient(i, state.anchor, MutVec(state.anchor_components.data() + i * d, d));
    state.steps_since_refresh = 0;
    state.initialized = true;
    charge(meter, n);
}

void svrg_grad(const PotentialModel& u, ConstVec x, const SvrgState& state, std::span<const std::uint32_t> subset,
               MutVec out, WorkMeter* meter) {
    if (!state.initialized) fail(ErrorCode::kState, "SVRG state used before the first refresh");
    require(!subset.empty(), "empty subset");
    const std::size_t d = u.dim();
    std::vector<double> g(d);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::uint32_t i : subset) {
        u.component_gradient(i, x, g);
        const double* a = state.anchor_components.data() + static_cast<std::size_t>(i) * d;
        for (std::size_t k = 0; k < d; ++k) out[k] += g[k] - a[k];
    }
    const double inv = 1.0 / static_cast<double>(subset.size());
    for (std::size_t k = 0; k < d; ++k) out[k] = out[k] * inv + state.anchor_grad[k];
    charge(meter, subset.size());
}

std::vector<double> SagaState::table_sum() const {
    std::vector<double> s(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) s[k] += table[i * d + k];
    return s;
}

SagaState saga_init(const PotentialModel& u, ConstVec y0, WorkMeter* meter) {
    SagaState st;
    st.n = u.n_components();
    st.d = u.dim();
    st.table.resize(st.n * st.d);
    for (std::size_t i = 0; i < st.n; ++i) u.component_gradient(i, y0, MutVec(st.table.data() + i * st.d, st.d));
    st.running_sum = st.table_sum();
    st.initialized = true;
    charge(meter, st.n);
    return st;
}

void saga_grad_and_update(const PotentialModel& u, ConstVec x, SagaState& state,
                          std::span<const std::uint32_t> subset, MutVec out, WorkMeter* meter) {
    if (!state.initialized) fail(ErrorCode::kState, "SAGA table used before initialisation");
    require(!subset.empty(), "empty subset");
    const std::size_t d = state.d;
    const double inv_p = 1.0 / static_cast<double>(subset.size());
    const double inv_n = 1.0 / static_cast<double>(state.n);
    std::vector<double> fresh(subset.size() * d);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t s = 0; s < subset.size(); ++s) {
        MutVec g(fresh.data() + s * d, d);
        u.component_gradient(subset[s], x, g);
        const double* old = state.table.data() + static_cast<std::size_t>(subset[s]) * d;
        for (std::size_t k = 0; k < d; ++k) out[k] += g[k] - old[k];
    }
    for (std::size_t k = 0; k < d; ++k) out[k] = out[k] * inv_p + state.running_sum[k] * inv_n;
    for (std::size_t s = 0; s < subset.size(); ++s) {
        double* row = state.table.data() + static_cast<std::size_t>(subset[s]) * d;
        const double* g = fresh.data() + s * d;
        for (std::size_t k = 0; k < d; ++k) {
            state.running_sum[k] += g[k] - row[k];
            row[k] = g[k];
        }
    }
    charge(meter, subset.size());
}

// ---------------------------------------------------------------------------

EstimatorSpec EstimatorSpec::parse(const std::string& id, const PotentialModel& u, double noise_sigma) {
    EstimatorSpec s;
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto c = id.find(':', start);
        parts.push_back(id.substr(start, c == std::string::npos ? std::string::npos : c - start));
        if (c == std::string::npos) break;
        start = c + 1;
    }
    const std::string& head = parts[0];
    const std::size_t n = u.n_components();
    if (head == "full" && parts.size() == 1) {
        s.kind = EstimatorKind::kFull;
    } else if (head == "sg" && parts.size() == 1) {
        if (u.finite_sum()) {
            s.kind = EstimatorKind::kMinibatch;
            s.batch = 1;
        } else {
            s.kind = EstimatorKind::kGaussian;
            s.sigma = noise_sigma;
        }
    } else if (head == "minibatch" && parts.size() == 2) {
        s.kind = EstimatorKind::kMinibatch;
        s.batch = parse_size(parts[1], id);
    } else if (head == "svrg" && (parts.size() == 2 || parts.size() == 3)) {
        s.kind = EstimatorKind::kSvrg;
        s.batch = parse_size(parts[1], id);
        if (parts.size() == 3) s.epoch = parse_size(parts[2], id);
    } else if (head == "saga" && parts.size() <= 2) {
        s.kind = EstimatorKind::kSaga;
        s.batch = parts.size() == 2 ? parse_size(parts[1], id) : 1;
    } else {
        fail(ErrorCode::kConfig, "unknown estimator id '" + id + "'");
    }
    if (s.kind == EstimatorKind::kMinibatch || s.kind == EstimatorKind::kSvrg || s.kind == EstimatorKind::kSaga) {
        if (!u.finite_sum()) fail(ErrorCode::kConfig, "estimator '" + id + "' needs a finite-sum model");
        if (s.batch > n) fail(ErrorCode::kConfig, "batch size exceeds N in '" + id + "'");
    }
    if (s.kind == EstimatorKind::kSvrg && s.epoch == 0) s.epoch = std::max<std::size_t>(1, n / s.batch);
    return s;
}

std::string EstimatorSpec::id() const {
    switch (kind) {
        case EstimatorKind::kFull: return "full";
        case EstimatorKind::kGaussian: return "sg";
        case EstimatorKind::kMinibatch: return "minibatch:" + std::to_string(batch);
        case EstimatorKind::kSvrg: return "svrg:" + std::to_string(batch) + ":" + std::to_string(epoch);
        case EstimatorKind::kSaga: return batch == 1 ? "saga" : "saga:" + std::to_string(batch);
    }
    return "?";
}

namespace {

class FullEstimator final : public GradientEstimator {
public:
    explicit FullEstimator(std::shared_ptr<const PotentialModel> u) : u_(std::move(u)) {}
    void reset() override {}
    void evaluate(ConstVec y, Stream&, MutVec out, WorkMeter& meter) override {
        u_->gradient(y, out);
        meter.units += u_->n_components();
    }
    bool last_was_full() const override { return true; }

private:
    std::shared_ptr<const PotentialModel> u_;
};

class GaussianEstimator final : public GradientEstimator {
public:
    GaussianEstimator(std::shared_ptr<const PotentialModel> u, double sigma) : u_(std::move(u)), sigma_(sigma) {}
    void reset() override {}
    void evaluate(ConstVec y, Stream& s, MutVec out, WorkMeter& meter) override {
        gaussian_noise_grad(*u_, y, sigma_, s, out, &meter);
    }

private:
    std::shared_ptr<const PotentialModel> u_;
    double sigma_;
};

class MinibatchEstimator final : public GradientEstimator {
public:
    MinibatchEstimator(std::shared_ptr<const PotentialModel> u, std::size_t p)
        : u_(std::move(u)), p_(p), sampler_(u_->n_components(), p) {}
    void reset() override { sampler_ = SubsetSampler(u_->n_components(), p_); }
    void evaluate(ConstVec y, Stream& s, MutVec out, WorkMeter& meter) override {
        minibatch_grad(*u_, y, sampler_.sample(s), out, &meter);
    }

private:
    std::shared_ptr<const PotentialModel> u_;
    std::size_t p_;
    SubsetSampler sampler_;
};

class SvrgEstimator final : public GradientEstimator {
public:
    SvrgEstimator(std::shared_ptr<const PotentialModel> u, std::size_t p, std::size_t q)
        : u_(std::move(u)), p_(p), q_(q), sampler_(u_->n_components(), p) {
        reset();
    }
    void reset() override {
        sampler_ = SubsetSampler(u_->n_components(), p_);
        state_ = SvrgState{};
        state_.epoch_length = q_;
        step_ = 0;
    }
    void evaluate(ConstVec y, Stream& s, MutVec out, WorkMeter& meter) override {
        if (step_ % q_ == 0) {
            svrg_refresh(*u_, state_, y, &meter);
            std::copy(state_.anchor_grad.begin(), state_.anchor_grad.end(), out.begin());
            full_ = true;
        } else {
            svrg_grad(*u_, y, state_, sampler_.sample(s), out, &meter);
            full_ = false;
        }
        ++step_;
        state_.steps_since_refresh = step_ % q_;
    }
    bool last_was_full() const override { return full_; }
    const SvrgState& state() const { return state_; }

private:
    std::shared_ptr<const PotentialModel> u_;
    std::size_t p_, q_;
    SubsetSampler sampler_;
    SvrgState state_;
    std::uint64_t step_ = 0;
    bool full_ = false;
};

class SagaEstimator final : public GradientEstimator {
public:
    SagaEstimator(std::shared_ptr<const PotentialModel> u, std::size_t p)
        : u_(std::move(u)), p_(p), sampler_(u_->n_components(), p) {}
    void reset() override {
        sampler_ = SubsetSampler(u_->n_components(), p_);
        state_ = SagaState{};
    }
    void evaluate(ConstVec y, Stream& s, MutVec out, WorkMeter& meter) override {
        if (!state_.initialized) {
            state_ = saga_init(*u_, y, &meter);
            const double inv = 1.0 / static_cast<double>(state_.n);
            for (std::size_t k = 0; k < state_.d; ++k) out[k] = state_.running_sum[k] * inv;
            full_ = true;
            return;
        }
        saga_grad_and_update(*u_, y, state_, sampler_.sample(s), out, &meter);
        full_ = false;
    }
    bool last_was_full() const override { return full_; }

private:
    std::shared_ptr<const PotentialModel> u_;
    std::size_t p_;
    SubsetSampler sampler_;
    SagaState state_;
    bool full_ = false;
};

}  // namespace

std::unique_ptr<GradientEstimator> make_estimator(const EstimatorSpec& spec, std::shared_ptr<const PotentialModel> u) {
    require(u != nullptr, "null model");
    switch (spec.kind) {
        case EstimatorKind::kFull: return std::make_unique<FullEstimator>(std::move(u));
        case EstimatorKind::kGaussian: return std::make_unique<GaussianEstimator>(std::move(u), spec.sigma);
        case EstimatorKind::kMinibatch: return std::make_unique<MinibatchEstimator>(std::move(u), spec.batch);
        case EstimatorKind::kSvrg: {
            const std::size_t q = spec.epoch ? spec.epoch : std::max<std::size_t>(1, u->n_components() / spec.batch);
            return std::make_unique<SvrgEstimator>(std::move(u), spec.batch, q);
        }
        case EstimatorKind::kSaga: return std::make_unique<SagaEstimator>(std::move(u), spec.batch);
    }
    fail(ErrorCode::kInvalidArgument, "unknown estimator kind");
}

}  // namespace ubu
