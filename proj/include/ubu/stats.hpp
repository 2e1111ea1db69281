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

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ubu/potential.hpp"

namespace ubu {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    void merge(const CompensatedSum& o) noexcept {
        add(o.sum_);
        add(o.comp_);
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Running sum of f(X_k) over the observed steps.
class TimeAverageAccumulator {
public:
    explicit TimeAverageAccumulator(std::size_t out_dim = 1) : sums_(out_dim) {}

    std::size_t out_dim() const { return sums_.size(); }
    std::uint64_t count() const { return count_; }

    void add(ConstVec fx);
    void add(double fx);
    void merge(const TimeAverageAccumulator& o);
    std::vector<double> mean() const;

private:
    std::vector<CompensatedSum> sums_;
    std::uint64_t count_ = 0;
};

// Sample mean and standard error of independent scalars.
struct SampleSummary {
    double mean = 0.0;
    double stderr_ = 0.0;  // standard error of the mean
    double sd = 0.0;
    std::size_t n = 0;
};
SampleSummary summarize(const std::vector<double>& xs);

struct ReferenceMean {
    std::vector<double> value;
    double error_bound = 0.0;
    std::string method;    // "quadrature", "longrun", "exact", ...
    std::string settings;  // free text describing the generator
};

struct BiasEstimate {
    double bias = 0.0;
    double stderr_ = 0.0;
    std::size_t replicas = 0;
};

// Scalar f: mean over replicas of the time average minus the reference.
// Vector f: per-replica Euclidean error |avg - ref|, averaged over replicas.
BiasEstimate estimate_bias(const std::vector<std::vector<double>>& replica_means, const ReferenceMean& ref);

// |pooled avg - ref| with the pooled average taken over all replicas (for
// scalar f, the absolute bias); the standard error is the jackknife over
// replicas. Needs at least two replicas.
BiasEstimate estimate_pooled_error(const std::vector<std::vector<double>>& replica_means, const ReferenceMean& ref);

// Delete-one jackknife of a statistic of n replicas: value on the full set
// and its standard error. stat(skip) must evaluate the statistic with replica
// `skip` left out (skip == n: none left out).
SampleSummary jackknife(std::size_t n, const std::function<double(std::size_t skip)>& stat);

// Mean over replicas of |avg - ref|^2; needs at least two replicas.
double estimate_mse(const std::vector<std::vector<double>>& replica_means, const ReferenceMean& ref);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;  // log(value) at h = 1
    double slope_stderr = 0.0;
    std::size_t points = 0;
    bool ok = false;
};

// Weighted least squares of log|value| on log h with weights (value/stderr)^2.
// Points with stderr > |value| * max_rel_err (or non-positive values) are excluded.
SlopeFit fit_loglog(const std::vector<double>& h, const std::vector<double>& value,
                    const std::vector<double>& stderr_, double max_rel_err = 0.2);

}  // namespace ubu
