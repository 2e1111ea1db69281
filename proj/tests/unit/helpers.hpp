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


// Shared helpers for the unit tests: deterministic generators for property
// tests and finite-difference oracles.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ubu/benchmarks.hpp"
#include "ubu/rng.hpp"

namespace testing {

// Hand-rolled generator: a dedicated auxiliary stream per property.
class Gen {
public:
    explicit Gen(const std::string& property, std::uint64_t seed = 20260101)
        : s_(ubu::StreamKey{seed, ubu::fnv1a32(property), 0, ubu::StreamPurpose::kAuxiliary}) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * s_.uniform(); }
    double normal() { return s_.normal(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(s_.below(n)); }
    std::vector<double> point(std::size_t d, double scale = 2.0) {
        std::vector<double> x(d);
        for (double& v : x) v = scale * s_.normal();
        return x;
    }
    ubu::Stream& stream() { return s_; }

private:
    ubu::Stream s_;
};

// Central difference of a scalar function along coordinate i.
inline double central_diff(const std::function<double(const std::vector<double>&)>& fn, std::vector<double> x,
                           std::size_t i, double eps = 1e-5) {
    const double x0 = x[i];
    x[i] = x0 + eps;
    const double fp = fn(x);
    x[i] = x0 - eps;
    const double fm = fn(x);
    return (fp - fm) / (2.0 * eps);
}

inline double rel_err(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Small instances of every benchmark family.
inline std::vector<std::string> benchmark_ids() {
    return {"bench1d", "bench2d", "bench1d-fs:5", "bench2d-fs:6", "bench10d-fs:7", "quadratic:3:0.5"};
}

}  // namespace testing
