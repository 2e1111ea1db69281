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

// Benchmark targets and their test functions.
//
// Random instances draw their coefficients from the kModel stream of the
// given seed, experiment id fnv1a32(<family>), replica 0. Coefficients are
// filled row-major by component and then mean-shifted per column.

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ubu/potential.hpp"

namespace ubu {

struct Benchmark {
    std::shared_ptr<const PotentialModel> model;
    std::shared_ptr<const TestFunction> f;
    // Additive-noise scale used by the `sg` estimator on non-finite-sum models.
    double noise_sigma = 0.0;
};

// U(x) = x^2/2 + 0.15 sin(1.6x - 0.5) + 0.1 sin(2.4x + 0.4),
// f(x) = cos x + 0.5 sin 2.5x + 0.2 sin(0.5x + 0.4); additive noise scale 3.
Benchmark make_1d_benchmark();
// Same U and f; components U + a_i sin x + b_i cos 1.2x + c_i sin 2x + d_i cos 2.5x
// with coefficients uniform on [-6, 6] before centring.
Benchmark make_1d_finite_sum(std::size_t n, std::uint64_t seed);

// U(x) = (1.4 x1^2 + 0.8 x2^2 + sin(0.7x1 - x2) cos(0.4x1 + 0.6x2)) / 2,
// f(x) = cos(1.4 x1 - 1.1 sin 1.2 x2); additive noise scale 3.
Benchmark make_2d_benchmark();
// Components U + a_i sin(x1 + 2x2) + b_i cos(1.2x1 - 0.7x2) + c_i exp(-x1^2/2)
// + d_i exp(-x2^2/3), coefficients uniform on [-8, 8] before centring.
Benchmark make_2d_finite_sum(std::size_t n, std::uint64_t seed);

// U_i(x) = |x|^2/6 + D(w_i.x + b_i), D(s) = 16 exp(-s^2/2) - 8 cos s - 4 sin 2s,
// in 10 dimensions, with f : R^10 -> R^30 (three Gaussian bumps per axis).
Benchmark make_10d_finite_sum(std::size_t n, std::uint64_t seed);

// U(x) = (m/2)|x|^2 in d dimensions, f(x) = x_1^2 (so pi(f) = 1/m).
Benchmark make_quadratic(std::size_t d, double m);

// Parses bench1d, bench1d-fs:N, bench2d, bench2d-fs:N, bench10d-fs:N and
// quadratic[:d[:m]]. Unknown ids raise ErrorCode::kConfig.
Benchmark make_benchmark(const std::string& id, std::uint64_t seed);

// The 10D test function on its own (used by tests).
std::shared_ptr<const TestFunction> make_bump_test_function(std::size_t d);

}  // namespace ubu
