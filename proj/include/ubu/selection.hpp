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

// Step size / algorithm selection for a target root-MSE epsilon, with all
// suppressed constants set to 1.

#pragma once

#include <cstdint>
#include <string>

namespace ubu {

struct Selection {
    double h = 0.0;
    double T = 0.0;
    std::uint64_t K = 0;
    bool svrg = false;          // otherwise mini-batch SG-UBU
    double window_lo = 0.0;     // p / sqrt(d T)
    double window_hi = 0.0;     // p / N
    std::string binding;        // "variance" or "bias": which constraint fixed h
    std::string branch;         // "N h < p" or "N h >= p" for the variance constraint
    std::string choice() const { return svrg ? "svrg" : "minibatch"; }
};

// Largest h with (d h / p) min(1, N^2 h^2 / p^2) <= eps and d h^2 <= eps;
// T = d / eps^2, K = ceil(T / h); SVRG iff p / sqrt(d T) <= h <= p / N.
Selection select_algorithm(double eps, std::uint64_t d, std::uint64_t N, std::uint64_t p);

}  // namespace ubu
