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

// Reference values of pi(f) = int f e^{-U} / int e^{-U}.

#pragma once

#include <cstdint>
#include <string>

#include "ubu/benchmarks.hpp"
#include "ubu/stats.hpp"

namespace ubu {

// Composite Gauss-Legendre (tensor product for d = 2) over a box |x_i| <= R,
// doubling the panel count until two successive rules agree to tol / 100.
// R is 12 unless a convexity bound asks for more.
ReferenceMean reference_mean_quadrature(const PotentialModel& u, const TestFunction& f, double tol);

struct LongRunSettings {
    double h = 1.0 / 64.0;
    double T = 1e5;             // per replica
    std::uint32_t replicas = 32;
    double burnin_T = 0.0;
    double M2 = 1.0;            // integrator scaling
    std::uint64_t seed = 1;
    unsigned workers = 0;
};

// FG-UBU time averages at h and 2h. The estimate is the h run; the bound is
// 3 x (replica standard error) + |est(h) - est(2h)| / 3.
ReferenceMean reference_mean_longrun(const Benchmark& b, const LongRunSettings& s);

struct ImportanceSettings {
    std::uint64_t samples = 20000000;
    double proposal_var = 3.0;     // proposal N(0, proposal_var I)
    std::uint64_t block = 100000;  // samples per independent stream block
    std::uint64_t seed = 1;
    unsigned workers = 0;
};

// Self-normalised importance sampling with i.i.d. Gaussian proposals. The
// bound is 3 x the Euclidean norm of the delta-method standard errors.
ReferenceMean reference_mean_importance(const Benchmark& b, const ImportanceSettings& s);

// Versioned key/value text file:
//   ubu-reference <version>
//   model <id>
//   model_seed <u64>
//   method <text>
//   settings <text>
//   error_bound <double>
//   out_dim <n>
//   value <v_1> ... <v_n>
inline constexpr int kFixtureVersion = 1;

struct ReferenceFixture {
    std::string model;
    std::uint64_t model_seed = 0;
    ReferenceMean ref;
};

void write_reference_fixture(const std::string& path, const ReferenceFixture& fx);
ReferenceFixture read_reference_fixture(const std::string& path);
std::string format_reference_fixture(const ReferenceFixture& fx);
ReferenceFixture parse_reference_fixture(const std::string& text);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace ubu
