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

// Experiment configuration (JSON). Unknown keys are rejected with a
// diagnostic naming the key; docs/config.md lists every field.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ubu/reference.hpp"

namespace ubu {

struct ReferenceSpec {
    enum class Kind { kQuadrature, kFixture, kLongRun, kImportance, kExact };
    Kind kind = Kind::kQuadrature;
    double tol = 1e-10;           // quadrature
    std::string fixture;          // fixture path (relative paths resolve against the config file)
    LongRunSettings longrun;      // long-run oracle
    ImportanceSettings importance;
    std::vector<double> exact;    // exact value
};

struct CoefficientSpec {
    bool enabled = false;
    double h = 1.0 / 128.0;
    std::uint32_t replicas = 1024;
    std::uint32_t chains = 16;
    std::uint64_t K = 0;
    double burnin_T = -1.0;
    double spacing_T = 2.0;
};

struct SelectSpec {
    double epsilon = 0.01;
    std::uint64_t d = 10, N = 100, p = 4;
};

struct ExperimentSpec {
    std::string name = "experiment";
    std::string model = "bench1d";       // model id; compare may give the family only
    std::uint64_t model_seed = 1;
    std::vector<std::string> algorithms{"sg"};
    std::vector<std::size_t> n_list;      // compare: N values appended to the model family
    std::vector<std::size_t> batch_sizes; // ratio: p values
    std::vector<double> h_grid;
    double T = 1e5;
    std::uint32_t replicas = 32;
    double M2 = 1.0;
    double burnin_T = 0.0;
    double noise_sigma = -1.0;            // additive noise for `sg`; < 0: the benchmark's own
    ReferenceSpec reference;
    CoefficientSpec coefficient;
    SelectSpec select;
    std::uint64_t seed = 1;
    std::string output;                   // CSV path; empty means stdout
    std::string base_dir;                 // directory of the config file (not serialised)
};

ExperimentSpec parse_config(const std::string& json_text, const std::string& base_dir = "");
ExperimentSpec load_config(const std::string& path);
std::string config_to_json(const ExperimentSpec& spec);

// Grid non-empty, every h > 0, sorted descending, T / h >= 1, replicas >= 1.
void validate_sweep(const ExperimentSpec& spec);

}  // namespace ubu
