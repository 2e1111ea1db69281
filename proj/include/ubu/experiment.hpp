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

// Experiment drivers and the CSV record format (docs/csv_schema.md).
//
// Every (model, h) cell derives its experiment id from the label
// "cell/<model id>/<h>", so all algorithms in a cell share dynamics and
// initial-velocity streams. Values never depend on the worker count.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ubu/benchmarks.hpp"
#include "ubu/config.hpp"
#include "ubu/stats.hpp"

namespace ubu {

inline constexpr int kCsvSchemaVersion = 1;

struct RunRecord {
    std::string experiment;
    std::string model;
    std::uint64_t model_seed = 0;
    std::string algorithm;
    std::uint64_t N = 0;        // components (0: not a finite sum)
    std::uint64_t p = 0;        // batch size (0: not applicable)
    double h = 0.0;             // 0: row not tied to a step size
    double T = 0.0;
    double burnin_T = 0.0;
    std::uint64_t K = 0;
    std::uint32_t replicas = 0;
    std::uint64_t seed = 0;
    std::string statistic;
    double value = 0.0;
    double stderr_ = 0.0;
    double reference = 0.0;        // scalar reference, or its Euclidean norm
    double reference_error = 0.0;
    std::uint64_t work_units = 0;  // per replica, burn-in included
    std::uint32_t diverged = 0;    // replicas that hit the divergence cap
    std::string flag;              // ';'-separated tokens, e.g. "unreliable"
};

std::string csv_header();
std::string format_csv_row(const RunRecord& r);
void write_csv(std::ostream& os, const std::vector<RunRecord>& rows);
// Parses text written by write_csv; rejects other schema versions.
std::vector<RunRecord> parse_csv(const std::string& text);

struct RunOptions {
    unsigned workers = 0;
    std::function<void(const std::string&)> log;  // progress and warnings; may be empty
};

struct ExperimentResult {
    // One table per output file; `suffix` is appended to the output stem
    // (empty for single-table experiments).
    struct Table {
        std::string suffix;
        std::vector<RunRecord> rows;
    };
    std::vector<Table> tables;
    std::vector<std::string> warnings;
    std::uint64_t cells = 0;
    std::uint64_t dominated_cells = 0;  // cells where more than half the replicas diverged
    std::string reference_method;
    std::string reference_settings;
    bool divergence_dominated() const { return dominated_cells > 0; }
};

// Experiment id of a (model, h) cell.
std::uint32_t cell_experiment_id(const std::string& model_id, double h);

// Model for the spec (the `sg` noise override applied).
Benchmark make_spec_benchmark(const ExperimentSpec& spec, const std::string& model_id);
ReferenceMean resolve_reference(const ExperimentSpec& spec, const Benchmark& b, const RunOptions& opt);

ExperimentResult run_bias_sweep(const ExperimentSpec& spec, const RunOptions& opt = {});
ExperimentResult run_compare(const ExperimentSpec& spec, const RunOptions& opt = {});
ExperimentResult run_ratio_table(const ExperimentSpec& spec, const RunOptions& opt = {});
ExperimentResult run_coefficient(const ExperimentSpec& spec, const RunOptions& opt = {});
ExperimentResult run_select(const ExperimentSpec& spec, const RunOptions& opt = {});
// Computes the configured reference (quadrature, long-run or importance) and
// emits it as one row; the fixture text is returned in `fixture`.
ExperimentResult run_reference(const ExperimentSpec& spec, std::string& fixture, const RunOptions& opt = {});

}  // namespace ubu
