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

// ubu: experiment harness command line.
//
//   ubu <command> --config cfg.json [--seed S] [--out file.csv] [--workers n]
//
// Exit codes: 0 success, 1 other failure, 2 configuration error,
// 3 divergence-dominated run (the CSV is still written).

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ubu/ubu.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

int exit_for(ubu_status st) {
    std::cerr << "ubu: " << ubu_last_error() << "\n";
    return st == UBU_ERR_CONFIG ? kExitConfig : kExitFailure;
}

void log_to_stderr(const char* msg, void*) { std::cerr << msg << "\n"; }

// out.csv + "N10" -> out_N10.csv
std::string with_suffix(const std::string& path, const std::string& suffix) {
    if (suffix.empty()) return path;
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "_" + suffix;
    return path.substr(0, dot) + "_" + suffix + path.substr(dot);
}

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    os << text;
    return static_cast<bool>(os);
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned workers = 0;
    std::string fixture;
    bool quiet = false;
    // select overrides
    std::optional<double> epsilon;
    std::optional<std::uint64_t> d, N, p;
};

int run(const std::string& command, const Options& o) {
    ubu_config* cfg = nullptr;
    ubu_status st;
    if (o.config.empty()) {
        if (command != "select") {
            std::cerr << "ubu: --config is required for " << command << "\n";
            return kExitConfig;
        }
        st = ubu_config_parse("{}", nullptr, &cfg);
    } else {
        st = ubu_config_load(o.config.c_str(), &cfg);
    }
    if (st != UBU_OK) return exit_for(st);
    std::unique_ptr<ubu_config, decltype(&ubu_config_destroy)> cfg_guard(cfg, ubu_config_destroy);

    if (command == "select" && (o.epsilon || o.d || o.N || o.p)) {
        const char* js = nullptr;
        ubu_config_to_json(cfg, &js);
        nlohmann::json j = nlohmann::json::parse(js);
        if (o.epsilon) j["select"]["epsilon"] = *o.epsilon;
        if (o.d) j["select"]["d"] = *o.d;
        if (o.N) j["select"]["N"] = *o.N;
        if (o.p) j["select"]["p"] = *o.p;
        ubu_config* c2 = nullptr;
        st = ubu_config_parse(j.dump().c_str(), nullptr, &c2);
        if (st != UBU_OK) return exit_for(st);
        cfg_guard.reset(c2);
        cfg = c2;
    }
    if (o.seed) ubu_config_set_seed(cfg, *o.seed);
    if (!o.out.empty()) ubu_config_set_output(cfg, o.out.c_str());

    const auto t0 = std::chrono::steady_clock::now();
    ubu_result* res = nullptr;
    st = ubu_run(cfg, command.c_str(), o.workers, o.quiet ? nullptr : log_to_stderr, nullptr, &res);
    if (st != UBU_OK) return exit_for(st);
    std::unique_ptr<ubu_result, decltype(&ubu_result_destroy)> res_guard(res, ubu_result_destroy);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const char* out_c = nullptr;
    ubu_config_output(cfg, &out_c);
    const std::string out = out_c;
    std::size_t tables = 0;
    ubu_result_table_count(res, &tables);
    nlohmann::json files = nlohmann::json::array();
    for (std::size_t i = 0; i < tables; ++i) {
        const char* csv = nullptr;
        const char* suffix = nullptr;
        ubu_result_table_csv(res, i, &csv);
        ubu_result_table_suffix(res, i, &suffix);
        if (out.empty()) {
            if (*suffix) std::cout << "# table " << suffix << "\n";
            std::cout << csv;
        } else {
            const std::string path = with_suffix(out, suffix);
            if (!write_file(path, csv)) {
                std::cerr << "ubu: cannot write " << path << "\n";
                return kExitFailure;
            }
            files.push_back(path);
        }
    }
    if (command == "reference" && !o.fixture.empty()) {
        const char* fx = nullptr;
        ubu_result_fixture(res, &fx);
        if (!write_file(o.fixture, fx)) {
            std::cerr << "ubu: cannot write " << o.fixture << "\n";
            return kExitFailure;
        }
        files.push_back(o.fixture);
    }

    int dominated = 0;
    ubu_result_divergence_dominated(res, &dominated);
    if (!out.empty()) {
        nlohmann::json meta;
        const char* cfg_json = nullptr;
        ubu_config_to_json(cfg, &cfg_json);
        meta["command"] = command;
        meta["library_version"] = ubu_version();
        meta["csv_schema_version"] = ubu_csv_schema_version();
        meta["config"] = nlohmann::json::parse(cfg_json);
        meta["workers"] = o.workers;
        meta["wall_time_s"] = wall;
        meta["files"] = files;
        const char* method = nullptr;
        const char* settings = nullptr;
        ubu_result_reference(res, &method, &settings);
        meta["reference"] = {{"method", method}, {"settings", settings}};
        std::uint64_t cells = 0, dom = 0;
        ubu_result_cells(res, &cells, &dom);
        meta["cells"] = cells;
        meta["divergence_dominated_cells"] = dom;
        nlohmann::json warnings = nlohmann::json::array();
        std::size_t nw = 0;
        ubu_result_warning_count(res, &nw);
        for (std::size_t i = 0; i < nw; ++i) {
            const char* w = nullptr;
            ubu_result_warning(res, i, &w);
            warnings.push_back(w);
        }
        meta["warnings"] = warnings;
        if (!write_file(out + ".json", meta.dump(2) + "\n")) {
            std::cerr << "ubu: cannot write " << out << ".json\n";
            return kExitFailure;
        }
    }
    if (dominated) {
        std::cerr << "ubu: run is divergence-dominated\n";
        return kExitDiverged;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UBU stochastic-gradient sampling experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ubu_version()));
    Options o;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"bias-sweep", "bias vs step size for one scalar test function, with a log-log slope"},
        {"compare", "sampling error of several algorithms over an h grid (one CSV per N)"},
        {"ratio", "SVRG / mini-batch error ratio per (p, h)"},
        {"coefficient", "leading bias coefficient of the SG noise"},
        {"select", "step size, time and algorithm for a target root-MSE"},
        {"reference", "reference value of the test function mean"},
    };
    std::string chosen;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "experiment JSON");
        sub->add_option("--seed", o.seed, "global seed (overrides the config)");
        sub->add_option("--out", o.out, "CSV output path (default: config output, else stdout)");
        sub->add_option("--workers", o.workers, "worker threads, 0 = all (speed only)");
        sub->add_flag("--quiet", o.quiet, "no progress messages");
        if (name == "reference") sub->add_option("--fixture", o.fixture, "write the reference fixture here");
        if (name == "select") {
            sub->add_option("--epsilon", o.epsilon, "target root-MSE");
            sub->add_option("--d", o.d, "dimension");
            sub->add_option("--N", o.N, "number of components");
            sub->add_option("--p", o.p, "batch size");
        }
        sub->callback([&chosen, name = name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    return run(chosen, o);
}
