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

#include "ubu/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ubu/error.hpp"

namespace ubu {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) fail(ErrorCode::kConfig, where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(ErrorCode::kConfig, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
void get(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::kConfig, "bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

std::string kind_name(ReferenceSpec::Kind k) {
    switch (k) {
        case ReferenceSpec::Kind::kQuadrature: return "quadrature";
        case ReferenceSpec::Kind::kFixture: return "fixture";
        case ReferenceSpec::Kind::kLongRun: return "longrun";
        case ReferenceSpec::Kind::kImportance: return "importance";
        case ReferenceSpec::Kind::kExact: return "exact";
    }
    return "?";
}

}  // namespace

ExperimentSpec parse_config(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j,
               {"name", "model", "model_seed", "algorithms", "n_list", "batch_sizes", "h_grid", "T", "replicas", "M2",
                "burnin_T", "noise_sigma", "reference", "coefficient", "select", "seed", "output"},
               "config");
    ExperimentSpec s;
    s.base_dir = base_dir;
    get(j, "name", s.name, "config");
    get(j, "model", s.model, "config");
    get(j, "model_seed", s.model_seed, "config");
    get(j, "algorithms", s.algorithms, "config");
    get(j, "n_list", s.n_list, "config");
    get(j, "batch_sizes", s.batch_sizes, "config");
    get(j, "h_grid", s.h_grid, "config");
    get(j, "T", s.T, "config");
    get(j, "replicas", s.replicas, "config");
    get(j, "M2", s.M2, "config");
    get(j, "burnin_T", s.burnin_T, "config");
    get(j, "noise_sigma", s.noise_sigma, "config");
    get(j, "seed", s.seed, "config");
    get(j, "output", s.output, "config");
    if (j.contains("reference")) {
        const json& r = j["reference"];
        check_keys(r, {"kind", "tol", "fixture", "h", "T", "replicas", "burnin_T", "seed", "samples", "proposal_var", "block",
                       "value"}, "reference");
        std::string kind = "quadrature";
        get(r, "kind", kind, "reference");
        if (kind == "quadrature") {
            s.reference.kind = ReferenceSpec::Kind::kQuadrature;
        } else if (kind == "fixture") {
            s.reference.kind = ReferenceSpec::Kind::kFixture;
        } else if (kind == "longrun") {
            s.reference.kind = ReferenceSpec::Kind::kLongRun;
        } else if (kind == "importance") {
            s.reference.kind = ReferenceSpec::Kind::kImportance;
        } else if (kind == "exact") {
            s.reference.kind = ReferenceSpec::Kind::kExact;
        } else {
            fail(ErrorCode::kConfig, "unknown reference kind '" + kind + "'");
        }
        get(r, "tol", s.reference.tol, "reference");
        get(r, "fixture", s.reference.fixture, "reference");
        get(r, "h", s.reference.longrun.h, "reference");
        get(r, "T", s.reference.longrun.T, "reference");
        get(r, "replicas", s.reference.longrun.replicas, "reference");
        get(r, "burnin_T", s.reference.longrun.burnin_T, "reference");
        get(r, "seed", s.reference.longrun.seed, "reference");
        s.reference.importance.seed = s.reference.longrun.seed;
        get(r, "samples", s.reference.importance.samples, "reference");
        get(r, "proposal_var", s.reference.importance.proposal_var, "reference");
        get(r, "block", s.reference.importance.block, "reference");
        get(r, "value", s.reference.exact, "reference");
    }
    if (j.contains("coefficient")) {
        const json& c = j["coefficient"];
        check_keys(c, {"enabled", "h", "replicas", "chains", "K", "burnin_T", "spacing_T"}, "coefficient");
        s.coefficient.enabled = true;
        get(c, "enabled", s.coefficient.enabled, "coefficient");
        get(c, "h", s.coefficient.h, "coefficient");
        get(c, "replicas", s.coefficient.replicas, "coefficient");
        get(c, "chains", s.coefficient.chains, "coefficient");
        get(c, "K", s.coefficient.K, "coefficient");
        get(c, "burnin_T", s.coefficient.burnin_T, "coefficient");
        get(c, "spacing_T", s.coefficient.spacing_T, "coefficient");
    }
    if (j.contains("select")) {
        const json& c = j["select"];
        check_keys(c, {"epsilon", "d", "N", "p"}, "select");
        get(c, "epsilon", s.select.epsilon, "select");
        get(c, "d", s.select.d, "select");
        get(c, "N", s.select.N, "select");
        get(c, "p", s.select.p, "select");
    }
    return s;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::kConfig, "cannot read config " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    const auto slash = path.find_last_of('/');
    return parse_config(ss.str(), slash == std::string::npos ? "" : path.substr(0, slash));
}

std::string config_to_json(const ExperimentSpec& s) {
    json j;
    j["name"] = s.name;
    j["model"] = s.model;
    j["model_seed"] = s.model_seed;
    j["algorithms"] = s.algorithms;
    j["n_list"] = s.n_list;
    j["batch_sizes"] = s.batch_sizes;
    j["h_grid"] = s.h_grid;
    j["T"] = s.T;
    j["replicas"] = s.replicas;
    j["M2"] = s.M2;
    j["burnin_T"] = s.burnin_T;
    j["noise_sigma"] = s.noise_sigma;
    j["seed"] = s.seed;
    j["output"] = s.output;
    json r;
    r["kind"] = kind_name(s.reference.kind);
    r["tol"] = s.reference.tol;
    r["fixture"] = s.reference.fixture;
    r["h"] = s.reference.longrun.h;
    r["T"] = s.reference.longrun.T;
    r["replicas"] = s.reference.longrun.replicas;
    r["burnin_T"] = s.reference.longrun.burnin_T;
    r["seed"] = s.reference.longrun.seed;
    r["samples"] = s.reference.importance.samples;
    r["proposal_var"] = s.reference.importance.proposal_var;
    r["block"] = s.reference.importance.block;
    r["value"] = s.reference.exact;
    j["reference"] = r;
    json c;
    c["enabled"] = s.coefficient.enabled;
    c["h"] = s.coefficient.h;
    c["replicas"] = s.coefficient.replicas;
    c["chains"] = s.coefficient.chains;
    c["K"] = s.coefficient.K;
    c["burnin_T"] = s.coefficient.burnin_T;
    c["spacing_T"] = s.coefficient.spacing_T;
    j["coefficient"] = c;
    json sel;
    sel["epsilon"] = s.select.epsilon;
    sel["d"] = s.select.d;
    sel["N"] = s.select.N;
    sel["p"] = s.select.p;
    j["select"] = sel;
    return j.dump(2);
}

void validate_sweep(const ExperimentSpec& s) {
    if (s.h_grid.empty()) fail(ErrorCode::kConfig, "h_grid must not be empty");
    for (std::size_t i = 0; i < s.h_grid.size(); ++i) {
        if (!(s.h_grid[i] > 0.0)) fail(ErrorCode::kConfig, "h_grid entries must be positive");
        if (i > 0 && !(s.h_grid[i] < s.h_grid[i - 1])) fail(ErrorCode::kConfig, "h_grid must be sorted descending");
        if (s.T / s.h_grid[i] < 1.0) fail(ErrorCode::kConfig, "T / h must be at least 1");
    }
    if (s.replicas < 1) fail(ErrorCode::kConfig, "replicas must be >= 1");
    if (!(s.M2 > 0.0)) fail(ErrorCode::kConfig, "M2 must be positive");
    if (s.algorithms.empty()) fail(ErrorCode::kConfig, "algorithms must not be empty");
}

}  // namespace ubu
