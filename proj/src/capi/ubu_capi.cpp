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

#include "ubu/ubu.h"

#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "ubu/benchmarks.hpp"
#include "ubu/config.hpp"
#include "ubu/error.hpp"
#include "ubu/estimators.hpp"
#include "ubu/experiment.hpp"
#include "ubu/integrator.hpp"
#include "ubu/stats.hpp"

struct ubu_model {
    ubu::Benchmark b;
    std::string id;
};

struct ubu_sampler {
    std::shared_ptr<const ubu::TestFunction> f;
    ubu::Integrator integ;
    ubu::State state;
    ubu::Stream dyn, grad;
    bool diverged = false;
};

struct ubu_config {
    ubu::ExperimentSpec spec;
    std::string json;
};

struct ubu_result {
    ubu::ExperimentResult res;
    std::vector<std::string> csv;
    std::string fixture;
};

namespace {

thread_local std::string g_last_error;

ubu_status set_error(ubu_status st, const std::string& msg) {
    g_last_error = msg;
    return st;
}

// Runs fn, mapping exceptions to status codes.
template <class F>
ubu_status guarded(F&& fn) noexcept {
    try {
        fn();
        g_last_error.clear();
        return UBU_OK;
    } catch (const ubu::Error& e) {
        return set_error(static_cast<ubu_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(UBU_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(UBU_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(UBU_ERR_INTERNAL, "unknown error");
    }
}

#define UBU_CHECK_ARG(cond)                                                          \
    do {                                                                             \
        if (!(cond)) return set_error(UBU_ERR_INVALID_ARGUMENT, "null argument: " #cond); \
    } while (0)

}  // namespace

extern "C" {

const char* ubu_version(void) { return "1.0.0"; }

int ubu_csv_schema_version(void) { return ubu::kCsvSchemaVersion; }

const char* ubu_last_error(void) { return g_last_error.c_str(); }

const char* ubu_status_name(ubu_status status) {
    switch (status) {
        case UBU_OK: return "ok";
        case UBU_ERR_INVALID_ARGUMENT: return "invalid argument";
        case UBU_ERR_CONFIG: return "configuration error";
        case UBU_ERR_DIVERGED: return "diverged";
        case UBU_ERR_IO: return "i/o error";
        case UBU_ERR_DIMENSION: return "dimension mismatch";
        case UBU_ERR_STATE: return "invalid state";
        case UBU_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

// ---- models ---------------------------------------------------------------

ubu_status ubu_model_create(const char* id, uint64_t seed, ubu_model** out) {
    UBU_CHECK_ARG(id && out);
    *out = nullptr;
    return guarded([&] {
        auto m = std::make_unique<ubu_model>();
        m->b = ubu::make_benchmark(id, seed);
        m->id = m->b.model->id();
        *out = m.release();
    });
}

void ubu_model_destroy(ubu_model* model) { delete model; }

ubu_status ubu_model_id(const ubu_model* model, const char** out) {
    UBU_CHECK_ARG(model && out);
    *out = model->id.c_str();
    return UBU_OK;
}

ubu_status ubu_model_dim(const ubu_model* model, size_t* out) {
    UBU_CHECK_ARG(model && out);
    *out = model->b.model->dim();
    return UBU_OK;
}

ubu_status ubu_model_components(const ubu_model* model, size_t* out) {
    UBU_CHECK_ARG(model && out);
    *out = model->b.model->n_components();
    return UBU_OK;
}

ubu_status ubu_model_test_dim(const ubu_model* model, size_t* out) {
    UBU_CHECK_ARG(model && out);
    *out = model->b.f->out_dim();
    return UBU_OK;
}

ubu_status ubu_model_noise_sigma(const ubu_model* model, double* out) {
    UBU_CHECK_ARG(model && out);
    *out = model->b.noise_sigma;
    return UBU_OK;
}

ubu_status ubu_model_value(const ubu_model* model, const double* x, double* out) {
    UBU_CHECK_ARG(model && x && out);
    return guarded([&] { *out = model->b.model->value({x, model->b.model->dim()}); });
}

ubu_status ubu_model_gradient(const ubu_model* model, const double* x, double* grad) {
    UBU_CHECK_ARG(model && x && grad);
    return guarded([&] {
        const std::size_t d = model->b.model->dim();
        model->b.model->gradient({x, d}, {grad, d});
    });
}

ubu_status ubu_model_component_gradient(const ubu_model* model, size_t i, const double* x, double* grad) {
    UBU_CHECK_ARG(model && x && grad);
    if (i >= model->b.model->n_components())
        return set_error(UBU_ERR_INVALID_ARGUMENT, "component index out of range");
    return guarded([&] {
        const std::size_t d = model->b.model->dim();
        model->b.model->component_gradient(i, {x, d}, {grad, d});
    });
}

ubu_status ubu_model_test_function(const ubu_model* model, const double* x, double* out) {
    UBU_CHECK_ARG(model && x && out);
    return guarded([&] { model->b.f->value({x, model->b.model->dim()}, {out, model->b.f->out_dim()}); });
}

ubu_status ubu_model_constants(const ubu_model* model, ubu_constants* out) {
    UBU_CHECK_ARG(model && out);
    return guarded([&] {
        const auto& c = model->b.model->constants();
        *out = ubu_constants{c.m, c.M1, c.M2, c.M3, c.sigma, c.min_hessian_eig, c.convex ? 1 : 0};
    });
}

// ---- samplers --------------------------------------------------------------

ubu_status ubu_sampler_create(const ubu_model* model, const char* estimator, double h, double M2, uint64_t seed,
                              uint32_t experiment, uint32_t replica, ubu_sampler** out) {
    UBU_CHECK_ARG(model && estimator && out);
    *out = nullptr;
    if (!(h > 0.0) || !(M2 > 0.0)) return set_error(UBU_ERR_INVALID_ARGUMENT, "h and M2 must be positive");
    return guarded([&] {
        const auto& b = model->b;
        const auto spec = ubu::EstimatorSpec::parse(estimator, *b.model, b.noise_sigma);
        ubu::Stream init(ubu::StreamKey{seed, experiment, replica, ubu::StreamPurpose::kInitial});
        auto s = std::unique_ptr<ubu_sampler>(new ubu_sampler{
            b.f,
            ubu::Integrator(b.model, ubu::StepConfig{h, M2}, ubu::make_estimator(spec, b.model)),
            ubu::default_initial(b.model->dim(), M2, init),
            ubu::Stream(ubu::StreamKey{seed, experiment, replica, ubu::StreamPurpose::kDynamics}),
            ubu::Stream(ubu::StreamKey{seed, experiment, replica, ubu::StreamPurpose::kGradient}),
        });
        *out = s.release();
    });
}

void ubu_sampler_destroy(ubu_sampler* sampler) { delete sampler; }

ubu_status ubu_sampler_step(ubu_sampler* sampler, uint64_t n) {
    UBU_CHECK_ARG(sampler);
    if (sampler->diverged) return set_error(UBU_ERR_STATE, "sampler has diverged");
    const ubu_status st = guarded([&] {
        for (uint64_t k = 0; k < n; ++k) sampler->integ.step(sampler->state, sampler->dyn, sampler->grad);
    });
    if (st == UBU_ERR_DIVERGED) sampler->diverged = true;
    return st;
}

ubu_status ubu_sampler_time_average(ubu_sampler* sampler, uint64_t K, double* out) {
    UBU_CHECK_ARG(sampler && out);
    if (K == 0) return set_error(UBU_ERR_INVALID_ARGUMENT, "K must be positive");
    if (sampler->diverged) return set_error(UBU_ERR_STATE, "sampler has diverged");
    const ubu_status st = guarded([&] {
        const auto& f = *sampler->f;
        ubu::TimeAverageAccumulator acc(f.out_dim());
        std::vector<double> fx(f.out_dim());
        for (uint64_t k = 0; k < K; ++k) {
            f.value(sampler->state.x, fx);
            acc.add(fx);
            sampler->integ.step(sampler->state, sampler->dyn, sampler->grad);
        }
        const auto mean = acc.mean();
        std::copy(mean.begin(), mean.end(), out);
    });
    if (st == UBU_ERR_DIVERGED) sampler->diverged = true;
    return st;
}

ubu_status ubu_sampler_get_state(const ubu_sampler* sampler, double* x, double* v) {
    UBU_CHECK_ARG(sampler);
    if (x) std::copy(sampler->state.x.begin(), sampler->state.x.end(), x);
    if (v) std::copy(sampler->state.v.begin(), sampler->state.v.end(), v);
    return UBU_OK;
}

ubu_status ubu_sampler_set_state(ubu_sampler* sampler, const double* x, const double* v) {
    UBU_CHECK_ARG(sampler && x && v);
    std::copy(x, x + sampler->state.x.size(), sampler->state.x.begin());
    std::copy(v, v + sampler->state.v.size(), sampler->state.v.begin());
    sampler->diverged = false;
    return UBU_OK;
}

ubu_status ubu_sampler_work(const ubu_sampler* sampler, uint64_t* out) {
    UBU_CHECK_ARG(sampler && out);
    *out = sampler->integ.work();
    return UBU_OK;
}

ubu_status ubu_sampler_steps(const ubu_sampler* sampler, uint64_t* out) {
    UBU_CHECK_ARG(sampler && out);
    *out = sampler->integ.steps();
    return UBU_OK;
}

// ---- experiments -----------------------------------------------------------

ubu_status ubu_config_load(const char* path, ubu_config** out) {
    UBU_CHECK_ARG(path && out);
    *out = nullptr;
    return guarded([&] {
        auto c = std::make_unique<ubu_config>();
        c->spec = ubu::load_config(path);
        *out = c.release();
    });
}

ubu_status ubu_config_parse(const char* json, const char* base_dir, ubu_config** out) {
    UBU_CHECK_ARG(json && out);
    *out = nullptr;
    return guarded([&] {
        auto c = std::make_unique<ubu_config>();
        c->spec = ubu::parse_config(json, base_dir ? base_dir : "");
        *out = c.release();
    });
}

void ubu_config_destroy(ubu_config* config) { delete config; }

ubu_status ubu_config_set_seed(ubu_config* config, uint64_t seed) {
    UBU_CHECK_ARG(config);
    config->spec.seed = seed;
    return UBU_OK;
}

ubu_status ubu_config_set_output(ubu_config* config, const char* path) {
    UBU_CHECK_ARG(config && path);
    config->spec.output = path;
    return UBU_OK;
}

ubu_status ubu_config_output(const ubu_config* config, const char** out) {
    UBU_CHECK_ARG(config && out);
    *out = config->spec.output.c_str();
    return UBU_OK;
}

ubu_status ubu_config_name(const ubu_config* config, const char** out) {
    UBU_CHECK_ARG(config && out);
    *out = config->spec.name.c_str();
    return UBU_OK;
}

ubu_status ubu_config_to_json(const ubu_config* config, const char** out) {
    UBU_CHECK_ARG(config && out);
    return guarded([&] {
        auto* c = const_cast<ubu_config*>(config);
        c->json = ubu::config_to_json(config->spec);
        *out = c->json.c_str();
    });
}

ubu_status ubu_run(const ubu_config* config, const char* command, unsigned workers, ubu_log_fn log, void* user,
                   ubu_result** out) {
    UBU_CHECK_ARG(config && command && out);
    *out = nullptr;
    return guarded([&] {
        ubu::RunOptions opt;
        opt.workers = workers;
        if (log) opt.log = [log, user](const std::string& msg) { log(msg.c_str(), user); };
        auto r = std::make_unique<ubu_result>();
        const std::string cmd = command;
        const auto& spec = config->spec;
        if (cmd == "bias-sweep") {
            r->res = ubu::run_bias_sweep(spec, opt);
        } else if (cmd == "compare") {
            r->res = ubu::run_compare(spec, opt);
        } else if (cmd == "ratio") {
            r->res = ubu::run_ratio_table(spec, opt);
        } else if (cmd == "coefficient") {
            r->res = ubu::run_coefficient(spec, opt);
        } else if (cmd == "select") {
            r->res = ubu::run_select(spec, opt);
        } else if (cmd == "reference") {
            r->res = ubu::run_reference(spec, r->fixture, opt);
        } else {
            ubu::fail(ubu::ErrorCode::kConfig, "unknown command '" + cmd + "'");
        }
        for (const auto& t : r->res.tables) {
            std::ostringstream os;
            ubu::write_csv(os, t.rows);
            r->csv.push_back(os.str());
        }
        *out = r.release();
    });
}

void ubu_result_destroy(ubu_result* result) { delete result; }

ubu_status ubu_result_table_count(const ubu_result* result, size_t* out) {
    UBU_CHECK_ARG(result && out);
    *out = result->csv.size();
    return UBU_OK;
}

ubu_status ubu_result_table_suffix(const ubu_result* result, size_t i, const char** out) {
    UBU_CHECK_ARG(result && out);
    if (i >= result->res.tables.size()) return set_error(UBU_ERR_INVALID_ARGUMENT, "table index out of range");
    *out = result->res.tables[i].suffix.c_str();
    return UBU_OK;
}

ubu_status ubu_result_table_csv(const ubu_result* result, size_t i, const char** out) {
    UBU_CHECK_ARG(result && out);
    if (i >= result->csv.size()) return set_error(UBU_ERR_INVALID_ARGUMENT, "table index out of range");
    *out = result->csv[i].c_str();
    return UBU_OK;
}

ubu_status ubu_result_warning_count(const ubu_result* result, size_t* out) {
    UBU_CHECK_ARG(result && out);
    *out = result->res.warnings.size();
    return UBU_OK;
}

ubu_status ubu_result_warning(const ubu_result* result, size_t i, const char** out) {
    UBU_CHECK_ARG(result && out);
    if (i >= result->res.warnings.size()) return set_error(UBU_ERR_INVALID_ARGUMENT, "warning index out of range");
    *out = result->res.warnings[i].c_str();
    return UBU_OK;
}

ubu_status ubu_result_divergence_dominated(const ubu_result* result, int* out) {
    UBU_CHECK_ARG(result && out);
    *out = result->res.divergence_dominated() ? 1 : 0;
    return UBU_OK;
}

ubu_status ubu_result_cells(const ubu_result* result, uint64_t* cells, uint64_t* dominated) {
    UBU_CHECK_ARG(result);
    if (cells) *cells = result->res.cells;
    if (dominated) *dominated = result->res.dominated_cells;
    return UBU_OK;
}

ubu_status ubu_result_reference(const ubu_result* result, const char** method, const char** settings) {
    UBU_CHECK_ARG(result);
    if (method) *method = result->res.reference_method.c_str();
    if (settings) *settings = result->res.reference_settings.c_str();
    return UBU_OK;
}

ubu_status ubu_result_fixture(const ubu_result* result, const char** out) {
    UBU_CHECK_ARG(result && out);
    *out = result->fixture.c_str();
    return UBU_OK;
}

}  // extern "C"
