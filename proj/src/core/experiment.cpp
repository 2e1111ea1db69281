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

#include "ubu/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ubu/error.hpp"
#include "ubu/reference.hpp"
#include "ubu/runner.hpp"
#include "ubu/selection.hpp"
#include "ubu/variation.hpp"

namespace ubu {

namespace {

const char* const kColumns[] = {"schema_version", "experiment", "model",     "model_seed", "algorithm", "N",
                                "p",              "h",          "T",         "burnin_T",   "K",         "replicas",
                                "seed",           "statistic",  "value",     "stderr",     "reference", "reference_error",
                                "work_units",     "diverged",   "flag"};
constexpr std::size_t kNumColumns = sizeof(kColumns) / sizeof(kColumns[0]);

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

template <class T>
T parse_num(const std::string& s, const char* col) {
    T v{};
    if (s.empty()) return v;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        fail(ErrorCode::kIo, std::string("bad CSV value in column ") + col + ": " + s);
    return v;
}

std::string opt_double(double v) { return v == 0.0 ? "" : format_double(v); }

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

std::string csv_header() {
    std::string s;
    for (std::size_t i = 0; i < kNumColumns; ++i) {
        if (i) s += ',';
        s += kColumns[i];
    }
    return s;
}

std::string format_csv_row(const RunRecord& r) {
    std::ostringstream os;
    os << kCsvSchemaVersion << ',' << quote(r.experiment) << ',' << quote(r.model) << ',' << r.model_seed << ','
       << quote(r.algorithm) << ',' << r.N << ',' << r.p << ',' << opt_double(r.h) << ',' << opt_double(r.T) << ','
       << format_double(r.burnin_T) << ',' << r.K << ',' << r.replicas << ',' << r.seed << ',' << quote(r.statistic)
       << ',' << format_double(r.value) << ',' << format_double(r.stderr_) << ',' << format_double(r.reference) << ','
       << format_double(r.reference_error) << ',' << r.work_units << ',' << r.diverged << ',' << quote(r.flag);
    return os.str();
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& rows) {
    os << csv_header() << '\n';
    for (const auto& r : rows) os << format_csv_row(r) << '\n';
}

std::vector<RunRecord> parse_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) fail(ErrorCode::kIo, "empty CSV");
    if (line != csv_header()) fail(ErrorCode::kIo, "CSV header does not match schema version " +
                                                       std::to_string(kCsvSchemaVersion));
    std::vector<RunRecord> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != kNumColumns) fail(ErrorCode::kIo, "CSV row has " + std::to_string(f.size()) + " fields");
        if (f[0] != std::to_string(kCsvSchemaVersion))
            fail(ErrorCode::kIo, "CSV schema version " + f[0] + " (expected " + std::to_string(kCsvSchemaVersion) + ")");
        RunRecord r;
        r.experiment = f[1];
        r.model = f[2];
        r.model_seed = parse_num<std::uint64_t>(f[3], "model_seed");
        r.algorithm = f[4];
        r.N = parse_num<std::uint64_t>(f[5], "N");
        r.p = parse_num<std::uint64_t>(f[6], "p");
        r.h = parse_num<double>(f[7], "h");
        r.T = parse_num<double>(f[8], "T");
        r.burnin_T = parse_num<double>(f[9], "burnin_T");
        r.K = parse_num<std::uint64_t>(f[10], "K");
        r.replicas = parse_num<std::uint32_t>(f[11], "replicas");
        r.seed = parse_num<std::uint64_t>(f[12], "seed");
        r.statistic = f[13];
        r.value = parse_num<double>(f[14], "value");
        r.stderr_ = parse_num<double>(f[15], "stderr");
        r.reference = parse_num<double>(f[16], "reference");
        r.reference_error = parse_num<double>(f[17], "reference_error");
        r.work_units = parse_num<std::uint64_t>(f[18], "work_units");
        r.diverged = parse_num<std::uint32_t>(f[19], "diverged");
        r.flag = f[20];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::uint32_t cell_experiment_id(const std::string& model_id, double h) {
    return fnv1a32("cell/" + model_id + "/" + format_double(h));
}

Benchmark make_spec_benchmark(const ExperimentSpec& spec, const std::string& model_id) {
    Benchmark b = make_benchmark(model_id, spec.model_seed);
    if (spec.noise_sigma >= 0.0) b.noise_sigma = spec.noise_sigma;
    return b;
}

ReferenceMean resolve_reference(const ExperimentSpec& spec, const Benchmark& b, const RunOptions& opt) {
    const ReferenceSpec& r = spec.reference;
    const std::size_t q = b.f->out_dim();
    switch (r.kind) {
        case ReferenceSpec::Kind::kQuadrature:
            return reference_mean_quadrature(*b.model, *b.f, r.tol);
        case ReferenceSpec::Kind::kFixture: {
            std::string path = r.fixture;
            const auto brace = path.find("{N}");
            if (brace != std::string::npos) path.replace(brace, 3, std::to_string(b.model->n_components()));
            if (!path.empty() && path[0] != '/' && !spec.base_dir.empty()) path = spec.base_dir + "/" + path;
            const ReferenceFixture fx = read_reference_fixture(path);
            if (fx.model != b.model->id())
                fail(ErrorCode::kConfig, "fixture " + path + " is for model " + fx.model + ", not " + b.model->id());
            if (b.model->finite_sum() && fx.model_seed != spec.model_seed)
                fail(ErrorCode::kConfig, "fixture " + path + " was built with model_seed " +
                                             std::to_string(fx.model_seed));
            if (fx.ref.value.size() != q) fail(ErrorCode::kConfig, "fixture " + path + " has the wrong output size");
            return fx.ref;
        }
        case ReferenceSpec::Kind::kLongRun: {
            LongRunSettings s = r.longrun;
            s.M2 = spec.M2;
            s.workers = opt.workers;
            return reference_mean_longrun(b, s);
        }
        case ReferenceSpec::Kind::kImportance: {
            ImportanceSettings s = r.importance;
            s.workers = opt.workers;
            return reference_mean_importance(b, s);
        }
        case ReferenceSpec::Kind::kExact: {
            if (r.exact.size() != q) fail(ErrorCode::kConfig, "exact reference has the wrong output size");
            ReferenceMean m;
            m.value = r.exact;
            m.method = "exact";
            return m;
        }
    }
    fail(ErrorCode::kConfig, "unhandled reference kind");
}

namespace {

struct Cell {
    std::vector<ReplicaResult> results;
    std::vector<std::vector<double>> means;  // surviving replicas
    std::vector<std::size_t> survivors;      // their indices
    std::uint32_t diverged = 0;
    std::uint64_t work = 0;
    std::uint64_t K = 0;
    std::uint64_t burnin = 0;
};

class Driver {
public:
    Driver(const ExperimentSpec& spec, const RunOptions& opt, ExperimentResult& out, std::string kind)
        : spec_(spec), opt_(opt), out_(out), kind_(std::move(kind)) {}

    void log(const std::string& msg) const {
        if (opt_.log) opt_.log(msg);
    }

    void warn(const std::string& msg) {
        out_.warnings.push_back(msg);
        log("warning: " + msg);
    }

    Cell run_cell(const Benchmark& b, const std::string& alg, const EstimatorSpec& est, double h) {
        const auto t0 = std::chrono::steady_clock::now();
        Cell c;
        ReplicaSpec rs;
        rs.model = b.model;
        rs.f = b.f;
        rs.estimator = est;
        rs.step = StepConfig{h, spec_.M2};
        c.K = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(spec_.T / h)));
        c.burnin = static_cast<std::uint64_t>(std::llround(spec_.burnin_T / h));
        rs.K = c.K;
        rs.burnin = c.burnin;
        rs.seed = spec_.seed;
        rs.experiment = cell_experiment_id(b.model->id(), h);
        c.results = run_replicas(rs, 0, spec_.replicas, opt_.workers);
        bool have_work = false;
        for (std::size_t i = 0; i < c.results.size(); ++i) {
            const auto& r = c.results[i];
            if (r.diverged) {
                ++c.diverged;
                continue;
            }
            if (!have_work) {
                c.work = r.work;
                have_work = true;
            }
            c.means.push_back(r.mean);
            c.survivors.push_back(i);
        }
        ++out_.cells;
        if (2 * c.diverged > spec_.replicas) {
            ++out_.dominated_cells;
            warn(alg + " at h=" + format_double(h) + ": " + std::to_string(c.diverged) + " of " +
                 std::to_string(spec_.replicas) + " replicas diverged");
        } else if (c.diverged > 0) {
            warn(alg + " at h=" + format_double(h) + ": " + std::to_string(c.diverged) +
                 " diverged replicas excluded");
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log(kind_ + " " + b.model->id() + " " + alg + " h=" + format_double(h) + " K=" + std::to_string(c.K) + " (" +
            format_double(std::round(secs * 10.0) / 10.0) + " s)");
        return c;
    }

    RunRecord base_row(const Benchmark& b, const std::string& alg, const EstimatorSpec* est) const {
        RunRecord r;
        r.experiment = spec_.name;
        r.model = b.model->id();
        r.model_seed = spec_.model_seed;
        r.algorithm = alg;
        r.N = b.model->finite_sum() ? b.model->n_components() : 0;
        if (est && est->kind != EstimatorKind::kFull && est->kind != EstimatorKind::kGaussian) r.p = est->batch;
        r.T = spec_.T;
        r.burnin_T = spec_.burnin_T;
        r.replicas = spec_.replicas;
        r.seed = spec_.seed;
        return r;
    }

    RunRecord cell_row(const Benchmark& b, const std::string& alg, const EstimatorSpec& est, double h, const Cell& c,
                       const ReferenceMean& ref, const std::string& statistic, double value, double se) const {
        RunRecord r = base_row(b, alg, &est);
        r.h = h;
        r.K = c.K;
        r.statistic = statistic;
        r.value = value;
        r.stderr_ = se;
        r.reference = ref.value.size() == 1 ? ref.value[0] : norm(ref.value);
        r.reference_error = ref.error_bound;
        r.work_units = c.work;
        r.diverged = c.diverged;
        if (ref.error_bound > 0.2 * std::abs(value)) r.flag = "unreliable";
        return r;
    }

    // Error rows of one cell; returns false when too few replicas survived.
    bool error_rows(const Benchmark& b, const std::string& alg, const EstimatorSpec& est, double h, const Cell& c,
                    const ReferenceMean& ref, std::vector<RunRecord>& rows, BiasEstimate* pooled = nullptr) {
        if (c.means.size() < 2) {
            RunRecord r = cell_row(b, alg, est, h, c, ref, "diverged_fraction",
                                   static_cast<double>(c.diverged) / spec_.replicas, 0.0);
            r.flag = "diverged";
            rows.push_back(r);
            return false;
        }
        const BiasEstimate pe = estimate_pooled_error(c.means, ref);
        if (pooled) *pooled = pe;
        if (b.f->out_dim() == 1) {
            const BiasEstimate be = estimate_bias(c.means, ref);
            rows.push_back(cell_row(b, alg, est, h, c, ref, "bias", be.bias, be.stderr_));
        }
        rows.push_back(cell_row(b, alg, est, h, c, ref, "sampling_error", pe.bias, pe.stderr_));
        if (b.f->out_dim() > 1) {
            const BiasEstimate re = estimate_bias(c.means, ref);
            rows.push_back(cell_row(b, alg, est, h, c, ref, "replica_error", re.bias, re.stderr_));
        }
        return true;
    }

private:
    const ExperimentSpec& spec_;
    const RunOptions& opt_;
    ExperimentResult& out_;
    std::string kind_;
};

std::string family_of(const std::string& model) { return model.substr(0, model.find(':')); }

CoefficientSettings coefficient_settings(const ExperimentSpec& spec, const Benchmark& b, const EstimatorSpec& est,
                                         const RunOptions& opt) {
    CoefficientSettings cs;
    if (est.kind == EstimatorKind::kGaussian) {
        cs.noise = NoiseKind::kGaussian;
        cs.sigma = est.sigma;
    } else if (est.kind == EstimatorKind::kMinibatch) {
        cs.noise = NoiseKind::kFiniteSum;
        cs.batch = est.batch;
    } else {
        fail(ErrorCode::kConfig, "the leading coefficient is defined for sg and minibatch estimators only");
    }
    (void)b;
    cs.h = spec.coefficient.h;
    cs.M2 = spec.M2;
    cs.K = spec.coefficient.K;
    cs.replicas = spec.coefficient.replicas;
    cs.chains = spec.coefficient.chains;
    cs.burnin_T = spec.coefficient.burnin_T;
    cs.spacing_T = spec.coefficient.spacing_T;
    cs.seed = spec.seed;
    cs.workers = opt.workers;
    return cs;
}

void set_reference_info(ExperimentResult& res, const ReferenceMean& ref) {
    res.reference_method = ref.method;
    res.reference_settings = ref.settings;
}

}  // namespace

ExperimentResult run_bias_sweep(const ExperimentSpec& spec, const RunOptions& opt) {
    validate_sweep(spec);
    ExperimentResult res;
    Driver drv(spec, opt, res, "bias-sweep");
    const Benchmark b = make_spec_benchmark(spec, spec.model);
    if (b.f->out_dim() != 1) fail(ErrorCode::kConfig, "bias-sweep needs a scalar test function");
    const ReferenceMean ref = resolve_reference(spec, b, opt);
    set_reference_info(res, ref);
    ExperimentResult::Table table;
    for (const auto& alg : spec.algorithms) {
        const EstimatorSpec est = EstimatorSpec::parse(alg, *b.model, b.noise_sigma);
        std::vector<double> hs, vals, ses;
        for (double h : spec.h_grid) {
            const Cell c = drv.run_cell(b, alg, est, h);
            if (c.means.size() < 2) {
                drv.error_rows(b, alg, est, h, c, ref, table.rows);
                continue;
            }
            const BiasEstimate be = estimate_bias(c.means, ref);
            table.rows.push_back(drv.cell_row(b, alg, est, h, c, ref, "bias", be.bias, be.stderr_));
            hs.push_back(h);
            vals.push_back(be.bias);
            ses.push_back(be.stderr_);
        }
        const SlopeFit fit = fit_loglog(hs, vals, ses);
        if (fit.ok) {
            RunRecord r = drv.base_row(b, alg, &est);
            r.statistic = "slope";
            r.value = fit.slope;
            r.stderr_ = fit.slope_stderr;
            r.reference = ref.value[0];
            r.reference_error = ref.error_bound;
            r.flag = "points=" + std::to_string(fit.points);
            table.rows.push_back(r);
        } else {
            drv.warn(alg + ": fewer than two grid points pass the slope-fit filter");
        }
        if (spec.coefficient.enabled &&
            (est.kind == EstimatorKind::kGaussian || est.kind == EstimatorKind::kMinibatch)) {
            const CoefficientResult cr = leading_coefficient(b, coefficient_settings(spec, b, est, opt));
            RunRecord r = drv.base_row(b, alg, &est);
            r.statistic = "C0";
            r.h = spec.coefficient.h;
            r.K = cr.K;
            r.burnin_T = cr.burnin_T;
            r.replicas = cr.replicas;
            r.value = cr.C0;
            r.stderr_ = cr.stderr_;
            if (!cr.convex) r.flag = "nonconvex";
            table.rows.push_back(r);
            for (double h : spec.h_grid) {
                RunRecord p = drv.base_row(b, alg, &est);
                p.statistic = "predicted_bias";
                p.h = h;
                p.K = static_cast<std::uint64_t>(std::llround(spec.T / h));
                p.value = cr.slope * h;
                p.stderr_ = cr.slope_stderr * h;
                p.reference = ref.value[0];
                p.reference_error = ref.error_bound;
                p.flag = r.flag;
                table.rows.push_back(p);
            }
        }
    }
    res.tables.push_back(std::move(table));
    return res;
}

ExperimentResult run_compare(const ExperimentSpec& spec, const RunOptions& opt) {
    validate_sweep(spec);
    ExperimentResult res;
    Driver drv(spec, opt, res, "compare");
    std::vector<std::pair<std::string, std::string>> models;  // (id, suffix)
    if (spec.n_list.empty()) {
        models.emplace_back(spec.model, "");
    } else {
        for (std::size_t n : spec.n_list) models.emplace_back(family_of(spec.model) + ":" + std::to_string(n),
                                                              "N" + std::to_string(n));
    }
    for (const auto& [model_id, suffix] : models) {
        const Benchmark b = make_spec_benchmark(spec, model_id);
        const ReferenceMean ref = resolve_reference(spec, b, opt);
        set_reference_info(res, ref);
        ExperimentResult::Table table;
        table.suffix = suffix;
        for (const auto& alg : spec.algorithms) {
            const EstimatorSpec est = EstimatorSpec::parse(alg, *b.model, b.noise_sigma);
            for (double h : spec.h_grid) {
                const Cell c = drv.run_cell(b, alg, est, h);
                drv.error_rows(b, alg, est, h, c, ref, table.rows);
            }
        }
        res.tables.push_back(std::move(table));
    }
    return res;
}

ExperimentResult run_ratio_table(const ExperimentSpec& spec, const RunOptions& opt) {
    validate_sweep(spec);
    if (spec.batch_sizes.empty()) fail(ErrorCode::kConfig, "ratio needs batch_sizes");
    ExperimentResult res;
    Driver drv(spec, opt, res, "ratio");
    const Benchmark b = make_spec_benchmark(spec, spec.model);
    if (!b.model->finite_sum()) fail(ErrorCode::kConfig, "ratio needs a finite-sum model");
    const ReferenceMean ref = resolve_reference(spec, b, opt);
    set_reference_info(res, ref);
    const std::size_t q = ref.value.size();
    ExperimentResult::Table table;
    for (std::size_t p : spec.batch_sizes) {
        const std::string sg_id = "minibatch:" + std::to_string(p), vr_id = "svrg:" + std::to_string(p);
        const EstimatorSpec sg = EstimatorSpec::parse(sg_id, *b.model, b.noise_sigma);
        const EstimatorSpec vr = EstimatorSpec::parse(vr_id, *b.model, b.noise_sigma);
        for (double h : spec.h_grid) {
            const Cell cs = drv.run_cell(b, sg_id, sg, h);
            const Cell cv = drv.run_cell(b, vr_id, vr, h);
            const bool ok_s = drv.error_rows(b, sg_id, sg, h, cs, ref, table.rows);
            const bool ok_v = drv.error_rows(b, vr_id, vr, h, cv, ref, table.rows);
            if (!ok_s || !ok_v) continue;
            // Replicas surviving in both cells, paired by index (shared streams).
            std::vector<const std::vector<double>*> ms, mv;
            for (std::size_t i = 0; i < spec.replicas; ++i)
                if (!cs.results[i].diverged && !cv.results[i].diverged) {
                    ms.push_back(&cs.results[i].mean);
                    mv.push_back(&cv.results[i].mean);
                }
            const std::size_t n = ms.size();
            if (n < 2) continue;
            std::vector<double> ts(q, 0.0), tv(q, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < q; ++c) {
                    ts[c] += (*ms[i])[c];
                    tv[c] += (*mv[i])[c];
                }
            auto err = [&](const std::vector<double>& tot, const std::vector<const std::vector<double>*>& m,
                           std::size_t skip) {
                const double cnt = static_cast<double>(skip < n ? n - 1 : n);
                double s = 0.0;
                for (std::size_t c = 0; c < q; ++c) {
                    const double e = (skip < n ? tot[c] - (*m[skip])[c] : tot[c]) / cnt - ref.value[c];
                    s += e * e;
                }
                return std::sqrt(s);
            };
            const SampleSummary den = jackknife(n, [&](std::size_t k) { return err(ts, ms, k); });
            if (!(den.mean > 0.0) || den.stderr_ > 0.5 * den.mean) {
                drv.warn("ratio at p=" + std::to_string(p) + " h=" + format_double(h) +
                         " omitted: denominator stderr exceeds 50% of its value");
                continue;
            }
            const SampleSummary ratio =
                jackknife(n, [&](std::size_t k) { return err(tv, mv, k) / err(ts, ms, k); });
            RunRecord r = drv.cell_row(b, vr_id, vr, h, cv, ref, "ratio", ratio.mean, ratio.stderr_);
            r.work_units = cv.work;
            r.flag.clear();
            table.rows.push_back(r);
        }
    }
    res.tables.push_back(std::move(table));
    return res;
}

ExperimentResult run_coefficient(const ExperimentSpec& spec, const RunOptions& opt) {
    ExperimentResult res;
    Driver drv(spec, opt, res, "coefficient");
    const Benchmark b = make_spec_benchmark(spec, spec.model);
    if (b.f->out_dim() != 1) fail(ErrorCode::kConfig, "coefficient needs a scalar test function");
    if (spec.algorithms.empty()) fail(ErrorCode::kConfig, "algorithms must name the noise model");
    const std::string& alg = spec.algorithms.front();
    const EstimatorSpec est = EstimatorSpec::parse(alg, *b.model, b.noise_sigma);
    const CoefficientSettings cs = coefficient_settings(spec, b, est, opt);
    const auto t0 = std::chrono::steady_clock::now();
    const CoefficientResult cr = leading_coefficient(b, cs);
    drv.log("coefficient " + b.model->id() + " " + alg + " (" +
            format_double(std::round(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() * 10) /
                          10) +
            " s)");
    RunRecord r = drv.base_row(b, alg, &est);
    r.statistic = "C0";
    r.h = cs.h;
    r.T = 0.0;
    r.K = cr.K;
    r.burnin_T = cr.burnin_T;
    r.replicas = cr.replicas;
    r.value = cr.C0;
    r.stderr_ = cr.stderr_;
    if (!cr.convex) {
        r.flag = "nonconvex";
        drv.warn("model is not convex; the coefficient pipeline may be unstable");
    }
    res.tables.push_back({"", {r}});
    return res;
}

ExperimentResult run_select(const ExperimentSpec& spec, const RunOptions& opt) {
    ExperimentResult res;
    Driver drv(spec, opt, res, "select");
    const SelectSpec& s = spec.select;
    if (!(s.epsilon > 0.0) || s.d == 0 || s.N == 0 || s.p == 0)
        fail(ErrorCode::kConfig, "select needs epsilon, d, N, p > 0");
    const Selection sel = select_algorithm(s.epsilon, s.d, s.N, s.p);
    ExperimentResult::Table table;
    auto row = [&](const std::string& stat, double v) {
        RunRecord r;
        r.experiment = spec.name;
        r.algorithm = sel.choice();
        r.N = s.N;
        r.p = s.p;
        r.h = sel.h;
        r.T = sel.T;
        r.K = sel.K;
        r.seed = spec.seed;
        r.statistic = stat;
        r.value = v;
        r.flag = "binding=" + sel.binding + ";branch=" + sel.branch;
        table.rows.push_back(r);
    };
    row("h", sel.h);
    row("T", sel.T);
    row("K", static_cast<double>(sel.K));
    row("window_lo", sel.window_lo);
    row("window_hi", sel.window_hi);
    res.tables.push_back(std::move(table));
    return res;
}

ExperimentResult run_reference(const ExperimentSpec& spec, std::string& fixture, const RunOptions& opt) {
    ExperimentResult res;
    Driver drv(spec, opt, res, "reference");
    const Benchmark b = make_spec_benchmark(spec, spec.model);
    const auto t0 = std::chrono::steady_clock::now();
    const ReferenceMean ref = resolve_reference(spec, b, opt);
    drv.log("reference " + b.model->id() + " " + ref.method + " (" +
            format_double(std::round(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() * 10) /
                          10) +
            " s)");
    set_reference_info(res, ref);
    ReferenceFixture fx;
    fx.model = b.model->id();
    fx.model_seed = spec.model_seed;
    fx.ref = ref;
    fixture = format_reference_fixture(fx);
    ExperimentResult::Table table;
    for (std::size_t c = 0; c < ref.value.size(); ++c) {
        RunRecord r = drv.base_row(b, ref.method, nullptr);
        r.T = 0.0;
        r.burnin_T = 0.0;
        r.replicas = 0;
        r.statistic = ref.value.size() == 1 ? "reference" : "reference:" + std::to_string(c);
        r.value = ref.value[c];
        r.reference = ref.value[c];
        r.reference_error = ref.error_bound;
        table.rows.push_back(r);
    }
    res.tables.push_back(std::move(table));
    return res;
}

}  // namespace ubu
