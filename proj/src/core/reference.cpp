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

#include "ubu/reference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "ubu/error.hpp"
#include "ubu/runner.hpp"

namespace ubu {

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {

using GL = boost::math::quadrature::gauss<double, 30>;

double box_radius(const PotentialModel& u, double tol) {
    double R = 12.0;
    const auto& c = u.constants();
    if (c.convex && c.m > 0.0) R = std::max(R, std::sqrt(2.0 * (-std::log(tol / 10.0) + 10.0) / c.m));
    return std::min(R, 60.0);
}

// Composite Gauss-Legendre nodes/weights on [-R, R] with `panels` equal panels.
void composite_rule(double R, int panels, std::vector<double>& nodes, std::vector<double>& weights) {
    const auto& a = GL::abscissa();
    const auto& w = GL::weights();
    nodes.clear();
    weights.clear();
    const double half = R / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = -R + (2 * p + 1) * half;
        for (std::size_t i = 0; i < a.size(); ++i) {
            nodes.push_back(mid - half * a[i]);
            weights.push_back(half * w[i]);
            if (a[i] != 0.0) {
                nodes.push_back(mid + half * a[i]);
                weights.push_back(half * w[i]);
            }
        }
    }
}

// Tensor-product integrals of exp(-(U - shift)) * [f_0, ..., f_{q-1}, 1].
std::vector<double> tensor_integrals(const PotentialModel& u, const TestFunction& f, double R, int panels,
                                     double shift) {
    const std::size_t d = u.dim(), q = f.out_dim();
    std::vector<double> nodes, weights;
    composite_rule(R, panels, nodes, weights);
    std::vector<CompensatedSum> acc(q + 1);
    std::vector<double> x(d), fx(q);
    auto visit = [&](double weight) {
        const double w = weight * std::exp(-(u.value(x) - shift));
        if (w == 0.0) return;
        f.value(x, fx);
        for (std::size_t c = 0; c < q; ++c) acc[c].add(w * fx[c]);
        acc[q].add(w);
    };
    if (d == 1) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            x[0] = nodes[i];
            visit(weights[i]);
        }
    } else {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = 0; j < nodes.size(); ++j) {
                x[0] = nodes[i];
                x[1] = nodes[j];
                visit(weights[i] * weights[j]);
            }
    }
    std::vector<double> out(q + 1);
    for (std::size_t c = 0; c <= q; ++c) out[c] = acc[c].value();
    return out;
}

}  // namespace

ReferenceMean reference_mean_quadrature(const PotentialModel& u, const TestFunction& f, double tol) {
    const std::size_t d = u.dim();
    if (d > 2) fail(ErrorCode::kInvalidArgument, "quadrature reference supports d <= 2; use the long-run reference");
    require(tol > 0.0, "quadrature tolerance must be positive");
    require(f.dim() == d, "test function and model dimensions differ");
    const double R = box_radius(u, tol);
    const double qtol = tol * 1e-2;
    const std::size_t q = f.out_dim();

    // Shift U by its minimum on a coarse grid so the weights stay O(1).
    double umin = std::numeric_limits<double>::infinity();
    const int coarse = d == 1 ? 4001 : 401;
    std::vector<double> x(d);
    if (d == 1) {
        for (int i = 0; i < coarse; ++i) {
            x[0] = -R + 2.0 * R * i / (coarse - 1);
            umin = std::min(umin, u.value(x));
        }
    } else {
        for (int i = 0; i < coarse; ++i)
            for (int j = 0; j < coarse; ++j) {
                x[0] = -R + 2.0 * R * i / (coarse - 1);
                x[1] = -R + 2.0 * R * j / (coarse - 1);
                umin = std::min(umin, u.value(x));
            }
    }

    ReferenceMean ref;
    ref.method = "quadrature";
    ref.value.resize(q);
    // Refine until two successive panel counts agree; the finer one is reported
    // and the difference is the error bound.
    int panels = d == 1 ? 16 : 8;
    const int max_panels = d == 1 ? 1024 : 128;
    std::vector<double> coarse_vals = tensor_integrals(u, f, R, panels, umin);
    double bound = std::numeric_limits<double>::infinity();
    for (;;) {
        const std::vector<double> fine = tensor_integrals(u, f, R, 2 * panels, umin);
        panels *= 2;
        bound = 0.0;
        for (std::size_t c = 0; c < q; ++c) {
            ref.value[c] = fine[c] / fine[q];
            const double prev = coarse_vals[c] / coarse_vals[q];
            bound = std::max(bound, std::abs(ref.value[c] - prev) + 1e-15 * std::max(1.0, std::abs(ref.value[c])));
        }
        coarse_vals = fine;
        if (bound <= qtol || panels >= max_panels) break;
    }
    ref.error_bound = bound;
    ref.settings = "gauss-legendre-30 box=" + format_double(R) + " panels=" + std::to_string(panels) +
                   " tol=" + format_double(tol);
    if (bound > tol) fail(ErrorCode::kState, "quadrature did not reach the requested tolerance");
    return ref;
}

ReferenceMean reference_mean_longrun(const Benchmark& b, const LongRunSettings& s) {
    require(s.h > 0.0 && s.T >= s.h && s.replicas >= 2, "bad long-run settings");
    const std::size_t q = b.f->out_dim();
    auto run = [&](double h) {
        ReplicaSpec spec;
        spec.model = b.model;
        spec.f = b.f;
        spec.estimator = EstimatorSpec{};
        spec.step = StepConfig{h, s.M2};
        spec.K = static_cast<std::uint64_t>(std::llround(s.T / h));
        spec.burnin = static_cast<std::uint64_t>(std::llround(s.burnin_T / h));
        spec.seed = s.seed;
        spec.experiment = fnv1a32("longrun/" + b.model->id() + "/" + format_double(h));
        const auto res = run_replicas(spec, 0, s.replicas, s.workers);
        std::vector<double> mean(q), se(q);
        for (std::size_t c = 0; c < q; ++c) {
            std::vector<double> xs;
            for (const auto& r : res) {
                if (r.diverged) throw DivergenceError(r.diverged_step, "long-run reference diverged");
                xs.push_back(r.mean[c]);
            }
            const auto sm = summarize(xs);
            mean[c] = sm.mean;
            se[c] = sm.stderr_;
        }
        return std::make_pair(mean, se);
    };
    const auto [fine, fine_se] = run(s.h);
    const auto [coarse, coarse_se] = run(2.0 * s.h);
    double se2 = 0.0, diff2 = 0.0;
    for (std::size_t c = 0; c < q; ++c) {
        se2 += fine_se[c] * fine_se[c];
        diff2 += (fine[c] - coarse[c]) * (fine[c] - coarse[c]);
    }
    ReferenceMean ref;
    ref.method = "longrun";
    ref.value = fine;
    ref.error_bound = 3.0 * std::sqrt(se2) + std::sqrt(diff2) / 3.0;
    ref.settings = "fg-ubu h=" + format_double(s.h) + " T=" + format_double(s.T) + " replicas=" +
                   std::to_string(s.replicas) + " burnin_T=" + format_double(s.burnin_T) + " M2=" + format_double(s.M2) +
                   " seed=" + std::to_string(s.seed);
    return ref;
}

ReferenceMean reference_mean_importance(const Benchmark& b, const ImportanceSettings& s) {
    require(s.samples >= 2 && s.block >= 1 && s.proposal_var > 0.0, "bad importance-sampling settings");
    const PotentialModel& u = *b.model;
    const TestFunction& f = *b.f;
    const std::size_t d = u.dim(), q = f.out_dim();
    const double sd = std::sqrt(s.proposal_var);
    const std::vector<double> origin(d, 0.0);
    const double lw0 = -u.value(origin);
    // Per block: sum w, sum w f_c, sum w^2, sum w^2 f_c, sum w^2 f_c^2.
    struct Sums {
        CompensatedSum w, w2;
        std::vector<CompensatedSum> wf, w2f, w2ff;
    };
    const std::uint64_t blocks = (s.samples + s.block - 1) / s.block;
    std::vector<Sums> parts(blocks);
    const std::uint32_t experiment = fnv1a32("importance/" + u.id());
    parallel_for(blocks, s.workers, [&](std::size_t bi) {
        Stream st(StreamKey{s.seed, experiment, static_cast<std::uint32_t>(bi), StreamPurpose::kAuxiliary});
        Sums& p = parts[bi];
        p.wf.resize(q);
        p.w2f.resize(q);
        p.w2ff.resize(q);
        std::vector<double> x(d), fx(q);
        const std::uint64_t n = std::min(s.block, s.samples - bi * s.block);
        for (std::uint64_t k = 0; k < n; ++k) {
            double r2 = 0.0;
            for (double& v : x) {
                v = sd * st.normal();
                r2 += v * v;
            }
            const double w = std::exp(-u.value(x) + 0.5 * r2 / s.proposal_var - lw0);
            f.value(x, fx);
            p.w.add(w);
            p.w2.add(w * w);
            for (std::size_t c = 0; c < q; ++c) {
                p.wf[c].add(w * fx[c]);
                p.w2f[c].add(w * w * fx[c]);
                p.w2ff[c].add(w * w * fx[c] * fx[c]);
            }
        }
    });
    Sums tot;
    tot.wf.resize(q);
    tot.w2f.resize(q);
    tot.w2ff.resize(q);
    for (const auto& p : parts) {
        tot.w.merge(p.w);
        tot.w2.merge(p.w2);
        for (std::size_t c = 0; c < q; ++c) {
            tot.wf[c].merge(p.wf[c]);
            tot.w2f[c].merge(p.w2f[c]);
            tot.w2ff[c].merge(p.w2ff[c]);
        }
    }
    ReferenceMean ref;
    ref.method = "importance";
    ref.value.resize(q);
    const double W = tot.w.value();
    double var = 0.0;
    for (std::size_t c = 0; c < q; ++c) {
        const double mu = tot.wf[c].value() / W;
        ref.value[c] = mu;
        const double num = tot.w2ff[c].value() - 2.0 * mu * tot.w2f[c].value() + mu * mu * tot.w2.value();
        var += std::max(0.0, num) / (W * W);
    }
    ref.error_bound = 3.0 * std::sqrt(var);
    ref.settings = "gaussian proposal var=" + format_double(s.proposal_var) + " samples=" + std::to_string(s.samples) +
                   " block=" + std::to_string(s.block) + " seed=" + std::to_string(s.seed) +
                   " ess_fraction=" + format_double(W * W / tot.w2.value() / static_cast<double>(s.samples));
    return ref;
}

// ---------------------------------------------------------------------------

std::string format_reference_fixture(const ReferenceFixture& fx) {
    std::ostringstream os;
    os << "ubu-reference " << kFixtureVersion << "\n";
    os << "model " << fx.model << "\n";
    os << "model_seed " << fx.model_seed << "\n";
    os << "method " << fx.ref.method << "\n";
    os << "settings " << fx.ref.settings << "\n";
    os << "error_bound " << format_double(fx.ref.error_bound) << "\n";
    os << "out_dim " << fx.ref.value.size() << "\n";
    os << "value";
    for (double v : fx.ref.value) os << ' ' << format_double(v);
    os << "\n";
    return os.str();
}

namespace {

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail(ErrorCode::kIo, "bad number for " + what + ": " + s);
    return v;
}

}  // namespace

ReferenceFixture parse_reference_fixture(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    ReferenceFixture fx;
    bool have_version = false, have_value = false;
    std::size_t out_dim = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (key == "ubu-reference") {
            if (rest != std::to_string(kFixtureVersion))
                fail(ErrorCode::kIo, "reference fixture version " + rest + " (expected " + std::to_string(kFixtureVersion) + ")");
            have_version = true;
        } else if (key == "model") {
            fx.model = rest;
        } else if (key == "model_seed") {
            fx.model_seed = std::stoull(rest);
        } else if (key == "method") {
            fx.ref.method = rest;
        } else if (key == "settings") {
            fx.ref.settings = rest;
        } else if (key == "error_bound") {
            fx.ref.error_bound = parse_double(rest, key);
        } else if (key == "out_dim") {
            out_dim = std::stoul(rest);
        } else if (key == "value") {
            std::istringstream vs(rest);
            std::string tok;
            while (vs >> tok) fx.ref.value.push_back(parse_double(tok, key));
            have_value = true;
        } else {
            fail(ErrorCode::kIo, "unknown key in reference fixture: " + key);
        }
    }
    if (!have_version) fail(ErrorCode::kIo, "reference fixture lacks a version line");
    if (!have_value || fx.ref.value.size() != out_dim) fail(ErrorCode::kIo, "reference fixture value count mismatch");
    return fx;
}

void write_reference_fixture(const std::string& path, const ReferenceFixture& fx) {
    std::ofstream os(path, std::ios::binary);
    if (!os) fail(ErrorCode::kIo, "cannot write " + path);
    os << format_reference_fixture(fx);
    if (!os) fail(ErrorCode::kIo, "write failed: " + path);
}

ReferenceFixture read_reference_fixture(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) fail(ErrorCode::kIo, "cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_reference_fixture(ss.str());
}

}  // namespace ubu
