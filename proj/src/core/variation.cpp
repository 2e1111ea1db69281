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

#include "ubu/variation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ubu/error.hpp"
#include "ubu/runner.hpp"
#include "ubu/stats.hpp"

namespace ubu {

VariationState VariationState::velocity(std::size_t d) {
    VariationState v;
    v.d = d;
    v.Q.assign(d * d, 0.0);
    v.P.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) v.P[i * d + i] = 1.0;
    v.Q2.assign(d * d * d, 0.0);
    v.P2.assign(d * d * d, 0.0);
    return v;
}

VariationState VariationState::position(std::size_t d) {
    VariationState v = velocity(d);
    std::swap(v.Q, v.P);
    return v;
}

namespace {

void half_flow_tangent(VariationState& var, double drift, double decay, bool second) {
    for (std::size_t i = 0; i < var.Q.size(); ++i) {
        var.Q[i] += drift * var.P[i];
        var.P[i] *= decay;
    }
    if (!second) return;
    for (std::size_t i = 0; i < var.Q2.size(); ++i) {
        var.Q2[i] += drift * var.P2[i];
        var.P2[i] *= decay;
    }
}

struct Workspace {
    std::vector<double> H, T;
};

Workspace& workspace(std::size_t d) {
    thread_local Workspace w;
    w.H.resize(d * d);
    w.T.resize(d * d * d);
    return w;
}

}  // namespace

void step_variation(VariationState& var, ConstVec y, const PotentialModel& u, double h, double M2, bool second) {
    const std::size_t d = var.d;
    require(y.size() == d && u.dim() == d, "variation dimension mismatch");
    const double drift = -0.5 * std::expm1(-h);  // (1 - e^{-2 (h/2)}) / 2
    const double decay = std::exp(-h);
    const double c = h / M2;
    half_flow_tangent(var, drift, decay, second);

    Workspace& w = workspace(d);
    u.hessian(y, w.H);
    if (second) {
        // P2 -= c [ T<Q,Q> + H Q2 ], both with the pre-kick Q, Q2
        u.third_contract(y, var.Q, w.T);
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t i = 0; i < d; ++i) {
                const double hki = w.H[k * d + i];
                if (hki == 0.0) continue;
                for (std::size_t mn = 0; mn < d * d; ++mn) w.T[k * d * d + mn] += hki * var.Q2[i * d * d + mn];
            }
        for (std::size_t i = 0; i < w.T.size(); ++i) var.P2[i] -= c * w.T[i];
    }
    // P -= c H Q
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t m = 0; m < d; ++m) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += w.H[k * d + i] * var.Q[i * d + m];
            var.P[k * d + m] -= c * s;
        }
    half_flow_tangent(var, drift, decay, second);
}

void step_with_variation(State& s, VariationState& var, const PotentialModel& u, const OuFlow& half, double h,
                         double M2, Stream& dyn, bool second) {
    thread_local std::vector<double> y, g;
    const std::size_t d = s.x.size();
    y.resize(d);
    g.resize(d);
    flow_u(s, half, dyn);
    std::copy(s.x.begin(), s.x.end(), y.begin());
    u.gradient(y, g);
    flow_b(s, h, M2, g);
    flow_u(s, half, dyn);
    for (std::size_t i = 0; i < d; ++i)
        if (!(std::fabs(s.x[i]) <= kDivergenceCap) || !(std::fabs(s.v[i]) <= kDivergenceCap))
            throw DivergenceError(0, "trajectory diverged while propagating variations");
    step_variation(var, y, u, h, M2, second);
}

std::uint64_t truncation_cap(const PotentialModel& u, double h, double M2) {
    const auto& c = u.constants();
    const double m = c.convex && c.m > 0.0 ? c.m : 1e-2;
    const double steps = 20.0 * 8.0 * M2 / m / h;
    return static_cast<std::uint64_t>(std::min(1e7, std::ceil(steps)));
}

PhiHessian hessian_phi0_vv(const PotentialModel& u, const TestFunction& f, double h, double M2, std::uint64_t K,
                           ConstVec x0, ConstVec v0, Stream& dyn, const TruncationRule& rule) {
    const std::size_t d = u.dim();
    if (f.out_dim() != 1) fail(ErrorCode::kInvalidArgument, "hessian_phi0_vv needs a scalar test function");
    require(x0.size() == d && v0.size() == d, "initial state dimension mismatch");
    State s{std::vector<double>(x0.begin(), x0.end()), std::vector<double>(v0.begin(), v0.end())};
    VariationState var = VariationState::velocity(d);
    const OuFlow half(0.5 * h, M2);
    const std::uint64_t cap = K > 0 ? K : (rule.k_max > 0 ? rule.k_max : truncation_cap(u, h, M2));
    PhiHessian out;
    out.H.assign(d * d, 0.0);
    std::vector<double> grad_f(d), hess_f(d * d), inc(d * d);
    std::uint32_t quiet = 0;
    for (std::uint64_t k = 0; k < cap; ++k) {
        f.jacobian(s.x, grad_f);
        f.hessian(s.x, 0, hess_f);
        double inc2 = 0.0, sum2 = 0.0;
        for (std::size_t m = 0; m < d; ++m)
            for (std::size_t n = 0; n < d; ++n) {
                double v = 0.0;
                for (std::size_t j = 0; j < d; ++j) v += var.Q2[(j * d + m) * d + n] * grad_f[j];
                for (std::size_t a = 0; a < d; ++a) {
                    double t = 0.0;
                    for (std::size_t b = 0; b < d; ++b) t += hess_f[a * d + b] * var.Q[b * d + n];
                    v += var.Q[a * d + m] * t;
                }
                inc[m * d + n] = v;
                out.H[m * d + n] += h * v;
                inc2 += v * v;
                sum2 += out.H[m * d + n] * out.H[m * d + n];
            }
        out.steps = k + 1;
        if (K == 0) {
            // increment per unit time against the accumulated sum
            quiet = std::sqrt(inc2) < rule.rel_tol * std::sqrt(sum2) ? quiet + 1 : 0;
            if (quiet >= rule.consecutive) break;
        }
        if (k + 1 == cap) break;
        step_with_variation(s, var, u, half, h, M2, dyn, true);
    }
    return out;
}

namespace {

// Tr(E(x0) H) for the chosen noise model.
double noise_trace(const Benchmark& b, const CoefficientSettings& s, ConstVec x0, const std::vector<double>& H) {
    const std::size_t d = b.model->dim();
    if (s.noise == NoiseKind::kGaussian) {
        double tr = 0.0;
        for (std::size_t i = 0; i < d; ++i) tr += H[i * d + i];
        return s.sigma * s.sigma * tr;
    }
    const std::size_t n = b.model->n_components();
    std::vector<double> g(d), gi(d);
    b.model->gradient(x0, g);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        b.model->component_gradient(i, x0, gi);
        for (std::size_t k = 0; k < d; ++k) gi[k] -= g[k];
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t l = 0; l < d; ++l) acc += gi[k] * H[k * d + l] * gi[l];
    }
    return acc / static_cast<double>(n);
}

}  // namespace

CoefficientResult leading_coefficient(const Benchmark& b, const CoefficientSettings& s) {
    const PotentialModel& u = *b.model;
    const TestFunction& f = *b.f;
    if (f.out_dim() != 1) fail(ErrorCode::kInvalidArgument, "leading coefficient needs a scalar test function");
    if (s.noise == NoiseKind::kFiniteSum && !u.finite_sum())
        fail(ErrorCode::kInvalidArgument, "finite-sum noise needs a finite-sum model");
    require(s.h > 0.0 && s.M2 > 0.0 && s.replicas >= 2 && s.chains >= 1, "bad coefficient settings");
    require(s.batch >= 1, "batch size must be >= 1");
    const std::size_t d = u.dim();
    const auto& mc = u.constants();
    CoefficientResult res;
    res.convex = mc.convex;
    const double m = mc.convex && mc.m > 0.0 ? mc.m : 1.0;
    res.burnin_T = s.burnin_T >= 0.0 ? s.burnin_T : 50.0 * s.M2 / m;

    const std::uint32_t experiment = fnv1a32("coefficient/" + u.id() + "/" + f.id());
    const std::uint64_t burn_steps = static_cast<std::uint64_t>(std::ceil(res.burnin_T / s.h));
    const std::uint64_t gap_steps = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(s.spacing_T / s.h)));
    const std::uint32_t per_chain = (s.replicas + s.chains - 1) / s.chains;
    const std::uint32_t total = per_chain * s.chains;
    const OuFlow half(0.5 * s.h, s.M2);

    // Starting points: `chains` independent stationary chains, sampled every gap.
    std::vector<std::vector<double>> x0s(total), v0s(total);
    parallel_for(s.chains, s.workers, [&](std::size_t c) {
        const auto cid = static_cast<std::uint32_t>(c);
        Stream cdyn(StreamKey{s.seed, experiment, cid, StreamPurpose::kAuxiliary});
        Stream cinit(StreamKey{s.seed, experiment, cid, StreamPurpose::kInitial});
        Integrator integ(b.model, StepConfig{s.h, s.M2}, make_estimator(EstimatorSpec{}, b.model));
        State st = default_initial(d, s.M2, cinit);
        Stream unused(StreamKey{s.seed, experiment, cid, StreamPurpose::kGradient});
        for (std::uint64_t k = 0; k < burn_steps; ++k) integ.step(st, cdyn, unused);
        for (std::uint32_t j = 0; j < per_chain; ++j) {
            for (std::uint64_t k = 0; k < gap_steps; ++k) integ.step(st, cdyn, unused);
            const std::size_t r = c * per_chain + j;
            x0s[r] = st.x;
            v0s[r].resize(d);
            for (double& v : v0s[r]) v = cinit.normal() / std::sqrt(s.M2);
        }
    });

    // Truncation length: pilot trajectories under the stopping rule, K = max.
    std::uint64_t K = s.K;
    if (K == 0) {
        const std::uint32_t pilots = std::min<std::uint32_t>(total, 16);
        std::vector<std::uint64_t> ks(pilots);
        parallel_for(pilots, s.workers, [&](std::size_t i) {
            Stream pdyn(StreamKey{s.seed, experiment ^ 0x9e3779b9u, static_cast<std::uint32_t>(i), StreamPurpose::kAuxiliary});
            ks[i] = hessian_phi0_vv(u, f, s.h, s.M2, 0, x0s[i], v0s[i], pdyn, s.rule).steps;
        });
        K = *std::max_element(ks.begin(), ks.end());
    }
    res.K = K;

    std::vector<double> vals(total);
    std::vector<std::vector<double>> hs(total);
    parallel_for(total, s.workers, [&](std::size_t r) {
        Stream dyn(StreamKey{s.seed, experiment, static_cast<std::uint32_t>(r), StreamPurpose::kDynamics});
        auto ph = hessian_phi0_vv(u, f, s.h, s.M2, K, x0s[r], v0s[r], dyn, s.rule);
        vals[r] = noise_trace(b, s, x0s[r], ph.H);
        hs[r] = std::move(ph.H);
    });
    const SampleSummary sm = summarize(vals);
    res.C0 = sm.mean;
    res.stderr_ = sm.stderr_;
    res.replicas = total;
    const double scale = 1.0 / (2.0 * s.M2 * s.M2 * static_cast<double>(s.noise == NoiseKind::kFiniteSum ? s.batch : 1));
    res.slope = res.C0 * scale;
    res.slope_stderr = res.stderr_ * scale;
    res.mean_hessian.assign(d * d, 0.0);
    for (const auto& H : hs)
        for (std::size_t i = 0; i < d * d; ++i) res.mean_hessian[i] += H[i] / static_cast<double>(total);
    return res;
}

// ---------------------------------------------------------------------------

std::vector<double> TwistedForm::matrix() const {
    const std::size_t n = 2 * d;
    std::vector<double> S(n * n, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        S[i * n + i] = 2.0;
        S[i * n + d + i] = 1.0;
        S[(d + i) * n + i] = 1.0;
        S[(d + i) * n + d + i] = 1.0;
    }
    return S;
}

std::vector<double> TwistedForm::sqrt_matrix() const {
    const std::size_t n = 2 * d;
    const double r = 1.0 / std::sqrt(5.0);
    std::vector<double> S(n * n, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        S[i * n + i] = 3.0 * r;
        S[i * n + d + i] = r;
        S[(d + i) * n + i] = r;
        S[(d + i) * n + d + i] = 2.0 * r;
    }
    return S;
}

double TwistedForm::max_eig(const std::vector<double>& Q, const std::vector<double>& P) const {
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const Mat> q(Q.data(), d, d), p(P.data(), d, d);
    const Eigen::MatrixXd form = 2.0 * q.transpose() * q + q.transpose() * p + p.transpose() * q + p.transpose() * p;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

ContractivityReport contractivity_diagnostic(const PotentialModel& u, double h, double M2, std::uint64_t K,
                                             const State& start, Stream& dyn) {
    using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const std::size_t d = u.dim();
    const auto& mc = u.constants();
    ContractivityReport rep;
    rep.applicable = mc.convex && mc.m > 0.0;
    rep.m = rep.applicable ? mc.m : 0.0;
    State s = start;
    VariationState var = VariationState::velocity(d);
    const OuFlow half(0.5 * h, M2);
    const TwistedForm tf(d);
    for (std::uint64_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * h;
        const double form_bound = 2.0 * std::exp(-rep.m * t / M2);
        const double norm_bound = std::sqrt(2.0) * std::exp(-rep.m * t / (2.0 * M2)) + 1e-9;
        const double lam = tf.max_eig(var.Q, var.P);
        Eigen::Map<const Mat> q(var.Q.data(), d, d);
        const Eigen::MatrixXd qm = q;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(qm);
        const double qnorm = svd.singularValues()(0);
        rep.worst_form_margin = std::max(rep.worst_form_margin, lam - form_bound);
        rep.worst_norm_margin = std::max(rep.worst_norm_margin, qnorm - norm_bound);
        if (lam > form_bound) ++rep.form_violations;
        if (qnorm > norm_bound) ++rep.norm_violations;
        rep.steps = k;
        if (k == K) break;
        step_with_variation(s, var, u, half, h, M2, dyn, false);
    }
    return rep;
}

}  // namespace ubu
