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

#include "ubu/integrator.hpp"

#include <cmath>
#include <string>

#include "ubu/error.hpp"

namespace ubu {

namespace {

// Below this duration t - (1 - e^{-2t}) + (1 - e^{-4t}) / 4 cancels badly.
constexpr double kSeriesCutoff = 0.5;

// t - (1 - e^{-2t}) + (1 - e^{-4t}) / 4 = sum_{n>=3} (-1)^{n+1} (2^{n-2} - 1) (2t)^n / n!
double xx_series(double t) {
    const double u = 2.0 * t;
    double term = u * u / 2.0, pow2 = 1.0, sum = 0.0;
    for (int n = 3; n < 80; ++n) {
        term *= u / n;
        pow2 *= 2.0;
        const double add = ((n & 1) ? 1.0 : -1.0) * (pow2 - 1.0) * term;
        sum += add;
        if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

OuCovariance ou_covariance(double t, double M2) {
    require(t >= 0.0, "OU duration must be non-negative");
    require(M2 > 0.0, "M2 must be positive");
    OuCovariance c;
    const double a = -std::expm1(-2.0 * t);  // 1 - e^{-2t}
    const double b = -std::expm1(-4.0 * t);  // 1 - e^{-4t}
    c.xx = t < kSeriesCutoff ? xx_series(t) : t - a + b / 4.0;
    c.xv = 0.5 * a * a;  // = a - b / 2
    c.vv = b;
    c.xx /= M2;
    c.xv /= M2;
    c.vv /= M2;
    return c;
}

OuFlow::OuFlow(double t_, double M2) : t(t_) {
    const OuCovariance c = ou_covariance(t, M2);
    decay = std::exp(-2.0 * t);
    drift = -0.5 * std::expm1(-2.0 * t);
    if (c.xx > 0.0) {
        l11 = std::sqrt(c.xx);
        l21 = c.xv / l11;
        const double r = c.vv - l21 * l21;
        l22 = r > 0.0 ? std::sqrt(r) : 0.0;
    }
}

void flow_u(State& s, const OuFlow& f, Stream& dyn, UNoise* noise) {
    const std::size_t d = s.x.size();
    if (noise) {
        noise->dx.resize(d);
        noise->dv.resize(d);
    }
    for (std::size_t i = 0; i < d; ++i) {
        const double z1 = dyn.normal();
        const double z2 = dyn.normal();
        const double dx = f.l11 * z1;
        const double dv = f.l21 * z1 + f.l22 * z2;
        s.x[i] += f.drift * s.v[i] + dx;
        s.v[i] = f.decay * s.v[i] + dv;
        if (noise) {
            noise->dx[i] = dx;
            noise->dv[i] = dv;
        }
    }
}

void flow_u(State& s, double t, double M2, Stream& dyn, UNoise* noise) {
    flow_u(s, OuFlow(t, M2), dyn, noise);
}

void flow_u_replay(State& s, const OuFlow& f, const UNoise& noise) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        s.x[i] += f.drift * s.v[i] + noise.dx[i];
        s.v[i] = f.decay * s.v[i] + noise.dv[i];
    }
}

void flow_b(State& s, double t, double M2, ConstVec g) {
    const double c = t / M2;
    for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] -= c * g[i];
}

Integrator::Integrator(std::shared_ptr<const PotentialModel> u, StepConfig cfg,
                       std::unique_ptr<GradientEstimator> estimator)
    : u_(std::move(u)), cfg_(cfg), est_(std::move(estimator)) {
    require(u_ != nullptr && est_ != nullptr, "integrator needs a model and an estimator");
    require(cfg_.h > 0.0 && std::isfinite(cfg_.h), "step size must be positive");
    require(cfg_.M2 > 0.0 && std::isfinite(cfg_.M2), "M2 must be positive");
    half_ = OuFlow(0.5 * cfg_.h, cfg_.M2);
    y_.resize(u_->dim());
    g_.resize(u_->dim());
}

void Integrator::reset() {
    est_->reset();
    meter_ = WorkMeter{};
    steps_ = 0;
}

void Integrator::step(State& s, Stream& dyn, Stream& grad, StepTrace* trace) {
    const std::uint64_t before = meter_.units;
    flow_u(s, half_, dyn, trace ? &trace->first : nullptr);
    y_.assign(s.x.begin(), s.x.end());
    est_->evaluate(y_, grad, g_, meter_);
    flow_b(s, cfg_.h, cfg_.M2, g_);
    flow_u(s, half_, dyn, trace ? &trace->second : nullptr);
    if (trace) {
        trace->y = y_;
        trace->gradient = g_;
        trace->work = meter_.units - before;
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!(std::fabs(s.x[i]) <= kDivergenceCap) || !(std::fabs(s.v[i]) <= kDivergenceCap))
            throw DivergenceError(steps_, "trajectory diverged at step " + std::to_string(steps_));
    }
    ++steps_;
}

State default_initial(std::size_t d, double M2, Stream& init) {
    require(M2 > 0.0, "M2 must be positive");
    State s{std::vector<double>(d, 0.0), std::vector<double>(d)};
    const double scale = 1.0 / std::sqrt(M2);
    for (double& v : s.v) v = scale * init.normal();
    return s;
}

RunStats simulate(Integrator& integ, State& s, std::uint64_t K, Stream& dyn, Stream& grad, const Observer& observe) {
    require(K >= 1, "simulate needs K >= 1");
    const std::uint64_t w0 = integ.work();
    for (std::uint64_t k = 0; k < K; ++k) {
        if (observe) observe(k, s.x, s.v);
        integ.step(s, dyn, grad);
    }
    return {K, integ.work() - w0};
}

}  // namespace ubu
