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

// UBU splitting for dx = v dt, dv = -(1/M2) grad U dt - 2 v dt + (2/sqrt(M2)) dB.
//
// One step is U(h/2) B(h) U(h/2): an exact Ornstein-Uhlenbeck half step, a
// velocity kick -(h/M2) b(Y) at the midpoint position Y, and a second,
// independent OU half step.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "ubu/estimators.hpp"
#include "ubu/potential.hpp"
#include "ubu/rng.hpp"

namespace ubu {

struct State {
    std::vector<double> x;
    std::vector<double> v;
};

// Per-coordinate covariance of the OU increments (dx, dv) over duration t.
struct OuCovariance {
    double xx = 0.0, xv = 0.0, vv = 0.0;
};
OuCovariance ou_covariance(double t, double M2);

// Precomputed coefficients of the OU flow over a fixed duration.
struct OuFlow {
    double t = 0.0;
    double decay = 1.0;  // e^{-2t}
    double drift = 0.0;  // (1 - e^{-2t}) / 2
    // Lower Cholesky factor of the covariance.
    double l11 = 0.0, l21 = 0.0, l22 = 0.0;

    OuFlow() = default;
    OuFlow(double t, double M2);
};

struct UNoise {
    std::vector<double> dx;
    std::vector<double> dv;
};

// x += drift v + dx, v = decay v + dv. Draws (z1, z2) per coordinate in
// coordinate order with dx = l11 z1, dv = l21 z1 + l22 z2.
void flow_u(State& s, const OuFlow& flow, Stream& dyn, UNoise* noise = nullptr);
void flow_u(State& s, double t, double M2, Stream& dyn, UNoise* noise = nullptr);
// Applies recorded increments instead of drawing.
void flow_u_replay(State& s, const OuFlow& flow, const UNoise& noise);

// v -= (t / M2) g
void flow_b(State& s, double t, double M2, ConstVec g);

struct StepConfig {
    double h = 0.1;
    double M2 = 1.0;
};

struct StepTrace {
    std::vector<double> y;         // midpoint position where b was evaluated
    std::vector<double> gradient;  // b(y) used for the kick
    UNoise first, second;
    std::uint64_t work = 0;
};

// Absolute cap on any state entry before a trajectory is declared diverged.
inline constexpr double kDivergenceCap = 1e12;

class Integrator {
public:
    Integrator(std::shared_ptr<const PotentialModel> u, StepConfig cfg, std::unique_ptr<GradientEstimator> estimator);

    const StepConfig& config() const { return cfg_; }
    const PotentialModel& model() const { return *u_; }
    GradientEstimator& estimator() { return *est_; }
    const OuFlow& half_flow() const { return half_; }

    // Advances one step. `dyn` feeds the OU flows and `grad` the estimator.
    // Throws DivergenceError when the new state is non-finite or above the cap.
    void step(State& s, Stream& dyn, Stream& grad, StepTrace* trace = nullptr);

    std::uint64_t work() const { return meter_.units; }
    std::uint64_t steps() const { return steps_; }
    // New trajectory: estimator state, work and step counters are cleared.
    void reset();

private:
    std::shared_ptr<const PotentialModel> u_;
    StepConfig cfg_;
    std::unique_ptr<GradientEstimator> est_;
    OuFlow half_;
    WorkMeter meter_;
    std::uint64_t steps_ = 0;
    std::vector<double> y_, g_;
};

// X_0 = 0, V_0 ~ N(0, I / M2).
State default_initial(std::size_t d, double M2, Stream& init);

// Called with (k, X_k, V_k) for k = 0..K-1 before step k is taken.
using Observer = std::function<void(std::uint64_t, ConstVec, ConstVec)>;

struct RunStats {
    std::uint64_t steps = 0;
    std::uint64_t work = 0;
};

// Runs K steps from `s` (modified in place).
RunStats simulate(Integrator& integ, State& s, std::uint64_t K, Stream& dyn, Stream& grad, const Observer& observe);

}  // namespace ubu
