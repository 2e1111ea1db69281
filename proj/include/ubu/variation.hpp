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

// Derivatives of full-gradient UBU trajectories with respect to the initial
// velocity, and the first-order bias coefficient built from them.
//
// The variations are propagated with the exact tangent of the discrete step
// map, so they are the true derivatives of the simulated trajectory.

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ubu/benchmarks.hpp"
#include "ubu/integrator.hpp"

namespace ubu {

// Q = dX/dv0, P = dV/dv0 (d x d, row-major [component][direction]);
// Q2 = d^2 X / dv0^2, P2 = d^2 V / dv0^2 (d x d x d, [component][m][n]).
struct VariationState {
    std::size_t d = 0;
    std::vector<double> Q, P, Q2, P2;

    // Q = 0, P = I, second variations zero.
    static VariationState velocity(std::size_t d);
    // Q = I, P = 0, second variations zero.
    static VariationState position(std::size_t d);
};

// Tangent of one step U(h/2) B(h) U(h/2) with the kick evaluated at y.
// The kick uses the pre-kick Q and Q2. When `second` is false Q2/P2 are left alone.
void step_variation(VariationState& var, ConstVec y, const PotentialModel& u, double h, double M2,
                    bool second = true);

// One full-gradient step of (state, variation) in lock-step.
void step_with_variation(State& s, VariationState& var, const PotentialModel& u, const OuFlow& half, double h,
                         double M2, Stream& dyn, bool second = true);

struct TruncationRule {
    double rel_tol = 1e-3;         // increment rate vs accumulated sum
    std::uint32_t consecutive = 50;
    std::uint64_t k_max = 0;       // 0: derived from the model's decay rate
};

struct PhiHessian {
    std::vector<double> H;  // d x d
    std::uint64_t steps = 0;
};

// h sum_{k<K} [ Q2_k^T grad f(X_k) + Q_k^T hess f(X_k) Q_k ] along one
// trajectory from (x0, v0). With K = 0 the sum stops by `rule`.
PhiHessian hessian_phi0_vv(const PotentialModel& u, const TestFunction& f, double h, double M2, std::uint64_t K,
                           ConstVec x0, ConstVec v0, Stream& dyn, const TruncationRule& rule = {});

// Upper step cap from the slowest contraction rate m / (8 M2): 20 time constants.
std::uint64_t truncation_cap(const PotentialModel& u, double h, double M2);

enum class NoiseKind { kGaussian, kFiniteSum };

struct CoefficientSettings {
    NoiseKind noise = NoiseKind::kGaussian;
    double sigma = 0.0;          // Gaussian noise scale
    std::size_t batch = 1;       // mini-batch size p (finite-sum)
    double h = 1.0 / 128.0;
    double M2 = 1.0;
    std::uint64_t K = 0;         // 0: chosen from pilot trajectories by the truncation rule
    std::uint32_t replicas = 1024;
    std::uint32_t chains = 16;   // stationary chains supplying starting points
    double burnin_T = -1.0;      // < 0: 50 M2 / m
    double spacing_T = 2.0;      // time between consecutive starting points on a chain
    std::uint64_t seed = 1;
    unsigned workers = 0;
    TruncationRule rule{};
};

struct CoefficientResult {
    double C0 = 0.0;
    double stderr_ = 0.0;
    double slope = 0.0;         // predicted bias / h = C0 / (2 M2^2 p)
    double slope_stderr = 0.0;
    std::uint64_t K = 0;
    double burnin_T = 0.0;
    std::uint32_t replicas = 0;
    bool convex = true;
    std::vector<double> mean_hessian;  // replica mean of the estimate, d x d
};

// C0 = E Tr(E(x0) H) over stationary starting points x0, v0 ~ N(0, I / M2),
// with E(x0) = sigma^2 I (Gaussian) or (1/N) sum_i grad V_i grad V_i^T
// (finite sum, V_i = U_i - U). Requires a scalar test function.
CoefficientResult leading_coefficient(const Benchmark& b, const CoefficientSettings& s);

// S = [[2I, I], [I, I]] and its symmetric square root (1/sqrt 5)[[3I, I], [I, 2I]].
struct TwistedForm {
    std::size_t d;
    explicit TwistedForm(std::size_t d_) : d(d_) {}
    std::vector<double> matrix() const;       // 2d x 2d
    std::vector<double> sqrt_matrix() const;  // 2d x 2d
    // Largest eigenvalue of W^T S W for W = [Q; P].
    double max_eig(const std::vector<double>& Q, const std::vector<double>& P) const;
};

struct ContractivityReport {
    std::uint64_t steps = 0;
    std::uint64_t form_violations = 0;  // W^T S W above 2 e^{-m t / M2}
    std::uint64_t norm_violations = 0;  // |Q| above sqrt 2 e^{-m t / (2 M2)} + 1e-9
    double worst_form_margin = -1e300;  // max of lambda_max - bound
    double worst_norm_margin = -1e300;
    double m = 0.0;
    bool applicable = true;  // false for non-convex models
};

// Tracks the first variation from (Q, P) = (0, I) along K full-gradient steps
// and checks both bounds at every step (including t = 0).
ContractivityReport contractivity_diagnostic(const PotentialModel& u, double h, double M2, std::uint64_t K,
                                             const State& start, Stream& dyn);

}  // namespace ubu
