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

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace ubu {

using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

// Bounds used by diagnostics only; integrators never read them.
struct ModelConstants {
    double m = 0.0;      // lower Hessian bound (0 when non-convex)
    double M1 = 0.0;     // gradient growth: |grad U_i(x)| <= M1 sqrt(|x|^2 + d)
    double M2 = 0.0;     // upper Hessian bound
    double M3 = 0.0;     // third-derivative bound
    double sigma = 0.0;  // gradient-noise scale
    bool convex = true;
    double min_hessian_eig = 0.0;  // raw minimum over the probe set (may be < 0)
    std::string probe;             // how the constants were obtained
};

// Target potential U : R^d -> R, optionally a finite sum U = (1/N) sum_i U_i.
//
// Matrices are row-major d x d; third-order tensors are row-major d x d x d
// with index order [k][m][n]. All evaluators are const and thread-safe.
class PotentialModel {
public:
    virtual ~PotentialModel() = default;

    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::size_t n_components() const { return 1; }
    virtual bool finite_sum() const { return false; }

    virtual double value(ConstVec x) const = 0;
    virtual void gradient(ConstVec x, MutVec g) const = 0;
    virtual void hessian(ConstVec x, MutVec H) const = 0;
    // Full third-derivative tensor T_{ijk} = d^3 U / dx_i dx_j dx_k.
    virtual void third(ConstVec x, MutVec T) const = 0;

    // (T<Q,Q>)_{kmn} = sum_ij T_{ijk} Q_{im} Q_{jn}.
    virtual void third_contract(ConstVec x, ConstVec Q, MutVec out) const;

    virtual void component_gradient(std::size_t i, ConstVec x, MutVec g) const;
    virtual void component_hessian(std::size_t i, ConstVec x, MutVec H) const;
    virtual double component_value(std::size_t i, ConstVec x) const;

    // Computed on first use, then cached.
    const ModelConstants& constants() const;

protected:
    virtual ModelConstants compute_constants() const = 0;

private:
    mutable std::once_flag constants_once_;
    mutable ModelConstants constants_;
};

// Scalar or vector-valued test function f : R^d -> R^q.
class TestFunction {
public:
    virtual ~TestFunction() = default;

    virtual std::string id() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::size_t out_dim() const { return 1; }

    virtual void value(ConstVec x, MutVec out) const = 0;
    // Jacobian, row-major out_dim x d.
    virtual void jacobian(ConstVec x, MutVec J) const = 0;
    // Hessian of output component c, row-major d x d.
    virtual void hessian(ConstVec x, std::size_t c, MutVec H) const = 0;

    double scalar(ConstVec x) const;
};

// One-dimensional profiles g(s) applied along a direction: scale * g(w.x + shift).
enum class Profile {
    kSin,       // sin s
    kCos,       // cos s
    kGauss,     // exp(-s^2 / 2)
    kWell,      // 16 exp(-s^2/2) - 8 cos s - 4 sin 2s
};

// g, g', g'', g''' at s.
std::array<double, 4> profile_derivatives(Profile p, double s);
double profile_value(Profile p, double s);

// A flat list of ridge terms sharing the ambient dimension.
class RidgeSet {
public:
    explicit RidgeSet(std::size_t dim = 0) : dim_(dim) {}

    void add(double scale, std::vector<double> direction, double shift, Profile profile);
    std::size_t size() const { return scale_.size(); }
    std::size_t dim() const { return dim_; }

    double scale(std::size_t t) const { return scale_[t]; }
    double shift(std::size_t t) const { return shift_[t]; }
    Profile profile(std::size_t t) const { return profile_[t]; }
    ConstVec direction(std::size_t t) const { return {dir_.data() + t * dim_, dim_}; }

    // Each accumulator adds (weight * term) into the output over [begin, end).
    double value(ConstVec x, std::size_t begin, std::size_t end) const;
    void add_gradient(ConstVec x, double weight, MutVec g, std::size_t begin, std::size_t end) const;
    void add_hessian(ConstVec x, double weight, MutVec H, std::size_t begin, std::size_t end) const;
    void add_third(ConstVec x, double weight, MutVec T, std::size_t begin, std::size_t end) const;
    void add_third_contract(ConstVec x, ConstVec Q, double weight, MutVec out,
                            std::size_t begin, std::size_t end) const;

private:
    double argument(ConstVec x, std::size_t t) const;

    std::size_t dim_;
    std::vector<double> scale_;
    std::vector<double> shift_;
    std::vector<Profile> profile_;
    std::vector<double> dir_;
};

// U_i(x) = 1/2 x^T diag(a_i) x + c_i^T x + base ridges + component ridges,
// with a shared diagonal quadratic and optional per-component diag/linear terms.
//
// When `components_mean_zero` is set the per-component parts average to zero
// identically, so the full gradient is evaluated from the shared part alone.
class RidgePotential : public PotentialModel {
public:
    struct Component {
        std::vector<double> diag;    // empty => none
        std::vector<double> linear;  // empty => none
        RidgeSet terms;
    };

    using ConstantsFn = std::function<ModelConstants(const RidgePotential&)>;

    RidgePotential(std::string id, std::vector<double> base_diag, RidgeSet base_terms,
                   std::vector<Component> components, bool components_mean_zero,
                   ConstantsFn constants_fn);

    std::string id() const override { return id_; }
    std::size_t dim() const override { return dim_; }
    std::size_t n_components() const override { return components_.empty() ? 1 : components_.size(); }
    bool finite_sum() const override { return !components_.empty(); }

    double value(ConstVec x) const override;
    void gradient(ConstVec x, MutVec g) const override;
    void hessian(ConstVec x, MutVec H) const override;
    void third(ConstVec x, MutVec T) const override;
    void third_contract(ConstVec x, ConstVec Q, MutVec out) const override;

    void component_gradient(std::size_t i, ConstVec x, MutVec g) const override;
    void component_hessian(std::size_t i, ConstVec x, MutVec H) const override;
    double component_value(std::size_t i, ConstVec x) const override;

    const std::vector<double>& base_diag() const { return base_diag_; }
    const RidgeSet& base_terms() const { return base_terms_; }
    const Component& component(std::size_t i) const { return components_.at(i); }
    bool components_mean_zero() const { return mean_zero_; }

protected:
    ModelConstants compute_constants() const override;

private:
    void add_component_gradient(std::size_t i, ConstVec x, double w, MutVec g) const;
    void add_component_hessian(std::size_t i, ConstVec x, double w, MutVec H) const;

    std::string id_;
    std::size_t dim_;
    std::vector<double> base_diag_;
    RidgeSet base_terms_;
    std::vector<Component> components_;
    bool mean_zero_;
    ConstantsFn constants_fn_;
};

// Scalar test function built from a ridge sum (plus optional diagonal quadratic).
class RidgeTestFunction : public TestFunction {
public:
    RidgeTestFunction(std::string id, std::vector<double> diag, RidgeSet terms);

    std::string id() const override { return id_; }
    std::size_t dim() const override { return terms_.dim(); }
    void value(ConstVec x, MutVec out) const override;
    void jacobian(ConstVec x, MutVec J) const override;
    void hessian(ConstVec x, std::size_t c, MutVec H) const override;

private:
    std::string id_;
    std::vector<double> diag_;
    RidgeSet terms_;
};

// Constants by probing a point set: min/max Hessian eigenvalue, max third
// derivative norm (spectral-norm upper bound via Frobenius for d > 1),
// gradient-growth and finite-sum deviation bounds.
ModelConstants probe_constants(const PotentialModel& model, const std::vector<std::vector<double>>& points,
                               double sigma, const std::string& description);

}  // namespace ubu
