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

#include "ubu/potential.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ubu/error.hpp"
#include "ubu/rng.hpp"

namespace ubu {

// ---------------------------------------------------------------------------
// PotentialModel defaults

void PotentialModel::third_contract(ConstVec x, ConstVec Q, MutVec out) const {
    const std::size_t d = dim();
    std::vector<double> T(d * d * d);
    third(x, T);
    std::fill(out.begin(), out.end(), 0.0);
    // tmp_{jkm} = sum_i T_{ijk} Q_{im}
    std::vector<double> tmp(d * d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t k = 0; k < d; ++k) {
                const double t = T[(i * d + j) * d + k];
                if (t == 0.0) continue;
                for (std::size_t m = 0; m < d; ++m) tmp[(j * d + k) * d + m] += t * Q[i * d + m];
            }
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t m = 0; m < d; ++m) {
                const double t = tmp[(j * d + k) * d + m];
                for (std::size_t n = 0; n < d; ++n) out[(k * d + m) * d + n] += t * Q[j * d + n];
            }
}

void PotentialModel::component_gradient(std::size_t i, ConstVec x, MutVec g) const {
    require(i < n_components(), "component index out of range");
    gradient(x, g);
}

void PotentialModel::component_hessian(std::size_t i, ConstVec x, MutVec H) const {
    require(i < n_components(), "component index out of range");
    hessian(x, H);
}

double PotentialModel::component_value(std::size_t i, ConstVec x) const {
    require(i < n_components(), "component index out of range");
    return value(x);
}

const ModelConstants& PotentialModel::constants() const {
    std::call_once(constants_once_, [this] { constants_ = compute_constants(); });
    return constants_;
}

double TestFunction::scalar(ConstVec x) const {
    require(out_dim() == 1, "scalar() called on a vector-valued test function");
    double out = 0.0;
    value(x, MutVec(&out, 1));
    return out;
}

// ---------------------------------------------------------------------------
// Ridge profiles

std::array<double, 4> profile_derivatives(Profile p, double s) {
    switch (p) {
        case Profile::kSin: {
            const double sn = std::sin(s), cs = std::cos(s);
            return {sn, cs, -sn, -cs};
        }
        case Profile::kCos: {
            const double sn = std::sin(s), cs = std::cos(s);
            return {cs, -sn, -cs, sn};
        }
        case Profile::kGauss: {
            const double e = std::exp(-0.5 * s * s);
            return {e, -s * e, (s * s - 1.0) * e, (3.0 * s - s * s * s) * e};
        }
        case Profile::kWell: {
            const double e = std::exp(-0.5 * s * s);
            const double sn = std::sin(s), cs = std::cos(s);
            const double s2 = 2.0 * sn * cs, c2 = cs * cs - sn * sn;
            return {16.0 * e - 8.0 * cs - 4.0 * s2,
                    -16.0 * s * e + 8.0 * sn - 8.0 * c2,
                    16.0 * (s * s - 1.0) * e + 8.0 * cs + 16.0 * s2,
                    16.0 * (3.0 * s - s * s * s) * e - 8.0 * sn + 32.0 * c2};
        }
    }
    return {0, 0, 0, 0};
}

double profile_value(Profile p, double s) {
    switch (p) {
        case Profile::kSin: return std::sin(s);
        case Profile::kCos: return std::cos(s);
        case Profile::kGauss: return std::exp(-0.5 * s * s);
        case Profile::kWell: return 16.0 * std::exp(-0.5 * s * s) - 8.0 * std::cos(s) - 4.0 * std::sin(2.0 * s);
    }
    return 0.0;
}

namespace {

// First derivative only; this is the hot path of every gradient evaluation.
inline double profile_slope(Profile p, double s) {
    switch (p) {
        case Profile::kSin: return std::cos(s);
        case Profile::kCos: return -std::sin(s);
        case Profile::kGauss: return -s * std::exp(-0.5 * s * s);
        case Profile::kWell: {
            const double sn = std::sin(s);
            return -16.0 * s * std::exp(-0.5 * s * s) + 8.0 * sn - 8.0 * (1.0 - 2.0 * sn * sn);
        }
    }
    return 0.0;
}

inline double profile_curvature(Profile p, double s) {
    return profile_derivatives(p, s)[2];
}

}  // namespace

// ---------------------------------------------------------------------------
// RidgeSet

void RidgeSet::add(double scale, std::vector<double> direction, double shift, Profile profile) {
    require(direction.size() == dim_, "ridge direction has wrong dimension");
    scale_.push_back(scale);
    shift_.push_back(shift);
    profile_.push_back(profile);
    dir_.insert(dir_.end(), direction.begin(), direction.end());
}

double RidgeSet::argument(ConstVec x, std::size_t t) const {
    const double* w = dir_.data() + t * dim_;
    double s = shift_[t];
    for (std::size_t i = 0; i < dim_; ++i) s += w[i] * x[i];
    return s;
}

double RidgeSet::value(ConstVec x, std::size_t begin, std::size_t end) const {
    double u = 0.0;
    for (std::size_t t = begin; t < end; ++t) u += scale_[t] * profile_value(profile_[t], argument(x, t));
    return u;
}

void RidgeSet::add_gradient(ConstVec x, double weight, MutVec g, std::size_t begin, std::size_t end) const {
    for (std::size_t t = begin; t < end; ++t) {
        const double c = weight * scale_[t] * profile_slope(profile_[t], argument(x, t));
        const double* w = dir_.data() + t * dim_;
        for (std::size_t i = 0; i < dim_; ++i) g[i] += c * w[i];
    }
}

void RidgeSet::add_hessian(ConstVec x, double weight, MutVec H, std::size_t begin, std::size_t end) const {
    for (std::size_t t = begin; t < end; ++t) {
        const double c = weight * scale_[t] * profile_curvature(profile_[t], argument(x, t));
        const double* w = dir_.data() + t * dim_;
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t j = 0; j < dim_; ++j) H[i * dim_ + j] += c * w[i] * w[j];
    }
}

void RidgeSet::add_third(ConstVec x, double weight, MutVec T, std::size_t begin, std::size_t end) const {
    const std::size_t d = dim_;
    for (std::size_t t = begin; t < end; ++t) {
        const double c = weight * scale_[t] * profile_derivatives(profile_[t], argument(x, t))[3];
        const double* w = dir_.data() + t * d;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) T[(i * d + j) * d + k] += c * w[i] * w[j] * w[k];
    }
}

void RidgeSet::add_third_contract(ConstVec x, ConstVec Q, double weight, MutVec out, std::size_t begin,
                                  std::size_t end) const {
    const std::size_t d = dim_;
    std::array<double, 16> small{};
    std::vector<double> big;
    double* a = small.data();
    if (d > small.size()) {
        big.resize(d);
        a = big.data();
    }
    for (std::size_t t = begin; t < end; ++t) {
        const double c = weight * scale_[t] * profile_derivatives(profile_[t], argument(x, t))[3];
        const double* w = dir_.data() + t * d;
        // a = Q^T w
        for (std::size_t m = 0; m < d; ++m) {
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i) s += w[i] * Q[i * d + m];
            a[m] = s;
        }
        for (std::size_t k = 0; k < d; ++k)
            for (std::size_t m = 0; m < d; ++m) {
                const double ckm = c * w[k] * a[m];
                for (std::size_t n = 0; n < d; ++n) out[(k * d + m) * d + n] += ckm * a[n];
            }
    }
}

// ---------------------------------------------------------------------------
// RidgePotential

RidgePotential::RidgePotential(std::string id, std::vector<double> base_diag, RidgeSet base_terms,
                               std::vector<Component> components, bool components_mean_zero,
                               ConstantsFn constants_fn)
    : id_(std::move(id)),
      dim_(base_diag.size()),
      base_diag_(std::move(base_diag)),
      base_terms_(std::move(base_terms)),
      components_(std::move(components)),
      mean_zero_(components_mean_zero),
      constants_fn_(std::move(constants_fn)) {
    require(dim_ >= 1, "potential dimension must be >= 1");
    require(base_terms_.dim() == dim_ || base_terms_.size() == 0, "base ridge dimension mismatch");
    for (const auto& c : components_) {
        require(c.diag.empty() || c.diag.size() == dim_, "component diag dimension mismatch");
        require(c.linear.empty() || c.linear.size() == dim_, "component linear dimension mismatch");
        require(c.terms.dim() == dim_ || c.terms.size() == 0, "component ridge dimension mismatch");
    }
}

double RidgePotential::value(ConstVec x) const {
    double u = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) u += 0.5 * base_diag_[i] * x[i] * x[i];
    u += base_terms_.value(x, 0, base_terms_.size());
    if (!components_.empty() && !mean_zero_) {
        double acc = 0.0;
        for (std::size_t c = 0; c < components_.size(); ++c) {
            const auto& comp = components_[c];
            for (std::size_t i = 0; i < comp.diag.size(); ++i) acc += 0.5 * comp.diag[i] * x[i] * x[i];
            for (std::size_t i = 0; i < comp.linear.size(); ++i) acc += comp.linear[i] * x[i];
            acc += comp.terms.value(x, 0, comp.terms.size());
        }
        u += acc / static_cast<double>(components_.size());
    }
    return u;
}

void RidgePotential::add_component_gradient(std::size_t i, ConstVec x, double w, MutVec g) const {
    const auto& comp = components_[i];
    for (std::size_t k = 0; k < comp.diag.size(); ++k) g[k] += w * comp.diag[k] * x[k];
    for (std::size_t k = 0; k < comp.linear.size(); ++k) g[k] += w * comp.linear[k];
    comp.terms.add_gradient(x, w, g, 0, comp.terms.size());
}

void RidgePotential::add_component_hessian(std::size_t i, ConstVec x, double w, MutVec H) const {
    const auto& comp = components_[i];
    for (std::size_t k = 0; k < comp.diag.size(); ++k) H[k * dim_ + k] += w * comp.diag[k];
    comp.terms.add_hessian(x, w, H, 0, comp.terms.size());
}

void RidgePotential::gradient(ConstVec x, MutVec g) const {
    for (std::size_t i = 0; i < dim_; ++i) g[i] = base_diag_[i] * x[i];
    base_terms_.add_gradient(x, 1.0, g, 0, base_terms_.size());
    if (!components_.empty() && !mean_zero_) {
        const double w = 1.0 / static_cast<double>(components_.size());
        for (std::size_t c = 0; c < components_.size(); ++c) add_component_gradient(c, x, w, g);
    }
}

void RidgePotential::hessian(ConstVec x, MutVec H) const {
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < dim_; ++i) H[i * dim_ + i] = base_diag_[i];
    base_terms_.add_hessian(x, 1.0, H, 0, base_terms_.size());
    if (!components_.empty() && !mean_zero_) {
        const double w = 1.0 / static_cast<double>(components_.size());
        for (std::size_t c = 0; c < components_.size(); ++c) add_component_hessian(c, x, w, H);
    }
}

void RidgePotential::third(ConstVec x, MutVec T) const {
    std::fill(T.begin(), T.end(), 0.0);
    base_terms_.add_third(x, 1.0, T, 0, base_terms_.size());
    if (!components_.empty() && !mean_zero_) {
        const double w = 1.0 / static_cast<double>(components_.size());
        for (const auto& comp : components_) comp.terms.add_third(x, w, T, 0, comp.terms.size());
    }
}

void RidgePotential::third_contract(ConstVec x, ConstVec Q, MutVec out) const {
    std::fill(out.begin(), out.end(), 0.0);
    base_terms_.add_third_contract(x, Q, 1.0, out, 0, base_terms_.size());
    if (!components_.empty() && !mean_zero_) {
        const double w = 1.0 / static_cast<double>(components_.size());
        for (const auto& comp : components_) comp.terms.add_third_contract(x, Q, w, out, 0, comp.terms.size());
    }
}

void RidgePotential::component_gradient(std::size_t i, ConstVec x, MutVec g) const {
    if (components_.empty()) {
        PotentialModel::component_gradient(i, x, g);
        return;
    }
    for (std::size_t k = 0; k < dim_; ++k) g[k] = base_diag_[k] * x[k];
    base_terms_.add_gradient(x, 1.0, g, 0, base_terms_.size());
    add_component_gradient(i, x, 1.0, g);
}

void RidgePotential::component_hessian(std::size_t i, ConstVec x, MutVec H) const {
    if (components_.empty()) {
        PotentialModel::component_hessian(i, x, H);
        return;
    }
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t k = 0; k < dim_; ++k) H[k * dim_ + k] = base_diag_[k];
    base_terms_.add_hessian(x, 1.0, H, 0, base_terms_.size());
    add_component_hessian(i, x, 1.0, H);
}

double RidgePotential::component_value(std::size_t i, ConstVec x) const {
    if (components_.empty()) return PotentialModel::component_value(i, x);
    const auto& comp = components_.at(i);
    double u = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
        const double a = base_diag_[k] + (comp.diag.empty() ? 0.0 : comp.diag[k]);
        u += 0.5 * a * x[k] * x[k];
        if (!comp.linear.empty()) u += comp.linear[k] * x[k];
    }
    u += base_terms_.value(x, 0, base_terms_.size());
    u += comp.terms.value(x, 0, comp.terms.size());
    return u;
}

ModelConstants RidgePotential::compute_constants() const {
    if (constants_fn_) return constants_fn_(*this);
    // Fallback probe: 512 points drawn from N(0, 4 I) with a fixed stream.
    Stream s(StreamKey{0x5eedULL, 0, 0, StreamPurpose::kModel});
    std::vector<std::vector<double>> pts(512, std::vector<double>(dim_));
    for (auto& p : pts)
        for (auto& v : p) v = 2.0 * s.normal();
    return probe_constants(*this, pts, 0.0, "512 points ~ N(0, 4I)");
}

// ---------------------------------------------------------------------------
// RidgeTestFunction

RidgeTestFunction::RidgeTestFunction(std::string id, std::vector<double> diag, RidgeSet terms)
    : id_(std::move(id)), diag_(std::move(diag)), terms_(std::move(terms)) {
    require(diag_.empty() || diag_.size() == terms_.dim(), "test function diag dimension mismatch");
}

void RidgeTestFunction::value(ConstVec x, MutVec out) const {
    double f = terms_.value(x, 0, terms_.size());
    for (std::size_t i = 0; i < diag_.size(); ++i) f += 0.5 * diag_[i] * x[i] * x[i];
    out[0] = f;
}

void RidgeTestFunction::jacobian(ConstVec x, MutVec J) const {
    std::fill(J.begin(), J.end(), 0.0);
    for (std::size_t i = 0; i < diag_.size(); ++i) J[i] = diag_[i] * x[i];
    terms_.add_gradient(x, 1.0, J, 0, terms_.size());
}

void RidgeTestFunction::hessian(ConstVec x, std::size_t c, MutVec H) const {
    require(c == 0, "scalar test function has a single output");
    const std::size_t d = terms_.dim();
    std::fill(H.begin(), H.end(), 0.0);
    for (std::size_t i = 0; i < diag_.size(); ++i) H[i * d + i] = diag_[i];
    terms_.add_hessian(x, 1.0, H, 0, terms_.size());
}

// ---------------------------------------------------------------------------

ModelConstants probe_constants(const PotentialModel& model, const std::vector<std::vector<double>>& points,
                               double sigma, const std::string& description) {
    const std::size_t d = model.dim();
    const std::size_t n = model.n_components();
    ModelConstants c;
    c.probe = description;
    double min_eig = std::numeric_limits<double>::infinity();
    double max_eig = -std::numeric_limits<double>::infinity();
    double max_third = 0.0, max_growth = 0.0, max_dev = 0.0;
    std::vector<double> H(d * d), T(d * d * d), g(d), gi(d);
    for (const auto& x : points) {
        model.hessian(x, H);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Hm(H.data(), d, d);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hm, Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        max_eig = std::max(max_eig, es.eigenvalues().maxCoeff());
        model.third(x, T);
        double fro = 0.0;
        for (double t : T) fro += t * t;
        max_third = std::max(max_third, std::sqrt(fro));
        double xx = 0.0;
        for (double v : x) xx += v * v;
        const double scale = std::sqrt(xx + static_cast<double>(d));
        model.gradient(x, g);
        double dev8 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            model.component_gradient(i, x, gi);
            double norm2 = 0.0, dev2 = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                norm2 += gi[k] * gi[k];
                dev2 += (gi[k] - g[k]) * (gi[k] - g[k]);
            }
            max_growth = std::max(max_growth, std::sqrt(norm2) / scale);
            dev8 += dev2 * dev2 * dev2 * dev2;
        }
        if (model.finite_sum()) max_dev = std::max(max_dev, std::pow(dev8 / static_cast<double>(n), 0.25));
    }
    c.min_hessian_eig = min_eig;
    c.convex = min_eig > 0.0;
    c.m = std::max(0.0, min_eig);
    c.M2 = max_eig;
    c.M3 = max_third;
    c.M1 = max_growth;
    c.sigma = model.finite_sum() ? std::sqrt(max_dev / static_cast<double>(d)) : sigma;
    return c;
}

}  // namespace ubu
