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

#include "ubu/stats.hpp"

#include "ubu/error.hpp"

namespace ubu {

void TimeAverageAccumulator::add(ConstVec fx) {
    if (fx.size() != sums_.size()) fail(ErrorCode::kDimensionMismatch, "accumulator dimension mismatch");
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].add(fx[i]);
    ++count_;
}

void TimeAverageAccumulator::add(double fx) {
    if (sums_.size() != 1) fail(ErrorCode::kDimensionMismatch, "scalar add on a vector accumulator");
    sums_[0].add(fx);
    ++count_;
}

void TimeAverageAccumulator::merge(const TimeAverageAccumulator& o) {
    if (o.sums_.size() != sums_.size()) fail(ErrorCode::kDimensionMismatch, "accumulator dimension mismatch");
    for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].merge(o.sums_[i]);
    count_ += o.count_;
}

std::vector<double> TimeAverageAccumulator::mean() const {
    if (count_ == 0) fail(ErrorCode::kState, "mean of an empty accumulator");
    std::vector<double> m(sums_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = sums_[i].value() / static_cast<double>(count_);
    return m;
}

SampleSummary summarize(const std::vector<double>& xs) {
    SampleSummary s;
    s.n = xs.size();
    if (xs.empty()) return s;
    CompensatedSum sum;
    for (double x : xs) sum.add(x);
    s.mean = sum.value() / static_cast<double>(s.n);
    if (s.n >= 2) {
        CompensatedSum ss;
        for (double x : xs) ss.add((x - s.mean) * (x - s.mean));
        s.sd = std::sqrt(ss.value() / static_cast<double>(s.n - 1));
        s.stderr_ = s.sd / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

namespace {

void check_dims(const std::vector<std::vector<double>>& reps, const ReferenceMean& ref) {
    if (reps.empty()) fail(ErrorCode::kInvalidArgument, "no replicas");
    for (const auto& r : reps)
        if (r.size() != ref.value.size()) fail(ErrorCode::kDimensionMismatch, "replica/reference dimension mismatch");
}

}  // namespace

BiasEstimate estimate_bias(const std::vector<std::vector<double>>& replica_means, const ReferenceMean& ref) {
    check_dims(replica_means, ref);
    std::vector<double> e;
    e.reserve(replica_means.size());
    for (const auto& r : replica_means) {
        if (r.size() == 1) {
            e.push_back(r[0] - ref.value[0]);
        } else {
            double s = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) s += (r[i] - ref.value[i]) * (r[i] - ref.value[i]);
            e.push_back(std::sqrt(s));
        }
    }
    const SampleSummary s = summarize(e);
    return {s.mean, s.stderr_, s.n};
}

SampleSummary jackknife(std::size_t n, const std::function<double(std::size_t)>& stat) {
    if (n < 2) fail(ErrorCode::kInvalidArgument, "jackknife needs at least two replicas");
    SampleSummary out;
    out.n = n;
    out.mean = stat(n);
    std::vector<double> loo(n);
    double avg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        loo[i] = stat(i);
        avg += loo[i];
    }
    avg /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : loo) ss += (v - avg) * (v - avg);
    out.stderr_ = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
    out.sd = out.stderr_ * std::sqrt(static_cast<double>(n));
    return out;
}

BiasEstimate estimate_pooled_error(const std::vector<std::vector<double>>& replica_means, const ReferenceMean& ref) {
    check_dims(replica_means, ref);
    const std::size_t n = replica_means.size(), q = ref.value.size();
    if (n < 2) fail(ErrorCode::kInvalidArgument, "pooled error needs at least two replicas");
    std::vector<double> total(q, 0.0);
    for (const auto& r : replica_means)
        for (std::size_t c = 0; c < q; ++c) total[c] += r[c];
    const auto stat = [&](std::size_t skip) {
        const double cnt = static_cast<double>(skip < n ? n - 1 : n);
        double s = 0.0;
        for (std::size_t c = 0; c < q; ++c) {
            const double sum = skip < n ? total[c] - replica_means[skip][c] : total[c];
            const double e = sum / cnt - ref.value[c];
            s += e * e;
        }
        return std::sqrt(s);
    };
    const auto j = jackknife(n, stat);
    return {j.mean, j.stderr_, n};
}

double estimate_mse(const std::vector<std::vector<double>>& replica_means, const ReferenceMean& ref) {
    check_dims(replica_means, ref);
    if (replica_means.size() < 2) fail(ErrorCode::kInvalidArgument, "MSE needs at least two replicas");
    CompensatedSum acc;
    for (const auto& r : replica_means) {
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += (r[i] - ref.value[i]) * (r[i] - ref.value[i]);
        acc.add(s);
    }
    return acc.value() / static_cast<double>(replica_means.size());
}

SlopeFit fit_loglog(const std::vector<double>& h, const std::vector<double>& value, const std::vector<double>& se,
                    double max_rel_err) {
    if (h.size() != value.size() || h.size() != se.size())
        fail(ErrorCode::kDimensionMismatch, "slope fit inputs differ in length");
    std::vector<double> lx, ly, w;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double v = std::abs(value[i]);
        if (!(h[i] > 0.0) || !(v > 0.0) || !std::isfinite(v)) continue;
        if (!(se[i] <= max_rel_err * v)) continue;
        lx.push_back(std::log(h[i]));
        ly.push_back(std::log(v));
        // var(log v) ~ (se / v)^2; zero stderr gets a large finite weight
        const double rel = se[i] / v;
        w.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1e30);
    }
    SlopeFit f;
    f.points = lx.size();
    if (lx.size() < 2) return f;
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sw += w[i];
        sx += w[i] * lx[i];
        sy += w[i] * ly[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += w[i] * (lx[i] - mx) * (lx[i] - mx);
        sxy += w[i] * (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.slope_stderr = std::sqrt(1.0 / sxx);
    f.ok = true;
    return f;
}

}  // namespace ubu
