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

#include "ubu/selection.hpp"

#include <algorithm>
#include <cmath>

#include "ubu/error.hpp"

namespace ubu {

namespace {

// Largest h in (0, inf) with g(h) <= eps for increasing g.
template <class G>
double bisect_increasing(G g, double eps) {
    double lo = 0.0, hi = 1.0;
    while (g(hi) <= eps) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) return hi;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) <= eps ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace

Selection select_algorithm(double eps, std::uint64_t d, std::uint64_t N, std::uint64_t p) {
    require(eps > 0.0 && d > 0 && N > 0 && p > 0, "selection inputs must be positive");
    const double dd = static_cast<double>(d), nn = static_cast<double>(N), pp = static_cast<double>(p);
    auto variance = [&](double h) { return dd * h / pp * std::min(1.0, nn * nn * h * h / (pp * pp)); };
    auto bias = [&](double h) { return dd * h * h; };
    const double hv = bisect_increasing(variance, eps);
    const double hb = bisect_increasing(bias, eps);
    Selection s;
    s.h = std::min(hv, hb);
    s.binding = hv <= hb ? "variance" : "bias";
    s.branch = nn * s.h < pp ? "N h < p" : "N h >= p";
    s.T = dd / (eps * eps);
    s.K = static_cast<std::uint64_t>(std::ceil(s.T / s.h));
    s.window_lo = pp / std::sqrt(dd * s.T);
    s.window_hi = pp / nn;
    s.svrg = s.window_lo <= s.h && s.h <= s.window_hi;
    return s;
}

}  // namespace ubu
