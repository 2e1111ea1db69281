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

#include "ubu/rng.hpp"

#include <cmath>

namespace ubu {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32Counter philox_round(const Philox4x32Counter& c, const Philox4x32Key& k) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        ctr = philox_round(ctr, key);
    }
    return ctr;
}

std::uint32_t fnv1a32(std::string_view text) noexcept {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : text) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

namespace {

// kBatch consecutive blocks in structure-of-arrays form so the rounds vectorise.
template <unsigned kBatch>
#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__)
__attribute__((target_clones("avx2", "default")))
#endif
void philox_batch(std::uint64_t first_block, std::uint32_t hi_tag, std::uint32_t c2, std::uint32_t c3,
                  std::uint32_t k0, std::uint32_t k1, std::uint64_t* out) {
    std::uint32_t a[kBatch], b[kBatch], c[kBatch], d[kBatch];
    for (unsigned i = 0; i < kBatch; ++i) {
        const std::uint64_t blk = first_block + i;
        a[i] = static_cast<std::uint32_t>(blk);
        b[i] = static_cast<std::uint32_t>((blk >> 32) & 0x00ffffffu) | hi_tag;
        c[i] = c2;
        d[i] = c3;
    }
    for (int round = 0; round < 10; ++round) {
        for (unsigned i = 0; i < kBatch; ++i) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * a[i];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[i];
            const std::uint32_t na = static_cast<std::uint32_t>(p1 >> 32) ^ b[i] ^ k0;
            const std::uint32_t nc = static_cast<std::uint32_t>(p0 >> 32) ^ d[i] ^ k1;
            b[i] = static_cast<std::uint32_t>(p1);
            d[i] = static_cast<std::uint32_t>(p0);
            a[i] = na;
            c[i] = nc;
        }
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    for (unsigned i = 0; i < kBatch; ++i) {
        out[2 * i] = (static_cast<std::uint64_t>(b[i]) << 32) | a[i];
        out[2 * i + 1] = (static_cast<std::uint64_t>(d[i]) << 32) | c[i];
    }
}

}  // namespace

void Stream::refill() noexcept {
    // Counter words: [block bits 0..31, block bits 32..55 | purpose << 24,
    // replica, experiment]; key words: [seed bits 0..31, seed bits 32..63].
    philox_batch<kBatchBlocks>(block_, static_cast<std::uint32_t>(key_.purpose) << 24, key_.replica,
                               key_.experiment, static_cast<std::uint32_t>(key_.seed),
                               static_cast<std::uint32_t>(key_.seed >> 32), buffer_);
    block_ += kBatchBlocks;
    pos_ = 0;
}

namespace detail {

const ZigguratTables& ziggurat_tables() noexcept {
    static const ZigguratTables tables = [] {
        ZigguratTables t{};
        constexpr double m = 4503599627370496.0;  // 2^52
        constexpr double vn = 4.92867323399e-3;
        double dn = kZigguratR;
        double tn = dn;
        const double q = vn / std::exp(-0.5 * dn * dn);
        t.ki[0] = static_cast<std::uint64_t>((dn / q) * m);
        t.ki[1] = 0;
        t.wi[0] = q / m;
        t.wi[255] = dn / m;
        t.fi[0] = 1.0;
        t.fi[255] = std::exp(-0.5 * dn * dn);
        for (int i = 254; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
            t.ki[i + 1] = static_cast<std::uint64_t>((dn / tn) * m);
            tn = dn;
            t.fi[i] = std::exp(-0.5 * dn * dn);
            t.wi[i] = dn / m;
        }
        return t;
    }();
    return tables;
}

}  // namespace detail

double Stream::normal_slow(unsigned idx, bool negative, double x) noexcept {
    const auto& t = detail::ziggurat_tables();
    for (;;) {
        if (idx == 0) {
            // Base strip overflow: sample the tail beyond R (Marsaglia 1964).
            double xx, yy;
            do {
                xx = -std::log1p(-uniform()) / detail::kZigguratR;
                yy = -std::log1p(-uniform());
            } while (yy + yy <= xx * xx);
            const double v = detail::kZigguratR + xx;
            return negative ? -v : v;
        }
        if (t.fi[idx] + uniform() * (t.fi[idx - 1] - t.fi[idx]) < std::exp(-0.5 * x * x)) {
            return negative ? -x : x;
        }
        const std::uint64_t r = next_u64();
        idx = r & 0xff;
        negative = (r >> 8) & 1;
        const std::uint64_t rabs = (r >> 9) & 0x000fffffffffffffULL;
        x = static_cast<double>(rabs) * t.wi[idx];
        if (rabs < t.ki[idx]) return negative ? -x : x;
    }
}

}  // namespace ubu
