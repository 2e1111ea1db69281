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

// Counter-based random streams.
//
// Every random number in the toolkit comes from a Philox4x32-10 block cipher
// applied to a 128-bit counter under a 64-bit key. A stream is fully named by
// (global seed, experiment id, replica index, purpose) and owns the low 56
// bits of the block counter, so streams never overlap and can be recreated
// anywhere without communication. The byte-level layout is documented in
// docs/rng_keying.md and is part of the reproducibility contract.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace ubu {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) noexcept;

enum class StreamPurpose : std::uint8_t {
    kDynamics = 1,  // Brownian increments of the U flows
    kGradient = 2,  // mini-batch subsets / additive gradient noise
    kInitial = 3,   // initial velocity
    kModel = 4,     // coefficients of random benchmark potentials
    kAuxiliary = 5, // harness-level draws (e.g. coefficient burn-in chains)
};

struct StreamKey {
    std::uint64_t seed = 0;
    std::uint32_t experiment = 0;
    std::uint32_t replica = 0;
    StreamPurpose purpose = StreamPurpose::kDynamics;
};

// 32-bit FNV-1a, used to derive experiment ids from textual cell labels.
std::uint32_t fnv1a32(std::string_view text) noexcept;

namespace detail {
struct ZigguratTables {
    std::uint64_t ki[256];
    double wi[256];
    double fi[256];
};
const ZigguratTables& ziggurat_tables() noexcept;
inline constexpr double kZigguratR = 3.6541528853610088;
}  // namespace detail

class Stream {
public:
    Stream() = default;
    explicit Stream(const StreamKey& key) noexcept : key_(key) {}

    const StreamKey& key() const noexcept { return key_; }
    // Blocks generated so far (whole batches are generated at once).
    std::uint64_t blocks_generated() const noexcept { return block_; }

    std::uint64_t next_u64() noexcept {
        if (pos_ == kBufferWords) refill();
        return buffer_[pos_++];
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), n >= 1 (Lemire's multiply-shift with rejection).
    std::uint64_t below(std::uint64_t n) noexcept {
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Standard normal via a 256-layer ziggurat.
    double normal() noexcept {
        const auto& t = detail::ziggurat_tables();
        const std::uint64_t r = next_u64();
        const unsigned idx = r & 0xff;
        const bool negative = (r >> 8) & 1;
        const std::uint64_t rabs = (r >> 9) & 0x000fffffffffffffULL;
        const double x = static_cast<double>(rabs) * t.wi[idx];
        if (rabs < t.ki[idx]) return negative ? -x : x;
        return normal_slow(idx, negative, x);
    }

    void fill_normal(std::span<double> out) noexcept {
        for (double& z : out) z = normal();
    }

private:
    void refill() noexcept;
    double normal_slow(unsigned idx, bool negative, double x) noexcept;

    // Blocks are generated kBatchBlocks at a time; each block yields two
    // words, (w1:w0) first and (w3:w2) second.
    static constexpr unsigned kBatchBlocks = 8;
    static constexpr unsigned kBufferWords = 2 * kBatchBlocks;

    StreamKey key_{};
    std::uint64_t block_ = 0;
    std::uint64_t buffer_[kBufferWords] = {};
    unsigned pos_ = kBufferWords;
};

}  // namespace ubu
