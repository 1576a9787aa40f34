// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace ualloc {

/// A private random stream keyed by (master seed, stream id).
///
/// Streams are split through std::seed_seq so that the sequence an agent sees
/// depends only on its id and the master seed, never on iteration order.
/// Uniform variates are built from the top 53 bits of the engine output, which
/// keeps results identical across standard library implementations.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace ualloc
