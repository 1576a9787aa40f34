// SPDX-License-Identifier: Apache-2.0
#include "ualloc/rng.hpp"

namespace ualloc {

namespace {
constexpr std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); }
constexpr std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }
}  // namespace

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::seed_seq seq{lo(master_seed), hi(master_seed), lo(stream_id), hi(stream_id), 0x75616c6cu};
    engine_.seed(seq);
}

}  // namespace ualloc
