#pragma once

#include <cstdint>

namespace nongauss {

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of substream `counter` under `master`. Scans and Monte-Carlo
/// blocks draw from derive_seed(master, index) so results do not depend on
/// how work is split across threads.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) noexcept {
    return splitmix64(splitmix64(master) ^ (counter * 0xd1b54a32d192ed03ULL + 1));
}

} // namespace nongauss
