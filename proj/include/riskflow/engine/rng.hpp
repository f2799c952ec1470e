#pragma once

#include <cstdint>

namespace riskflow {

/// Master seed plus the rule mapping (path, stream kind) to an independent generator.
struct RngSpec {
    std::uint64_t master_seed = 0;

    /// Independent spec for a derived experiment (e.g. nested inner simulations).
    RngSpec child(std::uint64_t tag) const noexcept;
};

enum class StreamKind : std::uint64_t { brownian = 0, jumps = 1 };

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Seed for stream `id` of `master`; both inputs pass through splitmix64 mixing.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) noexcept;

/**
 * @brief xoshiro256** generator with Box–Muller normals.
 *
 * Output depends only on the seed, so draws are identical on every platform.
 */
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) noexcept;

    std::uint64_t next() noexcept;
    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    double normal() noexcept;
    double exponential(double rate) noexcept;

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Generator for the given path; Brownian and jump noise use disjoint streams 2p and 2p+1.
Xoshiro256 path_stream(const RngSpec& spec, std::uint64_t path, StreamKind kind) noexcept;

}  // namespace riskflow
