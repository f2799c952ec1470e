#include "riskflow/engine/rng.hpp"

#include <cmath>
#include <numbers>

namespace riskflow {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) noexcept {
    std::uint64_t s = master;
    const std::uint64_t a = splitmix64(s);
    std::uint64_t t = id ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t b = splitmix64(t);
    std::uint64_t mix = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    return splitmix64(mix);
}

RngSpec RngSpec::child(std::uint64_t tag) const noexcept {
    return RngSpec{derive_seed(master_seed ^ 0xA0761D6478BD642FULL, tag)};
}

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
}

std::uint64_t Xoshiro256::next() noexcept {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Xoshiro256::uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Xoshiro256::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double Xoshiro256::exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

Xoshiro256 path_stream(const RngSpec& spec, std::uint64_t path, StreamKind kind) noexcept {
    return Xoshiro256(derive_seed(spec.master_seed, 2 * path + static_cast<std::uint64_t>(kind)));
}

}  // namespace riskflow
