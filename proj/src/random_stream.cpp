#include "lassoinf/random_stream.hpp"

#include "lassoinf/errors.hpp"

#include <cmath>

namespace lassoinf {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t root_seed, std::uint64_t stream_id)
    : root_seed_(root_seed), stream_id_(stream_id) {
    // Two rounds of mixing so that nearby (seed, id) pairs land far apart.
    std::uint64_t s = root_seed;
    std::uint64_t key = splitmix64(s);
    std::uint64_t t = stream_id ^ 0xD1B54A32D192ED03ULL;
    key ^= splitmix64(t);
    for (auto& word : state_) {
        word = splitmix64(key);
    }
}

std::uint64_t RandomStream::next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RandomStream::uniform() noexcept {
    // (k + 0.5) / 2^53 never hits 0 or 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

Vector gaussian_draws(RandomStream& stream, Eigen::Index count) {
    if (count < 1) {
        throw DomainError("gaussian_draws: count must be at least 1");
    }
    Vector out(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        out[i] = stream.normal();
    }
    return out;
}

}  // namespace lassoinf
