#pragma once

#include "lassoinf/numkit.hpp"

#include <array>
#include <cstdint>

namespace lassoinf {

/// Deterministic random stream keyed on (root_seed, stream_id).
///
/// The generator is xoshiro256** whose 256-bit state is expanded with
/// splitmix64 from a hash of the key, so every key owns a distinct,
/// reproducible sequence. Streams are plain values: copying one forks
/// the sequence at the current position.
class RandomStream {
public:
    RandomStream(std::uint64_t root_seed, std::uint64_t stream_id);

    std::uint64_t root_seed() const noexcept { return root_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;

    /// Standard normal draw (Marsaglia polar method).
    double normal() noexcept;

private:
    std::uint64_t root_seed_;
    std::uint64_t stream_id_;
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// `count` i.i.d. N(0, 1) draws advancing `stream`. Throws DomainError for count == 0.
Vector gaussian_draws(RandomStream& stream, Eigen::Index count);

}  // namespace lassoinf
