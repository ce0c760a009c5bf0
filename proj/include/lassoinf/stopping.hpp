#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lassoinf {

enum class StopRule { forward_stop, first_exceed };

struct StopDecision {
    std::size_t k_hat = 0;  // reject steps 1..k_hat; 0 rejects nothing
    StopRule rule = StopRule::forward_stop;
    double alpha = 0.0;
    std::vector<double> transformed;  // Y_i = -log(1 - p_i); empty for first_exceed
};

/// ForwardStop: largest k whose running mean of -log(1 - p_i) is at most alpha.
/// Throws DomainError for p_i outside [0, 1) or alpha outside (0, 1).
StopDecision forward_stop(std::span<const double> pvalues, double alpha);

/// Number of leading p-values at or below alpha.
StopDecision first_exceed(std::span<const double> pvalues, double alpha);

}  // namespace lassoinf
