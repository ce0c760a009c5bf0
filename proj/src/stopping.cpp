#include "lassoinf/stopping.hpp"

#include "lassoinf/errors.hpp"

#include <cmath>
#include <string>

namespace lassoinf {

namespace {

void require_alpha(double alpha, const char* caller) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError(std::string(caller) + ": alpha must lie in (0, 1)");
    }
}

}  // namespace

StopDecision forward_stop(std::span<const double> pvalues, double alpha) {
    require_alpha(alpha, "forward_stop");
    StopDecision decision;
    decision.rule = StopRule::forward_stop;
    decision.alpha = alpha;
    decision.transformed.reserve(pvalues.size());

    double running = 0.0;
    for (std::size_t i = 0; i < pvalues.size(); ++i) {
        const double pv = pvalues[i];
        if (!(pv >= 0.0 && pv < 1.0)) {
            throw DomainError("forward_stop: p-value " + std::to_string(i + 1) + " = " + std::to_string(pv) +
                              " outside [0, 1)");
        }
        const double y = -std::log1p(-pv);
        decision.transformed.push_back(y);
        running += y;
        if (running / static_cast<double>(i + 1) <= alpha) {
            decision.k_hat = i + 1;
        }
    }
    return decision;
}

StopDecision first_exceed(std::span<const double> pvalues, double alpha) {
    require_alpha(alpha, "first_exceed");
    StopDecision decision;
    decision.rule = StopRule::first_exceed;
    decision.alpha = alpha;
    for (const double pv : pvalues) {
        if (!(pv >= 0.0 && pv <= 1.0)) {
            throw DomainError("first_exceed: p-value outside [0, 1]");
        }
        if (pv > alpha) break;
        ++decision.k_hat;
    }
    return decision;
}

}  // namespace lassoinf
