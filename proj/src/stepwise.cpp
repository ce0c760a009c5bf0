#include "lassoinf/errors.hpp"
#include "lassoinf/lasso_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lassoinf {

OrthogonalizedCandidates orthogonalize_candidates(const Matrix& x, std::span<const Index> active) {
    const Index n = x.rows();
    const Index p = x.cols();
    require_valid_index_set(active, p, "orthogonalize_candidates");

    Matrix basis(n, 0);
    if (!active.empty()) {
        Matrix xa(n, static_cast<Index>(active.size()));
        for (std::size_t i = 0; i < active.size(); ++i) xa.col(static_cast<Index>(i)) = x.col(active[i]);
        LeastSquares rank_check(xa);  // throws on a collinear active set
        Eigen::HouseholderQR<Matrix> qr(xa);
        basis = qr.householderQ() * Matrix::Identity(n, xa.cols());
    }

    std::vector<bool> in_active(static_cast<std::size_t>(p), false);
    for (Index j : active) in_active[static_cast<std::size_t>(j)] = true;

    OrthogonalizedCandidates out;
    out.directions.resize(n, p - static_cast<Index>(active.size()));
    Index col = 0;
    for (Index j = 0; j < p; ++j) {
        if (in_active[static_cast<std::size_t>(j)]) continue;
        Vector r = x.col(j);
        if (basis.cols() > 0) {
            // Two Gram-Schmidt passes keep the residual orthogonal to working precision.
            r -= basis * (basis.transpose() * r);
            r -= basis * (basis.transpose() * r);
        }
        const double norm = r.norm();
        if (norm < kCollinearTolerance) {
            out.excluded.push_back(j);
            continue;
        }
        out.directions.col(col++) = r / norm;
        out.indices.push_back(j);
    }
    out.directions.conservativeResize(n, col);
    return out;
}

StepwiseTrace forward_stepwise(const Matrix& x, const Vector& y, std::size_t steps) {
    const Index n = x.rows();
    const Index p = x.cols();
    if (n < 1 || p < 1 || y.size() != n) {
        throw DomainError("forward_stepwise: X must be n x p and y of length n");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw DomainError("forward_stepwise: non-finite input");
    }
    const auto bound = static_cast<std::size_t>(std::min(n - 1, p));
    if (steps > bound) {
        throw DomainError("forward_stepwise: steps " + std::to_string(steps) +
                          " exceeds min(n - 1, p) = " + std::to_string(bound));
    }

    StepwiseTrace trace;
    IndexSet active;
    for (std::size_t k = 0; k < steps; ++k) {
        const OrthogonalizedCandidates cand = orthogonalize_candidates(x, active);
        if (cand.indices.empty()) break;
        const Vector t = cand.directions.transpose() * y;

        std::vector<CandidateStat> stats;
        stats.reserve(cand.indices.size());
        Index best = 0;
        for (Index i = 0; i < t.size(); ++i) {
            stats.push_back({cand.indices[static_cast<std::size_t>(i)], t[i]});
            if (std::abs(t[i]) > std::abs(t[best])) best = i;
        }
        const Index chosen = cand.indices[static_cast<std::size_t>(best)];
        trace.entered.push_back(chosen);
        trace.tmax.push_back(std::abs(t[best]));
        trace.candidates.push_back(std::move(stats));
        trace.excluded.push_back(cand.excluded);
        active.push_back(chosen);
    }
    return trace;
}

}  // namespace lassoinf
