#include "lassoinf/errors.hpp"
#include "lassoinf/lasso_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lassoinf {

namespace {

constexpr double kTieTolerance = 1e-10;

Vector scatter(const Vector& values, const IndexSet& indices, Index p) {
    Vector out = Vector::Zero(p);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out[indices[i]] = values[static_cast<Index>(i)];
    }
    return out;
}

struct Entry {
    double lambda = -1.0;
    Index index = -1;
    int sign = 0;
    bool tied = false;
};

}  // namespace

void require_unit_norm_columns(const Matrix& x, const char* caller) {
    for (Index j = 0; j < x.cols(); ++j) {
        const double norm = x.col(j).norm();
        if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
            throw ContractError(std::string(caller) + ": column " + std::to_string(j) +
                                " has norm " + std::to_string(norm) + ", expected unit norm");
        }
    }
}

double PathTrace::knot(std::size_t step) const {
    if (step < 1 || step > knots.size()) {
        throw DomainError("PathTrace::knot: step " + std::to_string(step) + " out of range");
    }
    return knots[step - 1];
}

Vector PathTrace::coefficients(double lambda) const {
    if (knots.empty() || lambda >= knots.front()) {
        return Vector::Zero(num_predictors);
    }
    if (lambda < knots.back()) {
        throw DomainError("PathTrace::coefficients: lambda below the last computed knot");
    }
    for (const auto& seg : segments) {
        if (lambda >= seg.lambda_lo && lambda <= seg.lambda_hi) {
            return seg.intercept + lambda * seg.slope;
        }
    }
    // Only reachable when knots are tied so that a segment has zero length.
    return segments.back().intercept + lambda * segments.back().slope;
}

PathTrace lar_path(const Matrix& x, const Vector& y, std::size_t max_steps) {
    const Index n = x.rows();
    const Index p = x.cols();
    if (n < 1 || p < 1 || y.size() != n) {
        throw DomainError("lar_path: X must be n x p with n, p >= 1 and y of length n");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw DomainError("lar_path: non-finite input");
    }
    require_unit_norm_columns(x, "lar_path");
    const auto step_bound = static_cast<std::size_t>(std::min(n - 1, p));
    if (max_steps > step_bound) {
        throw DomainError("lar_path: max_steps " + std::to_string(max_steps) +
                          " exceeds min(n - 1, p) = " + std::to_string(step_bound));
    }

    PathTrace trace;
    trace.num_predictors = p;

    const Vector xty = x.transpose() * y;
    std::vector<bool> is_active(static_cast<std::size_t>(p), false);
    IndexSet active;
    std::vector<int> signs;
    Vector base = Vector(0);       // beta_A(lambda) = base - lambda * direction
    Vector direction = Vector(0);
    double lambda_cur = std::numeric_limits<double>::infinity();

    auto close_segment = [&](double lambda_lo) {
        if (active.empty()) return;
        PathSegment seg;
        seg.lambda_hi = lambda_cur;
        seg.lambda_lo = lambda_lo;
        seg.intercept = scatter(base, active, p);
        seg.slope = scatter(-direction, active, p);
        // First sign change of an active coefficient marks where LAR leaves the lasso path.
        if (trace.diagnostics.lasso_agreement_floor == 0.0) {
            double crossing = 0.0;
            for (std::size_t i = 0; i < active.size(); ++i) {
                const auto ii = static_cast<Index>(i);
                if (direction[ii] == 0.0) continue;
                const double at = base[ii] / direction[ii];
                if (at > lambda_lo && at < lambda_cur * (1.0 - 1e-12)) {
                    crossing = std::max(crossing, at);
                }
            }
            trace.diagnostics.lasso_agreement_floor = crossing;
        }
        trace.segments.push_back(std::move(seg));
    };

    while (true) {
        // Inactive correlations along the current segment are a_j + lambda * b_j.
        Vector a = xty;
        Vector b = Vector::Zero(p);
        if (!active.empty()) {
            Matrix xa(n, static_cast<Index>(active.size()));
            for (std::size_t i = 0; i < active.size(); ++i) xa.col(static_cast<Index>(i)) = x.col(active[i]);
            a.noalias() -= x.transpose() * (xa * base);
            b.noalias() = x.transpose() * (xa * direction);
        }

        Entry best;
        const double slack = kTieTolerance * std::max(1.0, std::isfinite(lambda_cur) ? lambda_cur : 1.0);
        for (Index j = 0; j < p; ++j) {
            if (is_active[static_cast<std::size_t>(j)]) continue;
            double lam_j = -1.0;
            int sign_j = 0;
            for (int s : {+1, -1}) {
                const double denom = s - b[j];
                if (std::abs(denom) < 1e-14) continue;
                double lam = a[j] / denom;
                if (!(lam > 0.0) || lam > lambda_cur + slack) continue;
                lam = std::min(lam, lambda_cur);
                if (lam > lam_j) {
                    lam_j = lam;
                    sign_j = s;
                }
            }
            if (lam_j <= 0.0) continue;
            if (lam_j > best.lambda + kTieTolerance) {
                best = Entry{lam_j, j, sign_j, false};
            } else if (std::abs(lam_j - best.lambda) <= kTieTolerance) {
                best.tied = true;
            }
        }

        if (best.index < 0) {
            close_segment(0.0);
            trace.knots.push_back(0.0);
            break;
        }
        close_segment(best.lambda);
        trace.knots.push_back(best.lambda);
        if (trace.entered.size() == max_steps) {
            break;
        }

        trace.active_sets.push_back(active);
        trace.entered.push_back(best.index);
        trace.signs.push_back(best.sign);
        if (best.tied) trace.diagnostics.tied_steps.push_back(trace.entered.size());

        active.push_back(best.index);
        signs.push_back(best.sign);
        is_active[static_cast<std::size_t>(best.index)] = true;
        lambda_cur = best.lambda;

        Matrix xa(n, static_cast<Index>(active.size()));
        Vector s(static_cast<Index>(active.size()));
        for (std::size_t i = 0; i < active.size(); ++i) {
            xa.col(static_cast<Index>(i)) = x.col(active[i]);
            s[static_cast<Index>(i)] = signs[i];
        }
        const LeastSquares ls(xa);
        base = ls.solve(y);
        direction = ls.solve_normal(s);
    }
    return trace;
}

}  // namespace lassoinf
