#include "lassoinf/errors.hpp"
#include "lassoinf/lasso_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lassoinf {

namespace {

inline double soft_threshold(double z, double lambda) {
    if (z > lambda) return z - lambda;
    if (z < -lambda) return z + lambda;
    return 0.0;
}

}  // namespace

double kkt_gap(const Vector& gradient, const Vector& beta, double lambda) {
    double gap = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double g = gradient[j];
        if (beta[j] > 0.0) {
            gap = std::max(gap, std::abs(g - lambda));
        } else if (beta[j] < 0.0) {
            gap = std::max(gap, std::abs(g + lambda));
        } else {
            gap = std::max(gap, std::abs(g) - lambda);
        }
    }
    return gap;
}

double kkt_gap(const Matrix& x, const Vector& y, const Vector& beta, double lambda) {
    const Vector gradient = x.transpose() * (y - x * beta);
    return kkt_gap(gradient, beta, lambda);
}

LassoFit lasso_fit_gram(const Matrix& gram, const Vector& xty, double lambda, const LassoOptions& options) {
    const Index p = xty.size();
    if (gram.rows() != p || gram.cols() != p) {
        throw DomainError("lasso: Gram matrix must be p x p");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw DomainError("lasso: lambda must be a finite nonnegative number");
    }
    for (Index j = 0; j < p; ++j) {
        if (!(gram(j, j) > 0.0)) {
            throw DomainError("lasso: zero column in design");
        }
    }

    LassoFit fit;
    fit.beta = Vector::Zero(p);
    if (p == 0) return fit;
    Vector grad = xty;  // X^T (y - X beta)

    // Coordinate tolerance for the inner active-set loop; the real stopping rule is the KKT gap.
    const double step_tol = options.kkt_tolerance * 1e-2;

    auto update = [&](Index j) {
        const double diag = gram(j, j);
        const double old = fit.beta[j];
        const double fresh = soft_threshold(grad[j] + diag * old, lambda) / diag;
        const double delta = fresh - old;
        if (delta != 0.0) {
            fit.beta[j] = fresh;
            grad.noalias() -= gram.col(j) * delta;
        }
        return std::abs(delta) * std::sqrt(diag);
    };

    std::vector<Index> support;
    while (fit.sweeps < options.max_sweeps) {
        ++fit.sweeps;
        for (Index j = 0; j < p; ++j) update(j);

        support.clear();
        for (Index j = 0; j < p; ++j) {
            if (fit.beta[j] != 0.0) support.push_back(j);
        }
        while (fit.sweeps < options.max_sweeps) {
            ++fit.sweeps;
            double biggest = 0.0;
            for (Index j : support) biggest = std::max(biggest, update(j));
            if (biggest <= step_tol) break;
        }

        if (kkt_gap(grad, fit.beta, lambda) <= options.kkt_tolerance) {
            // Confirm on a freshly computed gradient so rounding drift cannot fake convergence.
            grad = xty - gram * fit.beta;
            fit.kkt_gap = kkt_gap(grad, fit.beta, lambda);
            if (fit.kkt_gap <= options.kkt_tolerance) return fit;
        }
    }
    grad = xty - gram * fit.beta;
    fit.kkt_gap = kkt_gap(grad, fit.beta, lambda);
    if (fit.kkt_gap <= options.kkt_tolerance) return fit;
    throw ConvergenceError("lasso: no convergence after " + std::to_string(fit.sweeps) +
                               " sweeps (KKT gap " + std::to_string(fit.kkt_gap) + ")",
                           fit.kkt_gap);
}

LassoFit lasso_fit(const Matrix& x, const Vector& y, double lambda, const LassoOptions& options) {
    if (x.rows() != y.size()) {
        throw DomainError("lasso: X.rows must equal y.length");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw DomainError("lasso: non-finite input");
    }
    require_unit_norm_columns(x, "lasso_at");
    const Matrix gram = x.transpose() * x;
    const Vector xty = x.transpose() * y;
    LassoFit fit = lasso_fit_gram(gram, xty, lambda, options);
    fit.kkt_gap = kkt_gap(x, y, fit.beta, lambda);
    return fit;
}

Vector lasso_at(const Matrix& x, const Vector& y, double lambda) {
    return lasso_fit(x, y, lambda).beta;
}

void require_valid_index_set(std::span<const Index> indices, Index p, const char* caller) {
    std::vector<bool> seen(static_cast<std::size_t>(p), false);
    for (Index j : indices) {
        if (j < 0 || j >= p) {
            throw DomainError(std::string(caller) + ": index " + std::to_string(j) + " out of range");
        }
        if (seen[static_cast<std::size_t>(j)]) {
            throw DomainError(std::string(caller) + ": duplicate index " + std::to_string(j));
        }
        seen[static_cast<std::size_t>(j)] = true;
    }
}

Vector restricted_lasso(const Matrix& x, std::span<const Index> active, const Vector& y, double lambda) {
    require_valid_index_set(active, x.cols(), "restricted_lasso");
    if (!(lambda >= 0.0)) {
        throw DomainError("restricted_lasso: lambda must be nonnegative");
    }
    if (active.empty()) return Vector(0);
    Matrix xa(x.rows(), static_cast<Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) xa.col(static_cast<Index>(i)) = x.col(active[i]);
    return lasso_at(xa, y, lambda);
}

}  // namespace lassoinf
