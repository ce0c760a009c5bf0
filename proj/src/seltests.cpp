#include "lassoinf/seltests.hpp"

#include "lassoinf/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace lassoinf {

namespace {

constexpr double kNegativeStatisticSlack = 1e-8;

void require_sigma(double sigma, const char* caller) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError(std::string(caller) + ": sigma must be positive");
    }
}

void require_step(const PathTrace& trace, std::size_t step, const char* caller) {
    if (step < 1 || step > trace.steps() || step >= trace.knots.size()) {
        throw DomainError(std::string(caller) + ": step " + std::to_string(step) +
                          " needs lambda_{k+1}; path has " + std::to_string(trace.steps()) + " steps");
    }
}

Matrix select_columns(const Matrix& x, std::span<const Index> cols) {
    Matrix out(x.rows(), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Index>(i)) = x.col(cols[i]);
    return out;
}

// Two largest |u_j|.
std::pair<double, double> top_two_abs(const Vector& u) {
    double v1 = 0.0;
    double v2 = 0.0;
    for (Index j = 0; j < u.size(); ++j) {
        const double a = std::abs(u[j]);
        if (a > v1) {
            v2 = v1;
            v1 = a;
        } else if (a > v2) {
            v2 = a;
        }
    }
    return {v1, v2};
}

void require_extreme_input(const Vector& u, std::size_t p, const char* caller) {
    if (p < 2) {
        throw DomainError(std::string(caller) + ": p must be at least 2");
    }
    if (static_cast<std::size_t>(u.size()) != p) {
        throw DomainError(std::string(caller) + ": U must have length p");
    }
    if (!u.allFinite()) {
        throw DomainError(std::string(caller) + ": non-finite U");
    }
}

}  // namespace

std::string_view to_string(TestMethod method) {
    switch (method) {
        case TestMethod::covariance: return "covariance";
        case TestMethod::spacing: return "spacing";
        case TestMethod::tmax: return "tmax";
        case TestMethod::tmax_conditional: return "tmax_conditional";
        case TestMethod::gumbel: return "gumbel";
        case TestMethod::gap: return "gap";
    }
    return "unknown";
}

EVConstants EVConstants::for_dimension(std::size_t p) {
    if (p < 2) {
        throw DomainError("EVConstants: p must be at least 2");
    }
    EVConstants c;
    c.p = p;
    c.a_p = std_normal_quantile(1.0 - 1.0 / (2.0 * static_cast<double>(p)));
    c.b_p = std::sqrt(2.0 * std::log(static_cast<double>(p)));
    return c;
}

// ---------------------------------------------------------------------------

CovarianceFits covariance_fits(const PathTrace& trace, const Matrix& x, const Vector& y, std::size_t step) {
    require_step(trace, step, "covariance_fits");
    if (x.cols() != trace.num_predictors || x.rows() != y.size()) {
        throw DomainError("covariance_fits: data do not match the path");
    }
    CovarianceFits fits;
    fits.step = step;
    fits.lambda_next = trace.knots[step];
    fits.active = trace.active_sets[step - 1];
    fits.beta_full = lasso_at(x, y, fits.lambda_next);
    fits.beta_restricted = restricted_lasso(x, fits.active, y, fits.lambda_next);
    fits.fit_full = x * fits.beta_full;
    fits.fit_restricted = fits.active.empty() ? Vector::Zero(x.rows()).eval()
                                              : (select_columns(x, fits.active) * fits.beta_restricted).eval();
    return fits;
}

double cov_stat_fit_form(const CovarianceFits& fits, const Vector& y, double sigma) {
    require_sigma(sigma, "cov_stat_fit_form");
    return (y.dot(fits.fit_full) - y.dot(fits.fit_restricted)) / (sigma * sigma);
}

double cov_stat_fit_form(const PathTrace& trace, const Matrix& x, const Vector& y, std::size_t step,
                         double sigma) {
    require_sigma(sigma, "cov_stat_fit_form");
    return cov_stat_fit_form(covariance_fits(trace, x, y, step), y, sigma);
}

double criterion_diff_stat(const CovarianceFits& fits, const Vector& y, double sigma) {
    require_sigma(sigma, "criterion_diff_stat");
    const double lam = fits.lambda_next;
    const double restricted = (y - fits.fit_restricted).squaredNorm() + lam * fits.beta_restricted.lpNorm<1>();
    const double full = (y - fits.fit_full).squaredNorm() + lam * fits.beta_full.lpNorm<1>();
    return (restricted - full) / (sigma * sigma);
}

double criterion_diff_stat(const PathTrace& trace, const Matrix& x, const Vector& y, std::size_t step,
                           double sigma) {
    require_sigma(sigma, "criterion_diff_stat");
    return criterion_diff_stat(covariance_fits(trace, x, y, step), y, sigma);
}

double criterion_expansion_remainder(const CovarianceFits& fits, double sigma) {
    require_sigma(sigma, "criterion_expansion_remainder");
    const double norms = fits.fit_restricted.squaredNorm() - fits.fit_full.squaredNorm();
    const double l1 = fits.beta_restricted.lpNorm<1>() - fits.beta_full.lpNorm<1>();
    return (norms + fits.lambda_next * l1) / (sigma * sigma);
}

double cov_stat_knot_form(const PathTrace& trace, std::size_t step, double sigma, double shrinkage,
                          double knot_constant) {
    require_step(trace, step, "cov_stat_knot_form");
    require_sigma(sigma, "cov_stat_knot_form");
    if (!(shrinkage > 0.0 && shrinkage <= 1.0)) {
        throw DomainError("cov_stat_knot_form: shrinkage factor must lie in (0, 1]");
    }
    if (!(knot_constant > 0.0)) {
        throw DomainError("cov_stat_knot_form: knot constant must be positive");
    }
    const double lk = trace.knots[step - 1];
    const double lnext = trace.knots[step];
    if (lk == lnext) {
        throw DomainError("cov_stat_knot_form: degenerate knots lambda_k == lambda_{k+1}");
    }
    return knot_constant * lk * (lk - shrinkage * lnext) / (sigma * sigma);
}

double infer_knot_constant(const PathTrace& trace, std::size_t step, double sigma, double cov_stat) {
    require_step(trace, step, "infer_knot_constant");
    require_sigma(sigma, "infer_knot_constant");
    const double lk = trace.knots[step - 1];
    const double lnext = trace.knots[step];
    if (lk == lnext) {
        throw DomainError("infer_knot_constant: degenerate knots, constant not identifiable");
    }
    return cov_stat * sigma * sigma / (lk * (lk - lnext));
}

double cov_pvalue(double statistic, double rate) {
    if (!(statistic >= 0.0)) {
        throw DomainError("cov_pvalue: statistic must be nonnegative");
    }
    if (!(rate > 0.0)) {
        throw DomainError("cov_pvalue: rate must be positive");
    }
    return std::exp(-rate * statistic);
}

namespace {

TestOutcome make_covariance_outcome(std::size_t step, double statistic, double rate) {
    TestOutcome out;
    out.step = step;
    out.method = TestMethod::covariance;
    out.statistic = statistic;
    if (statistic < -kNegativeStatisticSlack) {
        out.diagnostics.push_back("negative_statistic");
    }
    out.pvalue = cov_pvalue(std::max(statistic, 0.0), rate);
    return out;
}

}  // namespace

TestOutcome covariance_test(const PathTrace& trace, const Matrix& x, const Vector& y, std::size_t step,
                            double sigma, double rate) {
    return make_covariance_outcome(step, cov_stat_fit_form(trace, x, y, step, sigma), rate);
}

std::vector<TestOutcome> covariance_tests(const PathTrace& trace, const Matrix& x, const Vector& y,
                                          std::size_t steps, double sigma, bool rate_is_step) {
    require_sigma(sigma, "covariance_tests");
    if (steps == 0) return {};
    require_step(trace, steps, "covariance_tests");
    if (x.cols() != trace.num_predictors || x.rows() != y.size()) {
        throw DomainError("covariance_tests: data do not match the path");
    }
    require_unit_norm_columns(x, "covariance_tests");
    const Matrix gram = x.transpose() * x;
    const Vector xty = x.transpose() * y;

    std::vector<TestOutcome> out;
    out.reserve(steps);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double lam = trace.knots[k];
        const Vector beta = lasso_fit_gram(gram, xty, lam).beta;
        double full = xty.dot(beta);

        const IndexSet& active = trace.active_sets[k - 1];
        double restricted = 0.0;
        if (!active.empty()) {
            const auto m = static_cast<Index>(active.size());
            Matrix sub_gram(m, m);
            Vector sub_xty(m);
            for (Index a = 0; a < m; ++a) {
                sub_xty[a] = xty[active[static_cast<std::size_t>(a)]];
                for (Index b = 0; b < m; ++b) {
                    sub_gram(a, b) = gram(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
                }
            }
            restricted = sub_xty.dot(lasso_fit_gram(sub_gram, sub_xty, lam).beta);
        }
        const double statistic = (full - restricted) / (sigma * sigma);
        out.push_back(make_covariance_outcome(k, statistic, rate_is_step ? static_cast<double>(k) : 1.0));
    }
    return out;
}

// ---------------------------------------------------------------------------

double spacing_pvalue(double lambda1, double lambda2, double sigma) {
    require_sigma(sigma, "spacing_pvalue");
    if (!(lambda2 >= 0.0) || !std::isfinite(lambda1)) {
        throw DomainError("spacing_pvalue: knots must be finite and nonnegative");
    }
    if (lambda1 < lambda2) {
        throw DomainError("spacing_pvalue: requires lambda1 >= lambda2");
    }
    if (lambda1 == lambda2) return 1.0;
    const double log_ratio =
        std_normal_log_upper_tail(lambda1 / sigma) - std_normal_log_upper_tail(lambda2 / sigma);
    return std::clamp(std::exp(log_ratio), 0.0, 1.0);
}

// ---------------------------------------------------------------------------

double tmax_statistic(const OrthogonalizedCandidates& candidates, const Vector& v) {
    if (candidates.indices.empty()) return 0.0;
    return (candidates.directions.transpose() * v).cwiseAbs().maxCoeff();
}

MonteCarloPValue tmax_mc_pvalue(const Matrix& x, std::span<const Index> active, double observed_tmax,
                                std::size_t n_mc, RandomStream& stream) {
    if (n_mc == 0) {
        throw DomainError("tmax_mc_pvalue: n_mc must be at least 1");
    }
    const OrthogonalizedCandidates cand = orthogonalize_candidates(x, active);
    if (cand.indices.empty()) {
        throw DomainError("tmax_mc_pvalue: no candidate predictors outside the active set");
    }
    const Index n = x.rows();
    constexpr std::size_t kBatch = 256;

    std::size_t exceed = 0;
    Matrix draws(n, static_cast<Index>(kBatch));
    for (std::size_t done = 0; done < n_mc; done += kBatch) {
        const auto width = static_cast<Index>(std::min(kBatch, n_mc - done));
        for (Index c = 0; c < width; ++c) {
            for (Index i = 0; i < n; ++i) draws(i, c) = stream.normal();
        }
        const Matrix t = cand.directions.transpose() * draws.leftCols(width);
        for (Index c = 0; c < width; ++c) {
            if (t.col(c).cwiseAbs().maxCoeff() > observed_tmax) ++exceed;
        }
    }
    MonteCarloPValue out;
    out.pvalue = static_cast<double>(exceed) / static_cast<double>(n_mc);
    out.mc_se = std::sqrt(out.pvalue * (1.0 - out.pvalue) / static_cast<double>(n_mc));
    return out;
}

ConditionalPValue tmax_conditional_pvalue(const Matrix& x, Index j_first, const Vector& y, std::size_t n_mc,
                                          RandomStream& stream) {
    if (n_mc == 0) {
        throw DomainError("tmax_conditional_pvalue: n_mc must be at least 1");
    }
    if (j_first < 0 || j_first >= x.cols()) {
        throw DomainError("tmax_conditional_pvalue: j_first out of range");
    }
    const StepwiseTrace observed = forward_stepwise(x, y, 2);
    if (observed.steps() < 2 || observed.entered[0] != j_first) {
        throw DomainError("tmax_conditional_pvalue: j_first is not the first forward stepwise entry for y");
    }

    const Index n = x.rows();
    const Vector xj = x.col(j_first);
    const double coef = xj.dot(y) / xj.squaredNorm();
    const Vector mean = xj * coef;
    const Vector norms = x.colwise().norm().transpose();
    const std::array<Index, 1> first{j_first};
    const OrthogonalizedCandidates step_two = orthogonalize_candidates(x, first);

    ConditionalPValue out;
    out.observed_tmax = observed.tmax[1];
    std::size_t exceed = 0;
    Vector ystar(n);
    for (std::size_t r = 0; r < n_mc; ++r) {
        for (Index i = 0; i < n; ++i) ystar[i] = mean[i] + stream.normal();
        const Vector t1 = (x.transpose() * ystar).cwiseQuotient(norms).cwiseAbs();
        Index winner = 0;
        for (Index j = 1; j < t1.size(); ++j) {
            if (t1[j] > t1[winner]) winner = j;
        }
        if (winner != j_first) continue;
        ++out.accepted;
        if (tmax_statistic(step_two, ystar) > out.observed_tmax) ++exceed;
    }
    out.acceptance_rate = static_cast<double>(out.accepted) / static_cast<double>(n_mc);
    if (out.accepted == 0) {
        throw EstimationError("tmax_conditional_pvalue: no draws selected j_first first; increase n_mc");
    }
    const auto kept = static_cast<double>(out.accepted);
    out.pvalue = static_cast<double>(exceed) / kept;
    out.mc_se = std::sqrt(out.pvalue * (1.0 - out.pvalue) / kept);
    return out;
}

// ---------------------------------------------------------------------------

TestOutcome gumbel_pvalue(const Vector& u, std::size_t p) {
    require_extreme_input(u, p, "gumbel_pvalue");
    const EVConstants ev = EVConstants::for_dimension(p);
    const double v1 = top_two_abs(u).first;
    TestOutcome out;
    out.step = 1;
    out.method = TestMethod::gumbel;
    out.statistic = v1 * v1 - ev.a_p * ev.a_p;
    out.pvalue = -std::expm1(-std::exp(-0.5 * out.statistic));
    return out;
}

TestOutcome gap_stat(const Vector& u, std::size_t p) {
    require_extreme_input(u, p, "gap_stat");
    const EVConstants ev = EVConstants::for_dimension(p);
    const auto [v1, v2] = top_two_abs(u);
    TestOutcome out;
    out.step = 1;
    out.method = TestMethod::gap;
    out.statistic = ev.b_p * (v1 - v2);
    out.pvalue = std::exp(-out.statistic);
    return out;
}

}  // namespace lassoinf
