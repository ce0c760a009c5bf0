#pragma once

#include "lassoinf/lasso_path.hpp"
#include "lassoinf/random_stream.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lassoinf {

enum class TestMethod { covariance, spacing, tmax, tmax_conditional, gumbel, gap };

std::string_view to_string(TestMethod method);

struct TestOutcome {
    std::size_t step = 1;
    TestMethod method = TestMethod::covariance;
    double statistic = 0.0;
    double pvalue = 1.0;
    std::optional<double> mc_se;  // present exactly for Monte Carlo methods
    std::vector<std::string> diagnostics;
};

/// Extreme-value normalizers for the maximum of p absolute standard normals.
struct EVConstants {
    std::size_t p = 0;
    double a_p = 0.0;  // Phi^{-1}(1 - 1/(2p))
    double b_p = 0.0;  // sqrt(2 log p)

    static EVConstants for_dimension(std::size_t p);
};

// ---------------------------------------------------------------------------
// Covariance test
// ---------------------------------------------------------------------------

/// Pieces of the covariance statistic at 1-based step k: the full lasso and the
/// lasso restricted to A = trace.active_sets[k-1], both at lambda_{k+1}.
struct CovarianceFits {
    std::size_t step = 0;
    double lambda_next = 0.0;
    IndexSet active;
    Vector beta_full;        // length p
    Vector beta_restricted;  // ordered as `active`
    Vector fit_full;         // X beta_full
    Vector fit_restricted;   // X_A beta_restricted
};

CovarianceFits covariance_fits(const PathTrace& trace, const Matrix& x, const Vector& y, std::size_t step);

/// T_k = (<y, X beta(lambda_{k+1})> - <y, X_A beta_A(lambda_{k+1})>) / sigma^2.
double cov_stat_fit_form(const PathTrace& trace, const Matrix& x, const Vector& y, std::size_t step,
                         double sigma);
double cov_stat_fit_form(const CovarianceFits& fits, const Vector& y, double sigma);

/// Difference of lasso criteria ||y - Xb||^2 + lambda ||b||_1 between the
/// restricted and the full solutions at lambda_{k+1}, over sigma^2.
double criterion_diff_stat(const PathTrace& trace, const Matrix& x, const Vector& y, std::size_t step,
                           double sigma);
double criterion_diff_stat(const CovarianceFits& fits, const Vector& y, double sigma);

/// criterion_diff - 2 * cov_stat written out term by term:
/// (||X_A b_A||^2 - ||X b||^2 + lambda_{k+1} (||b_A||_1 - ||b||_1)) / sigma^2.
double criterion_expansion_remainder(const CovarianceFits& fits, double sigma);

/// C * lambda_k * (lambda_k - c * lambda_{k+1}) / sigma^2.
double cov_stat_knot_form(const PathTrace& trace, std::size_t step, double sigma, double shrinkage,
                          double knot_constant);

/// The constant C for which the unshrunk knot form equals `cov_stat` at this step.
double infer_knot_constant(const PathTrace& trace, std::size_t step, double sigma, double cov_stat);

/// exp(-rate * T). rate = k for step k under the global null, 1 for the incremental null.
double cov_pvalue(double statistic, double rate);

/// Statistic, clamped p-value and a diagnostics flag for negative statistics below -1e-8.
TestOutcome covariance_test(const PathTrace& trace, const Matrix& x, const Vector& y, std::size_t step,
                            double sigma, double rate);

/// Covariance tests for steps 1..steps sharing one Gram matrix.
std::vector<TestOutcome> covariance_tests(const PathTrace& trace, const Matrix& x, const Vector& y,
                                          std::size_t steps, double sigma, bool rate_is_step);

// ---------------------------------------------------------------------------
// Spacing test (first step)
// ---------------------------------------------------------------------------

/// (1 - Phi(lambda1/sigma)) / (1 - Phi(lambda2/sigma)).
double spacing_pvalue(double lambda1, double lambda2, double sigma);

// ---------------------------------------------------------------------------
// t_max forward stepwise tests
// ---------------------------------------------------------------------------

struct MonteCarloPValue {
    double pvalue = 1.0;
    double mc_se = 0.0;
};

/// t_max(eps) = max_{j not in A} |<X_{j.A}, eps>| / ||X_{j.A}||.
double tmax_statistic(const OrthogonalizedCandidates& candidates, const Vector& v);

/// Fraction of eps ~ N(0, I_n) with t_max(eps) > observed_tmax.
MonteCarloPValue tmax_mc_pvalue(const Matrix& x, std::span<const Index> active, double observed_tmax,
                                std::size_t n_mc, RandomStream& stream);

struct ConditionalPValue {
    double pvalue = 1.0;
    double mc_se = 0.0;
    double acceptance_rate = 0.0;
    std::size_t accepted = 0;
    double observed_tmax = 0.0;
};

/// Step-2 p-value from y* = X_j b_j + eps, keeping draws where j is still chosen first.
ConditionalPValue tmax_conditional_pvalue(const Matrix& x, Index j_first, const Vector& y, std::size_t n_mc,
                                          RandomStream& stream);

// ---------------------------------------------------------------------------
// Extreme value statistics for U = X^T y
// ---------------------------------------------------------------------------

/// g = V1^2 - a_p^2 with Gumbel(0, 2) upper-tail p-value 1 - exp(-exp(-g/2)).
TestOutcome gumbel_pvalue(const Vector& u, std::size_t p);

/// b_p (V1 - V2) with p-value exp(-statistic).
TestOutcome gap_stat(const Vector& u, std::size_t p);

}  // namespace lassoinf
