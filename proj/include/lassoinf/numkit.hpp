#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>

namespace lassoinf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Standard normal distribution
// ---------------------------------------------------------------------------

/// Phi(x). Saturates to exactly 0 / 1 far in the tails.
double std_normal_cdf(double x);

/// 1 - Phi(x), evaluated directly so that the upper tail keeps relative accuracy
/// for large x (no cancellation against 1).
double std_normal_upper_tail(double x);

double std_normal_pdf(double x);

/// log(1 - Phi(x)); switches to the asymptotic Mills-ratio series where erfc underflows.
double std_normal_log_upper_tail(double x);

/// Phi^{-1}(q) for q in (0, 1). Throws DomainError otherwise.
double std_normal_quantile(double q);

// ---------------------------------------------------------------------------
// Dense least squares
// ---------------------------------------------------------------------------

/// Relative tolerance on |R_kk| / |R_00| below which a column is declared dependent.
inline constexpr double kRankTolerance = 1e-10;

/// Column-pivoted QR factorization of a tall matrix with a rank check.
///
/// Solves min ||A x - b|| and the normal system (A^T A) x = s without ever
/// forming A^T A. Construction throws SingularityError when A is rank deficient.
class LeastSquares {
public:
    explicit LeastSquares(const Matrix& a);

    Vector solve(const Vector& b) const;

    /// Solves (A^T A) x = s.
    Vector solve_normal(const Vector& s) const;

    Eigen::Index cols() const noexcept { return qr_.cols(); }

private:
    Eigen::ColPivHouseholderQR<Matrix> qr_;
};

Vector least_squares(const Matrix& a, const Vector& b);

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

/// One-sample Kolmogorov-Smirnov distance sup |F_n - F|.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

/// Upper tail of the Kolmogorov distribution for statistic d at sample size n,
/// with Stephens' finite-n correction.
double ks_pvalue(double d, std::size_t n);

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

}  // namespace lassoinf
