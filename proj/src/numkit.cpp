#include "lassoinf/numkit.hpp"

#include "lassoinf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace lassoinf {

double std_normal_upper_tail(double x) {
    return 0.5 * std::erfc(x * std::numbers::sqrt2 * 0.5);
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5);
}

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double std_normal_log_upper_tail(double x) {
    if (x < 30.0) {
        return std::log(std_normal_upper_tail(x));
    }
    // 1 - Phi(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...)
    const double inv2 = 1.0 / (x * x);
    const double series = 1.0 - inv2 * (1.0 - 3.0 * inv2 * (1.0 - 5.0 * inv2 * (1.0 - 7.0 * inv2)));
    return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

namespace {

// Acklam's rational approximation, relative error about 1.15e-9.
double quantile_initial(double q) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;

    if (q < low) {
        const double t = std::sqrt(-2.0 * std::log(q));
        return (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
               ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    }
    if (q > 1.0 - low) {
        const double t = std::sqrt(-2.0 * std::log1p(-q));
        return -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
               ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    }
    const double u = q - 0.5;
    const double r = u * u;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw DomainError("std_normal_quantile: q must lie in (0, 1), got " + std::to_string(q));
    }
    double x = quantile_initial(q);
    // Newton on whichever tail holds q so the residual never cancels against 1.
    for (int step = 0; step < 2; ++step) {
        const double density = std_normal_pdf(x);
        if (density <= 0.0) break;
        if (q <= 0.5) {
            x -= (std_normal_cdf(x) - q) / density;
        } else {
            x += (std_normal_upper_tail(x) - (1.0 - q)) / density;
        }
    }
    return x;
}

LeastSquares::LeastSquares(const Matrix& a) : qr_(a) {
    const Eigen::Index k = std::min(a.rows(), a.cols());
    if (a.cols() == 0) {
        return;
    }
    const auto& r = qr_.matrixR();
    const double lead = std::abs(r(0, 0));
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(r(i, i)) > kRankTolerance * lead) ++rank;
    }
    if (lead == 0.0) rank = 0;
    if (rank < a.cols()) {
        const long deficient = static_cast<long>(a.cols() - rank);
        throw SingularityError("least squares: matrix is rank deficient (" +
                                   std::to_string(deficient) + " of " +
                                   std::to_string(a.cols()) + " columns dependent)",
                               deficient);
    }
}

Vector LeastSquares::solve(const Vector& b) const {
    if (b.size() != qr_.rows()) {
        throw DomainError("least squares: right-hand side length does not match rows");
    }
    if (qr_.cols() == 0) return Vector(0);
    return qr_.solve(b);
}

Vector LeastSquares::solve_normal(const Vector& s) const {
    const Eigen::Index k = qr_.cols();
    if (s.size() != k) {
        throw DomainError("least squares: normal-system vector has wrong length");
    }
    if (k == 0) return Vector(0);
    // A P = Q R  =>  A^T A = P R^T R P^T.
    const auto r = qr_.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    Vector z = qr_.colsPermutation().transpose() * s;
    r.transpose().solveInPlace(z);
    r.solveInPlace(z);
    return qr_.colsPermutation() * z;
}

Vector least_squares(const Matrix& a, const Vector& b) {
    if (a.rows() != b.size()) {
        throw DomainError("least_squares: A.rows must equal b.length");
    }
    return LeastSquares(a).solve(b);
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) {
        throw DomainError("ks_statistic: empty sample");
    }
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    if (n == 0) {
        throw DomainError("ks_pvalue: n must be positive");
    }
    const double rn = std::sqrt(static_cast<double>(n));
    const double lambda = (rn + 0.12 + 0.11 / rn) * d;
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.0) {
        // P(K <= lambda) via the Jacobi-theta form that converges fast for small lambda.
        constexpr double pi = std::numbers::pi;
        double cdf = 0.0;
        for (int j = 1; j <= 20; ++j) {
            const double m = 2.0 * j - 1.0;
            cdf += std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
        }
        cdf *= std::sqrt(2.0 * pi) / lambda;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }
bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace lassoinf
