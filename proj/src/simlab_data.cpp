#include "lassoinf/errors.hpp"
#include "lassoinf/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lassoinf {

std::string_view to_string(Correlation c) {
    switch (c) {
        case Correlation::orthogonal: return "orthogonal";
        case Correlation::ar1: return "ar1";
        case Correlation::equicorrelated: return "equicorrelated";
    }
    return "unknown";
}

std::string_view to_string(SignPattern s) {
    switch (s) {
        case SignPattern::positive: return "positive";
        case SignPattern::alternating: return "alternating";
    }
    return "unknown";
}

void DesignSpec::validate() const {
    if (n < 1 || p < 1) {
        throw DomainError("design: n and p must be at least 1");
    }
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw DomainError("design: rho must lie in [0, 1)");
    }
    if (structure == Correlation::orthogonal && n < p) {
        throw DomainError("design: orthogonal structure requires n >= p");
    }
}

void SignalSpec::validate(Index p) const {
    if (static_cast<Index>(k0) > p) {
        throw DomainError("signal: k0 exceeds p");
    }
    if (!support.empty()) {
        if (support.size() != k0) {
            throw DomainError("signal: support size must equal k0");
        }
        require_valid_index_set(support, p, "signal");
    }
    if (k0 > 0 && !(beta_min > 0.0 && std::isfinite(beta_min))) {
        throw DomainError("signal: beta_min must be positive");
    }
}

IndexSet SignalSpec::resolved_support() const {
    if (!support.empty()) return support;
    IndexSet out(k0);
    for (std::size_t i = 0; i < k0; ++i) out[i] = static_cast<Index>(i);
    return out;
}

Vector SignalSpec::coefficients(Index p) const {
    validate(p);
    Vector beta = Vector::Zero(p);
    const IndexSet s = resolved_support();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double sign = (signs == SignPattern::alternating && i % 2 == 1) ? -1.0 : 1.0;
        beta[s[i]] = sign * beta_min;
    }
    return beta;
}

Matrix generate_design(const DesignSpec& spec, RandomStream& stream) {
    spec.validate();
    const Index n = spec.n;
    const Index p = spec.p;
    Matrix x(n, p);

    switch (spec.structure) {
        case Correlation::orthogonal: {
            for (Index j = 0; j < p; ++j)
                for (Index i = 0; i < n; ++i) x(i, j) = stream.normal();
            Eigen::HouseholderQR<Matrix> qr(x);
            x = qr.householderQ() * Matrix::Identity(n, p);
            return x;
        }
        case Correlation::ar1: {
            const double innovation = std::sqrt(1.0 - spec.rho * spec.rho);
            for (Index i = 0; i < n; ++i) {
                x(i, 0) = stream.normal();
                for (Index j = 1; j < p; ++j) x(i, j) = spec.rho * x(i, j - 1) + innovation * stream.normal();
            }
            break;
        }
        case Correlation::equicorrelated: {
            const double shared = std::sqrt(spec.rho);
            const double own = std::sqrt(1.0 - spec.rho);
            for (Index i = 0; i < n; ++i) {
                const double z0 = stream.normal();
                for (Index j = 0; j < p; ++j) x(i, j) = shared * z0 + own * stream.normal();
            }
            break;
        }
    }
    for (Index j = 0; j < p; ++j) {
        const double norm = x.col(j).norm();
        if (norm == 0.0) {
            throw DomainError("generate_design: degenerate zero column");
        }
        x.col(j) /= norm;
    }
    return x;
}

Vector generate_response(const Matrix& x, const Vector& beta, double sigma, RandomStream& stream) {
    if (beta.size() != x.cols()) {
        throw DomainError("generate_response: beta length must equal X.cols");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw DomainError("generate_response: sigma must be finite and nonnegative");
    }
    Vector y = x * beta;
    for (Index i = 0; i < y.size(); ++i) y[i] += sigma * stream.normal();
    return y;
}

ClassicMetrics classic_metrics(std::span<const Index> selected, std::span<const Index> true_support) {
    ClassicMetrics m;
    for (Index j : selected) {
        if (std::find(true_support.begin(), true_support.end(), j) != true_support.end()) {
            ++m.tp;
        } else {
            ++m.fp;
        }
    }
    m.fwer_violation = m.fp >= 1;
    return m;
}

UvrResult uvr_metric(std::span<const Index> selected, const Matrix& x, const Vector& beta_true) {
    if (selected.empty()) {
        throw DomainError("uvr_metric: selection must be non-empty");
    }
    if (beta_true.size() != x.cols()) {
        throw DomainError("uvr_metric: beta length must equal X.cols");
    }
    require_valid_index_set(selected, x.cols(), "uvr_metric");
    Matrix xs(x.rows(), static_cast<Index>(selected.size()));
    for (std::size_t i = 0; i < selected.size(); ++i) xs.col(static_cast<Index>(i)) = x.col(selected[i]);

    UvrResult out;
    out.projection = least_squares(xs, x * beta_true);
    std::size_t flagged = 0;
    for (Index i = 0; i < out.projection.size(); ++i) {
        const bool zero = std::abs(out.projection[i]) <= 1e-8;
        out.uninformative.push_back(zero);
        flagged += zero ? 1 : 0;
    }
    out.uvr = static_cast<double>(flagged) / static_cast<double>(selected.size());
    return out;
}

}  // namespace lassoinf
