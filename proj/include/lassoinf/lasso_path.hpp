#pragma once

#include "lassoinf/numkit.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lassoinf {

using Index = Eigen::Index;
using IndexSet = std::vector<Index>;

/// Largest allowed deviation of a column norm from 1.
inline constexpr double kUnitNormTolerance = 1e-8;

/// Throws ContractError unless every column of X has unit Euclidean norm.
void require_unit_norm_columns(const Matrix& x, const char* caller);

// ---------------------------------------------------------------------------
// Least angle regression path (no variable deletions)
// ---------------------------------------------------------------------------

/// Coefficients on one stretch of the path: beta(lambda) = intercept + lambda * slope
/// for lambda in [lambda_lo, lambda_hi]. Vectors have full length p.
struct PathSegment {
    double lambda_hi = 0.0;
    double lambda_lo = 0.0;
    Vector intercept;
    Vector slope;
};

struct PathDiagnostics {
    /// Steps (1-based) at which two candidates reached the knot within 1e-10;
    /// the lowest column index was entered.
    std::vector<std::size_t> tied_steps;
    /// Largest lambda at which an active LAR coefficient passes through zero.
    /// Above it the LAR path coincides with the lasso path; 0 if no crossing occurs.
    double lasso_agreement_floor = 0.0;

    bool has_tie() const noexcept { return !tied_steps.empty(); }
};

/// Knots lambda_1 >= lambda_2 >= ... of the LAR path.
///
/// `knots` holds one more value than `entered`: knots[K] is the lambda at
/// which the next variable would enter (0 when the path runs to the
/// unpenalized fit). `active_sets[k]` is the active set just before the
/// (k+1)-th entry, so active_sets[0] is empty. `segments[k]` covers
/// [knots[k+1], knots[k]].
struct PathTrace {
    Index num_predictors = 0;
    std::vector<double> knots;
    std::vector<Index> entered;
    std::vector<int> signs;
    std::vector<IndexSet> active_sets;
    std::vector<PathSegment> segments;
    PathDiagnostics diagnostics;

    std::size_t steps() const noexcept { return entered.size(); }

    /// lambda_k for 1-based step k; knot(steps() + 1) is the terminal knot.
    double knot(std::size_t step) const;

    /// beta(lambda) evaluated from the segment that contains lambda.
    /// Returns zero for lambda >= lambda_1. Throws DomainError below the last knot.
    Vector coefficients(double lambda) const;
};

/// LAR path with at most `max_steps` entries. Requires unit-norm columns and
/// max_steps <= min(n - 1, p).
PathTrace lar_path(const Matrix& x, const Vector& y, std::size_t max_steps);

// ---------------------------------------------------------------------------
// Lasso at a fixed penalty (coordinate descent)
// ---------------------------------------------------------------------------

struct LassoOptions {
    double kkt_tolerance = 1e-10;
    long max_sweeps = 100000;
};

struct LassoFit {
    Vector beta;
    double kkt_gap = 0.0;
    long sweeps = 0;
};

/// Largest violation of the lasso optimality conditions for
/// 1/2 ||y - X b||^2 + lambda ||b||_1, given the gradient g = X^T (y - X b).
double kkt_gap(const Vector& gradient, const Vector& beta, double lambda);

/// Same, computed from the data.
double kkt_gap(const Matrix& x, const Vector& y, const Vector& beta, double lambda);

/// Cyclic coordinate descent on the Gram form (gram = X^T X, xty = X^T y).
/// Diagonal of gram must be positive. Throws ConvergenceError after the sweep cap.
LassoFit lasso_fit_gram(const Matrix& gram, const Vector& xty, double lambda,
                        const LassoOptions& options = {});

LassoFit lasso_fit(const Matrix& x, const Vector& y, double lambda, const LassoOptions& options = {});

/// Minimizer of 1/2 ||y - X b||^2 + lambda ||b||_1.
Vector lasso_at(const Matrix& x, const Vector& y, double lambda);

/// Lasso using only the columns listed in `active`; coefficients are ordered as
/// `active`. An empty set yields an empty vector (zero fit).
Vector restricted_lasso(const Matrix& x, std::span<const Index> active, const Vector& y, double lambda);

/// Validates that `indices` are distinct and lie in [0, p).
void require_valid_index_set(std::span<const Index> indices, Index p, const char* caller);

// ---------------------------------------------------------------------------
// Forward stepwise regression
// ---------------------------------------------------------------------------

/// Candidates with ||X_{j.A}|| below this are dropped as collinear.
inline constexpr double kCollinearTolerance = 1e-10;

/// Columns X_{j.A} / ||X_{j.A}|| for every j outside `active`, where X_{j.A} is
/// X_j with its projection onto span(X_A) removed.
struct OrthogonalizedCandidates {
    IndexSet indices;
    Matrix directions;  // n x indices.size(), unit columns orthogonal to X_A
    IndexSet excluded;  // collinear with X_A
};

OrthogonalizedCandidates orthogonalize_candidates(const Matrix& x, std::span<const Index> active);

struct CandidateStat {
    Index index = 0;
    double t = 0.0;
};

struct StepwiseTrace {
    std::vector<Index> entered;
    std::vector<double> tmax;                          // max_j |t^{(j)}| at each step
    std::vector<std::vector<CandidateStat>> candidates;  // t^{(j)}(y) per step
    std::vector<IndexSet> excluded;                    // collinear candidates per step

    std::size_t steps() const noexcept { return entered.size(); }
};

/// Forward stepwise selection by the largest |t^{(j)}(y)| = |<X_{j.A}, y>| / ||X_{j.A}||.
StepwiseTrace forward_stepwise(const Matrix& x, const Vector& y, std::size_t steps);

}  // namespace lassoinf
