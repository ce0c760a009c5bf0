#pragma once

#include "lassoinf/lasso_path.hpp"
#include "lassoinf/random_stream.hpp"
#include "lassoinf/seltests.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lassoinf {

// ---------------------------------------------------------------------------
// Data generation
// ---------------------------------------------------------------------------

enum class Correlation { orthogonal, ar1, equicorrelated };

std::string_view to_string(Correlation c);

struct DesignSpec {
    Index n = 0;
    Index p = 0;
    Correlation structure = Correlation::orthogonal;
    double rho = 0.0;  // ar1: rho^{|j - j'|}; equicorrelated: common correlation

    void validate() const;
};

enum class SignPattern { positive, alternating };

std::string_view to_string(SignPattern s);

/// Nonzero coefficients all equal to beta_min in absolute value.
struct SignalSpec {
    std::size_t k0 = 0;
    double beta_min = 0.0;
    IndexSet support;  // empty means the first k0 indices
    SignPattern signs = SignPattern::positive;

    void validate(Index p) const;
    IndexSet resolved_support() const;
    Vector coefficients(Index p) const;
};

/// Rows drawn i.i.d. from N(0, Sigma) with columns scaled to unit norm.
/// The orthogonal structure returns an orthonormal basis (n >= p).
Matrix generate_design(const DesignSpec& spec, RandomStream& stream);

/// y = X beta + sigma * eps.
Vector generate_response(const Matrix& x, const Vector& beta, double sigma, RandomStream& stream);

// ---------------------------------------------------------------------------
// Selection quality metrics
// ---------------------------------------------------------------------------

struct ClassicMetrics {
    std::size_t fp = 0;
    std::size_t tp = 0;
    bool fwer_violation = false;
};

ClassicMetrics classic_metrics(std::span<const Index> selected, std::span<const Index> true_support);

struct UvrResult {
    double uvr = 0.0;
    std::vector<bool> uninformative;  // per selected variable, in `selected` order
    Vector projection;                // coefficients of X beta_true on X_selected
};

/// Projects X beta_true onto the selected columns; a selection is uninformative
/// when its projection coefficient is zero within 1e-8.
UvrResult uvr_metric(std::span<const Index> selected, const Matrix& x, const Vector& beta_true);

struct MetricsRow {
    double avg_selected = 0.0;
    double avg_fp = 0.0;
    double avg_tp = 0.0;
    double fwer = 0.0;
    double fdr = 0.0;
    double uvr = 0.0;
    double avg_selected_se = 0.0;
    double avg_fp_se = 0.0;
    double avg_tp_se = 0.0;
    double fwer_se = 0.0;
    double fdr_se = 0.0;
    double uvr_se = 0.0;
};

// ---------------------------------------------------------------------------
// Experiment drivers. Replication r draws from RandomStream(seed, r) so results
// do not depend on the number of worker threads.
// ---------------------------------------------------------------------------

/// Runs body(r) for r in [0, reps) on up to `threads` workers. If any call
/// throws, the exception from the lowest failing replication is rethrown.
void for_each_replication(std::size_t reps, std::size_t threads, const std::function<void(std::size_t)>& body);

struct ScreeningConfig {
    DesignSpec design;
    SignalSpec signal;
    double sigma = 1.0;
    std::vector<std::size_t> k_grid;
    std::vector<double> beta_min_grid;  // empty: use signal.beta_min only
    std::size_t reps = 0;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct ScreeningCell {
    double beta_min = 0.0;
    std::size_t k = 0;
    double prob = 0.0;
    double se = 0.0;
};

struct ScreeningRecord {
    std::size_t rep = 0;
    double beta_min = 0.0;
    std::size_t k = 0;
    bool contained = false;
};

struct ScreeningResult {
    std::vector<ScreeningCell> table;
    std::vector<ScreeningRecord> records;
};

/// Probability that the true support is inside the first k LAR entries.
ScreeningResult screening_experiment(const ScreeningConfig& config);

struct QQConfig {
    DesignSpec design;
    double sigma = 1.0;
    std::size_t steps = 4;
    std::vector<TestMethod> methods;
    std::size_t reps = 0;
    std::size_t n_mc = 1000;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct QQRecord {
    std::size_t rep = 0;
    std::size_t step = 0;
    TestMethod method = TestMethod::covariance;
    double pvalue = 0.0;
};

/// Global-null p-values (beta = 0) per replication, method and step.
/// Covariance uses rate = k; spacing is reported at step 1 only;
/// tmax_conditional at step 2 only; gumbel at step 1 only.
std::vector<QQRecord> qq_experiment(const QQConfig& config);

struct FdrConfig {
    DesignSpec design;
    SignalSpec signal;
    double sigma = 1.0;
    double alpha = 0.05;
    std::size_t steps = 0;  // 0: min(n - 1, p)
    std::size_t reps = 0;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct FdrRecord {
    std::size_t rep = 0;
    std::size_t k_hat = 0;
    std::size_t fp = 0;
    std::size_t tp = 0;
    bool fwer_violation = false;
    double fdp = 0.0;
    double uvr = 0.0;
};

struct FdrResult {
    MetricsRow metrics;
    std::vector<FdrRecord> records;
};

/// LAR path, incremental-null covariance p-values (rate 1) and ForwardStop.
FdrResult fdr_experiment(const FdrConfig& config);

struct EquicorrConfig {
    std::size_t p = 0;
    double rho = 0.0;
    std::size_t reps = 0;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct EquicorrResult {
    std::vector<double> centered_max;  // V1 - sqrt(2 rho log p)
    double ks_distance = 0.0;          // against |N(0, 1 - rho)|
};

/// Samples U ~ N(0, (1 - rho) I + rho 11^T) directly.
EquicorrResult equicorr_limit_experiment(const EquicorrConfig& config);

}  // namespace lassoinf
