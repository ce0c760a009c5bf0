#include "lassoinf/errors.hpp"
#include "lassoinf/simlab.hpp"
#include "lassoinf/stopping.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

namespace lassoinf {

void for_each_replication(std::size_t reps, std::size_t threads, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(reps);
    auto guarded = [&](std::size_t r) {
        try {
            body(r);
        } catch (...) {
            errors[r] = std::current_exception();
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(reps, 1));
    if (workers == 1) {
        for (std::size_t r = 0; r < reps; ++r) guarded(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) guarded(r);
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

namespace {

void require_reps(std::size_t reps, const char* caller) {
    if (reps == 0) {
        throw DomainError(std::string(caller) + ": reps must be at least 1");
    }
}

void require_sigma_positive(double sigma, const char* caller) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw DomainError(std::string(caller) + ": sigma must be positive");
    }
}

std::size_t step_bound(const DesignSpec& d) {
    return static_cast<std::size_t>(std::min(d.n - 1, d.p));
}

double binomial_se(double prob, std::size_t reps) {
    return std::sqrt(prob * (1.0 - prob) / static_cast<double>(reps));
}

// Mean and standard error, summed in replication order.
std::pair<double, double> mean_and_se(const std::vector<double>& values) {
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

// ---------------------------------------------------------------------------

ScreeningResult screening_experiment(const ScreeningConfig& config) {
    require_reps(config.reps, "screening_experiment");
    require_sigma_positive(config.sigma, "screening_experiment");
    config.design.validate();
    config.signal.validate(config.design.p);
    if (config.k_grid.empty()) {
        throw DomainError("screening_experiment: k_grid is empty");
    }
    const std::size_t max_k = *std::max_element(config.k_grid.begin(), config.k_grid.end());
    if (max_k > step_bound(config.design)) {
        throw DomainError("screening_experiment: max(k_grid) exceeds min(n - 1, p)");
    }
    const std::vector<double> betas =
        config.beta_min_grid.empty() ? std::vector<double>{config.signal.beta_min} : config.beta_min_grid;
    const IndexSet support = config.signal.resolved_support();

    const std::size_t cells = betas.size() * config.k_grid.size();
    std::vector<std::vector<char>> hits(config.reps, std::vector<char>(cells, 0));

    for_each_replication(config.reps, config.threads, [&](std::size_t r) {
        for (std::size_t b = 0; b < betas.size(); ++b) {
            // Same stream for every beta_min: common random numbers across the grid.
            RandomStream stream(config.seed, r);
            SignalSpec signal = config.signal;
            signal.beta_min = betas[b];
            const Matrix x = generate_design(config.design, stream);
            const Vector beta = signal.coefficients(config.design.p);
            const Vector y = generate_response(x, beta, config.sigma, stream);
            const PathTrace path = lar_path(x, y, max_k);

            for (std::size_t g = 0; g < config.k_grid.size(); ++g) {
                const std::size_t k = std::min(config.k_grid[g], path.steps());
                const auto first = path.entered.begin();
                const bool contained = std::all_of(support.begin(), support.end(), [&](Index j) {
                    return std::find(first, first + static_cast<std::ptrdiff_t>(k), j) != first + static_cast<std::ptrdiff_t>(k);
                });
                hits[r][b * config.k_grid.size() + g] = contained ? 1 : 0;
            }
        }
    });

    ScreeningResult result;
    for (std::size_t b = 0; b < betas.size(); ++b) {
        for (std::size_t g = 0; g < config.k_grid.size(); ++g) {
            std::size_t count = 0;
            for (std::size_t r = 0; r < config.reps; ++r) {
                const bool contained = hits[r][b * config.k_grid.size() + g] != 0;
                count += contained ? 1 : 0;
                result.records.push_back({r, betas[b], config.k_grid[g], contained});
            }
            const double prob = static_cast<double>(count) / static_cast<double>(config.reps);
            result.table.push_back({betas[b], config.k_grid[g], prob, binomial_se(prob, config.reps)});
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

std::vector<QQRecord> qq_experiment(const QQConfig& config) {
    require_reps(config.reps, "qq_experiment");
    require_sigma_positive(config.sigma, "qq_experiment");
    config.design.validate();
    if (config.methods.empty()) {
        throw DomainError("qq_experiment: methods list is empty");
    }
    if (config.steps < 1 || config.steps > step_bound(config.design)) {
        throw DomainError("qq_experiment: steps must lie in [1, min(n - 1, p)]");
    }
    bool needs_path = false;
    bool needs_stepwise = false;
    for (TestMethod m : config.methods) {
        switch (m) {
            case TestMethod::covariance:
            case TestMethod::spacing: needs_path = true; break;
            case TestMethod::tmax: needs_stepwise = true; break;
            case TestMethod::tmax_conditional:
                needs_stepwise = true;
                if (step_bound(config.design) < 2) {
                    throw DomainError("qq_experiment: tmax_conditional needs at least two steps");
                }
                break;
            case TestMethod::gumbel:
                if (config.design.p < 2) throw DomainError("qq_experiment: gumbel needs p >= 2");
                break;
            default: throw DomainError("qq_experiment: unsupported method " + std::string(to_string(m)));
        }
    }
    if (needs_stepwise && config.n_mc == 0) {
        throw DomainError("qq_experiment: n_mc must be at least 1");
    }

    std::vector<std::vector<QQRecord>> per_rep(config.reps);
    for_each_replication(config.reps, config.threads, [&](std::size_t r) {
        RandomStream stream(config.seed, r);
        const Matrix x = generate_design(config.design, stream);
        const Vector y = generate_response(x, Vector::Zero(config.design.p), config.sigma, stream);

        PathTrace path;
        if (needs_path) path = lar_path(x, y, config.steps);
        StepwiseTrace fs;
        if (needs_stepwise) {
            fs = forward_stepwise(x, y, std::min(std::max<std::size_t>(config.steps, 2), step_bound(config.design)));
        }

        auto& out = per_rep[r];
        for (TestMethod m : config.methods) {
            switch (m) {
                case TestMethod::covariance: {
                    const std::size_t k_max = std::min(config.steps, path.steps());
                    for (const TestOutcome& t : covariance_tests(path, x, y, k_max, config.sigma, true)) {
                        out.push_back({r, t.step, m, t.pvalue});
                    }
                    break;
                }
                case TestMethod::spacing:
                    if (path.steps() >= 1) {
                        out.push_back({r, 1, m, spacing_pvalue(path.knots[0], path.knots[1], config.sigma)});
                    }
                    break;
                case TestMethod::tmax: {
                    const std::size_t k_max = std::min(config.steps, fs.steps());
                    for (std::size_t k = 1; k <= k_max; ++k) {
                        const IndexSet active(fs.entered.begin(), fs.entered.begin() + static_cast<std::ptrdiff_t>(k - 1));
                        const double observed = fs.tmax[k - 1] / config.sigma;
                        const MonteCarloPValue mc = tmax_mc_pvalue(x, active, observed, config.n_mc, stream);
                        out.push_back({r, k, m, mc.pvalue});
                    }
                    break;
                }
                case TestMethod::tmax_conditional: {
                    const Vector scaled = y / config.sigma;
                    const ConditionalPValue c =
                        tmax_conditional_pvalue(x, fs.entered[0], scaled, config.n_mc, stream);
                    out.push_back({r, 2, m, c.pvalue});
                    break;
                }
                case TestMethod::gumbel: {
                    const Vector u = x.transpose() * y / config.sigma;
                    out.push_back({r, 1, m, gumbel_pvalue(u, static_cast<std::size_t>(u.size())).pvalue});
                    break;
                }
                default: break;
            }
        }
    });

    std::vector<QQRecord> records;
    for (auto& rep : per_rep) records.insert(records.end(), rep.begin(), rep.end());
    return records;
}

// ---------------------------------------------------------------------------

FdrResult fdr_experiment(const FdrConfig& config) {
    require_reps(config.reps, "fdr_experiment");
    require_sigma_positive(config.sigma, "fdr_experiment");
    config.design.validate();
    config.signal.validate(config.design.p);
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
        throw DomainError("fdr_experiment: alpha must lie in (0, 1)");
    }
    const std::size_t bound = step_bound(config.design);
    const std::size_t steps = config.steps == 0 ? bound : config.steps;
    if (steps > bound) {
        throw DomainError("fdr_experiment: steps exceeds min(n - 1, p)");
    }
    const IndexSet support = config.signal.resolved_support();
    const Vector beta = config.signal.coefficients(config.design.p);
    constexpr double kBelowOne = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

    FdrResult result;
    result.records.resize(config.reps);
    for_each_replication(config.reps, config.threads, [&](std::size_t r) {
        RandomStream stream(config.seed, r);
        const Matrix x = generate_design(config.design, stream);
        const Vector y = generate_response(x, beta, config.sigma, stream);
        const PathTrace path = lar_path(x, y, steps);

        std::vector<double> pvalues;
        for (const TestOutcome& t : covariance_tests(path, x, y, path.steps(), config.sigma, false)) {
            // ForwardStop needs p < 1; a zero statistic is clamped just below one.
            pvalues.push_back(std::min(t.pvalue, kBelowOne));
        }
        const StopDecision stop = forward_stop(pvalues, config.alpha);
        const IndexSet selected(path.entered.begin(), path.entered.begin() + static_cast<std::ptrdiff_t>(stop.k_hat));
        const ClassicMetrics cm = classic_metrics(selected, support);

        FdrRecord& rec = result.records[r];
        rec.rep = r;
        rec.k_hat = stop.k_hat;
        rec.fp = cm.fp;
        rec.tp = cm.tp;
        rec.fwer_violation = cm.fwer_violation;
        rec.fdp = selected.empty() ? 0.0 : static_cast<double>(cm.fp) / static_cast<double>(selected.size());
        rec.uvr = selected.empty() ? 0.0 : uvr_metric(selected, x, beta).uvr;
    });

    std::vector<double> sel, fp, tp, fwer, fdp, uvr;
    for (const FdrRecord& rec : result.records) {
        sel.push_back(static_cast<double>(rec.k_hat));
        fp.push_back(static_cast<double>(rec.fp));
        tp.push_back(static_cast<double>(rec.tp));
        fwer.push_back(rec.fwer_violation ? 1.0 : 0.0);
        fdp.push_back(rec.fdp);
        uvr.push_back(rec.uvr);
    }
    MetricsRow& m = result.metrics;
    std::tie(m.avg_selected, m.avg_selected_se) = mean_and_se(sel);
    std::tie(m.avg_fp, m.avg_fp_se) = mean_and_se(fp);
    std::tie(m.avg_tp, m.avg_tp_se) = mean_and_se(tp);
    std::tie(m.fwer, m.fwer_se) = mean_and_se(fwer);
    std::tie(m.fdr, m.fdr_se) = mean_and_se(fdp);
    std::tie(m.uvr, m.uvr_se) = mean_and_se(uvr);
    return result;
}

// ---------------------------------------------------------------------------

EquicorrResult equicorr_limit_experiment(const EquicorrConfig& config) {
    require_reps(config.reps, "equicorr_limit_experiment");
    if (config.p < 2) {
        throw DomainError("equicorr_limit_experiment: p must be at least 2");
    }
    if (!(config.rho > 0.0 && config.rho < 1.0)) {
        throw DomainError("equicorr_limit_experiment: rho must lie in (0, 1)");
    }
    const double shared = std::sqrt(config.rho);
    const double own = std::sqrt(1.0 - config.rho);
    const double centre = std::sqrt(2.0 * config.rho * std::log(static_cast<double>(config.p)));

    EquicorrResult result;
    result.centered_max.resize(config.reps);
    for_each_replication(config.reps, config.threads, [&](std::size_t r) {
        RandomStream stream(config.seed, r);
        const double z0 = shared * stream.normal();
        double v1 = 0.0;
        for (std::size_t j = 0; j < config.p; ++j) v1 = std::max(v1, std::abs(z0 + own * stream.normal()));
        result.centered_max[r] = v1 - centre;
    });

    const double scale = own;
    result.ks_distance = ks_statistic(result.centered_max, [scale](double v) {
        return v <= 0.0 ? 0.0 : 2.0 * std_normal_cdf(v / scale) - 1.0;
    });
    return result;
}

}  // namespace lassoinf
