#include "lassoinf/cli.hpp"
#include "lassoinf/errors.hpp"
#include "lassoinf/stopping.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#ifndef LASSOINF_VERSION
#define LASSOINF_VERSION "unknown"
#endif

namespace lassoinf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Dataset {
    Matrix x;
    Vector y;
    Vector beta;  // empty for user data
};

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("--config", "cannot read '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", path + ": JSON syntax error at " + line_col(text, e.byte));
    }
}

std::uint64_t flag_uint(const std::string& flag, const std::string& text) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError(flag, "expected a nonnegative integer, got '" + text + "'");
    }
    return v;
}

double flag_real(const std::string& flag, const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ConfigError(flag, "expected a number, got '" + text + "'");
    }
    return v;
}

Dataset load_data_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("data", "cannot read '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("data", "empty file");
    const auto columns = static_cast<Index>(std::count(line.begin(), line.end(), ',') + 1);
    if (columns < 2) throw ConfigError("data", "need at least one predictor column and y");

    std::vector<double> values;
    Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::stringstream ss(line);
        std::string cell;
        Index count = 0;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            const auto start = cell.find_first_not_of(' ');
            const std::string trimmed = start == std::string::npos ? "" : cell.substr(start);
            double v = 0.0;
            const auto res = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
            if (res.ec != std::errc{} || res.ptr != trimmed.data() + trimmed.size() || !std::isfinite(v)) {
                throw ConfigError("data", "row " + std::to_string(rows + 2) + ": not a finite number '" + cell + "'");
            }
            values.push_back(v);
            ++count;
        }
        if (count != columns) {
            throw ConfigError("data", "row " + std::to_string(rows + 2) + " has " + std::to_string(count) +
                                          " fields, expected " + std::to_string(columns));
        }
        ++rows;
    }
    if (rows < 2) throw ConfigError("data", "need at least two observations");
    Dataset d;
    d.x.resize(rows, columns - 1);
    d.y.resize(rows);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < columns - 1; ++j) d.x(i, j) = values[static_cast<std::size_t>(i * columns + j)];
        d.y[i] = values[static_cast<std::size_t>(i * columns + columns - 1)];
    }
    return d;
}

Dataset make_dataset(const RunConfig& c) {
    if (c.data_path) return load_data_csv(*c.data_path);
    RandomStream stream(c.seed, 0);
    Dataset d;
    d.x = generate_design(c.design, stream);
    d.beta = c.signal.coefficients(c.design.p);
    d.y = generate_response(d.x, d.beta, c.sigma, stream);
    return d;
}

std::size_t default_steps(const RunConfig& c, const Matrix& x) {
    const auto bound = static_cast<std::size_t>(std::min(x.rows() - 1, x.cols()));
    if (c.steps > bound) throw ConfigError("steps", "exceeds min(n - 1, p) = " + std::to_string(bound));
    return c.steps == 0 ? bound : c.steps;
}

void write_sidecar(const fs::path& target, const RunConfig& c, json extra) {
    json j;
    j["version"] = LASSOINF_VERSION;
    j["config"] = to_json(c);
    for (auto& [k, v] : extra.items()) j[k] = v;
    write_atomic(target, j.dump(2) + "\n");
}

auto i64 = [](auto v) { return CsvCell{static_cast<std::int64_t>(v)}; };

void run_path(const RunConfig& c, const fs::path& out) {
    const Dataset d = make_dataset(c);
    const PathTrace trace = lar_path(d.x, d.y, default_steps(c, d.x));
    CsvTable table{{"step", "variable", "sign", "knot"}, {}};
    for (std::size_t k = 0; k < trace.steps(); ++k) {
        table.rows.push_back({i64(k + 1), i64(trace.entered[k]), i64(trace.signs[k]), trace.knots[k]});
    }
    emit_csv(table, out / "path.csv");
    write_sidecar(out / "path.json", c,
                  {{"terminal_knot", trace.knots.back()},
                   {"tied_steps", trace.diagnostics.tied_steps},
                   {"lasso_agreement_floor", trace.diagnostics.lasso_agreement_floor}});
}

void run_test(const RunConfig& c, const fs::path& out) {
    const Dataset d = make_dataset(c);
    const std::size_t steps = default_steps(c, d.x);
    const PathTrace trace = lar_path(d.x, d.y, steps);
    const std::size_t k_max = trace.steps();

    CsvTable table{{"step", "method", "statistic", "pvalue", "mc_se"}, {}};
    auto add = [&](const TestOutcome& t) {
        table.rows.push_back({i64(t.step), std::string(to_string(t.method)), t.statistic, t.pvalue,
                              t.mc_se ? CsvCell{*t.mc_se} : CsvCell{std::string()}});
    };

    const std::vector<TestOutcome> cov = covariance_tests(trace, d.x, d.y, k_max, c.sigma, c.cov_rate == "step");
    std::vector<double> cov_p;
    for (const auto& t : cov) {
        add(t);
        cov_p.push_back(std::min(t.pvalue, 1.0 - std::numeric_limits<double>::epsilon() / 2.0));
    }
    if (k_max >= 1) {
        TestOutcome s;
        s.step = 1;
        s.method = TestMethod::spacing;
        s.statistic = trace.knots[0] / c.sigma;
        s.pvalue = spacing_pvalue(trace.knots[0], trace.knots[1], c.sigma);
        add(s);
    }

    const StepwiseTrace fs_trace = forward_stepwise(d.x, d.y, steps);
    RandomStream mc_stream(c.seed, 1);
    for (std::size_t k = 1; k <= fs_trace.steps(); ++k) {
        const IndexSet active(fs_trace.entered.begin(), fs_trace.entered.begin() + static_cast<std::ptrdiff_t>(k - 1));
        TestOutcome t;
        t.step = k;
        t.method = TestMethod::tmax;
        t.statistic = fs_trace.tmax[k - 1] / c.sigma;
        const MonteCarloPValue mc = tmax_mc_pvalue(d.x, active, t.statistic, c.n_mc, mc_stream);
        t.pvalue = mc.pvalue;
        t.mc_se = mc.mc_se;
        add(t);
    }

    if (d.x.cols() >= 2) {
        const Vector u = d.x.transpose() * d.y / c.sigma;
        add(gumbel_pvalue(u, static_cast<std::size_t>(u.size())));
        add(gap_stat(u, static_cast<std::size_t>(u.size())));
    }
    emit_csv(table, out / "tests.csv");

    const StopDecision fstop = forward_stop(cov_p, c.alpha);
    const StopDecision naive = first_exceed(cov_p, c.alpha);
    json extra;
    extra["forward_stop_k_hat"] = fstop.k_hat;
    extra["first_exceed_k_hat"] = naive.k_hat;
    extra["forward_stop_selected"] =
        std::vector<Index>(trace.entered.begin(), trace.entered.begin() + static_cast<std::ptrdiff_t>(fstop.k_hat));
    write_sidecar(out / "tests.json", c, extra);
}

void run_experiment(const RunConfig& c, const fs::path& out) {
    switch (*c.experiment) {
        case ExperimentKind::qq: {
            QQConfig q;
            q.design = c.design;
            q.sigma = c.sigma;
            q.steps = c.steps == 0 ? std::min<std::size_t>(4, static_cast<std::size_t>(std::min(c.design.n - 1, c.design.p)))
                                   : c.steps;
            q.methods = c.methods;
            q.reps = c.reps;
            q.n_mc = c.n_mc;
            q.seed = c.seed;
            q.threads = c.threads;
            const auto records = qq_experiment(q);
            CsvTable table{{"rep", "step", "method", "pvalue"}, {}};
            for (const auto& r : records) {
                table.rows.push_back({i64(r.rep), i64(r.step), std::string(to_string(r.method)), r.pvalue});
            }
            emit_csv(table, out / "qq.csv");
            write_sidecar(out / "qq.json", c, {{"outputs", {"qq.csv"}}});
            return;
        }
        case ExperimentKind::screening: {
            ScreeningConfig s;
            s.design = c.design;
            s.signal = c.signal;
            s.sigma = c.sigma;
            s.k_grid = c.k_grid;
            if (s.k_grid.empty()) {
                const auto bound = static_cast<std::size_t>(std::min(c.design.n - 1, c.design.p));
                for (std::size_t k : {5, 10, 15, 20}) {
                    if (k <= bound) s.k_grid.push_back(k);
                }
                if (s.k_grid.empty()) s.k_grid.push_back(bound);
            }
            s.beta_min_grid = c.beta_min_grid;
            s.reps = c.reps;
            s.seed = c.seed;
            s.threads = c.threads;
            const ScreeningResult res = screening_experiment(s);
            CsvTable table{{"beta_min", "k", "prob", "se"}, {}};
            for (const auto& cell : res.table) table.rows.push_back({cell.beta_min, i64(cell.k), cell.prob, cell.se});
            CsvTable raw{{"rep", "beta_min", "k", "contained"}, {}};
            for (const auto& r : res.records) raw.rows.push_back({i64(r.rep), r.beta_min, i64(r.k), i64(r.contained)});
            emit_csv(table, out / "screening.csv");
            emit_csv(raw, out / "screening_raw.csv");
            write_sidecar(out / "screening.json", c, {{"outputs", {"screening.csv", "screening_raw.csv"}}});
            return;
        }
        case ExperimentKind::fdr: {
            FdrConfig f;
            f.design = c.design;
            f.signal = c.signal;
            f.sigma = c.sigma;
            f.alpha = c.alpha;
            f.steps = c.steps;
            f.reps = c.reps;
            f.seed = c.seed;
            f.threads = c.threads;
            const FdrResult res = fdr_experiment(f);
            const MetricsRow& m = res.metrics;
            CsvTable table{{"avg_selected", "avg_fp", "avg_tp", "fwer", "fdr", "uvr", "avg_selected_se", "avg_fp_se",
                            "avg_tp_se", "fwer_se", "fdr_se", "uvr_se"},
                           {{m.avg_selected, m.avg_fp, m.avg_tp, m.fwer, m.fdr, m.uvr, m.avg_selected_se, m.avg_fp_se,
                             m.avg_tp_se, m.fwer_se, m.fdr_se, m.uvr_se}}};
            CsvTable raw{{"rep", "selected", "fp", "tp", "fwer_violation", "fdp", "uvr"}, {}};
            for (const auto& r : res.records) {
                raw.rows.push_back({i64(r.rep), i64(r.k_hat), i64(r.fp), i64(r.tp), i64(r.fwer_violation), r.fdp, r.uvr});
            }
            emit_csv(table, out / "fdr.csv");
            emit_csv(raw, out / "fdr_raw.csv");
            write_sidecar(out / "fdr.json", c, {{"outputs", {"fdr.csv", "fdr_raw.csv"}}});
            return;
        }
        case ExperimentKind::equicorr: {
            EquicorrConfig e;
            e.p = static_cast<std::size_t>(c.design.p);
            e.rho = c.design.rho;
            e.reps = c.reps;
            e.seed = c.seed;
            e.threads = c.threads;
            const EquicorrResult res = equicorr_limit_experiment(e);
            CsvTable table{{"rep", "centered_max"}, {}};
            for (std::size_t r = 0; r < res.centered_max.size(); ++r) table.rows.push_back({i64(r), res.centered_max[r]});
            emit_csv(table, out / "equicorr.csv");
            write_sidecar(out / "equicorr.json", c,
                          {{"outputs", {"equicorr.csv"}}, {"ks_distance", res.ks_distance}});
            return;
        }
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Lasso path significance tests and simulation laboratory", "lassoinf"};
    app.require_subcommand(1);
    std::optional<std::string> config_path, seed, reps, out_dir, sigma, alpha, threads, steps;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--seed", seed, "Root seed (u64)");
    app.add_option("--reps", reps, "Number of replications");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--sigma", sigma, "Noise standard deviation");
    app.add_option("--alpha", alpha, "ForwardStop level");
    app.add_option("--threads", threads, "Worker threads for experiments");
    app.add_option("--steps", steps, "Number of path steps");

    auto* path_cmd = app.add_subcommand("path", "Compute the LAR path of a dataset")->fallthrough();
    auto* test_cmd = app.add_subcommand("test", "Run all significance tests on a dataset")->fallthrough();
    auto* exp_cmd = app.add_subcommand("experiment", "Run a simulation experiment")->fallthrough();
    std::string kind;
    exp_cmd->add_option("kind", kind, "screening | qq | fdr | equicorr")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            throw ConfigError("", e.what());
        }

        json doc = config_path ? load_config_file(*config_path) : json::object();
        if (!doc.is_object()) throw ConfigError("--config", "top level must be a JSON object");
        if (path_cmd->parsed()) doc["command"] = "path";
        if (test_cmd->parsed()) doc["command"] = "test";
        if (exp_cmd->parsed()) {
            doc["command"] = "experiment";
            doc["experiment"] = kind;
        }
        if (seed) doc["seed"] = flag_uint("--seed", *seed);
        if (reps) doc["reps"] = flag_uint("--reps", *reps);
        if (out_dir) doc["out"] = *out_dir;
        if (sigma) doc["sigma"] = flag_real("--sigma", *sigma);
        if (alpha) doc["alpha"] = flag_real("--alpha", *alpha);
        if (threads) doc["threads"] = flag_uint("--threads", *threads);
        if (steps) doc["steps"] = flag_uint("--steps", *steps);

        const RunConfig config = parse_config(doc);
        const fs::path out_path(config.output_path);
        switch (config.command) {
            case Command::path: run_path(config, out_path); break;
            case Command::test: run_test(config, out_path); break;
            case Command::experiment: run_experiment(config, out_path); break;
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "lassoinf: configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "lassoinf: error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace lassoinf::cli
