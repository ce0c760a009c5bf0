#include "lassoinf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lassoinf::cli {

using nlohmann::json;

std::string_view to_string(Command c) {
    switch (c) {
        case Command::path: return "path";
        case Command::test: return "test";
        case Command::experiment: return "experiment";
    }
    return "unknown";
}

std::string_view to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::screening: return "screening";
        case ExperimentKind::qq: return "qq";
        case ExperimentKind::fdr: return "fdr";
        case ExperimentKind::equicorr: return "equicorr";
    }
    return "unknown";
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(prefix + key, "unknown field");
        }
    }
}

const json& require_object(const json& doc, const std::string& field) {
    if (!doc.is_object()) {
        throw ConfigError(field, "expected an object");
    }
    return doc;
}

std::uint64_t read_uint(const json& v, const std::string& field) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(field, "expected a nonnegative integer");
}

double read_real(const json& v, const std::string& field) {
    if (!v.is_number()) {
        throw ConfigError(field, "expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ConfigError(field, "expected a finite number");
    }
    return d;
}

std::string read_string(const json& v, const std::string& field) {
    if (!v.is_string()) {
        throw ConfigError(field, "expected a string");
    }
    return v.get<std::string>();
}

Command parse_command(const std::string& s) {
    if (s == "path") return Command::path;
    if (s == "test") return Command::test;
    if (s == "experiment") return Command::experiment;
    throw ConfigError("command", "must be one of path, test, experiment (got '" + s + "')");
}

ExperimentKind parse_kind(const std::string& s) {
    if (s == "screening") return ExperimentKind::screening;
    if (s == "qq") return ExperimentKind::qq;
    if (s == "fdr") return ExperimentKind::fdr;
    if (s == "equicorr") return ExperimentKind::equicorr;
    throw ConfigError("experiment", "must be one of screening, qq, fdr, equicorr (got '" + s + "')");
}

TestMethod parse_method(const std::string& s, const std::string& field) {
    if (s == "covariance") return TestMethod::covariance;
    if (s == "spacing") return TestMethod::spacing;
    if (s == "tmax") return TestMethod::tmax;
    if (s == "tmax_conditional") return TestMethod::tmax_conditional;
    if (s == "gumbel") return TestMethod::gumbel;
    throw ConfigError(field, "unknown method '" + s + "'");
}

DesignSpec parse_design(const json& doc, bool need_n) {
    require_object(doc, "design");
    reject_unknown_keys(doc, {"n", "p", "structure", "rho"}, "design.");
    DesignSpec d;
    if (!doc.contains("p")) throw ConfigError("design.p", "missing required field");
    d.p = static_cast<Index>(read_uint(doc["p"], "design.p"));
    if (need_n) {
        if (!doc.contains("n")) throw ConfigError("design.n", "missing required field");
        d.n = static_cast<Index>(read_uint(doc["n"], "design.n"));
    } else if (doc.contains("n")) {
        d.n = static_cast<Index>(read_uint(doc["n"], "design.n"));
    }
    const std::string structure = doc.contains("structure") ? read_string(doc["structure"], "design.structure")
                                                            : std::string("orthogonal");
    if (structure == "orthogonal") {
        d.structure = Correlation::orthogonal;
    } else if (structure == "ar1") {
        d.structure = Correlation::ar1;
    } else if (structure == "equicorrelated") {
        d.structure = Correlation::equicorrelated;
    } else {
        throw ConfigError("design.structure", "must be orthogonal, ar1 or equicorrelated");
    }
    if (d.structure != Correlation::orthogonal) {
        if (!doc.contains("rho")) throw ConfigError("design.rho", "missing required field");
        d.rho = read_real(doc["rho"], "design.rho");
        if (!(d.rho >= 0.0 && d.rho < 1.0)) throw ConfigError("design.rho", "must lie in [0, 1)");
    } else if (doc.contains("rho")) {
        d.rho = read_real(doc["rho"], "design.rho");
    }
    if (d.p < 1) throw ConfigError("design.p", "must be at least 1");
    if (need_n) {
        if (d.n < 2) throw ConfigError("design.n", "must be at least 2");
        if (d.structure == Correlation::orthogonal && d.n < d.p) {
            throw ConfigError("design.n", "orthogonal structure requires n >= p");
        }
    }
    return d;
}

SignalSpec parse_signal(const json& doc, Index p) {
    require_object(doc, "signal");
    reject_unknown_keys(doc, {"k0", "beta_min", "support", "signs"}, "signal.");
    SignalSpec s;
    if (doc.contains("k0")) s.k0 = read_uint(doc["k0"], "signal.k0");
    if (doc.contains("beta_min")) s.beta_min = read_real(doc["beta_min"], "signal.beta_min");
    if (doc.contains("support")) {
        if (!doc["support"].is_array()) throw ConfigError("signal.support", "expected an array of indices");
        for (const auto& v : doc["support"]) s.support.push_back(static_cast<Index>(read_uint(v, "signal.support")));
        if (!doc.contains("k0")) s.k0 = s.support.size();
    }
    if (doc.contains("signs")) {
        const std::string signs = read_string(doc["signs"], "signal.signs");
        if (signs == "positive") {
            s.signs = SignPattern::positive;
        } else if (signs == "alternating") {
            s.signs = SignPattern::alternating;
        } else {
            throw ConfigError("signal.signs", "must be positive or alternating");
        }
    }
    if (static_cast<Index>(s.k0) > p) throw ConfigError("signal.k0", "exceeds design.p");
    if (s.k0 > 0 && !(s.beta_min > 0.0)) throw ConfigError("signal.beta_min", "must be positive when k0 > 0");
    try {
        s.validate(p);
    } catch (const std::exception& e) {
        throw ConfigError("signal", e.what());
    }
    return s;
}

}  // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("", "configuration must be a JSON object");
    }
    reject_unknown_keys(doc,
                        {"command", "experiment", "design", "signal", "sigma", "alpha", "reps", "steps", "seed",
                         "out", "methods", "n_mc", "k_grid", "beta_min_grid", "threads", "cov_rate", "data"},
                        "");
    RunConfig c;
    if (!doc.contains("command")) throw ConfigError("command", "missing required field");
    c.command = parse_command(read_string(doc["command"], "command"));

    if (c.command == Command::experiment) {
        if (!doc.contains("experiment")) throw ConfigError("experiment", "missing required field");
        c.experiment = parse_kind(read_string(doc["experiment"], "experiment"));
    } else if (doc.contains("experiment")) {
        throw ConfigError("experiment", "only valid with the experiment command");
    }

    if (doc.contains("data")) {
        if (c.command == Command::experiment) throw ConfigError("data", "not used by experiments");
        c.data_path = read_string(doc["data"], "data");
    }

    const bool is_equicorr = c.experiment == ExperimentKind::equicorr;
    if (doc.contains("design")) {
        c.design = parse_design(doc["design"], !is_equicorr);
    } else if (!c.data_path) {
        throw ConfigError("design", "missing required field");
    }
    if (is_equicorr) {
        if (!(c.design.rho > 0.0)) throw ConfigError("design.rho", "equicorr needs rho in (0, 1)");
        if (c.design.p < 2) throw ConfigError("design.p", "equicorr needs p >= 2");
    }
    if (doc.contains("signal")) c.signal = parse_signal(doc["signal"], c.design.p);

    if (doc.contains("sigma")) {
        c.sigma = read_real(doc["sigma"], "sigma");
        if (!(c.sigma > 0.0)) throw ConfigError("sigma", "must be positive");
    }
    if (doc.contains("alpha")) {
        c.alpha = read_real(doc["alpha"], "alpha");
        if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");
    }
    if (c.command == Command::experiment) {
        if (!doc.contains("reps")) throw ConfigError("reps", "missing required field");
        c.reps = read_uint(doc["reps"], "reps");
        if (c.reps < 1) throw ConfigError("reps", "must be at least 1");
    } else if (doc.contains("reps")) {
        c.reps = read_uint(doc["reps"], "reps");
    }
    if (doc.contains("steps")) c.steps = read_uint(doc["steps"], "steps");
    if (doc.contains("seed")) c.seed = read_uint(doc["seed"], "seed");
    if (doc.contains("out")) c.output_path = read_string(doc["out"], "out");
    if (doc.contains("n_mc")) {
        c.n_mc = read_uint(doc["n_mc"], "n_mc");
        if (c.n_mc < 1) throw ConfigError("n_mc", "must be at least 1");
    }
    if (doc.contains("threads")) {
        c.threads = read_uint(doc["threads"], "threads");
        if (c.threads < 1) throw ConfigError("threads", "must be at least 1");
    }
    if (doc.contains("cov_rate")) {
        c.cov_rate = read_string(doc["cov_rate"], "cov_rate");
        if (c.cov_rate != "one" && c.cov_rate != "step") throw ConfigError("cov_rate", "must be 'one' or 'step'");
    }

    if (doc.contains("methods")) {
        if (!doc["methods"].is_array()) throw ConfigError("methods", "expected an array of method names");
        for (const auto& m : doc["methods"]) c.methods.push_back(parse_method(read_string(m, "methods"), "methods"));
        if (c.methods.empty()) throw ConfigError("methods", "must not be empty");
    } else if (c.experiment == ExperimentKind::qq) {
        c.methods = {TestMethod::covariance, TestMethod::spacing, TestMethod::tmax};
    }

    if (doc.contains("k_grid")) {
        if (!doc["k_grid"].is_array() || doc["k_grid"].empty()) {
            throw ConfigError("k_grid", "expected a non-empty array of step counts");
        }
        for (const auto& v : doc["k_grid"]) c.k_grid.push_back(read_uint(v, "k_grid"));
    }
    if (doc.contains("beta_min_grid")) {
        if (!doc["beta_min_grid"].is_array()) throw ConfigError("beta_min_grid", "expected an array of numbers");
        for (const auto& v : doc["beta_min_grid"]) {
            const double b = read_real(v, "beta_min_grid");
            if (!(b > 0.0)) throw ConfigError("beta_min_grid", "values must be positive");
            c.beta_min_grid.push_back(b);
        }
    }

    // Step bounds that can be checked without running anything.
    if (c.command != Command::experiment || !is_equicorr) {
        if (!c.data_path) {
            const auto bound = static_cast<std::size_t>(std::min(c.design.n - 1, c.design.p));
            if (c.steps > bound) throw ConfigError("steps", "exceeds min(n - 1, p) = " + std::to_string(bound));
            for (std::size_t k : c.k_grid) {
                if (k > bound) throw ConfigError("k_grid", "entry exceeds min(n - 1, p) = " + std::to_string(bound));
            }
        }
    }
    if (c.experiment == ExperimentKind::qq && doc.contains("steps") && c.steps < 1) {
        throw ConfigError("steps", "must be at least 1");
    }
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["command"] = std::string(to_string(c.command));
    if (c.experiment) j["experiment"] = std::string(to_string(*c.experiment));
    if (c.data_path) {
        j["data"] = *c.data_path;
    } else {
        j["design"] = {{"n", c.design.n},
                       {"p", c.design.p},
                       {"structure", std::string(to_string(c.design.structure))},
                       {"rho", c.design.rho}};
    }
    j["signal"] = {{"k0", c.signal.k0},
                   {"beta_min", c.signal.beta_min},
                   {"support", c.signal.resolved_support()},
                   {"signs", std::string(to_string(c.signal.signs))}};
    j["sigma"] = c.sigma;
    j["alpha"] = c.alpha;
    if (c.command == Command::experiment) j["reps"] = c.reps;
    j["steps"] = c.steps;
    j["seed"] = c.seed;
    j["out"] = c.output_path;
    if (!c.methods.empty()) {
        json methods = json::array();
        for (TestMethod m : c.methods) methods.push_back(std::string(to_string(m)));
        j["methods"] = methods;
    }
    j["n_mc"] = c.n_mc;
    if (!c.k_grid.empty()) j["k_grid"] = c.k_grid;
    if (!c.beta_min_grid.empty()) j["beta_min_grid"] = c.beta_min_grid;
    j["threads"] = c.threads;
    j["cov_rate"] = c.cov_rate;
    return j;
}

}  // namespace lassoinf::cli
