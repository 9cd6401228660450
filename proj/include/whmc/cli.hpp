#pragma once
/**
 * @file cli.hpp
 * @brief Run configurations and the four command-line commands.
 *
 * A run is one JSON document (schema version 1, see README):
 *
 *   model       {type: brownian | beta, ...}
 *   functional  {kind, u, t, s, y, q}
 *   method      {kind: whmc | mlmc | plain, n, samples, h, n0, max_level, target_stderr, ...}
 *   rng         {seed, workers}
 *   output      {path, format: csv | json}
 *
 * plus one optional block per command (cdf, rate_study, gerber_shiu).
 * CSV output has a one-line header, ',' separators and numbers printed
 * with "%.17g" (non-finite or absent values as NA).
 */

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "whmc/baselines.hpp"
#include "whmc/errors.hpp"
#include "whmc/estimators.hpp"
#include "whmc/levy_model.hpp"

namespace whmc::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(field) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct FunctionalConfig {
    std::string kind;
    std::optional<double> u, t, s, y, q;
};

struct MethodConfig {
    std::string kind = "whmc";
    std::size_t n = 0;
    std::size_t samples = 0;
    double h = 0.0;
    std::size_t n0 = 16;
    std::size_t max_level = 6;
    std::size_t pilot_samples = 1000;
    double target_stderr = 0.0;
    std::vector<std::size_t> schedule;
    bool bias_stopping = true;
    std::size_t truncation_n = kDefaultTruncation;
};

struct RunConfig {
    LevyModel model = BrownianMotion{};
    FunctionalConfig functional;
    MethodConfig method;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string out_path;
    std::string format = "csv";
    json raw;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out_path;
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline const json* find(const json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline std::optional<double> opt_number(const json& obj, const std::string& key, const std::string& path) {
    const json* v = find(obj, key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) throw ConfigError(path + "." + key, "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(path + "." + key, "must be finite");
    return x;
}

inline double number(const json& obj, const std::string& key, const std::string& path) {
    auto v = opt_number(obj, key, path);
    if (!v) throw ConfigError(path + "." + key, "missing required field");
    return *v;
}

inline std::optional<std::uint64_t> opt_count(const json& obj, const std::string& key, const std::string& path) {
    const json* v = find(obj, key);
    if (v == nullptr) return std::nullopt;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer()) {
        if (v->get<std::int64_t>() < 0) throw ConfigError(path + "." + key, "must be non-negative");
        return static_cast<std::uint64_t>(v->get<std::int64_t>());
    }
    if (v->is_number_float()) {
        const double x = v->get<double>();
        if (x >= 0.0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
    }
    throw ConfigError(path + "." + key, "expected a non-negative integer");
}

inline std::uint64_t count(const json& obj, const std::string& key, const std::string& path) {
    auto v = opt_count(obj, key, path);
    if (!v) throw ConfigError(path + "." + key, "missing required field");
    return *v;
}

inline std::optional<std::string> opt_string(const json& obj, const std::string& key, const std::string& path) {
    const json* v = find(obj, key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) throw ConfigError(path + "." + key, "expected a string");
    return v->get<std::string>();
}

inline LevyModel parse_model(const json& root) {
    const json* m = find(root, "model");
    if (m == nullptr) return BrownianMotion{};
    if (!m->is_object()) throw ConfigError("model", "expected an object");
    const std::string type = opt_string(*m, "type", "model").value_or("");
    if (type == "brownian") {
        BrownianMotion bm;
        bm.drift = opt_number(*m, "drift", "model").value_or(0.0);
        bm.volatility = opt_number(*m, "volatility", "model").value_or(1.0);
        if (!(bm.volatility > 0.0)) throw ConfigError("model.volatility", "must be > 0");
        return bm;
    }
    if (type == "beta") {
        BetaFamilyParams p;
        p.c1 = number(*m, "c1", "model");
        p.c2 = number(*m, "c2", "model");
        p.alpha1 = number(*m, "alpha1", "model");
        p.alpha2 = number(*m, "alpha2", "model");
        p.beta1 = number(*m, "beta1", "model");
        p.beta2 = number(*m, "beta2", "model");
        p.lambda1 = number(*m, "lambda1", "model");
        p.lambda2 = number(*m, "lambda2", "model");
        p.sigma = opt_number(*m, "sigma", "model").value_or(0.0);
        const json* driftless = find(*m, "driftless");
        if (driftless != nullptr && !driftless->is_boolean()) throw ConfigError("model.driftless", "expected a boolean");
        const bool zero_rho = driftless != nullptr && driftless->get<bool>();
        const auto a = opt_number(*m, "a", "model");
        if (zero_rho && a) throw ConfigError("model.a", "cannot be combined with model.driftless");
        p.a = a.value_or(0.0);
        try {
            validate(p);
            if (zero_rho) p = with_zero_linear_term(p);
        } catch (const ParameterError& e) {
            throw ConfigError("model", e.what());
        }
        return BetaFamily{p};
    }
    throw ConfigError("model.type", "expected \"brownian\" or \"beta\"");
}

inline FunctionalConfig parse_functional(const json& root) {
    FunctionalConfig f;
    const json* b = find(root, "functional");
    if (b == nullptr) throw ConfigError("functional", "missing required block");
    f.kind = opt_string(*b, "kind", "functional").value_or("first_passage_time");
    f.u = opt_number(*b, "u", "functional");
    f.t = opt_number(*b, "t", "functional");
    f.s = opt_number(*b, "s", "functional");
    f.y = opt_number(*b, "y", "functional");
    f.q = opt_number(*b, "q", "functional");
    return f;
}

inline MethodConfig parse_method(const json& root) {
    MethodConfig m;
    const json* b = find(root, "method");
    if (b == nullptr) return m;
    m.kind = opt_string(*b, "kind", "method").value_or("whmc");
    if (m.kind != "whmc" && m.kind != "mlmc" && m.kind != "plain")
        throw ConfigError("method.kind", "expected \"whmc\", \"mlmc\" or \"plain\"");
    m.n = opt_count(*b, "n", "method").value_or(0);
    m.samples = opt_count(*b, "samples", "method").value_or(0);
    m.h = opt_number(*b, "h", "method").value_or(0.0);
    m.n0 = opt_count(*b, "n0", "method").value_or(m.n0);
    m.max_level = opt_count(*b, "max_level", "method").value_or(m.max_level);
    m.pilot_samples = opt_count(*b, "pilot_samples", "method").value_or(m.pilot_samples);
    m.target_stderr = opt_number(*b, "target_stderr", "method").value_or(0.0);
    m.truncation_n = opt_count(*b, "truncation_n", "method").value_or(m.truncation_n);
    if (m.truncation_n == 0) throw ConfigError("method.truncation_n", "must be >= 1");
    if (const json* bias = find(*b, "bias_stopping")) {
        if (!bias->is_boolean()) throw ConfigError("method.bias_stopping", "expected a boolean");
        m.bias_stopping = bias->get<bool>();
    }
    if (const json* s = find(*b, "schedule")) {
        if (!s->is_array()) throw ConfigError("method.schedule", "expected an array of sample counts");
        for (std::size_t i = 0; i < s->size(); ++i) {
            const json& e = (*s)[i];
            if (!e.is_number_integer() || e.get<std::int64_t>() < 1)
                throw ConfigError("method.schedule[" + std::to_string(i) + "]", "expected an integer >= 1");
            m.schedule.push_back(e.get<std::size_t>());
        }
    }
    return m;
}

}  // namespace detail

inline RunConfig parse_config(const json& root, const Overrides& overrides = {}) {
    if (!root.is_object()) throw ConfigError("<root>", "expected a JSON object");
    RunConfig c;
    c.raw = root;
    c.model = detail::parse_model(root);
    c.functional = detail::parse_functional(root);
    c.method = detail::parse_method(root);

    const json* rng = detail::find(root, "rng");
    std::optional<std::uint64_t> seed = overrides.seed;
    if (!seed && rng != nullptr) seed = detail::opt_count(*rng, "seed", "rng");
    if (!seed) throw ConfigError("rng.seed", "missing required field (or pass --seed)");
    c.seed = *seed;
    std::uint64_t workers = 1;
    if (rng != nullptr) workers = detail::opt_count(*rng, "workers", "rng").value_or(1);
    if (overrides.workers) workers = *overrides.workers;
    if (workers < 1 || workers > 1024) throw ConfigError("rng.workers", "must be in [1, 1024]");
    c.workers = static_cast<unsigned>(workers);

    if (const json* out = detail::find(root, "output")) {
        c.out_path = detail::opt_string(*out, "path", "output").value_or("");
        c.format = detail::opt_string(*out, "format", "output").value_or("csv");
    }
    if (overrides.out_path) c.out_path = *overrides.out_path;
    if (c.format != "csv" && c.format != "json") throw ConfigError("output.format", "expected \"csv\" or \"json\"");
    if (c.out_path.empty()) throw ConfigError("output.path", "missing required field (or pass --out)");
    return c;
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

/// Shortest-safe round-trip text: 17 significant digits, NA for non-finite.
inline std::string format_number(double x) {
    if (!std::isfinite(x)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_number(std::optional<double> x) { return x ? format_number(*x) : "NA"; }

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::logic_error("csv: column count mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    std::size_t columns_;
    std::ostringstream out_;
};

/// Splits CSV text into rows of cells (no quoting; the writer never quotes).
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("output.path", "cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw ConfigError("output.path", "write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace detail {

inline double require(const std::optional<double>& v, const std::string& field) {
    if (!v) throw ConfigError(field, "missing required field");
    return *v;
}

inline double require_positive(const std::optional<double>& v, const std::string& field) {
    const double x = require(v, field);
    if (!(x > 0.0)) throw ConfigError(field, "must be > 0");
    return x;
}

inline Functional build_functional(const FunctionalConfig& f) {
    if (f.kind == "first_passage_time") return FirstPassageTime{};
    if (f.kind == "indicator_cdf") return IndicatorCdf{require_positive(f.s, "functional.s")};
    if (f.kind == "discounted_overshoot")
        return DiscountedOvershootIndicator{require_positive(f.q, "functional.q"),
                                            require_positive(f.y, "functional.y")};
    throw ConfigError("functional.kind",
                      "expected \"first_passage_time\", \"indicator_cdf\" or \"discounted_overshoot\"");
}

inline void require_standard_bm(const RunConfig& c, const std::string& command) {
    const auto* bm = std::get_if<BrownianMotion>(&c.model);
    if (bm == nullptr || bm->drift != 0.0 || bm->volatility != 1.0)
        throw ConfigError("model", command + " needs a standard Brownian motion");
}

inline json report_to_json(const EstimateReport& r) {
    json levels = json::array();
    for (const auto& l : r.levels) {
        levels.push_back({{"level", l.level},
                          {"n", l.n_fine},
                          {"samples", l.samples},
                          {"mean", number_or_null(l.mean)},
                          {"variance", number_or_null(l.variance)},
                          {"cost_per_sample", l.cost_per_sample}});
    }
    return {{"value", number_or_null(r.value)},
            {"std_error", number_or_null(r.std_error)},
            {"ci95", {number_or_null(r.ci95.first), number_or_null(r.ci95.second)}},
            {"samples", r.samples},
            {"steps_consumed", r.steps_consumed},
            {"pilot_steps", r.pilot_steps},
            {"levels", levels}};
}

inline std::size_t total_samples(const EstimateReport& r) {
    std::size_t m = 0;
    for (auto s : r.samples) m += s;
    return m;
}

}  // namespace detail

inline EstimateReport cmd_estimate(const RunConfig& c) {
    const Functional f = detail::build_functional(c.functional);
    const double t = detail::require_positive(c.functional.t, "functional.t");
    const double u = detail::require_positive(c.functional.u, "functional.u");
    const Execution exec{c.seed, c.workers};
    const MethodConfig& m = c.method;
    EstimateReport report;
    if (m.kind == "whmc") {
        if (m.n == 0) throw ConfigError("method.n", "missing required field");
        if (m.samples < 2) throw ConfigError("method.samples", "must be >= 2");
        report = mc_estimate(c.model, f, u, GridSpec{m.n, t}, m.samples, exec, m.truncation_n);
    } else if (m.kind == "mlmc") {
        if (!m.schedule.empty()) {
            LevelSchedule s{m.n0, m.schedule.size() - 1, m.schedule};
            report = mlmc_estimate(c.model, f, u, t, s, exec, m.truncation_n);
        } else {
            if (!(m.target_stderr > 0.0)) throw ConfigError("method.target_stderr", "must be > 0 (or give method.schedule)");
            MlmcRunOptions opt;
            opt.n0 = m.n0;
            opt.max_level = m.max_level;
            opt.pilot_samples = std::max<std::size_t>(2, m.pilot_samples);
            opt.bias_stopping = m.bias_stopping;
            opt.truncation_n = m.truncation_n;
            report = mlmc_run(c.model, f, u, t, m.target_stderr, exec, opt);
        }
    } else {
        const auto* bm = std::get_if<BrownianMotion>(&c.model);
        if (bm == nullptr) throw ConfigError("method.kind", "plain random walk needs a Brownian model");
        if (!(m.h > 0.0)) throw ConfigError("method.h", "missing required field (step size)");
        if (m.samples < 2) throw ConfigError("method.samples", "must be >= 2");
        const BrownianMotion model = *bm;
        const RunningStats stats = run_sharded<RunningStats>(
            m.samples, exec.workers, exec.seed, [&](Rng& rng, std::size_t, std::size_t count) {
                RunningStats s;
                for (std::size_t i = 0; i < count; ++i)
                    s.add(evaluate(f, simulate_plain_first_passage(model, u, t, m.h, rng), {0.0, 0.0}));
                return s;
            });
        report = report_from_stats(stats, static_cast<std::size_t>(std::floor(t / m.h * (1.0 + 1e-12))));
    }
    if (c.format == "json") {
        write_file(c.out_path, detail::report_to_json(report).dump(2) + "\n");
    } else {
        CsvWriter csv({"value", "std_error", "ci_low", "ci_high", "samples", "levels", "steps_consumed",
                       "pilot_steps"});
        csv.row({format_number(report.value), format_number(report.std_error), format_number(report.ci95.first),
                 format_number(report.ci95.second), std::to_string(detail::total_samples(report)),
                 std::to_string(report.levels.size()), std::to_string(report.steps_consumed),
                 std::to_string(report.pilot_steps)});
        write_file(c.out_path, csv.str());
    }
    return report;
}

struct FptimeCdfResult {
    CdfTable analytic, plain, whmc;
    double plain_sup_error = 0.0;
    double whmc_sup_error = 0.0;
};

inline FptimeCdfResult cmd_fptime_cdf(const RunConfig& c) {
    detail::require_standard_bm(c, "fptime-cdf");
    const double t = detail::require_positive(c.functional.t, "functional.t");
    const double u = detail::require_positive(c.functional.u, "functional.u");
    const json* b = detail::find(c.raw, "cdf");
    if (b == nullptr) throw ConfigError("cdf", "missing required block");
    const std::size_t n = detail::count(*b, "n", "cdf");
    if (n == 0) throw ConfigError("cdf.n", "must be >= 1");
    const std::size_t samples = detail::count(*b, "samples", "cdf");
    if (samples == 0) throw ConfigError("cdf.samples", "must be >= 1");
    const double h = detail::opt_number(*b, "plain_step", "cdf").value_or(t / (2.0 * static_cast<double>(n)));
    if (!(h > 0.0)) throw ConfigError("cdf.plain_step", "must be > 0");

    std::vector<double> grid;
    if (const json* g = detail::find(*b, "grid")) {
        if (!g->is_array()) throw ConfigError("cdf.grid", "expected an array of times");
        for (std::size_t i = 0; i < g->size(); ++i) {
            if (!(*g)[i].is_number()) throw ConfigError("cdf.grid[" + std::to_string(i) + "]", "expected a number");
            grid.push_back((*g)[i].get<double>());
        }
    } else {
        const auto step = detail::opt_number(*b, "grid_step", "cdf");
        const auto cnt = detail::opt_count(*b, "grid_count", "cdf");
        if (!step || !cnt) throw ConfigError("cdf.grid", "give cdf.grid or both cdf.grid_step and cdf.grid_count");
        grid = uniform_time_grid(*step, *cnt);
    }
    try {
        validate_time_grid(grid);
    } catch (const ParameterError& e) {
        throw ConfigError("cdf.grid", e.what());
    }

    const Execution exec{c.seed, c.workers};
    FptimeCdfResult r;
    r.analytic = bm_analytic_cdf_table(u, grid);
    r.plain = bm_plain_mc_fptime_cdf(u, t, h, samples, grid, Execution{substream_seed(exec.seed, 0), exec.workers});
    r.whmc = whmc_bm_fptime_cdf(u, t, n, samples, grid, Execution{substream_seed(exec.seed, 1), exec.workers});
    r.plain_sup_error = sup_norm_error(r.plain, u);
    r.whmc_sup_error = sup_norm_error(r.whmc, u);

    if (c.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i)
            rows.push_back({{"time", grid[i]},
                            {"analytic", r.analytic.values[i]},
                            {"plain", r.plain.values[i]},
                            {"whmc", r.whmc.values[i]}});
        json doc = {{"u", u}, {"t", t}, {"n", n}, {"plain_step", h}, {"samples", samples},
                    {"plain_sup_error", r.plain_sup_error}, {"whmc_sup_error", r.whmc_sup_error}, {"rows", rows}};
        write_file(c.out_path, doc.dump(2) + "\n");
    } else {
        CsvWriter csv({"time", "analytic", "plain", "whmc", "plain_abs_error", "whmc_abs_error"});
        for (std::size_t i = 0; i < grid.size(); ++i) {
            csv.row({format_number(grid[i]), format_number(r.analytic.values[i]), format_number(r.plain.values[i]),
                     format_number(r.whmc.values[i]), format_number(std::abs(r.plain.values[i] - r.analytic.values[i])),
                     format_number(std::abs(r.whmc.values[i] - r.analytic.values[i]))});
        }
        write_file(c.out_path, csv.str());
    }
    return r;
}

struct RateStudyResult {
    std::vector<LevelMseRow> rows;
    std::array<std::optional<double>, kTupleCoordinates> slopes{};
};

inline RateStudyResult cmd_rate_study(const RunConfig& c) {
    const double t = detail::require_positive(c.functional.t, "functional.t");
    const double u = detail::require_positive(c.functional.u, "functional.u");
    const json* b = detail::find(c.raw, "rate_study");
    if (b == nullptr) throw ConfigError("rate_study", "missing required block");
    const json* levels = detail::find(*b, "levels");
    if (levels == nullptr || !levels->is_array() || levels->size() != 2 || !(*levels)[0].is_number_integer() ||
        !(*levels)[1].is_number_integer())
        throw ConfigError("rate_study.levels", "expected [first_level, last_level]");
    const auto lo = (*levels)[0].get<std::int64_t>(), hi = (*levels)[1].get<std::int64_t>();
    if (lo < 1 || hi < lo || hi > 30) throw ConfigError("rate_study.levels", "need 1 <= first <= last <= 30");
    const std::size_t samples = detail::count(*b, "samples", "rate_study");
    if (samples == 0) throw ConfigError("rate_study.samples", "must be >= 1");
    const std::size_t n0 = detail::opt_count(*b, "n0", "rate_study").value_or(1);
    if (n0 == 0) throw ConfigError("rate_study.n0", "must be >= 1");

    RateStudyResult r;
    r.rows = level_mse_study(c.model, u, t, static_cast<std::size_t>(lo), static_cast<std::size_t>(hi), samples,
                             Execution{c.seed, c.workers}, c.method.truncation_n, n0);
    r.slopes = fit_study_slopes(r.rows);

    static const std::array<std::string, kTupleCoordinates> names = {"time", "overshoot", "undershoot", "gap_to_max"};
    if (c.format == "json") {
        json rows = json::array();
        for (const auto& row : r.rows) {
            json mse = json::object(), se = json::object();
            for (std::size_t k = 0; k < kTupleCoordinates; ++k) {
                mse[names[k]] = number_or_null(row.mse[k]);
                se[names[k]] = number_or_null(row.mse_stderr[k]);
            }
            rows.push_back({{"level", row.level}, {"n", row.n_fine}, {"samples", row.samples}, {"mse", mse},
                            {"mse_stderr", se}, {"variance_defined", row.variance_defined}});
        }
        json slopes = json::object();
        for (std::size_t k = 0; k < kTupleCoordinates; ++k)
            slopes[names[k]] = r.slopes[k] ? json(*r.slopes[k]) : json(nullptr);
        write_file(c.out_path, json{{"rows", rows}, {"slopes", slopes}}.dump(2) + "\n");
    } else {
        std::vector<std::string> header = {"level", "log2_n", "n", "samples"};
        for (const auto& nm : names) header.push_back("mse_" + nm);
        for (const auto& nm : names) header.push_back("se_" + nm);
        for (const auto& nm : names) header.push_back("slope_" + nm);
        CsvWriter csv(header);
        for (const auto& row : r.rows) {
            std::vector<std::string> cells = {std::to_string(row.level),
                                              format_number(std::log2(static_cast<double>(row.n_fine))),
                                              std::to_string(row.n_fine), std::to_string(row.samples)};
            for (double m : row.mse) cells.push_back(format_number(m));
            for (double s : row.mse_stderr) cells.push_back(format_number(s));
            for (const auto& s : r.slopes) cells.push_back(format_number(s));
            csv.row(cells);
        }
        write_file(c.out_path, csv.str());
    }
    return r;
}

struct GerberShiuRow {
    std::size_t n = 0;
    EstimateReport report;
};

inline std::vector<GerberShiuRow> cmd_gerber_shiu(const RunConfig& c) {
    const double t = detail::require_positive(c.functional.t, "functional.t");
    const double u = detail::require_positive(c.functional.u, "functional.u");
    const double q = detail::require_positive(c.functional.q, "functional.q");
    const double y = detail::require_positive(c.functional.y, "functional.y");
    const json* b = detail::find(c.raw, "gerber_shiu");
    if (b == nullptr) throw ConfigError("gerber_shiu", "missing required block");
    const json* range = detail::find(*b, "log2_n");
    if (range == nullptr || !range->is_array() || range->size() != 2 || !(*range)[0].is_number_integer() ||
        !(*range)[1].is_number_integer())
        throw ConfigError("gerber_shiu.log2_n", "expected [first_exponent, last_exponent]");
    const auto lo = (*range)[0].get<std::int64_t>(), hi = (*range)[1].get<std::int64_t>();
    if (lo < 0 || hi < lo || hi > 30) throw ConfigError("gerber_shiu.log2_n", "need 0 <= first <= last <= 30");
    const std::size_t samples = detail::count(*b, "samples", "gerber_shiu");
    if (samples < 2) throw ConfigError("gerber_shiu.samples", "must be >= 2");

    const Functional f = DiscountedOvershootIndicator{q, y};
    std::vector<GerberShiuRow> rows;
    for (auto e = lo; e <= hi; ++e) {
        const std::size_t n = std::size_t{1} << e;
        const Execution exec{substream_seed(c.seed, static_cast<std::uint64_t>(e)), c.workers};
        rows.push_back({n, mc_estimate(c.model, f, u, GridSpec{n, t}, samples, exec, c.method.truncation_n)});
    }
    if (c.format == "json") {
        json out = json::array();
        for (const auto& r : rows)
            out.push_back({{"n", r.n}, {"value", r.report.value}, {"std_error", r.report.std_error},
                           {"ci95", {r.report.ci95.first, r.report.ci95.second}}, {"samples", samples}});
        write_file(c.out_path, json{{"u", u}, {"y", y}, {"q", q}, {"t", t}, {"rows", out}}.dump(2) + "\n");
    } else {
        CsvWriter csv({"n", "value", "std_error", "ci_low", "ci_high", "samples"});
        for (const auto& r : rows)
            csv.row({std::to_string(r.n), format_number(r.report.value), format_number(r.report.std_error),
                     format_number(r.report.ci95.first), format_number(r.report.ci95.second),
                     std::to_string(samples)});
        write_file(c.out_path, csv.str());
    }
    return rows;
}

/// Parses, runs and writes one command; returns the process exit code.
inline int run_command(const std::string& command, const json& config, const Overrides& overrides,
                       std::ostream& log) {
    try {
        const RunConfig c = parse_config(config, overrides);
        if (command == "estimate") {
            const EstimateReport r = cmd_estimate(c);
            log << "value " << format_number(r.value) << " +- " << format_number(r.std_error) << " (steps "
                << r.steps_consumed << ")\n";
        } else if (command == "fptime-cdf") {
            const FptimeCdfResult r = cmd_fptime_cdf(c);
            log << "sup-norm error: plain " << format_number(r.plain_sup_error) << ", whmc "
                << format_number(r.whmc_sup_error) << "\n";
        } else if (command == "rate-study") {
            const RateStudyResult r = cmd_rate_study(c);
            log << "slopes (time, overshoot, undershoot, gap_to_max):";
            for (const auto& s : r.slopes) log << ' ' << format_number(s);
            log << "\n";
        } else if (command == "gerber-shiu") {
            const auto rows = cmd_gerber_shiu(c);
            for (const auto& r : rows)
                log << "n " << r.n << ": " << format_number(r.report.value) << " +- "
                    << format_number(r.report.std_error) << "\n";
        } else {
            throw ConfigError("<command>", "unknown command '" + command + "'");
        }
        log << "wrote " << c.out_path << "\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParameterError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        log << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DomainError& e) {
        log << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        log << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ContractError& e) {
        log << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace whmc::cli
