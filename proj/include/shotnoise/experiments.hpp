#pragma once

// Batch experiments behind the command-line tool: configuration handling,
// orchestration of replicates and the CSV/JSON files they produce.
//
// Every output starts with the tool version, the command and the fully
// resolved configuration (CSV: '#' header lines, JSON: "config" object).
// Feeding that block back through replay_config() rebuilds the same file.
// Keys that only steer execution (out, workers) are not recorded; run time
// goes to a separate <stem>.timing.json so reports stay byte-identical.

#include <chrono>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shotnoise/constants.hpp"
#include "shotnoise/criterion.hpp"
#include "shotnoise/io.hpp"
#include "shotnoise/kernel.hpp"
#include "shotnoise/measure.hpp"
#include "shotnoise/parallel.hpp"
#include "shotnoise/path.hpp"
#include "shotnoise/random.hpp"
#include "shotnoise/reference.hpp"
#include "shotnoise/series.hpp"
#include "shotnoise/stats.hpp"

namespace shotnoise::cli {

inline constexpr const char* kToolVersion = "shotnoise 0.1.0";

/// Streams of the reference draws compared against the replicates. Replicate i
/// uses the path {i}; these two-element paths never collide with it.
inline constexpr std::uint64_t kReferencePath = 0x5245464552454e43ull;

class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline const std::set<std::string>& execution_keys()
{
    static const std::set<std::string> keys{"out", "workers"};
    return keys;
}

/// Keys accepted by each command with their defaults ("" = no default).
inline const std::map<std::string, std::string>& command_keys(const std::string& command)
{
    static const std::map<std::string, std::map<std::string, std::string>> table = [] {
        const std::map<std::string, std::string> base{{"seed", "1"}, {"out", "."}, {"workers", "1"}};
        const std::map<std::string, std::string> model{
            {"kernel", "indicator"}, {"lambda", "1"}, {"jumps", ""}, {"measure", "lebesgue"}};
        auto with = [&](std::map<std::string, std::string> extra, bool kernel_keys = true) {
            extra.insert(base.begin(), base.end());
            if (kernel_keys) {
                extra.insert(model.begin(), model.end());
            }
            return extra;
        };
        return std::map<std::string, std::map<std::string, std::string>>{
            {"simulate", with({{"alpha", "1.5"}, {"terms", ""}, {"level", ""}, {"replicates", "1"}, {"grid", "256"}})},
            {"verify", with({{"alpha", "1.5"}, {"target", ""}, {"terms", "10000"}, {"replicates", "5000"},
                             {"p", ""}, {"t", "1"}, {"threshold", ""}, {"reference", ""}})},
            {"diagnose", with({{"alpha", "1.5"}, {"mode", ""}, {"terms", "10000"}, {"draws", "10000"},
                               {"ladder", "100,1000,10000"}, {"replicates", "200"}, {"grid", "4096"}})},
            {"criterion", with({{"alpha", "1.5"}, {"p1", "2"}, {"p2", "1"}, {"timegrid", "65"}, {"nodes", "2048"}})},
            {"demo", with({{"p", "4"}, {"jmax", "6"}, {"seeds", "1"}}, false)},
        };
    }();
    const auto it = table.find(command);
    if (it == table.end()) {
        throw ConfigError("unknown command '" + command + "'");
    }
    return it->second;
}

}  // namespace detail

/// Flat key=value configuration of one command. Later assignments win.
class ExperimentConfig
{
  public:
    explicit ExperimentConfig(std::string command) : command_(std::move(command))
    {
        detail::command_keys(command_);
    }

    const std::string& command() const noexcept { return command_; }

    void set(const std::string& key, const std::string& value)
    {
        const auto& keys = detail::command_keys(command_);
        if (!keys.count(key)) {
            throw ConfigError("unknown key '" + key + "' for command " + command_);
        }
        values_[key] = value;
    }

    /// One "key=value" assignment.
    void assign(std::string_view text)
    {
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("expected key=value, got '" + std::string(text) + "'");
        }
        const auto key = io::trim(text.substr(0, eq));
        if (key.empty()) {
            throw ConfigError("empty key in '" + std::string(text) + "'");
        }
        set(std::string(key), std::string(io::trim(text.substr(eq + 1))));
    }

    /// Config file: one assignment per line; blank lines and '#' comments skipped.
    void load_text(const std::string& text)
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const auto body = io::trim(line);
            if (body.empty() || body.front() == '#') {
                continue;
            }
            assign(body);
        }
    }

    void load_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("cannot open config file " + path);
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        load_text(buffer.str());
    }

    bool has(const std::string& key) const
    {
        const auto it = values_.find(key);
        if (it != values_.end()) {
            return true;
        }
        return !detail::command_keys(command_).at(key).empty();
    }

    std::string get(const std::string& key) const
    {
        const auto it = values_.find(key);
        if (it != values_.end()) {
            return it->second;
        }
        const auto& defaults = detail::command_keys(command_);
        const auto d = defaults.find(key);
        if (d == defaults.end()) {
            throw std::logic_error("key '" + key + "' not defined for " + command_);
        }
        if (d->second.empty()) {
            throw ConfigError("missing required key '" + key + "' for command " + command_);
        }
        return d->second;
    }

    double get_double(const std::string& key) const
    {
        double out = 0.0;
        if (!io::parse_double(get(key), out) || !std::isfinite(out)) {
            throw ConfigError("key '" + key + "' must be a finite number, got '" + get(key) + "'");
        }
        return out;
    }

    std::uint64_t get_u64(const std::string& key) const
    {
        const std::string text = get(key);
        std::uint64_t out = 0;
        const auto result = std::from_chars(text.data(), text.data() + text.size(), out);
        if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
            throw ConfigError("key '" + key + "' must be a nonnegative integer, got '" + text + "'");
        }
        return out;
    }

    std::size_t get_size(const std::string& key) const { return static_cast<std::size_t>(get_u64(key)); }

    std::size_t get_positive(const std::string& key) const
    {
        const auto n = get_size(key);
        if (n == 0) {
            throw ConfigError("key '" + key + "' must be positive");
        }
        return n;
    }

    /// Every recorded key with its resolved value, sorted by key.
    std::map<std::string, std::string> resolved() const
    {
        std::map<std::string, std::string> out;
        for (const auto& [key, fallback] : detail::command_keys(command_)) {
            if (detail::execution_keys().count(key)) {
                continue;
            }
            const auto it = values_.find(key);
            if (it != values_.end()) {
                out[key] = it->second;
            } else if (!fallback.empty()) {
                out[key] = fallback;
            }
        }
        return out;
    }

    std::string out_dir() const { return get("out"); }
    std::size_t workers() const { return get_positive("workers"); }

  private:
    std::string command_;
    std::map<std::string, std::string> values_;
};

/// Rebuilds a configuration from the header block of a CSV output or the
/// "config" object of a JSON report.
inline ExperimentConfig replay_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (!text.empty() && text.front() == '{') {
        const auto report = nlohmann::json::parse(text);
        ExperimentConfig config(report.at("command").get<std::string>());
        for (const auto& [key, value] : report.at("config").items()) {
            config.set(key, value.get<std::string>());
        }
        return config;
    }
    std::istringstream lines(text);
    std::string line;
    std::optional<ExperimentConfig> config;
    while (std::getline(lines, line) && line.rfind("# ", 0) == 0) {
        const auto body = io::trim(std::string_view(line).substr(2));
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            continue;
        }
        const std::string key(body.substr(0, eq));
        const std::string value(body.substr(eq + 1));
        if (key == "command") {
            config.emplace(value);
        } else if (key == "config" && config) {
            config->assign(value);
        }
    }
    if (!config) {
        throw ConfigError(path + " has no header block");
    }
    return *config;
}

inline Kernel make_kernel(const ExperimentConfig& config)
{
    const std::string spec = config.get("kernel");
    if (spec == "indicator") {
        return indicator_kernel();
    }
    if (spec == "ou") {
        return ou_kernel(config.get_double("lambda"));
    }
    if (spec == "constant") {
        return time_constant_kernel([](double) { return 1.0; });
    }
    if (spec.rfind("tabulated:", 0) == 0) {
        if (!config.has("jumps")) {
            throw ConfigError("tabulated kernels need a jump manifest: jumps=<file>");
        }
        return tabulated_kernel_from_csv(spec.substr(10), config.get("jumps"));
    }
    throw ConfigError("unknown kernel '" + spec + "' (indicator, ou, constant, tabulated:<file>)");
}

inline ControlMeasure make_measure(const ExperimentConfig& config)
{
    const std::string spec = config.get("measure");
    if (spec == "lebesgue") {
        return ControlMeasure::lebesgue();
    }
    if (spec.rfind("atoms:", 0) == 0) {
        return ControlMeasure::atoms_from_csv(spec.substr(6));
    }
    if (spec.rfind("density:", 0) == 0) {
        return ControlMeasure::density_from_csv(spec.substr(8));
    }
    throw ConfigError("unknown measure '" + spec + "' (lebesgue, atoms:<file>, density:<file>)");
}

/// Files written by one command.
struct RunResult
{
    std::vector<std::filesystem::path> files;
    nlohmann::json report;  // empty for commands without a JSON report
};

namespace detail {

inline std::filesystem::path prepare_out_dir(const ExperimentConfig& config)
{
    const std::filesystem::path dir(config.out_dir());
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + dir.string());
    }
    return dir;
}

inline std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

inline std::string header_block(const ExperimentConfig& config,
                                const std::vector<std::pair<std::string, std::string>>& derived = {})
{
    std::string out = std::string("# tool_version=") + kToolVersion + "\n# command=" + config.command() + "\n";
    const auto resolved = config.resolved();
    out += "# seed=" + resolved.at("seed") + "\n";
    for (const auto& [key, value] : resolved) {
        out += "# config=" + key + "=" + value + "\n";
    }
    for (const auto& [key, value] : derived) {
        out += "# " + key + "=" + value + "\n";
    }
    return out;
}

inline nlohmann::json report_skeleton(const ExperimentConfig& config)
{
    nlohmann::json report;
    report["tool_version"] = kToolVersion;
    report["command"] = config.command();
    report["config"] = config.resolved();
    report["seed"] = config.get_u64("seed");
    return report;
}

inline void write_report(const std::filesystem::path& path, const nlohmann::json& report, RunResult& result)
{
    auto out = open_output(path);
    out << report.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
    result.files.push_back(path);
    result.report = report;
}

inline void write_timing(const std::filesystem::path& report_path, std::chrono::steady_clock::time_point start)
{
    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    auto timing_path = report_path;
    timing_path.replace_extension(".timing.json");
    auto out = open_output(timing_path);
    out << nlohmann::json{{"runtime_ms", elapsed}}.dump(2) << '\n';
}

inline double resolved_alpha(const ExperimentConfig& config)
{
    const double alpha = config.get_double("alpha");
    try {
        require_stable_index(alpha);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    return alpha;
}

}  // namespace detail

/// Writes paths.csv (replicate,t,value) and ledger.csv (replicate,t,size,term_index).
inline RunResult run_simulate(const ExperimentConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    const auto kernel = make_kernel(config);
    const auto measure = make_measure(config);
    SeriesConfig series;
    series.alpha = detail::resolved_alpha(config);
    series.replicates = config.get_positive("replicates");
    series.grid = config.get_positive("grid");
    series.seed = config.get_u64("seed");
    if (config.has("level") && config.has("terms")) {
        throw ConfigError("set either terms or level, not both");
    }
    if (config.has("level")) {
        series.truncation = PoissonLevel{config.get_double("level")};
    } else {
        series.truncation = TermCount{config.has("terms") ? config.get_size("terms") : std::size_t{10000}};
    }
    series.validate();
    const auto dir = detail::prepare_out_dir(config);

    std::vector<std::string> path_rows(series.replicates);
    std::vector<std::string> ledger_rows(series.replicates);
    parallel_for(series.replicates, config.workers(), [&](std::size_t i) {
        const auto path = lepage_sample_path(kernel, measure, series, series.replicate_stream(i));
        std::ostringstream p;
        write_path_csv(p, i, path);
        path_rows[i] = p.str();
        std::ostringstream l;
        write_ledger_csv(l, i, path.ledger());
        ledger_rows[i] = l.str();
    });

    RunResult result;
    const std::string header = detail::header_block(config);
    for (const auto& [name, columns, rows] :
         {std::tuple{"paths.csv", "replicate,t,value", &path_rows},
          std::tuple{"ledger.csv", "replicate,t,size,term_index", &ledger_rows}}) {
        const auto file = dir / name;
        auto out = detail::open_output(file);
        out << header << columns << '\n';
        for (const auto& chunk : *rows) {
            out << chunk;
        }
        if (!out) {
            throw std::runtime_error("failed writing " + file.string());
        }
        result.files.push_back(file);
    }
    detail::write_timing(dir / "simulate", start);
    return result;
}

/// Replicate summaries computed from the ledger of each truncated LePage series.
struct VerifySamples
{
    std::vector<double> values;
    std::size_t identity_violations = 0;  // ledger max |jump| != max_j |coef_j| sup|Delta f(., V_j)|
};

/// KS comparison of a ledger functional (or the marginal at time t) against
/// its limit law. Writes verify_<target>.json.
inline RunResult run_verify(const ExperimentConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    const std::string target = config.get("target");
    static const std::map<std::string, double> default_thresholds{
        {"marginal", 0.04}, {"absjump", 0.03}, {"posjump", 0.03}, {"vp", 0.04}};
    if (!default_thresholds.count(target)) {
        throw ConfigError("unknown target '" + target + "' (marginal, absjump, posjump, vp)");
    }
    const double alpha = detail::resolved_alpha(config);
    const auto kernel = make_kernel(config);
    const auto measure = make_measure(config);
    const std::size_t replicates = config.get_positive("replicates");
    const std::size_t terms = config.get_size("terms");
    const std::uint64_t seed = config.get_u64("seed");
    const double threshold = config.has("threshold") ? config.get_double("threshold") : default_thresholds.at(target);
    const std::size_t reference_size = config.has("reference") ? config.get_positive("reference") : replicates;
    double p = 0.0;
    JumpScale vp_scale;
    if (target == "vp") {
        if (!config.has("p")) {
            throw ConfigError("target=vp needs p");
        }
        p = config.get_double("p");
        // Refuses p <= alpha unless the kernel is continuous.
        vp_scale = scale_vp(kernel, measure, alpha, p);
    }
    const double t = config.get_double("t");
    if (target == "marginal" && !(t >= 0.0 && t <= 1.0)) {
        throw ConfigError("t must lie in [0,1]");
    }
    const auto dir = detail::prepare_out_dir(config);

    VerifySamples samples;
    samples.values.assign(replicates, 0.0);
    std::vector<char> violation(replicates, 0);
    parallel_for(replicates, config.workers(), [&](std::size_t i) {
        const auto terms_i = draw_terms(RngStream(seed, {i}), measure, TermCount{terms}, /*with_signs=*/true);
        const auto coefs = lepage_coefficients(terms_i, alpha, measure.total_mass());
        if (target == "marginal") {
            double x = 0.0;
            for (std::size_t j = 0; j < coefs.size(); ++j) {
                x += coefs[j] * kernel(t, terms_i.marks[j]);
            }
            samples.values[i] = x;
            return;
        }
        const auto ledger = kernel_ledger(kernel, coefs, terms_i.marks);
        if (target == "absjump") {
            samples.values[i] = max_abs_jump(ledger);
            double expected = 0.0;
            for (std::size_t j = 0; j < coefs.size(); ++j) {
                expected = std::max(expected, std::abs(coefs[j]) * kernel.max_abs_jump(terms_i.marks[j]));
            }
            violation[i] = samples.values[i] != expected ? 1 : 0;
        } else if (target == "posjump") {
            samples.values[i] = max_jump(ledger);
        } else {
            samples.values[i] = vp_of_jumps(ledger, p);
        }
    });
    for (char v : violation) {
        samples.identity_violations += static_cast<std::size_t>(v);
    }

    auto report = detail::report_skeleton(config);
    report["target"] = target;
    report["threshold"] = threshold;
    const EmpiricalSample sample(samples.values);
    const RngStream reference_stream(seed, {kReferencePath, 0});
    if (target == "marginal") {
        const double scale = std::pow(
            measure.integrate([&](double s) { return std::pow(std::abs(kernel(t, s)), alpha); }).value, 1.0 / alpha);
        report["scale"] = scale;
        if (!(scale > 0.0)) {
            throw std::domain_error("the marginal at t is degenerate (zero scale)");
        }
        const EmpiricalSample reference(sample_sas(reference_stream, alpha, scale, reference_size));
        report["statistic"] = ks_two_sample(sample, reference);
        report["reference_size"] = reference_size;
    } else if (target == "absjump") {
        const auto scale = scale_abs_jump(kernel, measure, alpha);
        if (scale.continuous_kernel) {
            throw std::domain_error("kernel has no jumps: the largest jump is identically zero");
        }
        const FrechetLaw law(alpha, scale.value);
        report["scale"] = scale.value;
        report["statistic"] = ks_one_sample(sample, [&](double x) { return law.cdf(x); });
        report["ledger_identity_violations"] = samples.identity_violations;
    } else if (target == "posjump") {
        const auto scales = scale_pos_jump(kernel, measure, alpha);
        if (scales.continuous_kernel) {
            throw std::domain_error("kernel has no jumps: the largest jump is identically zero");
        }
        const FrechetLaw proof(alpha, scales.proof_form);
        const FrechetLaw displayed(alpha, scales.displayed_form);
        report["scales"] = {{"proof_form", scales.proof_form}, {"displayed_form", scales.displayed_form}};
        report["statistics"] = {
            {"proof_form", ks_one_sample(sample, [&](double x) { return proof.cdf(x); })},
            {"displayed_form", ks_one_sample(sample, [&](double x) { return displayed.cdf(x); })}};
        report["statistic"] = report["statistics"]["proof_form"];
    } else {
        if (vp_scale.continuous_kernel) {
            throw std::domain_error("kernel has no jumps: V_p is identically zero");
        }
        report["p"] = p;
        report["scale"] = vp_scale.value;
        const EmpiricalSample reference(
            sample_positive_stable(reference_stream, alpha / p, vp_scale.value, reference_size));
        report["statistic"] = ks_two_sample(sample, reference);
        report["reference_size"] = reference_size;
    }
    report["replicate_median"] = median(sample);
    report["pass"] = report["statistic"].get<double>() < threshold;

    RunResult result;
    const auto file = dir / ("verify_" + target + ".json");
    detail::write_report(file, report, result);
    detail::write_timing(file, start);
    return result;
}

inline std::vector<std::size_t> parse_ladder(const std::string& text)
{
    std::vector<std::size_t> ladder;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const auto end = std::min(text.find(',', begin), text.size());
        const auto item = io::trim(std::string_view(text).substr(begin, end - begin));
        if (!item.empty()) {
            std::size_t value = 0;
            const auto r = std::from_chars(item.data(), item.data() + item.size(), value);
            if (r.ec != std::errc{} || r.ptr != item.data() + item.size()) {
                throw ConfigError("ladder entries must be nonnegative integers, got '" + std::string(item) + "'");
            }
            ladder.push_back(value);
        }
        begin = end + 1;
    }
    if (ladder.empty()) {
        throw ConfigError("convergence ladder is empty");
    }
    return ladder;
}

/// Necessary-condition diagnostics (mode=tails) or the coupled partial-sum
/// ladder (mode=convergence). Writes diagnose_<mode>.json.
inline RunResult run_diagnose(const ExperimentConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    const std::string mode = config.get("mode");
    if (mode != "tails" && mode != "convergence") {
        throw ConfigError("unknown mode '" + mode + "' (tails, convergence)");
    }
    const double alpha = detail::resolved_alpha(config);
    const auto kernel = make_kernel(config);
    const auto measure = make_measure(config);
    const std::uint64_t seed = config.get_u64("seed");
    auto report = detail::report_skeleton(config);
    report["mode"] = mode;
    std::vector<std::size_t> ladder;
    if (mode == "convergence") {
        ladder = parse_ladder(config.get("ladder"));
    }
    const auto dir = detail::prepare_out_dir(config);

    if (mode == "tails") {
        const auto h = lepage_integrand(kernel, measure, alpha);
        const auto diag = tail_diagnostics(h, measure, config.get_size("terms"), RngStream(seed, {0}),
                                           config.get_positive("draws"));
        // For the LePage integrand the r-integral is c_alpha^alpha int sup_t|f(t,s)|^alpha m(ds).
        const double closed_form =
            std::pow(c_alpha(alpha), alpha) *
            measure.integrate([&](double s) { return std::pow(kernel.section_sup(s), alpha); }).value;
        const double relative_error = std::abs(diag.tail_integral - closed_form) / closed_form;
        report["tail_integral"] = diag.tail_integral;
        report["tail_integral_error"] = diag.tail_integral_error;
        report["closed_form"] = closed_form;
        report["radius"] = diag.radius;
        report["divergent"] = diag.divergent;
        report["last_decile_max"] = diag.last_decile_max;
        report["statistics"] = {{"relative_error", relative_error}, {"last_decile_max", diag.last_decile_max}};
        report["threshold"] = {{"relative_error", 0.02}, {"last_decile_max", 0.1}};
        report["statistic"] = relative_error;
        report["pass"] = !diag.divergent && relative_error < 0.02 && diag.last_decile_max < 0.1;
    } else {
        const auto ladder_report = partial_sum_ladder(kernel, measure, alpha, ladder, config.get_positive("replicates"),
                                                      seed, config.get_positive("grid"), config.workers());
        nlohmann::json steps = nlohmann::json::array();
        std::vector<double> medians;
        for (const auto& step : ladder_report.steps) {
            steps.push_back({{"from_terms", step.from_terms},
                             {"to_terms", step.to_terms},
                             {"median", step.median},
                             {"p90", step.p90}});
            medians.push_back(step.median);
        }
        bool decreasing = !medians.empty();
        for (std::size_t k = 1; k < medians.size(); ++k) {
            decreasing = decreasing && medians[k] < medians[k - 1];
        }
        report["ladder"] = ladder;
        report["steps"] = steps;
        report["statistics"] = medians;
        report["threshold"] = "medians strictly decreasing";
        report["pass"] = decreasing;
    }

    RunResult result;
    const auto file = dir / ("diagnose_" + mode + ".json");
    detail::write_report(file, report, result);
    detail::write_timing(file, start);
    return result;
}

inline nlohmann::json fit_json(const PowerFit& fit)
{
    return {{"exponent", fit.exponent}, {"half_width", fit.half_width}, {"points", fit.points}};
}

/// Cadlag-modification criterion scan. Writes criterion.json.
inline RunResult run_criterion(const ExperimentConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    const double alpha = config.get_double("alpha");
    if (!(alpha > 1.0 && alpha < 2.0)) {
        throw ConfigError("the cadlag criterion assumes alpha in (1,2)");
    }
    const auto kernel = make_kernel(config);
    const auto measure = make_measure(config);
    const auto grid = uniform_time_grid(config.get_positive("timegrid"));
    QuadratureSpec quadrature;
    quadrature.nodes = config.get_positive("nodes");
    const auto dir = detail::prepare_out_dir(config);

    const auto verdict =
        cadlag_verdict(kernel, measure, alpha, config.get_double("p1"), config.get_double("p2"), grid, quadrature);
    auto report = detail::report_skeleton(config);
    nlohmann::json b1_table = nlohmann::json::array();
    for (const auto& e : verdict.b1.table) {
        b1_table.push_back({e.t1, e.t2, e.value});
    }
    nlohmann::json b2_table = nlohmann::json::array();
    for (const auto& e : verdict.b2.pair_max) {
        b2_table.push_back({e.t1, e.t2, e.value});
    }
    report["p1"] = verdict.p1;
    report["p2"] = verdict.p2;
    report["beta1"] = fit_json(verdict.b1.fit);
    report["beta2"] = fit_json(verdict.b2.fit);
    report["kernel_time_constant"] = verdict.b1.time_constant;
    report["i2_identically_zero"] = verdict.b2.identically_zero;
    report["flags"] = {{"p1_above_alpha", verdict.p1_above_alpha},
                       {"p2_above_half_alpha", verdict.p2_above_half_alpha},
                       {"beta1_above_half", verdict.beta1_above_half},
                       {"beta2_above_half", verdict.beta2_above_half}};
    report["verdict"] = verdict.verdict();
    report["statistics"] = {{"beta1", verdict.b1.fit.exponent}, {"beta2", verdict.b2.fit.exponent}};
    report["threshold"] = 0.5;
    report["pass"] = verdict.satisfied;
    report["b1_table"] = b1_table;  // [t1, t2, I1]
    report["b2_pair_max"] = b2_table;  // [t1, t2, max_t I2]
    report["b2_triples"] = verdict.b2.triples;

    RunResult result;
    const auto file = dir / "criterion.json";
    detail::write_report(file, report, result);
    detail::write_timing(file, start);
    return result;
}

/// Whether the tail sup norms decrease strictly from k = 2 on, and whether the
/// cumulative p-variation bounds increase strictly.
struct DemoChecks
{
    bool tails_decreasing = true;
    bool bounds_increasing = true;
};

inline DemoChecks check_demo(const CounterexampleReport& demo)
{
    DemoChecks checks;
    for (std::size_t k = 3; k < demo.tail_sup_norms.size(); ++k) {
        checks.tails_decreasing = checks.tails_decreasing && demo.tail_sup_norms[k] < demo.tail_sup_norms[k - 1];
    }
    for (std::size_t j = 1; j < demo.cumulative_bvp_bounds.size(); ++j) {
        checks.bounds_increasing =
            checks.bounds_increasing && demo.cumulative_bvp_bounds[j] > demo.cumulative_bvp_bounds[j - 1];
    }
    return checks;
}

/// Counterexample sequences for `seeds` independent Gaussian draws: demo.csv
/// (seed_index,series,index,value) and the summary demo.json.
inline RunResult run_demo(const ExperimentConfig& config)
{
    const auto start = std::chrono::steady_clock::now();
    const double p = config.get_double("p");
    const std::size_t j_max = config.get_positive("jmax");
    const std::size_t seeds = config.get_positive("seeds");
    const std::uint64_t seed = config.get_u64("seed");
    const double r = counterexample_ratio(p);
    if (std::pow(r, static_cast<double>(j_max)) > kMaxCounterexamplePoints) {
        throw ConfigError("jmax too large: need r^jmax <= 2^26 partition points (r = " + io::format_double(r) + ")");
    }
    const auto dir = detail::prepare_out_dir(config);

    std::vector<CounterexampleReport> demos(seeds);
    parallel_for(seeds, config.workers(),
                 [&](std::size_t i) { demos[i] = counterexample_demo(p, j_max, RngStream(seed, {i})); });

    RunResult result;
    const auto csv = dir / "demo.csv";
    {
        auto out = detail::open_output(csv);
        out << detail::header_block(config, {{"r", io::format_double(r)}}) << "seed_index,series,index,value\n";
        for (std::size_t i = 0; i < seeds; ++i) {
            const auto& d = demos[i];
            auto emit = [&](const char* name, const std::vector<double>& values, std::size_t first) {
                for (std::size_t k = 0; k < values.size(); ++k) {
                    out << i << ',' << name << ',' << (first + k) << ',' << io::format_double(values[k]) << '\n';
                }
            };
            emit("gaussian", d.gaussians, 1);
            emit("amplitude", d.amplitudes, 1);
            emit("tail_sup_norm", d.tail_sup_norms, 0);
            emit("dyadic_increment", d.dyadic_increments, 0);
            emit("term_bvp_bound", d.term_bvp_bounds, 1);
            emit("cumulative_bvp_bound", d.cumulative_bvp_bounds, 1);
        }
        if (!out) {
            throw std::runtime_error("failed writing " + csv.string());
        }
    }
    result.files.push_back(csv);

    std::size_t decreasing = 0;
    std::size_t increasing = 0;
    for (const auto& d : demos) {
        const auto checks = check_demo(d);
        decreasing += checks.tails_decreasing ? 1 : 0;
        increasing += checks.bounds_increasing ? 1 : 0;
    }
    auto report = detail::report_skeleton(config);
    const double fraction = static_cast<double>(decreasing) / static_cast<double>(seeds);
    report["r"] = r;
    report["seeds_tails_decreasing"] = decreasing;
    report["seeds_bounds_increasing"] = increasing;
    report["statistic"] = fraction;
    report["threshold"] = 0.95;
    report["pass"] = fraction >= 0.95 && increasing == seeds;
    const auto file = dir / "demo.json";
    detail::write_report(file, report, result);
    detail::write_timing(file, start);
    return result;
}

inline RunResult run_command(const ExperimentConfig& config)
{
    const auto& command = config.command();
    if (command == "simulate") {
        return run_simulate(config);
    }
    if (command == "verify") {
        return run_verify(config);
    }
    if (command == "diagnose") {
        return run_diagnose(config);
    }
    if (command == "criterion") {
        return run_criterion(config);
    }
    return run_demo(config);
}

}  // namespace shotnoise::cli
