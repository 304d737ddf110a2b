#ifndef IMPROPERDIM_HARNESS_CONFIG_HPP
#define IMPROPERDIM_HARNESS_CONFIG_HPP

/** @file
 * Line-oriented `key = value` scenario and experiment-plan files.
 *
 * Lists are comma separated and `#` starts a comment.  Scenario keys:
 *
 *   m, M, seed, angles_deg, source_variances, source_circularities,
 *   noise_kind (white | ar), noise_variance, ar_coefficients,
 *   noise_sampling (burn_in | exact), burn_in, steering_phase_factor
 *
 * Plan files accept every scenario key plus
 *
 *   sample_counts, trials, detectors (itc-full, itc-rr, glrt-full, glrt-rr),
 *   pfa_list, r_max (M_over_3 | <integer>), box_df (derived | printed)
 *
 * In a plan, `seed` is the base seed of the whole sweep and `M` may be
 * omitted.  Numbers are read and written without locale dependence.
 */

#include "improperdim/detectors.hpp"
#include "improperdim/signal_model.hpp"

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace improperdim {

/// Malformed configuration or plan text.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DetectorKind { itc_full, itc_rr, glrt_full, glrt_rr };

inline std::string to_string(DetectorKind kind)
{
    switch (kind) {
    case DetectorKind::itc_full: return "itc-full";
    case DetectorKind::itc_rr: return "itc-rr";
    case DetectorKind::glrt_full: return "glrt-full";
    case DetectorKind::glrt_rr: return "glrt-rr";
    }
    return "unknown";
}

inline DetectorKind parse_detector(std::string_view name)
{
    // Underscore spellings are accepted as aliases.
    std::string n(name);
    for (auto& c : n) c = c == '_' ? '-' : c;
    if (n == "itc-full") return DetectorKind::itc_full;
    if (n == "itc-rr") return DetectorKind::itc_rr;
    if (n == "glrt-full") return DetectorKind::glrt_full;
    if (n == "glrt-rr") return DetectorKind::glrt_rr;
    throw ConfigError("unknown detector '" + std::string(name) + "'");
}

inline bool is_glrt(DetectorKind kind) { return kind == DetectorKind::glrt_full || kind == DetectorKind::glrt_rr; }
inline bool is_reduced(DetectorKind kind) { return kind == DetectorKind::itc_rr || kind == DetectorKind::glrt_rr; }

/// Either floor(M/3) capped by m and M - 1, or a fixed rank.
struct RMaxRule {
    std::optional<std::size_t> fixed;

    std::size_t resolve(std::size_t m, std::size_t snapshots) const
    {
        return fixed ? *fixed : default_r_max(m, snapshots);
    }
    bool operator==(const RMaxRule&) const = default;
};

struct ExperimentPlan {
    ScenarioConfig scenario;
    std::vector<std::size_t> sample_counts;
    std::size_t trials = 1;
    std::vector<DetectorKind> detectors;
    std::vector<double> pfa_list;
    RMaxRule r_max;
    BoxDf box_df = BoxDf::derived;
    std::uint64_t base_seed = 0;

    bool operator==(const ExperimentPlan&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key)
{
    text = trim(text);
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
        throw ConfigError("invalid number '" + std::string(text) + "' for key '" + std::string(key) + "'");
    }
    return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::string_view key)
{
    std::vector<T> out;
    text = trim(text);
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_number<T>(text.substr(start, comma - start), key));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::vector<std::string> parse_words(std::string_view text)
{
    std::vector<std::string> out;
    text = trim(text);
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.emplace_back(trim(text.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Shortest decimal form that reads back to the same double.
inline std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <typename T>
std::string format_list(const std::vector<T>& values)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        if constexpr (std::is_floating_point_v<T>) {
            out += format_number(values[i]);
        } else {
            out += std::to_string(values[i]);
        }
    }
    return out;
}

using KeyValues = std::map<std::string, std::string, std::less<>>;

inline KeyValues read_key_values(std::istream& in)
{
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        std::string key(trim(view.substr(0, eq)));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.emplace(std::move(key), std::string(trim(view.substr(eq + 1))));
    }
    return kv;
}

inline const std::vector<std::string_view>& scenario_keys()
{
    static const std::vector<std::string_view> keys{
        "m", "M", "seed", "angles_deg", "source_variances", "source_circularities", "noise_kind",
        "noise_variance", "ar_coefficients", "noise_sampling", "burn_in", "steering_phase_factor"};
    return keys;
}

inline const std::vector<std::string_view>& plan_keys()
{
    static const std::vector<std::string_view> keys{"sample_counts", "trials", "detectors", "pfa_list", "r_max",
                                                    "box_df"};
    return keys;
}

inline void reject_unknown_keys(const KeyValues& kv, bool allow_plan_keys)
{
    for (const auto& [key, value] : kv) {
        bool known = false;
        for (auto k : scenario_keys()) known = known || key == k;
        if (allow_plan_keys) {
            for (auto k : plan_keys()) known = known || key == k;
        }
        if (!known) throw ConfigError("unknown key '" + key + "'");
    }
}

inline const std::string* find(const KeyValues& kv, std::string_view key)
{
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
}

inline ScenarioConfig scenario_from(const KeyValues& kv, bool require_snapshots)
{
    ScenarioConfig cfg;
    const std::string* m = find(kv, "m");
    if (!m) throw ConfigError("missing key 'm'");
    cfg.sensor_count = parse_number<std::size_t>(*m, "m");
    if (const auto* v = find(kv, "M")) {
        cfg.snapshot_count = parse_number<std::size_t>(*v, "M");
    } else if (require_snapshots) {
        throw ConfigError("missing key 'M'");
    }
    if (const auto* v = find(kv, "seed")) cfg.seed = parse_number<std::uint64_t>(*v, "seed");
    if (const auto* v = find(kv, "angles_deg")) cfg.angles_deg = parse_list<double>(*v, "angles_deg");

    std::vector<double> variances, circularities;
    if (const auto* v = find(kv, "source_variances")) variances = parse_list<double>(*v, "source_variances");
    if (const auto* v = find(kv, "source_circularities")) {
        circularities = parse_list<double>(*v, "source_circularities");
    }
    if (variances.size() == 1 && circularities.size() > 1) variances.resize(circularities.size(), variances[0]);
    if (variances.size() != circularities.size() || variances.size() != cfg.angles_deg.size()) {
        throw ConfigError("angles_deg, source_variances and source_circularities must have equal lengths");
    }
    for (std::size_t i = 0; i < variances.size(); ++i) cfg.sources.push_back({variances[i], circularities[i]});

    if (const auto* v = find(kv, "noise_kind")) {
        if (*v == "white") {
            cfg.noise.kind = NoiseKind::white;
        } else if (*v == "ar" || *v == "spatial_ar") {
            cfg.noise.kind = NoiseKind::spatial_ar;
        } else {
            throw ConfigError("noise_kind must be 'white' or 'ar'");
        }
    }
    if (const auto* v = find(kv, "noise_variance")) cfg.noise.variance = parse_number<double>(*v, "noise_variance");
    if (const auto* v = find(kv, "ar_coefficients")) {
        cfg.noise.ar_coefficients = parse_list<double>(*v, "ar_coefficients");
    }
    if (const auto* v = find(kv, "noise_sampling")) {
        if (*v == "burn_in") {
            cfg.noise.sampling = NoiseSampling::burn_in;
        } else if (*v == "exact") {
            cfg.noise.sampling = NoiseSampling::exact;
        } else {
            throw ConfigError("noise_sampling must be 'burn_in' or 'exact'");
        }
    }
    if (const auto* v = find(kv, "burn_in")) cfg.noise.burn_in = parse_number<std::size_t>(*v, "burn_in");
    if (const auto* v = find(kv, "steering_phase_factor")) {
        cfg.steering_phase_factor = parse_number<double>(*v, "steering_phase_factor");
    }
    if (cfg.noise.kind == NoiseKind::white && !cfg.noise.ar_coefficients.empty()) {
        throw ConfigError("ar_coefficients given for white noise");
    }
    return cfg;
}

inline void write_scenario_keys(std::ostream& out, const ScenarioConfig& cfg, bool with_snapshots)
{
    out << "m = " << cfg.sensor_count << '\n';
    if (with_snapshots) out << "M = " << cfg.snapshot_count << '\n';
    out << "seed = " << cfg.seed << '\n';
    std::vector<double> variances, circularities;
    for (const auto& s : cfg.sources) {
        variances.push_back(s.variance);
        circularities.push_back(s.circularity);
    }
    out << "angles_deg = " << format_list(cfg.angles_deg) << '\n';
    out << "source_variances = " << format_list(variances) << '\n';
    out << "source_circularities = " << format_list(circularities) << '\n';
    out << "noise_kind = " << (cfg.noise.kind == NoiseKind::white ? "white" : "ar") << '\n';
    out << "noise_variance = " << format_number(cfg.noise.variance) << '\n';
    if (cfg.noise.kind == NoiseKind::spatial_ar) {
        out << "ar_coefficients = " << format_list(cfg.noise.ar_coefficients) << '\n';
        out << "noise_sampling = " << (cfg.noise.sampling == NoiseSampling::exact ? "exact" : "burn_in") << '\n';
    }
    out << "burn_in = " << cfg.noise.burn_in << '\n';
    out << "steering_phase_factor = " << format_number(cfg.steering_phase_factor) << '\n';
}

} // namespace detail

inline ScenarioConfig parse_scenario(std::istream& in)
{
    const auto kv = detail::read_key_values(in);
    detail::reject_unknown_keys(kv, false);
    ScenarioConfig cfg = detail::scenario_from(kv, true);
    try {
        validate(cfg);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline ScenarioConfig parse_scenario(const std::string& text)
{
    std::istringstream in(text);
    return parse_scenario(in);
}

inline std::string serialize_scenario(const ScenarioConfig& cfg)
{
    std::ostringstream out;
    detail::write_scenario_keys(out, cfg, true);
    return out.str();
}

inline ExperimentPlan parse_plan(std::istream& in)
{
    using namespace detail;
    const auto kv = read_key_values(in);
    reject_unknown_keys(kv, true);

    ExperimentPlan plan;
    plan.scenario = scenario_from(kv, false);
    plan.base_seed = plan.scenario.seed;

    const std::string* counts = find(kv, "sample_counts");
    if (!counts) throw ConfigError("missing key 'sample_counts'");
    plan.sample_counts = parse_list<std::size_t>(*counts, "sample_counts");
    if (plan.sample_counts.empty()) throw ConfigError("sample_counts is empty");
    for (std::size_t i = 1; i < plan.sample_counts.size(); ++i) {
        if (plan.sample_counts[i] <= plan.sample_counts[i - 1]) {
            throw ConfigError("sample_counts must be strictly increasing");
        }
    }
    if (!find(kv, "M")) plan.scenario.snapshot_count = plan.sample_counts.front();

    if (const auto* v = find(kv, "trials")) plan.trials = parse_number<std::size_t>(*v, "trials");
    if (plan.trials < 1) throw ConfigError("trials must be at least 1");

    const std::string* dets = find(kv, "detectors");
    if (!dets) throw ConfigError("missing key 'detectors'");
    for (const auto& name : parse_words(*dets)) plan.detectors.push_back(parse_detector(name));
    if (plan.detectors.empty()) throw ConfigError("detectors is empty");

    if (const auto* v = find(kv, "pfa_list")) plan.pfa_list = parse_list<double>(*v, "pfa_list");
    for (double p : plan.pfa_list) {
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("pfa_list values must lie in (0, 1)");
    }
    bool needs_pfa = false;
    for (auto d : plan.detectors) needs_pfa = needs_pfa || is_glrt(d);
    if (needs_pfa && plan.pfa_list.empty()) throw ConfigError("GLRT detectors need a non-empty pfa_list");

    if (const auto* v = find(kv, "r_max")) {
        if (*v != "M_over_3") {
            plan.r_max.fixed = parse_number<std::size_t>(*v, "r_max");
            if (*plan.r_max.fixed < 1) throw ConfigError("r_max must be at least 1");
        }
    }
    if (const auto* v = find(kv, "box_df")) {
        try {
            plan.box_df = parse_box_df(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }

    try {
        validate(plan.scenario);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return plan;
}

inline ExperimentPlan parse_plan(const std::string& text)
{
    std::istringstream in(text);
    return parse_plan(in);
}

inline std::string serialize_plan(const ExperimentPlan& plan)
{
    std::ostringstream out;
    ScenarioConfig scenario = plan.scenario;
    scenario.seed = plan.base_seed;
    detail::write_scenario_keys(out, scenario, true);
    out << "sample_counts = " << detail::format_list(plan.sample_counts) << '\n';
    out << "trials = " << plan.trials << '\n';
    out << "detectors = ";
    for (std::size_t i = 0; i < plan.detectors.size(); ++i) out << (i ? ", " : "") << to_string(plan.detectors[i]);
    out << '\n';
    out << "pfa_list = " << detail::format_list(plan.pfa_list) << '\n';
    out << "r_max = " << (plan.r_max.fixed ? std::to_string(*plan.r_max.fixed) : std::string("M_over_3")) << '\n';
    out << "box_df = " << to_string(plan.box_df) << '\n';
    return out.str();
}

} // namespace improperdim

#endif // IMPROPERDIM_HARNESS_CONFIG_HPP
