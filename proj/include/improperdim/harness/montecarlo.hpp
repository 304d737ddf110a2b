#ifndef IMPROPERDIM_HARNESS_MONTECARLO_HPP
#define IMPROPERDIM_HARNESS_MONTECARLO_HPP

/** @file
 * Single-shot detection and Monte Carlo sweeps of the probability of
 * detection versus snapshot count.
 */

#include "improperdim/augmented_stats.hpp"
#include "improperdim/detectors.hpp"
#include "improperdim/harness/config.hpp"
#include "improperdim/signal_model.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace improperdim {

/// Options that cannot be honoured for the given data (e.g. r_max >= M).
class InfeasibleOptions : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct DetectorOptions {
    double p_fa = 0.005;
    std::optional<std::size_t> r_max; ///< default_r_max when unset
    BoxDf box_df = BoxDf::derived;
    double rcond = default_rcond;
};

/// Checks 1 <= r_max <= m and r_max < M.
inline std::size_t checked_r_max(std::size_t r_max, std::size_t m, std::size_t snapshots)
{
    if (r_max < 1) throw InfeasibleOptions("r_max must be at least 1");
    if (r_max > m) {
        throw InfeasibleOptions("r_max = " + std::to_string(r_max) + " exceeds the dimension m = " + std::to_string(m));
    }
    if (r_max >= snapshots) {
        throw InfeasibleOptions("r_max = " + std::to_string(r_max) + " must be below the snapshot count M = " +
                                std::to_string(snapshots));
    }
    return r_max;
}

inline DetectionResult run_detector(const DataMatrix& x, DetectorKind kind, const DetectorOptions& opts = {})
{
    const std::size_t m = x.channels();
    const std::size_t snapshots = x.snapshots();
    if (is_glrt(kind) && !(opts.p_fa > 0.0 && opts.p_fa < 1.0)) throw InfeasibleOptions("p_fa must lie in (0, 1)");
    switch (kind) {
    case DetectorKind::itc_full: return mdl_itc_full(circularity_coefficients(x, opts.rcond));
    case DetectorKind::glrt_full: return glrt_full(circularity_coefficients(x, opts.rcond), opts.p_fa);
    case DetectorKind::itc_rr:
    case DetectorKind::glrt_rr: {
        const std::size_t r_max = checked_r_max(opts.r_max.value_or(default_r_max(m, snapshots)), m, snapshots);
        const auto profile = circularity_profile(x, r_max, opts.rcond);
        if (kind == DetectorKind::itc_rr) return to_result(mdl_itc_reduced(profile, r_max, snapshots));
        return to_result(glrt_reduced(profile, r_max, opts.p_fa, opts.box_df));
    }
    }
    throw std::logic_error("unhandled detector kind");
}

/// A detector plus the false-alarm level it runs at (GLRT only).
struct DetectorVariant {
    DetectorKind kind;
    std::optional<double> p_fa;
};

inline std::vector<DetectorVariant> expand_variants(const ExperimentPlan& plan)
{
    std::vector<DetectorVariant> out;
    for (auto kind : plan.detectors) {
        if (is_glrt(kind)) {
            for (double p : plan.pfa_list) out.push_back({kind, p});
        } else {
            out.push_back({kind, std::nullopt});
        }
    }
    return out;
}

struct CurveRow {
    std::string detector;
    std::optional<double> p_fa;
    std::size_t snapshots = 0;
    std::size_t trials = 0;
    double p_detect = 0.0;
    double mean_selected_rank = 0.0;
};

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of one trial; every detector in the trial sees the same data.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t snapshots, std::size_t trial)
{
    return mix64(mix64(mix64(base_seed) ^ static_cast<std::uint64_t>(snapshots)) ^ static_cast<std::uint64_t>(trial));
}

struct TrialOutcome {
    std::size_t estimate = 0;
    std::size_t selected_rank = 0;
};

/// One generate-then-detect pipeline evaluated by every variant.
inline std::vector<TrialOutcome> run_trial(const ExperimentPlan& plan, const std::vector<DetectorVariant>& variants,
                                           std::size_t snapshots, std::size_t trial)
{
    ScenarioConfig cfg = plan.scenario;
    cfg.snapshot_count = snapshots;
    cfg.seed = trial_seed(plan.base_seed, snapshots, trial);
    const DataMatrix x = generate_scenario(cfg);
    const std::size_t m = x.channels();

    bool need_full = false;
    bool need_profile = false;
    for (const auto& v : variants) (is_reduced(v.kind) ? need_profile : need_full) = true;

    std::optional<CircularitySpectrum> full;
    if (need_full) full = circularity_coefficients(x);
    std::size_t r_max = 0;
    std::vector<CircularitySpectrum> profile;
    if (need_profile) {
        r_max = checked_r_max(plan.r_max.resolve(m, snapshots), m, snapshots);
        profile = circularity_profile(x, r_max);
    }

    std::vector<TrialOutcome> out;
    out.reserve(variants.size());
    for (const auto& v : variants) {
        TrialOutcome o;
        switch (v.kind) {
        case DetectorKind::itc_full:
            o = {mdl_itc_full(*full).estimate, m};
            break;
        case DetectorKind::glrt_full:
            o = {glrt_full(*full, *v.p_fa).estimate, m};
            break;
        case DetectorKind::itc_rr: {
            const auto d = mdl_itc_reduced(profile, r_max, snapshots);
            o = {d.estimate, d.selected_rank};
            break;
        }
        case DetectorKind::glrt_rr: {
            const auto d = glrt_reduced(profile, r_max, *v.p_fa, plan.box_df);
            o = {d.estimate, d.selected_rank};
            break;
        }
        }
        out.push_back(o);
    }
    return out;
}

/**
 * Probability of exact detection for every (variant, M) pair.
 *
 * Trials run on `threads` workers (0 = hardware concurrency).  Each trial's
 * data depends only on (base_seed, M, trial index) and outcomes are stored
 * by index, so the result does not depend on scheduling.
 */
inline std::vector<CurveRow> run_montecarlo(const ExperimentPlan& plan, unsigned threads = 0)
{
    validate(plan.scenario);
    if (plan.trials < 1) throw std::invalid_argument("trials must be at least 1");
    const auto variants = expand_variants(plan);
    const std::size_t m = plan.scenario.sensor_count;
    for (std::size_t snapshots : plan.sample_counts) {
        bool reduced = false;
        for (const auto& v : variants) reduced = reduced || is_reduced(v.kind);
        if (reduced) checked_r_max(plan.r_max.resolve(m, snapshots), m, snapshots);
    }

    const std::size_t jobs = plan.sample_counts.size() * plan.trials;
    std::vector<std::vector<TrialOutcome>> outcomes(jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= jobs) return;
            try {
                outcomes[job] = run_trial(plan, variants, plan.sample_counts[job / plan.trials], job % plan.trials);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(jobs);
                return;
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    const std::size_t truth = plan.scenario.improper_count();
    std::vector<CurveRow> rows;
    for (std::size_t v = 0; v < variants.size(); ++v) {
        for (std::size_t mi = 0; mi < plan.sample_counts.size(); ++mi) {
            std::size_t hits = 0;
            double rank_sum = 0.0;
            for (std::size_t t = 0; t < plan.trials; ++t) {
                const TrialOutcome& o = outcomes[mi * plan.trials + t][v];
                hits += o.estimate == truth ? 1 : 0;
                rank_sum += static_cast<double>(o.selected_rank);
            }
            CurveRow row;
            row.detector = to_string(variants[v].kind);
            row.p_fa = variants[v].p_fa;
            row.snapshots = plan.sample_counts[mi];
            row.trials = plan.trials;
            row.p_detect = static_cast<double>(hits) / static_cast<double>(plan.trials);
            row.mean_selected_rank = rank_sum / static_cast<double>(plan.trials);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline constexpr std::string_view csv_header = "detector,p_fa,M,trials,p_detect,mean_selected_rank";

inline void write_csv(std::ostream& out, const std::vector<CurveRow>& rows)
{
    out << csv_header << '\n';
    for (const auto& r : rows) {
        out << r.detector << ',' << (r.p_fa ? detail::format_number(*r.p_fa) : std::string()) << ',' << r.snapshots
            << ',' << r.trials << ',' << detail::format_number(r.p_detect) << ','
            << detail::format_number(r.mean_selected_rank) << '\n';
    }
}

} // namespace improperdim

#endif // IMPROPERDIM_HARNESS_MONTECARLO_HPP
