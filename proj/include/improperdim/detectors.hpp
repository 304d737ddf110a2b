#ifndef IMPROPERDIM_DETECTORS_HPP
#define IMPROPERDIM_DETECTORS_HPP

/** @file
 * Estimators of the number of improper components: the MDL information
 * criterion and the sequence of likelihood-ratio tests, each in a
 * full-sample and a reduced-rank form.
 */

#include "improperdim/augmented_stats.hpp"
#include "improperdim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace improperdim {

/// Lower bound on 1 - k^2 before taking logs; exact ones occur when M < 2m.
inline constexpr double min_log_argument = 1e-300;

/// Degrees-of-freedom rule for the reduced-rank Box statistic.
enum class BoxDf {
    derived, ///< (r - s)(r - s + 1), the full-sample rule with m -> r
    printed, ///< (r - 1)(r - s + 1)
};

inline std::string to_string(BoxDf rule) { return rule == BoxDf::derived ? "derived" : "printed"; }

inline BoxDf parse_box_df(const std::string& name)
{
    if (name == "derived") return BoxDf::derived;
    if (name == "printed") return BoxDf::printed;
    throw std::invalid_argument("unknown Box d.f. rule '" + name + "'");
}

/// ITC scores over d = 0..r-1 for each rank r = 1..r_max, plus the max-argmin decision.
struct ItcDiagnostics {
    std::vector<std::size_t> ranks;
    std::vector<std::vector<double>> scores; ///< scores[i][d] for ranks[i]
    std::vector<std::size_t> per_rank_argmin;
    std::size_t selected_rank = 0;
    std::size_t estimate = 0;
};

/// Test statistics and chi-squared thresholds for each rank, plus the max-min decision.
struct GlrtDiagnostics {
    std::vector<std::size_t> ranks;
    std::vector<std::vector<double>> statistics;  ///< statistics[i][s]
    std::vector<std::vector<double>> thresholds;  ///< thresholds[i][s]
    std::vector<std::vector<std::size_t>> dof;    ///< dof[i][s]
    double p_fa = 0.0;
    std::vector<std::size_t> per_rank_stop;
    std::size_t selected_rank = 0;
    std::size_t estimate = 0;
};

struct DetectionResult {
    std::size_t estimate = 0;
    std::optional<std::size_t> selected_rank; ///< set for reduced-rank detectors
    std::variant<ItcDiagnostics, GlrtDiagnostics> diagnostics;
};

struct TestStatistic {
    double statistic = 0.0;
    std::size_t df = 0;
};

/// r_max = min(floor(M/3), m, M - 1), at least 1.
inline std::size_t default_r_max(std::size_t m, std::size_t snapshots)
{
    std::size_t r = std::min({snapshots / 3, m, snapshots > 1 ? snapshots - 1 : std::size_t{1}});
    return std::max<std::size_t>(r, 1);
}

namespace detail {

inline double log_one_minus_sq(double k) { return std::log(std::max(1.0 - k * k, min_log_argument)); }

/// sum_{i=first..last-1} ln(1 - k_i^2), zero-based.
inline double log_product(const CircularitySpectrum& spectrum, std::size_t first, std::size_t last)
{
    double sum = 0.0;
    for (std::size_t i = first; i < last; ++i) sum += log_one_minus_sq(spectrum[i]);
    return sum;
}

/// Chi-squared threshold; zero degrees of freedom is the point mass at 0.
inline double chi2_threshold(std::size_t df, double p_fa, std::map<std::size_t, double>& cache)
{
    if (df == 0) return 0.0;
    auto it = cache.find(df);
    if (it != cache.end()) return it->second;
    const double t = chi2_quantile(df, 1.0 - p_fa);
    cache.emplace(df, t);
    return t;
}

inline void check_p_fa(double p_fa)
{
    if (!(p_fa > 0.0 && p_fa < 1.0)) throw std::domain_error("p_fa must lie in (0, 1)");
}

} // namespace detail

/// Goodness-of-fit term (M/2) sum_{i<=d} ln(1 - k_i^2).
inline double itc_fit_term(const CircularitySpectrum& spectrum, std::size_t d)
{
    if (d > spectrum.size()) throw std::out_of_range("itc_fit_term: d exceeds spectrum length");
    return 0.5 * static_cast<double>(spectrum.sample_count) * detail::log_product(spectrum, 0, d);
}

/// Free-parameter count 2*dim*d - d^2 + d of a rank-d complementary covariance.
inline double itc_free_parameters(std::size_t d, std::size_t dim)
{
    const double dd = static_cast<double>(d);
    return 2.0 * static_cast<double>(dim) * dd - dd * dd + dd;
}

/// MDL penalty (ln M / 2) times the free-parameter count.
inline double itc_penalty(std::size_t d, std::size_t dim, std::size_t snapshots)
{
    if (d > dim) throw std::out_of_range("itc_penalty: d exceeds dimension");
    return 0.5 * std::log(static_cast<double>(snapshots)) * itc_free_parameters(d, dim);
}

/// ITC(d) in the space the spectrum was computed in (dimension = rank_context).
inline double itc_score(const CircularitySpectrum& spectrum, std::size_t d)
{
    return itc_fit_term(spectrum, d) + itc_penalty(d, spectrum.rank_context, spectrum.sample_count);
}

namespace detail {

/// Scores for d = 0..dim-1 and the smallest minimizer.
inline std::pair<std::vector<double>, std::size_t> itc_sweep(const CircularitySpectrum& spectrum)
{
    const std::size_t dim = spectrum.rank_context;
    std::vector<double> scores(dim);
    std::size_t best = 0;
    for (std::size_t d = 0; d < dim; ++d) {
        scores[d] = itc_score(spectrum, d);
        if (scores[d] < scores[best]) best = d;
    }
    return {std::move(scores), best};
}

} // namespace detail

/// Full-sample MDL-ITC: argmin over d = 0..m-1.  Intended for M >> 2m.
inline DetectionResult mdl_itc_full(const CircularitySpectrum& spectrum)
{
    ItcDiagnostics diag;
    auto [scores, best] = detail::itc_sweep(spectrum);
    diag.ranks = {spectrum.rank_context};
    diag.scores = {std::move(scores)};
    diag.per_rank_argmin = {best};
    diag.selected_rank = spectrum.rank_context;
    diag.estimate = best;
    return DetectionResult{best, std::nullopt, std::move(diag)};
}

/**
 * Reduced-rank MDL-ITC with joint rank selection.
 *
 * For each r the argmin over d = 0..r-1 of ITC(d, r) is taken; the estimate
 * is the maximum over r.  Ties go to the smaller d and to the smaller r.
 */
inline ItcDiagnostics mdl_itc_reduced(const std::vector<CircularitySpectrum>& profile, std::size_t r_max,
                                      std::size_t snapshots)
{
    if (r_max < 1 || r_max > profile.size()) throw std::out_of_range("mdl_itc_reduced: r_max out of range");
    ItcDiagnostics diag;
    for (std::size_t i = 0; i < r_max; ++i) {
        CircularitySpectrum spectrum = profile[i];
        spectrum.sample_count = snapshots;
        auto [scores, best] = detail::itc_sweep(spectrum);
        diag.ranks.push_back(spectrum.rank_context);
        diag.scores.push_back(std::move(scores));
        diag.per_rank_argmin.push_back(best);
        if (i == 0 || best > diag.estimate) {
            diag.estimate = best;
            diag.selected_rank = spectrum.rank_context;
        }
    }
    return diag;
}

/// Wilks statistic W(s) = -M sum_{i>s} ln(1 - k_i^2) with (m - s)(m - s + 1) d.f.
inline TestStatistic wilks_statistic(const CircularitySpectrum& spectrum, std::size_t s)
{
    const std::size_t m = spectrum.size();
    if (s >= m) throw std::out_of_range("wilks_statistic: s must be below the dimension");
    TestStatistic out;
    out.statistic = -static_cast<double>(spectrum.sample_count) * detail::log_product(spectrum, s, m);
    out.df = (m - s) * (m - s + 1);
    return out;
}

/// Box statistic B(s, r) = -(M - r) sum_{i>s} ln(1 - k_i^2(r)).
inline TestStatistic box_statistic(const CircularitySpectrum& spectrum, std::size_t s, BoxDf rule = BoxDf::derived)
{
    const std::size_t r = spectrum.rank_context;
    if (spectrum.size() != r) throw std::invalid_argument("box_statistic: spectrum length differs from its rank");
    if (s >= r) throw std::out_of_range("box_statistic: s must be below the rank");
    if (r >= spectrum.sample_count) throw std::out_of_range("box_statistic: rank must be below the sample count");
    TestStatistic out;
    out.statistic = -static_cast<double>(spectrum.sample_count - r) * detail::log_product(spectrum, s, r);
    out.df = rule == BoxDf::derived ? (r - s) * (r - s + 1) : (r - 1) * (r - s + 1);
    return out;
}

/// Sequential Wilks tests for s = 0, 1, ...; returns m if every null is rejected.
inline DetectionResult glrt_full(const CircularitySpectrum& spectrum, double p_fa)
{
    detail::check_p_fa(p_fa);
    const std::size_t m = spectrum.size();
    std::map<std::size_t, double> cache;
    GlrtDiagnostics diag;
    diag.p_fa = p_fa;
    diag.ranks = {m};
    diag.statistics.emplace_back();
    diag.thresholds.emplace_back();
    diag.dof.emplace_back();
    std::size_t stop = m;
    for (std::size_t s = 0; s < m; ++s) {
        const TestStatistic w = wilks_statistic(spectrum, s);
        const double t = detail::chi2_threshold(w.df, p_fa, cache);
        diag.statistics[0].push_back(w.statistic);
        diag.thresholds[0].push_back(t);
        diag.dof[0].push_back(w.df);
        if (stop == m && w.statistic < t) stop = s;
    }
    diag.per_rank_stop = {stop};
    diag.selected_rank = m;
    diag.estimate = stop;
    return DetectionResult{stop, std::nullopt, std::move(diag)};
}

/**
 * Reduced-rank test sequence: for each r, the smallest s with
 * B(s, r) < T(s, r) (or r if none); the estimate is the maximum over r.
 */
inline GlrtDiagnostics glrt_reduced(const std::vector<CircularitySpectrum>& profile, std::size_t r_max, double p_fa,
                                    BoxDf rule = BoxDf::derived)
{
    detail::check_p_fa(p_fa);
    if (r_max < 1 || r_max > profile.size()) throw std::out_of_range("glrt_reduced: r_max out of range");
    std::map<std::size_t, double> cache;
    GlrtDiagnostics diag;
    diag.p_fa = p_fa;
    for (std::size_t i = 0; i < r_max; ++i) {
        const CircularitySpectrum& spectrum = profile[i];
        const std::size_t r = spectrum.rank_context;
        std::vector<double> stats, thresholds;
        std::vector<std::size_t> dofs;
        std::size_t stop = r;
        for (std::size_t s = 0; s < r; ++s) {
            const TestStatistic b = box_statistic(spectrum, s, rule);
            const double t = detail::chi2_threshold(b.df, p_fa, cache);
            stats.push_back(b.statistic);
            thresholds.push_back(t);
            dofs.push_back(b.df);
            if (stop == r && b.statistic < t) stop = s;
        }
        diag.ranks.push_back(r);
        diag.statistics.push_back(std::move(stats));
        diag.thresholds.push_back(std::move(thresholds));
        diag.dof.push_back(std::move(dofs));
        diag.per_rank_stop.push_back(stop);
        if (i == 0 || stop > diag.estimate) {
            diag.estimate = stop;
            diag.selected_rank = r;
        }
    }
    return diag;
}

inline DetectionResult to_result(ItcDiagnostics diag)
{
    const std::size_t est = diag.estimate;
    const std::size_t rank = diag.selected_rank;
    return DetectionResult{est, rank, std::move(diag)};
}

inline DetectionResult to_result(GlrtDiagnostics diag)
{
    const std::size_t est = diag.estimate;
    const std::size_t rank = diag.selected_rank;
    return DetectionResult{est, rank, std::move(diag)};
}

} // namespace improperdim

#endif // IMPROPERDIM_DETECTORS_HPP
