#ifndef IMPROPERDIM_SIGNAL_MODEL_HPP
#define IMPROPERDIM_SIGNAL_MODEL_HPP

/** @file
 * Synthetic data x = A s + n for a uniform linear array with independent
 * improper Gaussian sources and proper white or spatially colored noise.
 */

#include "improperdim/augmented_stats.hpp"
#include "improperdim/numerics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace improperdim {

using Rng = std::mt19937_64;

/// Default ULA phase factor: steering entry p is exp(j * factor * p * cos(theta)).
inline constexpr double default_steering_phase_factor = std::numbers::pi / 2.0;

/// Filter taps of the AR(4) spatial noise colouring used in the reference experiment.
inline const std::vector<double>& reference_ar_coefficients()
{
    static const std::vector<double> taps{0.5, std::sqrt(7.0) / 4.0, 0.5, 0.25};
    return taps;
}

struct SourceSpec {
    double variance = 1.0;    ///< E|s|^2
    double circularity = 0.0; ///< k in [0, 1]; E[s^2] = k * variance

    bool operator==(const SourceSpec&) const = default;
};

enum class NoiseKind { white, spatial_ar };

/// How coloured noise is sampled: AR recursion with burn-in, or exact Toeplitz covariance root.
enum class NoiseSampling { burn_in, exact };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::white;
    double variance = 1.0; ///< white variance, or AR innovation variance
    std::vector<double> ar_coefficients;
    NoiseSampling sampling = NoiseSampling::burn_in;
    std::size_t burn_in = 200;

    bool operator==(const NoiseSpec&) const = default;
};

struct ScenarioConfig {
    std::size_t sensor_count = 0;
    std::vector<double> angles_deg;
    std::vector<SourceSpec> sources;
    NoiseSpec noise;
    std::size_t snapshot_count = 0;
    std::uint64_t seed = 0;
    double steering_phase_factor = default_steering_phase_factor;

    bool operator==(const ScenarioConfig&) const = default;

    std::size_t improper_count() const
    {
        std::size_t d = 0;
        for (const auto& s : sources) d += s.circularity > 0.0 ? 1 : 0;
        return d;
    }
};

/// True when every root of z^p + a_1 z^{p-1} + ... + a_p lies strictly inside the unit circle.
inline bool ar_is_stable(const std::vector<double>& coefficients)
{
    const auto p = static_cast<Eigen::Index>(coefficients.size());
    if (p == 0) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) companion(0, i) = -coefficients[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
    return roots.cwiseAbs().maxCoeff() < 1.0;
}

/**
 * Autocovariance gamma_0..gamma_{lags-1} of the stationary process
 * n_p = -(a_1 n_{p-1} + ... + a_q n_{p-q}) + w_p, Var w = innovation_variance.
 * Solves the Yule-Walker system for the first q + 1 lags and extends by recursion.
 */
inline std::vector<double> ar_autocovariance(const std::vector<double>& a, double innovation_variance,
                                             std::size_t lags)
{
    if (!ar_is_stable(a)) throw std::invalid_argument("unstable AR polynomial");
    const std::size_t q = a.size();
    const auto n = static_cast<Eigen::Index>(q + 1);
    Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t k = 0; k <= q; ++k) {
        for (std::size_t i = 1; i <= q; ++i) {
            const std::size_t lag = k > i ? k - i : i - k;
            sys(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(lag)) += a[i - 1];
        }
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = innovation_variance;
    const Eigen::VectorXd head = sys.fullPivLu().solve(rhs);

    std::vector<double> gamma(std::max(lags, q + 1));
    for (std::size_t k = 0; k <= q; ++k) gamma[k] = head(static_cast<Eigen::Index>(k));
    for (std::size_t k = q + 1; k < gamma.size(); ++k) {
        double g = 0.0;
        for (std::size_t i = 1; i <= q; ++i) g -= a[i - 1] * gamma[k - i];
        gamma[k] = g;
    }
    gamma.resize(lags);
    return gamma;
}

/// Spatial noise covariance R_nn (m x m) implied by a NoiseSpec.
inline ComplexMatrix noise_covariance(const NoiseSpec& spec, std::size_t m)
{
    const auto mm = static_cast<Eigen::Index>(m);
    if (spec.kind == NoiseKind::white) return ComplexMatrix::Identity(mm, mm) * spec.variance;
    const std::vector<double> gamma = ar_autocovariance(spec.ar_coefficients, spec.variance, m);
    ComplexMatrix r(mm, mm);
    for (Eigen::Index i = 0; i < mm; ++i) {
        for (Eigen::Index j = 0; j < mm; ++j) r(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
    }
    return r;
}

/// ULA steering vectors: entry (p, q) = exp(j * phase_factor * p * cos(theta_q)), p = 0..m-1.
inline ComplexMatrix steering_matrix(const std::vector<double>& angles_deg, std::size_t m,
                                     double phase_factor = default_steering_phase_factor)
{
    if (angles_deg.empty()) throw std::invalid_argument("steering_matrix: empty angle list");
    if (m < 1) throw std::invalid_argument("steering_matrix: need at least one sensor");
    ComplexMatrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(angles_deg.size()));
    for (std::size_t q = 0; q < angles_deg.size(); ++q) {
        const double c = std::cos(angles_deg[q] * std::numbers::pi / 180.0);
        for (std::size_t p = 0; p < m; ++p) {
            a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) =
                std::polar(1.0, phase_factor * static_cast<double>(p) * c);
        }
    }
    return a;
}

/**
 * Independent sources with E|s|^2 = variance and E[s^2] = k * variance:
 * s = sqrt(variance (1 + k) / 2) u + j sqrt(variance (1 - k) / 2) v
 * with u, v independent standard normals.
 */
inline ComplexMatrix generate_sources(const std::vector<SourceSpec>& specs, std::size_t snapshots, Rng& rng)
{
    std::normal_distribution<double> normal;
    ComplexMatrix s(static_cast<Eigen::Index>(specs.size()), static_cast<Eigen::Index>(snapshots));
    for (std::size_t q = 0; q < specs.size(); ++q) {
        const double k = specs[q].circularity;
        const double re = std::sqrt(specs[q].variance * (1.0 + k) / 2.0);
        const double im = std::sqrt(specs[q].variance * (1.0 - k) / 2.0);
        for (std::size_t t = 0; t < snapshots; ++t) {
            const double u = normal(rng);
            const double v = normal(rng);
            s(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(t)) = Complex(re * u, im * v);
        }
    }
    return s;
}

namespace detail {

/// Proper complex Gaussian matrix with per-entry variance `variance`.
inline ComplexMatrix proper_gaussian(std::size_t rows, std::size_t cols, double variance, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    ComplexMatrix n(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index t = 0; t < n.cols(); ++t) {
        for (Eigen::Index p = 0; p < n.rows(); ++p) {
            const double re = normal(rng);
            const double im = normal(rng);
            n(p, t) = Complex(re, im);
        }
    }
    return n;
}

} // namespace detail

/**
 * Proper noise, i.i.d. across snapshots.  Spatial AR noise runs the
 * recursion along the sensor index for each snapshot, discarding
 * `burn_in` leading steps, or samples exactly from the Toeplitz covariance.
 */
inline ComplexMatrix generate_noise(const NoiseSpec& spec, std::size_t m, std::size_t snapshots, Rng& rng)
{
    if (!(spec.variance > 0.0)) throw std::invalid_argument("noise variance must be positive");
    if (spec.kind == NoiseKind::white) return detail::proper_gaussian(m, snapshots, spec.variance, rng);

    if (!ar_is_stable(spec.ar_coefficients)) throw std::invalid_argument("unstable AR polynomial");
    if (spec.sampling == NoiseSampling::exact) {
        const Eigen::LLT<ComplexMatrix> chol(noise_covariance(spec, m));
        if (chol.info() != Eigen::Success) throw std::runtime_error("AR covariance is not positive definite");
        return chol.matrixL() * detail::proper_gaussian(m, snapshots, 1.0, rng);
    }

    const std::vector<double>& a = spec.ar_coefficients;
    const std::size_t total = spec.burn_in + m;
    const ComplexMatrix w = detail::proper_gaussian(total, snapshots, spec.variance, rng);
    ComplexMatrix n(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(snapshots));
    std::vector<Complex> chain(total);
    for (Eigen::Index t = 0; t < w.cols(); ++t) {
        for (std::size_t p = 0; p < total; ++p) {
            Complex v = w(static_cast<Eigen::Index>(p), t);
            for (std::size_t i = 1; i <= a.size() && i <= p; ++i) v -= a[i - 1] * chain[p - i];
            chain[p] = v;
        }
        for (std::size_t p = 0; p < m; ++p) n(static_cast<Eigen::Index>(p), t) = chain[spec.burn_in + p];
    }
    return n;
}

inline void validate(const ScenarioConfig& cfg)
{
    if (cfg.sensor_count < 1) throw std::invalid_argument("scenario: sensor count must be positive");
    if (cfg.snapshot_count < 1) throw std::invalid_argument("scenario: snapshot count must be positive");
    if (cfg.angles_deg.size() != cfg.sources.size()) {
        throw std::invalid_argument("scenario: need one angle per source");
    }
    if (!cfg.sources.empty() && cfg.sources.size() >= cfg.sensor_count) {
        throw std::invalid_argument("scenario: source count must be below the sensor count");
    }
    for (std::size_t i = 0; i < cfg.angles_deg.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.angles_deg.size(); ++j) {
            if (cfg.angles_deg[i] == cfg.angles_deg[j]) throw std::invalid_argument("scenario: angles must be distinct");
        }
    }
    for (const auto& s : cfg.sources) {
        if (!(s.variance > 0.0)) throw std::invalid_argument("scenario: source variance must be positive");
        if (!(s.circularity >= 0.0 && s.circularity <= 1.0)) {
            throw std::invalid_argument("scenario: circularity must lie in [0, 1]");
        }
    }
    if (!(cfg.noise.variance > 0.0)) throw std::invalid_argument("scenario: noise variance must be positive");
    if (cfg.noise.kind == NoiseKind::spatial_ar && !ar_is_stable(cfg.noise.ar_coefficients)) {
        throw std::invalid_argument("unstable AR polynomial");
    }
}

/// X = A S + N, a pure function of the configuration including its seed.
inline DataMatrix generate_scenario(const ScenarioConfig& cfg)
{
    validate(cfg);
    Rng rng(cfg.seed);
    const std::size_t m = cfg.sensor_count;
    const std::size_t snapshots = cfg.snapshot_count;
    ComplexMatrix x = ComplexMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(snapshots));
    if (!cfg.sources.empty()) {
        const ComplexMatrix a = steering_matrix(cfg.angles_deg, m, cfg.steering_phase_factor);
        x.noalias() += a * generate_sources(cfg.sources, snapshots, rng);
    }
    x += generate_noise(cfg.noise, m, snapshots, rng);
    return DataMatrix(std::move(x));
}

/// Population covariance and complementary covariance of the scenario.
inline CovariancePair population_covariances(const ScenarioConfig& cfg)
{
    validate(cfg);
    const std::size_t m = cfg.sensor_count;
    CovariancePair out;
    out.covariance = noise_covariance(cfg.noise, m);
    out.complementary = ComplexMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    out.sample_count = cfg.snapshot_count;
    if (cfg.sources.empty()) return out;
    const ComplexMatrix a = steering_matrix(cfg.angles_deg, m, cfg.steering_phase_factor);
    Eigen::VectorXcd power(a.cols()), pseudo(a.cols());
    for (std::size_t q = 0; q < cfg.sources.size(); ++q) {
        power(static_cast<Eigen::Index>(q)) = cfg.sources[q].variance;
        pseudo(static_cast<Eigen::Index>(q)) = cfg.sources[q].variance * cfg.sources[q].circularity;
    }
    out.covariance += a * power.asDiagonal() * a.adjoint();
    out.complementary = a * pseudo.asDiagonal() * a.transpose();
    return out;
}

/// Reference experiment: 60-sensor ULA, four improper sources at 10..25 degrees.
inline ScenarioConfig reference_scenario(NoiseKind noise, std::size_t snapshots, std::uint64_t seed = 1)
{
    ScenarioConfig cfg;
    cfg.sensor_count = 60;
    cfg.angles_deg = {10.0, 15.0, 20.0, 25.0};
    cfg.sources = {{5.0, 1.0}, {5.0, 0.9}, {5.0, 0.8}, {5.0, 0.6}};
    cfg.snapshot_count = snapshots;
    cfg.seed = seed;
    if (noise == NoiseKind::white) {
        cfg.noise = NoiseSpec{NoiseKind::white, 1.0, {}};
    } else {
        cfg.noise = NoiseSpec{NoiseKind::spatial_ar, 0.25, reference_ar_coefficients()};
    }
    return cfg;
}

} // namespace improperdim

#endif // IMPROPERDIM_SIGNAL_MODEL_HPP
