#ifndef IMPROPERDIM_AUGMENTED_STATS_HPP
#define IMPROPERDIM_AUGMENTED_STATS_HPP

/** @file
 * Second-order statistics of complex data: sample covariance and
 * complementary covariance, the coherence matrix, circularity
 * coefficients and PCA rank reduction.
 */

#include "improperdim/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace improperdim {

/// Sensors x snapshots matrix of complex samples; columns are i.i.d. draws.
class DataMatrix {
public:
    DataMatrix() = default;

    explicit DataMatrix(ComplexMatrix samples) : samples_(std::move(samples))
    {
        if (samples_.rows() < 1 || samples_.cols() < 1) {
            throw std::invalid_argument("DataMatrix: need at least one channel and one snapshot");
        }
        if (!samples_.allFinite()) throw std::invalid_argument("DataMatrix: non-finite sample");
    }

    std::size_t channels() const { return static_cast<std::size_t>(samples_.rows()); }
    std::size_t snapshots() const { return static_cast<std::size_t>(samples_.cols()); }
    const ComplexMatrix& samples() const { return samples_; }

private:
    ComplexMatrix samples_;
};

/// Sample covariance E[xx^H] and complementary covariance E[xx^T].
struct CovariancePair {
    ComplexMatrix covariance;
    ComplexMatrix complementary;
    std::size_t sample_count = 0;

    /// Augmented covariance of [x; x*].
    ComplexMatrix augmented() const
    {
        const Eigen::Index m = covariance.rows();
        ComplexMatrix out(2 * m, 2 * m);
        out << covariance, complementary, complementary.conjugate(), covariance.conjugate();
        return out;
    }
};

/// Descending circularity coefficients computed in an r-dimensional space.
struct CircularitySpectrum {
    RealVector coefficients;
    std::size_t rank_context = 0;
    std::size_t sample_count = 0;

    std::size_t size() const { return static_cast<std::size_t>(coefficients.size()); }
    double operator[](std::size_t i) const { return coefficients(static_cast<Eigen::Index>(i)); }
};

/// Zero-mean maximum-likelihood estimates (1/M normalization).
inline CovariancePair sample_covariances(const DataMatrix& x)
{
    const ComplexMatrix& s = x.samples();
    const double inv_m = 1.0 / static_cast<double>(x.snapshots());
    CovariancePair out;
    out.covariance = inv_m * (s * s.adjoint());
    out.complementary = inv_m * (s * s.transpose());
    // Exact symmetry; the products above only agree to rounding.
    out.covariance = (0.5 * (out.covariance + out.covariance.adjoint())).eval();
    out.complementary = (0.5 * (out.complementary + out.complementary.transpose())).eval();
    out.sample_count = x.snapshots();
    return out;
}

namespace detail {

/// Singular values of a (small) coherence matrix, clamped to [0, 1], descending.
inline RealVector clamped_singular_values(const ComplexMatrix& c)
{
    RealVector sv = Eigen::JacobiSVD<ComplexMatrix>(c).singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i) sv(i) = std::clamp(sv(i), 0.0, 1.0);
    std::sort(sv.data(), sv.data() + sv.size(), [](double a, double b) { return a > b; });
    return sv;
}

/// Same as clamped_singular_values via the eigenvalues of C C^H; much cheaper for sweeps.
inline RealVector clamped_singular_values_hermitian(const ComplexMatrix& c)
{
    const ComplexMatrix gram = c * c.adjoint();
    const RealVector ev = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(gram, Eigen::EigenvaluesOnly).eigenvalues();
    RealVector sv(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        sv(i) = std::clamp(std::sqrt(std::max(ev(ev.size() - 1 - i), 0.0)), 0.0, 1.0);
    }
    return sv;
}

} // namespace detail

/// Coherence matrix R^{-1/2} R~ R^{-T/2} built with the Hermitian root.
inline ComplexMatrix coherence_matrix(const CovariancePair& p, double rcond = default_rcond)
{
    const ComplexMatrix w = hermitian_inv_sqrt(p.covariance, rcond);
    // (R^{-1/2})^T equals its conjugate because the root is Hermitian.
    return w * p.complementary * w.conjugate();
}

/// Canonical correlations between x and x*, i.e. singular values of the coherence matrix.
inline CircularitySpectrum circularity_coefficients(const CovariancePair& p, double rcond = default_rcond)
{
    CircularitySpectrum out;
    out.coefficients = detail::clamped_singular_values(coherence_matrix(p, rcond));
    out.rank_context = static_cast<std::size_t>(p.covariance.rows());
    out.sample_count = p.sample_count;
    return out;
}

inline CircularitySpectrum circularity_coefficients(const DataMatrix& x, double rcond = default_rcond)
{
    return circularity_coefficients(sample_covariances(x), rcond);
}

/// Eigenpairs of a sample covariance in descending eigenvalue order.
struct PrincipalBasis {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;
};

/**
 * Principal eigenpairs of a Hermitian covariance.  Each eigenvector is
 * rotated so that its largest-modulus entry is real positive, which pins
 * the per-column phase.
 */
inline PrincipalBasis principal_basis(const ComplexMatrix& covariance)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(covariance);
    const Eigen::Index m = covariance.rows();
    PrincipalBasis out;
    out.eigenvalues = eig.eigenvalues().reverse();
    out.eigenvectors = eig.eigenvectors().rowwise().reverse();
    for (Eigen::Index j = 0; j < m; ++j) {
        auto col = out.eigenvectors.col(j);
        Eigen::Index k = 0;
        col.cwiseAbs().maxCoeff(&k);
        const Complex pivot = col(k);
        if (std::abs(pivot) > 0.0) col *= std::conj(pivot) / std::abs(pivot);
    }
    return out;
}

/// Rank-r PCA description y = U_r^H x of every snapshot.
inline DataMatrix pca_reduce(const DataMatrix& x, std::size_t r)
{
    if (r < 1 || r > std::min(x.channels(), x.snapshots())) {
        throw std::out_of_range("pca_reduce: rank out of range");
    }
    const PrincipalBasis basis = principal_basis(sample_covariances(x).covariance);
    const auto ur = basis.eigenvectors.leftCols(static_cast<Eigen::Index>(r));
    return DataMatrix(ur.adjoint() * x.samples());
}

/**
 * Circularity spectra of the rank-r PCA descriptions for r = 1..r_max.
 *
 * The PCA coordinates have covariance diag(lambda_1..lambda_r) and
 * complementary covariance equal to the leading block of U^H R~ conj(U), so
 * the sweep reuses one eigendecomposition and rotation and only needs the
 * singular values of an r x r matrix per rank (taken from the Hermitian
 * eigenvalues of C C^H).
 */
inline std::vector<CircularitySpectrum> circularity_profile(const DataMatrix& x, std::size_t r_max,
                                                            double rcond = default_rcond)
{
    if (r_max < 1 || r_max > std::min(x.channels(), x.snapshots())) {
        throw std::out_of_range("circularity_profile: r_max out of range");
    }
    const CovariancePair pair = sample_covariances(x);
    const PrincipalBasis basis = principal_basis(pair.covariance);
    const Eigen::Index rm = static_cast<Eigen::Index>(r_max);
    const auto u = basis.eigenvectors.leftCols(rm);
    const ComplexMatrix rotated = u.adjoint() * pair.complementary * u.conjugate();

    const double lambda_max = basis.eigenvalues(0);
    if (!(lambda_max > 0.0)) throw std::domain_error("rank zero covariance");
    RealVector inv_root(rm);
    for (Eigen::Index i = 0; i < rm; ++i) {
        const double l = basis.eigenvalues(i);
        inv_root(i) = l > rcond * lambda_max ? 1.0 / std::sqrt(l) : 0.0;
    }

    std::vector<CircularitySpectrum> out;
    out.reserve(r_max);
    for (Eigen::Index r = 1; r <= rm; ++r) {
        const auto w = inv_root.head(r).cast<Complex>().asDiagonal();
        const ComplexMatrix c = w * rotated.topLeftCorner(r, r) * w;
        CircularitySpectrum spec;
        spec.coefficients = detail::clamped_singular_values_hermitian(c);
        spec.rank_context = static_cast<std::size_t>(r);
        spec.sample_count = x.snapshots();
        out.push_back(std::move(spec));
    }
    return out;
}

} // namespace improperdim

#endif // IMPROPERDIM_AUGMENTED_STATS_HPP
