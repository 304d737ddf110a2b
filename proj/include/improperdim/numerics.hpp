#ifndef IMPROPERDIM_NUMERICS_HPP
#define IMPROPERDIM_NUMERICS_HPP

/** @file
 * Numerical primitives used by the improper-dimension detectors:
 * chi-squared quantiles, Takagi factorization of complex symmetric
 * matrices and Hermitian inverse square roots.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace improperdim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Default relative eigenvalue cutoff for inverse square roots.
inline constexpr double default_rcond = 1e-12;

namespace detail {

/// Largest absolute entry; zero for an empty matrix.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a)
{
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().maxCoeff();
}

} // namespace detail

/**
 * Regularized lower incomplete gamma function P(a, x).
 *
 * Series expansion below x = a + 1, modified Lentz continued fraction for
 * the upper tail above it.  Both branches form the prefactor
 * x^a e^{-x} / Gamma(a) in log space so large shape parameters do not
 * overflow.
 */
inline double regularized_gamma_p(double a, double x)
{
    if (!(a > 0.0)) throw std::domain_error("regularized_gamma_p: shape must be positive");
    if (x < 0.0 || std::isnan(x)) throw std::domain_error("regularized_gamma_p: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;

    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr int max_iter = 1000000;

    if (x < a + 1.0) {
        double denom = a;
        double term = 1.0 / a;
        double sum = term;
        for (int n = 0; n < max_iter; ++n) {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if (std::abs(term) < std::abs(sum) * eps) break;
        }
        return std::min(1.0, sum * std::exp(log_prefactor));
    }

    // Upper tail Q(a, x) as a continued fraction.
    constexpr double tiny = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    const double q = std::exp(log_prefactor) * h;
    return std::max(0.0, 1.0 - q);
}

/// Lower-tail chi-squared CDF with `df` degrees of freedom.
inline double chi2_cdf(double x, std::size_t df)
{
    if (df < 1) throw std::domain_error("chi2_cdf: df must be at least 1");
    if (x <= 0.0) return 0.0;
    return regularized_gamma_p(0.5 * static_cast<double>(df), 0.5 * x);
}

/// Chi-squared density; used as the Newton derivative in chi2_quantile.
inline double chi2_pdf(double x, std::size_t df)
{
    if (x <= 0.0) return 0.0;
    const double a = 0.5 * static_cast<double>(df);
    return 0.5 * std::exp((a - 1.0) * std::log(0.5 * x) - 0.5 * x - std::lgamma(a));
}

/**
 * Inverse chi-squared CDF: the x with P(df/2, x/2) = p.
 *
 * Brackets the root by doubling, narrows it by bisection and finishes with
 * Newton steps on the regularized gamma that are kept inside the bracket.
 * Throws std::domain_error for df < 1 or p outside (0, 1).
 */
inline double chi2_quantile(std::size_t df, double p)
{
    if (df < 1) throw std::domain_error("chi2_quantile: df must be at least 1");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi2_quantile: p must lie in (0, 1)");

    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(df));
    while (chi2_cdf(hi, df) < p) {
        lo = hi;
        hi *= 2.0;
    }

    for (int i = 0; i < 200 && (hi - lo) > 1e-3 * (1.0 + lo); ++i) {
        const double mid = 0.5 * (lo + hi);
        (chi2_cdf(mid, df) < p ? lo : hi) = mid;
    }

    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 100; ++i) {
        const double f = chi2_cdf(x, df) - p;
        if (f == 0.0) return x;
        (f < 0.0 ? lo : hi) = x;
        const double slope = chi2_pdf(x, df);
        double next = (slope > 0.0) ? x - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x)) {
            return next;
        }
        x = next;
    }
    return x;
}

/// S = F diag(singular_values) F^T with F unitary, singular values descending.
struct TakagiFactorization {
    ComplexMatrix factor_unitary;
    RealVector singular_values;

    ComplexMatrix reconstruct() const
    {
        return factor_unitary * singular_values.cast<Complex>().asDiagonal() *
               factor_unitary.transpose();
    }
};

namespace detail {

/**
 * Symmetric square root W W^T = Z of a complex symmetric unitary block.
 *
 * Re Z and Im Z are commuting real symmetric matrices, so a single real
 * orthogonal Q diagonalizes both; a generic real combination of the two
 * exposes it.  Then W = Q D^{1/2}.
 */
inline ComplexMatrix symmetric_unitary_sqrt(const ComplexMatrix& z)
{
    const ComplexMatrix zs = 0.5 * (z + z.transpose());
    if (zs.rows() == 1) {
        const Complex v = zs(0, 0);
        const double mag = std::abs(v);
        return ComplexMatrix::Constant(1, 1, mag > 0.0 ? std::sqrt(v / mag) : Complex(1.0, 0.0));
    }
    constexpr double mix = 0.6180339887498949;
    const Eigen::MatrixXd pencil = zs.real() + mix * zs.imag();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pencil);
    const Eigen::MatrixXcd q = eig.eigenvectors().cast<Complex>();
    const ComplexMatrix diag = q.transpose() * zs * q;
    Eigen::VectorXcd root(zs.rows());
    for (Eigen::Index i = 0; i < zs.rows(); ++i) {
        const Complex v = diag(i, i);
        const double mag = std::abs(v);
        root(i) = mag > 0.0 ? std::sqrt(v / mag) : Complex(1.0, 0.0);
    }
    return q * root.asDiagonal();
}

/// Flip the column sign so its largest-modulus entry has positive real part.
inline void normalize_column_sign(Eigen::Ref<Eigen::VectorXcd> col)
{
    Eigen::Index k = 0;
    col.cwiseAbs().maxCoeff(&k);
    const Complex pivot = col(k);
    const bool flip = std::abs(pivot.real()) > 1e-12 * std::abs(pivot) ? pivot.real() < 0.0
                                                                        : pivot.imag() < 0.0;
    if (flip) col = -col;
}

} // namespace detail

/**
 * Takagi factorization of a complex symmetric matrix.
 *
 * Built from the SVD S = U diag(sigma) V^H.  Symmetry gives conj(V) = U Z
 * with Z block diagonal over clusters of equal singular values, and each
 * block of Z is symmetric unitary; F = U W where W W^T = Z blockwise.
 * Clusters (including the numerical null space) are rotated as a unit.
 */
inline TakagiFactorization takagi(const ComplexMatrix& s)
{
    if (s.rows() != s.cols()) throw std::invalid_argument("takagi: matrix must be square");
    const Eigen::Index n = s.rows();
    const double scale = detail::max_abs(s);
    if (detail::max_abs(s - s.transpose()) > 1e-8 * std::max(1.0, scale)) {
        throw std::invalid_argument("takagi: matrix is not complex symmetric");
    }

    TakagiFactorization out;
    if (scale == 0.0) {
        out.factor_unitary = ComplexMatrix::Identity(n, n);
        out.singular_values = RealVector::Zero(n);
        return out;
    }

    const ComplexMatrix sym = 0.5 * (s + s.transpose());
    Eigen::JacobiSVD<ComplexMatrix> svd(sym, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const ComplexMatrix& u = svd.matrixU();
    const RealVector& sigma = svd.singularValues();
    const ComplexMatrix z = u.adjoint() * svd.matrixV().conjugate();

    const double top = sigma(0);
    const double null_tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * top;
    const double cluster_tol = 1e-8 * top;

    out.factor_unitary.resize(n, n);
    Eigen::Index begin = 0;
    while (begin < n) {
        Eigen::Index end = begin + 1;
        if (sigma(begin) <= null_tol) {
            end = n;
        } else {
            while (end < n && sigma(end - 1) - sigma(end) <= cluster_tol && sigma(end) > null_tol) ++end;
        }
        const Eigen::Index len = end - begin;
        out.factor_unitary.middleCols(begin, len) =
            u.middleCols(begin, len) * detail::symmetric_unitary_sqrt(z.block(begin, begin, len, len));
        begin = end;
    }
    for (Eigen::Index j = 0; j < n; ++j) detail::normalize_column_sign(out.factor_unitary.col(j));
    out.singular_values = sigma;
    return out;
}

/**
 * Hermitian pseudo inverse square root Q Lambda^{-1/2} Q^H.
 *
 * Eigenvalues at or below rcond * lambda_max are treated as zero and map to
 * zero.  The result is Hermitian, so R^{-1/2} S R^{-T/2} stays complex
 * symmetric for symmetric S.
 */
inline ComplexMatrix hermitian_inv_sqrt(const ComplexMatrix& r, double rcond = default_rcond)
{
    if (r.rows() != r.cols()) throw std::invalid_argument("hermitian_inv_sqrt: matrix must be square");
    if (!(rcond > 0.0 && rcond < 1.0)) throw std::invalid_argument("hermitian_inv_sqrt: rcond must lie in (0, 1)");
    const double scale = detail::max_abs(r);
    if (scale == 0.0) throw std::domain_error("rank zero covariance");
    if (detail::max_abs(r - r.adjoint()) > 1e-8 * std::max(1.0, scale)) {
        throw std::invalid_argument("hermitian_inv_sqrt: matrix is not Hermitian");
    }

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(r);
    const RealVector& lambda = eig.eigenvalues();
    const double lambda_max = lambda.maxCoeff();
    if (!(lambda_max > 0.0)) throw std::domain_error("rank zero covariance");

    RealVector inv_root(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        inv_root(i) = lambda(i) > rcond * lambda_max ? 1.0 / std::sqrt(lambda(i)) : 0.0;
    }
    const ComplexMatrix& q = eig.eigenvectors();
    return q * inv_root.cast<Complex>().asDiagonal() * q.adjoint();
}

} // namespace improperdim

#endif // IMPROPERDIM_NUMERICS_HPP
