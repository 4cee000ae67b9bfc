#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qchan/errors.hpp"

namespace qchan {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Orthonormal basis of a subspace of C^ambient_dim, stored as matrix columns.
struct SubspaceBasis {
    Index ambient_dim = 0;
    ComplexMatrix vectors;

    Index dim() const { return vectors.cols(); }
    bool empty() const { return vectors.cols() == 0; }
    ComplexMatrix projector() const { return vectors * vectors.adjoint(); }

    static SubspaceBasis full(Index n) { return {n, ComplexMatrix::Identity(n, n)}; }
    static SubspaceBasis zero(Index n) { return {n, ComplexMatrix(n, 0)}; }
};

namespace linalg {

inline constexpr double default_rank_tol = 1e-10;

inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b)
{
    if (a.cols() != b.rows())
        throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    return a * b;
}

inline ComplexMatrix adjoint(const ComplexMatrix& m) { return m.adjoint(); }

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b)
{
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw ShapeError("commutator: operands must be square of equal size");
    return a * b - b * a;
}

/// Column-stacking vectorization.
inline ComplexVector vec(const ComplexMatrix& m)
{
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

inline ComplexMatrix unvec(const ComplexVector& v, Index rows, Index cols)
{
    if (v.size() != rows * cols)
        throw ShapeError("unvec: vector length does not match target shape");
    return Eigen::Map<const ComplexMatrix>(v.data(), rows, cols);
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b)
{
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Orthonormal basis of the numerical null space: right singular directions
/// whose singular value is below tol * max(sigma_max, scale). Callers whose
/// input is normalized to unit size pass scale = 1 so that a numerically zero
/// matrix is recognized as zero; scale = 0 makes the cutoff purely relative
/// (tol * 1 for the exact zero matrix).
inline SubspaceBasis kernel(const ComplexMatrix& m, double tol = default_rank_tol, double scale = 0.0)
{
    if (!(tol > 0))
        throw PreconditionError("kernel: tolerance must be positive");
    const Index n = m.cols();
    if (m.rows() == 0 || n == 0)
        return SubspaceBasis::full(n);

    // Tall stacks are first compressed to their R factor; singular values and
    // right singular vectors are unchanged.
    ComplexMatrix work;
    if (m.rows() > n) {
        Eigen::HouseholderQR<ComplexMatrix> qr(m);
        work = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    } else {
        work = m;
    }

    Eigen::JacobiSVD<ComplexMatrix> svd(work, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double ref = std::max(smax, scale);
    const double cutoff = tol * (ref > 0 ? ref : 1.0);

    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) >= cutoff)
            ++rank;
    return {n, svd.matrixV().rightCols(n - rank)};
}

/// Intersection of subspaces, as the kernel of the stacked projectors onto
/// their orthogonal complements.
inline SubspaceBasis intersect(std::span<const SubspaceBasis> bases, double tol = default_rank_tol)
{
    if (bases.empty())
        throw PreconditionError("intersect: no subspaces given");
    const Index n = bases.front().ambient_dim;
    for (const auto& b : bases)
        if (b.ambient_dim != n)
            throw ShapeError("intersect: subspaces live in different ambient spaces");

    ComplexMatrix stacked(n * static_cast<Index>(bases.size()), n);
    Index row = 0;
    for (const auto& b : bases) {
        stacked.middleRows(row, n) = ComplexMatrix::Identity(n, n) - b.projector();
        row += n;
    }
    return kernel(stacked, tol, 1.0);
}

/// Residual of projecting `v` onto span(q), where q has orthonormal columns.
inline double span_residual(const ComplexMatrix& q, const ComplexVector& v)
{
    if (q.cols() == 0)
        return v.norm();
    return (v - q * (q.adjoint() * v)).norm();
}

/// Incrementally grown orthonormal basis (Gram-Schmidt with one
/// reorthogonalization pass). A vector joins iff its residual after projection
/// is at least tol * max(1, |v|).
class SpanAccumulator {
public:
    SpanAccumulator(Index ambient, double tol) : q_(ambient, 0), tol_(tol) {}

    bool try_add(const ComplexVector& v)
    {
        if (v.size() != q_.rows())
            throw ShapeError("SpanAccumulator: vector has wrong length");
        ComplexVector r = v;
        for (int pass = 0; pass < 2 && q_.cols() > 0; ++pass)
            r -= q_ * (q_.adjoint() * r);
        const double res = r.norm();
        if (res < tol_ * std::max(1.0, v.norm()))
            return false;
        q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
        q_.col(q_.cols() - 1) = r / res;
        return true;
    }

    double residual(const ComplexVector& v) const { return span_residual(q_, v); }
    Index dim() const { return q_.cols(); }
    const ComplexMatrix& orthonormal() const { return q_; }

private:
    ComplexMatrix q_;
    double tol_;
};

struct BasisSelection {
    std::vector<std::size_t> selected;
    /// coordinates(j, i): coefficient of mats[selected[j]] in the expansion of mats[i].
    ComplexMatrix coordinates;
    /// Largest residual of any input against the selected span.
    double max_residual = 0.0;
};

/// Greedy left-to-right basis selection over column-stacked matrices; earlier
/// inputs win ties.
inline BasisSelection basis_extract(std::span<const ComplexMatrix> mats, double tol = default_rank_tol)
{
    if (!(tol > 0))
        throw PreconditionError("basis_extract: tolerance must be positive");
    BasisSelection out;
    if (mats.empty()) {
        out.coordinates.resize(0, 0);
        return out;
    }
    const Index rows = mats.front().rows(), cols = mats.front().cols();
    for (const auto& m : mats)
        if (m.rows() != rows || m.cols() != cols)
            throw ShapeError("basis_extract: matrices differ in shape");

    SpanAccumulator acc(rows * cols, tol);
    for (std::size_t i = 0; i < mats.size(); ++i)
        if (acc.try_add(vec(mats[i])))
            out.selected.push_back(i);

    const Index d = static_cast<Index>(out.selected.size());
    const Index count = static_cast<Index>(mats.size());
    ComplexMatrix basis(rows * cols, d), all(rows * cols, count);
    for (Index j = 0; j < d; ++j)
        basis.col(j) = vec(mats[out.selected[static_cast<std::size_t>(j)]]);
    for (Index i = 0; i < count; ++i)
        all.col(i) = vec(mats[static_cast<std::size_t>(i)]);

    if (d == 0) {
        out.coordinates = ComplexMatrix::Zero(0, count);
        out.max_residual = all.colwise().norm().maxCoeff();
        return out;
    }
    out.coordinates = basis.colPivHouseholderQr().solve(all);
    out.max_residual = (basis * out.coordinates - all).colwise().norm().maxCoeff();
    return out;
}

struct EigenDecomposition {
    std::vector<Complex> values;
    ComplexMatrix vectors; // unit columns, vectors.col(i) pairs with values[i]
};

namespace detail {

inline Eigen::ComplexSchur<ComplexMatrix> schur(const ComplexMatrix& m, bool want_u)
{
    if (m.rows() != m.cols())
        throw ShapeError("eigenvalues: matrix must be square");
    const Index n = m.rows();
    Eigen::ComplexSchur<ComplexMatrix> s(n);
    s.setMaxIterations(std::max<Index>(1, 100 * n * n));
    s.compute(m, want_u);
    if (s.info() != Eigen::Success) {
        std::vector<Complex> partial;
        const auto& t = s.matrixT();
        for (Index i = 0; i < t.rows(); ++i)
            partial.push_back(t(i, i));
        throw NumericalFailure("eigenvalues: shifted QR iteration did not converge", partial);
    }
    return s;
}

} // namespace detail

/// All eigenvalues with algebraic multiplicity (Hessenberg reduction followed
/// by shifted QR to Schur form).
inline std::vector<Complex> eigenvalues(const ComplexMatrix& m)
{
    if (m.rows() == 0 && m.cols() == 0)
        return {};
    auto s = detail::schur(m, false);
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(m.rows()));
    for (Index i = 0; i < m.rows(); ++i)
        out.push_back(s.matrixT()(i, i));
    return out;
}

/// Eigenvalues plus eigenvectors recovered by back-substitution on the Schur
/// factor. Reliable for non-defective matrices.
inline EigenDecomposition eigen_decompose(const ComplexMatrix& m)
{
    const Index n = m.rows();
    if (n == 0)
        return {};
    auto s = detail::schur(m, true);
    const ComplexMatrix& t = s.matrixT();
    const double norm = std::max(t.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double eps = std::numeric_limits<double>::epsilon();

    ComplexMatrix x = ComplexMatrix::Zero(n, n);
    for (Index k = n - 1; k >= 0; --k) {
        x(k, k) = 1.0;
        for (Index i = k - 1; i >= 0; --i) {
            Complex acc = -t(i, k);
            for (Index j = i + 1; j < k; ++j)
                acc -= t(i, j) * x(j, k);
            Complex z = t(i, i) - t(k, k);
            if (z == Complex(0.0))
                z = eps * norm;
            x(i, k) = acc / z;
        }
    }

    EigenDecomposition out;
    out.vectors = s.matrixU() * x;
    for (Index k = 0; k < n; ++k) {
        out.vectors.col(k).normalize();
        out.values.push_back(t(k, k));
    }
    return out;
}

/// Coefficients c_0..c_n (c_n = 1) of det(xI - M) by the Faddeev-LeVerrier
/// recursion: only matrix products and traces.
inline std::vector<Complex> characteristic_polynomial(const ComplexMatrix& m)
{
    if (m.rows() != m.cols())
        throw ShapeError("characteristic_polynomial: matrix must be square");
    const Index n = m.rows();
    std::vector<Complex> c(static_cast<std::size_t>(n + 1));
    c[static_cast<std::size_t>(n)] = 1.0;
    ComplexMatrix mk = ComplexMatrix::Zero(n, n);
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    for (Index k = 1; k <= n; ++k) {
        mk = m * mk + c[static_cast<std::size_t>(n - k + 1)] * id;
        c[static_cast<std::size_t>(n - k)] = -(m * mk).trace() / static_cast<double>(k);
    }
    return c;
}

/// Resultant of two polynomials given by ascending coefficients, as the
/// determinant of their Sylvester matrix.
inline Complex resultant(std::span<const Complex> p, std::span<const Complex> q)
{
    if (p.empty() || q.empty())
        throw PreconditionError("resultant: empty polynomial");
    const Index dp = static_cast<Index>(p.size()) - 1;
    const Index dq = static_cast<Index>(q.size()) - 1;
    const Index size = dp + dq;
    if (size == 0)
        return 1.0;
    ComplexMatrix syl = ComplexMatrix::Zero(size, size);
    for (Index r = 0; r < dq; ++r)
        for (Index i = 0; i <= dp; ++i)
            syl(r, r + i) = p[static_cast<std::size_t>(dp - i)];
    for (Index r = 0; r < dp; ++r)
        for (Index i = 0; i <= dq; ++i)
            syl(dq + r, r + i) = q[static_cast<std::size_t>(dq - i)];
    return syl.partialPivLu().determinant();
}

/// Discriminant prod_{i<j} (l_i - l_j)^2 of the characteristic polynomial,
/// from its coefficients and the resultant with its derivative. No
/// eigenvalues are computed.
inline Complex char_discriminant(const ComplexMatrix& m)
{
    const auto p = characteristic_polynomial(m);
    const Index n = m.rows();
    if (n <= 1)
        return 1.0;
    std::vector<Complex> dp(static_cast<std::size_t>(n));
    for (Index i = 1; i <= n; ++i)
        dp[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) * p[static_cast<std::size_t>(i)];
    const double sign = ((n * (n - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    return sign * resultant(p, dp);
}

/// Largest singular value by power iteration on M^dagger M.
inline double spectral_norm(const ComplexMatrix& m)
{
    if (m.size() == 0)
        return 0.0;
    const double fro = m.norm();
    if (fro == 0.0)
        return 0.0;
    const ComplexMatrix a = m / fro;
    const ComplexMatrix g = a.adjoint() * a;

    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> normal;
    ComplexVector v(g.rows());
    for (Index i = 0; i < v.size(); ++i)
        v(i) = Complex(normal(rng), normal(rng));
    v.normalize();

    double rayleigh = 0.0;
    for (int it = 0; it < 100000; ++it) {
        ComplexVector w = g * v;
        const double next = std::real(v.dot(w));
        const double wn = w.norm();
        if (wn == 0.0)
            break;
        v = w / wn;
        if (it > 2 && std::abs(next - rayleigh) <= 1e-16 * next) {
            rayleigh = next;
            break;
        }
        rayleigh = next;
    }
    return fro * std::sqrt(std::max(rayleigh, 0.0));
}

/// Groups eigenvalues closer than `radius` (single linkage in input order).
struct EigenCluster {
    Complex value;
    Index multiplicity = 0;
};

inline std::vector<EigenCluster> cluster_eigenvalues(std::span<const Complex> values, double radius)
{
    std::vector<std::vector<Complex>> groups;
    for (const auto& v : values) {
        bool placed = false;
        for (auto& g : groups) {
            for (const auto& u : g)
                if (std::abs(u - v) < radius) {
                    placed = true;
                    break;
                }
            if (placed) {
                g.push_back(v);
                break;
            }
        }
        if (!placed)
            groups.push_back({v});
    }
    std::vector<EigenCluster> out;
    for (const auto& g : groups) {
        Complex sum = 0.0;
        for (const auto& u : g)
            sum += u;
        out.push_back({sum / static_cast<double>(g.size()), static_cast<Index>(g.size())});
    }
    return out;
}

/// Oblique spectral projector onto the span of the eigenvectors for the given
/// eigenvalue clusters, built from matched right and left eigenvectors.
/// Throws NumericalFailure when the eigenstructure on those clusters is
/// defective (geometric multiplicity below algebraic).
inline ComplexMatrix invariant_projector(const ComplexMatrix& m, std::span<const EigenCluster> clusters,
                                         double tol = 1e-8)
{
    if (m.rows() != m.cols())
        throw ShapeError("invariant_projector: matrix must be square");
    const Index n = m.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    ComplexMatrix right(n, 0), left(n, 0);
    for (const auto& c : clusters) {
        const auto r = kernel(m - c.value * id, tol);
        const auto l = kernel(m.adjoint() - std::conj(c.value) * id, tol);
        if (r.dim() != c.multiplicity || l.dim() != c.multiplicity)
            throw NumericalFailure("invariant_projector: eigenvalue (" + std::to_string(c.value.real()) + ", " +
                                   std::to_string(c.value.imag()) + ") has algebraic multiplicity " +
                                   std::to_string(c.multiplicity) + " but eigenspace dimension " +
                                   std::to_string(r.dim()) + " (defective peripheral eigenstructure)");
        const Index k = right.cols();
        right.conservativeResize(Eigen::NoChange, k + r.dim());
        left.conservativeResize(Eigen::NoChange, k + l.dim());
        right.rightCols(r.dim()) = r.vectors;
        left.rightCols(l.dim()) = l.vectors;
    }
    if (right.cols() == 0)
        return ComplexMatrix::Zero(n, n);
    const ComplexMatrix gram = left.adjoint() * right;
    Eigen::JacobiSVD<ComplexMatrix> svd(gram);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-10 * sv(0))
        throw NumericalFailure("invariant_projector: left and right eigenvectors are not biorthogonalizable");
    return right * gram.partialPivLu().solve(left.adjoint());
}

} // namespace linalg
} // namespace qchan
