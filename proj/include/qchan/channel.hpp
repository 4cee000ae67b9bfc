#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qchan/linalg.hpp"

namespace qchan {

/// Completely positive map in Kraus form, Phi(X) = sum_i A_i X A_i^dagger.
class KrausChannel {
public:
    explicit KrausChannel(std::vector<ComplexMatrix> kraus) : kraus_(std::move(kraus))
    {
        if (kraus_.empty())
            throw PreconditionError("KrausChannel: at least one Kraus operator is required");
        const Index n = kraus_.front().rows();
        if (n == 0)
            throw ShapeError("KrausChannel: Kraus operators must be non-empty");
        for (std::size_t i = 0; i < kraus_.size(); ++i)
            if (kraus_[i].rows() != n || kraus_[i].cols() != n)
                throw ShapeError("KrausChannel: Kraus operator " + std::to_string(i) + " is " +
                                 std::to_string(kraus_[i].rows()) + "x" + std::to_string(kraus_[i].cols()) +
                                 ", expected " + std::to_string(n) + "x" + std::to_string(n));
        if (static_cast<Index>(kraus_.size()) > n * n)
            throw PreconditionError("KrausChannel: " + std::to_string(kraus_.size()) +
                                    " Kraus operators exceed n^2 = " + std::to_string(n * n));
    }

    Index dim() const { return kraus_.front().rows(); }
    std::size_t size() const { return kraus_.size(); }
    const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
    const ComplexMatrix& operator[](std::size_t i) const { return kraus_[i]; }

private:
    std::vector<ComplexMatrix> kraus_;
};

struct ChannelFlags {
    bool trace_preserving = false;
    bool unital = false;
    double tp_residual = 0.0;     // |sum A^dag A - I|_F
    double unital_residual = 0.0; // |sum A A^dag - I|_F
};

inline ChannelFlags validate(const KrausChannel& ch, double tol = 1e-10)
{
    const Index n = ch.dim();
    ComplexMatrix tp = -ComplexMatrix::Identity(n, n);
    ComplexMatrix un = tp;
    for (const auto& a : ch.kraus()) {
        tp += a.adjoint() * a;
        un += a * a.adjoint();
    }
    ChannelFlags f;
    f.tp_residual = tp.norm();
    f.unital_residual = un.norm();
    f.trace_preserving = f.tp_residual < tol;
    f.unital = f.unital_residual < tol;
    return f;
}

inline ComplexMatrix apply(const KrausChannel& ch, const ComplexMatrix& x)
{
    const Index n = ch.dim();
    if (x.rows() != n || x.cols() != n)
        throw ShapeError("apply: operand must be " + std::to_string(n) + "x" + std::to_string(n));
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (const auto& a : ch.kraus())
        out += a * x * a.adjoint();
    return out;
}

inline KrausChannel dual(const KrausChannel& ch)
{
    std::vector<ComplexMatrix> adj;
    adj.reserve(ch.size());
    for (const auto& a : ch.kraus())
        adj.emplace_back(a.adjoint());
    return KrausChannel(std::move(adj));
}

/// n^2 x n^2 matrix acting on column-stacked operators: sum_i conj(A_i) (x) A_i.
inline ComplexMatrix superoperator_matrix(const KrausChannel& ch)
{
    const Index n = ch.dim();
    ComplexMatrix s = ComplexMatrix::Zero(n * n, n * n);
    for (const auto& a : ch.kraus())
        s += linalg::kron(a.conjugate(), a);
    return s;
}

struct SpectrumReport {
    std::vector<Complex> eigenvalues; // all n^2, sorted by decreasing modulus then argument
    std::vector<Complex> peripheral;  // |lambda| >= 1 - epsilon, with multiplicity
    std::vector<ComplexMatrix> peripheral_eigenmatrices;
    std::vector<Complex> eigenmatrix_values; // eigenvalue of each eigenmatrix
    double epsilon = 1e-6;
};

namespace detail {

inline void sort_spectrum(std::vector<Complex>& values)
{
    std::stable_sort(values.begin(), values.end(), [](const Complex& a, const Complex& b) {
        const double ma = std::round(std::abs(a) * 1e9), mb = std::round(std::abs(b) * 1e9);
        if (ma != mb)
            return ma > mb;
        return std::arg(a) < std::arg(b);
    });
}

/// Unit Frobenius norm, largest-modulus entry made real positive.
inline ComplexMatrix normalize_phase(ComplexMatrix x)
{
    x /= x.norm();
    const double top = x.cwiseAbs().maxCoeff();
    for (Index k = 0; k < x.size(); ++k) {
        const Complex z = x.data()[k];
        if (std::abs(z) >= top * (1.0 - 1e-9)) {
            x *= std::conj(z) / std::abs(z);
            break;
        }
    }
    return x;
}

inline constexpr double cluster_radius = 1e-6;
inline constexpr double eigenspace_tol = 1e-8;

} // namespace detail

inline SpectrumReport spectrum(const KrausChannel& ch, double epsilon = 1e-6)
{
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw PreconditionError("spectrum: epsilon must lie in (0, 0.5)");
    const Index n = ch.dim();
    const ComplexMatrix s = superoperator_matrix(ch);

    SpectrumReport rep;
    rep.epsilon = epsilon;
    rep.eigenvalues = linalg::eigenvalues(s);
    detail::sort_spectrum(rep.eigenvalues);
    for (const auto& l : rep.eigenvalues)
        if (std::abs(l) >= 1.0 - epsilon)
            rep.peripheral.push_back(l);

    const auto clusters = linalg::cluster_eigenvalues(rep.peripheral, detail::cluster_radius);
    const ComplexMatrix id = ComplexMatrix::Identity(n * n, n * n);
    for (const auto& c : clusters) {
        const auto ks = linalg::kernel(s - c.value * id, detail::eigenspace_tol, 1.0);
        for (Index k = 0; k < ks.dim(); ++k) {
            rep.peripheral_eigenmatrices.push_back(
                detail::normalize_phase(linalg::unvec(ks.vectors.col(k), n, n)));
            rep.eigenmatrix_values.push_back(c.value);
        }
    }
    return rep;
}

/// Frobenius-orthonormal basis of {X : Phi(X) = X}.
inline std::vector<ComplexMatrix> fixed_space(const KrausChannel& ch, double tol = linalg::default_rank_tol)
{
    const Index n = ch.dim();
    const ComplexMatrix s = superoperator_matrix(ch) - ComplexMatrix::Identity(n * n, n * n);
    const auto ks = linalg::kernel(s, tol, 1.0);
    std::vector<ComplexMatrix> out;
    for (Index k = 0; k < ks.dim(); ++k)
        out.push_back(linalg::unvec(ks.vectors.col(k), n, n));
    return out;
}

struct FixedPointResult {
    std::optional<ComplexMatrix> fixed_point; // present iff positive definite
    ComplexMatrix limit_state;                // Cesaro limit of Phi^k(I/n)
    double min_eigenvalue = 0.0;
    double residual = 0.0; // |Phi(rho) - rho|_F
};

/// Limit of the Cesaro means (1/N) sum_{k<N} Phi^k(I/n), evaluated in closed
/// form as the eigenvalue-1 spectral projection of I/n. Reported as a
/// full-rank fixed point when its smallest eigenvalue exceeds 1e-8.
inline FixedPointResult full_rank_fixed_point(const KrausChannel& ch)
{
    const auto flags = validate(ch, 1e-8);
    if (!flags.trace_preserving && !flags.unital)
        throw PreconditionError("full_rank_fixed_point: channel is neither trace preserving nor unital");

    const Index n = ch.dim();
    const ComplexMatrix s = superoperator_matrix(ch);
    const auto values = linalg::eigenvalues(s);
    Index mult = 0;
    for (const auto& l : values)
        if (std::abs(l - 1.0) < detail::cluster_radius)
            ++mult;
    if (mult == 0)
        throw NumericalFailure("full_rank_fixed_point: eigenvalue 1 not found in the spectrum", values);

    const linalg::EigenCluster one{1.0, mult};
    const ComplexMatrix p = linalg::invariant_projector(s, std::span(&one, 1), detail::eigenspace_tol);
    const ComplexMatrix rho0 = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
    ComplexMatrix rho = linalg::unvec(p * linalg::vec(rho0), n, n);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const Complex tr = rho.trace();
    if (std::abs(tr) > 1e-12)
        rho /= tr.real();

    FixedPointResult out;
    out.residual = (qchan::apply(ch, rho) - rho).norm();
    if (!(out.residual < 1e-9))
        throw NumericalFailure("full_rank_fixed_point: limit state is not fixed (residual " +
                               format_value(out.residual) + ")");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues()(0);
    out.limit_state = rho;
    if (out.min_eigenvalue > 1e-8)
        out.fixed_point.emplace(rho);
    return out;
}

} // namespace qchan
