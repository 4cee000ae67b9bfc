#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qchan/linalg.hpp"

namespace qchan {

/// Linearly independent words in the generators spanning the algebra they
/// generate. Labels are 1-based generator indices ("12" = A_1 A_2; dot
/// separated when there are more than nine generators); "I" is the empty word.
struct WordBasis {
    std::vector<ComplexMatrix> generators;
    bool include_identity = true;
    std::vector<ComplexMatrix> basis;
    std::vector<std::string> labels;
    /// Span dimension after each word length 0, 1, 2, ...
    std::vector<Index> level_dims;

    Index dimension() const { return static_cast<Index>(basis.size()); }
    Index matrix_dim() const { return generators.empty() ? 0 : generators.front().rows(); }
};

inline Index word_length_cap(Index n) { return (n * n + 3 + 1) / 2; }

namespace detail {

inline std::string extend_label(const std::string& word, std::size_t gen, std::size_t count)
{
    const std::string letter = std::to_string(gen + 1);
    if (count <= 9)
        return word + letter;
    return word.empty() ? letter : word + "." + letter;
}

inline void check_generators(std::span<const ComplexMatrix> gens, const char* op)
{
    if (gens.empty())
        throw PreconditionError(std::string(op) + ": generator list is empty");
    const Index n = gens.front().rows();
    for (const auto& g : gens)
        if (g.rows() != n || g.cols() != n)
            throw ShapeError(std::string(op) + ": generators must be square of equal size");
}

} // namespace detail

/// Breadth-first word enumeration up to length ceil((n^2+3)/2). Only words
/// that entered the basis are extended (right multiplication by each
/// generator), and enumeration stops at the first length that adds nothing.
inline WordBasis generate_basis(std::span<const ComplexMatrix> gens, bool include_identity = true,
                                double tol = linalg::default_rank_tol)
{
    detail::check_generators(gens, "generate_basis");
    const Index n = gens.front().rows();
    const std::size_t k = gens.size();

    WordBasis wb;
    wb.generators.assign(gens.begin(), gens.end());
    wb.include_identity = include_identity;

    linalg::SpanAccumulator acc(n * n, tol);
    struct Word {
        std::string label;
        ComplexMatrix value;
    };
    std::vector<Word> frontier{{"", ComplexMatrix::Identity(n, n)}};
    if (include_identity && acc.try_add(linalg::vec(frontier.front().value))) {
        wb.basis.push_back(frontier.front().value);
        wb.labels.emplace_back("I");
    }
    wb.level_dims.push_back(acc.dim());

    const Index cap = word_length_cap(n);
    for (Index len = 1; len <= cap && !frontier.empty(); ++len) {
        std::vector<Word> next;
        for (const auto& w : frontier) {
            for (std::size_t j = 0; j < k; ++j) {
                ComplexMatrix m = w.value * gens[j];
                if (!acc.try_add(linalg::vec(m)))
                    continue;
                Word nw{detail::extend_label(w.label, j, k), std::move(m)};
                wb.basis.push_back(nw.value);
                wb.labels.push_back(nw.label);
                next.push_back(std::move(nw));
            }
        }
        wb.level_dims.push_back(acc.dim());
        frontier = std::move(next);
    }
    return wb;
}

struct StarClosure {
    bool closed = false;
    double max_residual = 0.0; // worst relative residual of a basis adjoint
    /// Coordinates of each generator's adjoint in wb.basis.
    std::vector<ComplexVector> adjoint_coordinates;
    std::vector<double> adjoint_residuals;
};

/// Is span(wb.basis) closed under the adjoint? Residuals are relative to the
/// Frobenius norm of the element being tested.
inline StarClosure is_star_closed(const WordBasis& wb, double tol = 1e-8)
{
    const Index n = wb.matrix_dim();
    const Index d = wb.dimension();
    StarClosure out;
    ComplexMatrix b(n * n, d);
    for (Index j = 0; j < d; ++j)
        b.col(j) = linalg::vec(wb.basis[static_cast<std::size_t>(j)]);

    linalg::SpanAccumulator acc(n * n, linalg::default_rank_tol);
    for (Index j = 0; j < d; ++j)
        acc.try_add(b.col(j));
    const ComplexMatrix& q = acc.orthonormal();

    for (const auto& e : wb.basis) {
        const double scale = std::max(e.norm(), std::numeric_limits<double>::min());
        out.max_residual = std::max(out.max_residual, linalg::span_residual(q, linalg::vec(e.adjoint())) / scale);
    }
    out.closed = out.max_residual < tol;

    const auto qr = b.colPivHouseholderQr();
    for (const auto& g : wb.generators) {
        const ComplexVector target = linalg::vec(g.adjoint());
        ComplexVector c = d > 0 ? ComplexVector(qr.solve(target)) : ComplexVector(0);
        out.adjoint_coordinates.push_back(c);
        const double scale = std::max(g.norm(), std::numeric_limits<double>::min());
        out.adjoint_residuals.push_back((d > 0 ? (b * c - target).norm() : target.norm()) / scale);
    }
    return out;
}

/// Burnside: the generators act irreducibly iff the unital algebra they
/// generate is all of M_n.
inline bool is_irreducible(std::span<const ComplexMatrix> gens, double tol = linalg::default_rank_tol)
{
    const auto wb = generate_basis(gens, true, tol);
    const Index n = wb.matrix_dim();
    return wb.dimension() == n * n;
}

/// Frobenius-orthonormal basis of {X : [X, E] = 0 for every E in `mats`}.
inline std::vector<ComplexMatrix> commutant(std::span<const ComplexMatrix> mats, Index n,
                                            double tol = linalg::default_rank_tol)
{
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    ComplexMatrix stacked(static_cast<Index>(mats.size()) * n * n, n * n);
    Index row = 0;
    for (const auto& e : mats) {
        if (e.rows() != n || e.cols() != n)
            throw ShapeError("commutant: matrices must be " + std::to_string(n) + "x" + std::to_string(n));
        const double scale = std::max(e.norm(), std::numeric_limits<double>::min());
        // vec(XE - EX) = (E^T (x) I - I (x) E) vec(X)
        stacked.middleRows(row, n * n) = (linalg::kron(e.transpose(), id) - linalg::kron(id, e)) / scale;
        row += n * n;
    }
    const auto ks = linalg::kernel(stacked, tol, 1.0);
    std::vector<ComplexMatrix> out;
    for (Index k = 0; k < ks.dim(); ++k)
        out.push_back(linalg::unvec(ks.vectors.col(k), n, n));
    return out;
}

inline std::vector<ComplexMatrix> commutant(const WordBasis& wb, double tol = linalg::default_rank_tol)
{
    return commutant(wb.basis, wb.matrix_dim(), tol);
}

/// Orthonormal change of basis block-diagonalizing a *-algebra.
struct BlockStructure {
    ComplexMatrix unitary; // columns: basis vectors, grouped by block
    std::vector<Index> block_dims;
    std::vector<bool> block_irreducible;
    double leakage = 0.0; // max off-block Frobenius mass of U^dag A U over generators

    std::vector<Index> offsets() const
    {
        std::vector<Index> off(block_dims.size(), 0);
        for (std::size_t i = 1; i < block_dims.size(); ++i)
            off[i] = off[i - 1] + block_dims[i - 1];
        return off;
    }

    /// Block `i` of U^dag A U.
    ComplexMatrix restrict(const ComplexMatrix& a, std::size_t i) const
    {
        const Index o = offsets()[i], d = block_dims[i];
        return (unitary.middleCols(o, d).adjoint() * a * unitary.middleCols(o, d)).eval();
    }

    double off_block_mass(const ComplexMatrix& a) const
    {
        ComplexMatrix t = unitary.adjoint() * a * unitary;
        const auto off = offsets();
        for (std::size_t i = 0; i < block_dims.size(); ++i)
            t.block(off[i], off[i], block_dims[i], block_dims[i]).setZero();
        return t.norm();
    }
};

inline constexpr double star_closure_tol = 1e-8;
inline constexpr double block_leakage_tol = 1e-7;

namespace detail {

struct Leaf {
    ComplexMatrix basis;
    bool irreducible;
};

inline ComplexMatrix generic_hermitian(std::span<const ComplexMatrix> comm, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const Index n = comm.front().rows();
    ComplexMatrix h = ComplexMatrix::Zero(n, n);
    for (const auto& c : comm) {
        const ComplexMatrix herm = 0.5 * (c + c.adjoint());
        const ComplexMatrix anti = (c - c.adjoint()) / Complex(0.0, 2.0);
        h += coef(rng) * herm + coef(rng) * anti;
    }
    return h;
}

/// Eigenvector groups of a Hermitian matrix, split where consecutive sorted
/// eigenvalues differ by more than `gap` (relative to the spectral spread).
inline std::vector<ComplexMatrix> eigen_clusters(const ComplexMatrix& h, double gap)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    const auto& ev = es.eigenvalues();
    const double scale = std::max({std::abs(ev(0)), std::abs(ev(ev.size() - 1)), 1e-300});
    std::vector<ComplexMatrix> out;
    Index start = 0;
    for (Index i = 1; i <= ev.size(); ++i) {
        if (i == ev.size() || (ev(i) - ev(i - 1)) > gap * scale) {
            out.emplace_back(es.eigenvectors().middleCols(start, i - start));
            start = i;
        }
    }
    return out;
}

inline void split_block(std::span<const ComplexMatrix> gens, const ComplexMatrix& q, double tol,
                        std::mt19937_64& rng, std::vector<Leaf>& leaves)
{
    const Index d = q.cols();
    std::vector<ComplexMatrix> restricted;
    for (const auto& g : gens)
        restricted.emplace_back(q.adjoint() * g * q);

    const auto wb = generate_basis(restricted, true, tol);
    if (wb.dimension() == d * d) {
        leaves.push_back({q, true});
        return;
    }
    const auto comm = commutant(wb, tol);
    if (comm.size() <= 1) {
        leaves.push_back({q, false});
        return;
    }
    auto groups = eigen_clusters(generic_hermitian(comm, rng), 1e-6);
    if (groups.size() == 1)
        groups = eigen_clusters(generic_hermitian(comm, rng), 1e-6);
    if (groups.size() == 1)
        throw NumericalFailure("block_decompose: commutant has dimension " + std::to_string(comm.size()) +
                               " but no generic element with distinct eigenvalue clusters was found");
    for (const auto& g : groups)
        split_block(gens, (q * g).eval(), tol, rng, leaves);
}

} // namespace detail

/// Splits C^n into mutually orthogonal subspaces invariant under all
/// generators, each carrying an irreducible restricted action. Requires the
/// generated algebra to be *-closed. Blocks are ordered by decreasing dimension.
inline BlockStructure block_decompose(std::span<const ComplexMatrix> gens, double tol = linalg::default_rank_tol,
                                      std::uint64_t seed = 0)
{
    detail::check_generators(gens, "block_decompose");
    const Index n = gens.front().rows();
    const auto wb = generate_basis(gens, true, tol);
    const auto closure = is_star_closed(wb, star_closure_tol);
    if (!closure.closed)
        throw StructureError("block_decompose: generated algebra is not *-closed (adjoint residual " +
                             format_value(closure.max_residual) + ")");

    std::mt19937_64 rng(seed);
    std::vector<detail::Leaf> leaves;
    detail::split_block(gens, ComplexMatrix::Identity(n, n), tol, rng, leaves);
    std::stable_sort(leaves.begin(), leaves.end(),
                     [](const detail::Leaf& a, const detail::Leaf& b) { return a.basis.cols() > b.basis.cols(); });

    BlockStructure bs;
    bs.unitary.resize(n, n);
    Index col = 0;
    for (const auto& leaf : leaves) {
        bs.unitary.middleCols(col, leaf.basis.cols()) = leaf.basis;
        col += leaf.basis.cols();
        bs.block_dims.push_back(leaf.basis.cols());
        bs.block_irreducible.push_back(leaf.irreducible);
    }
    for (const auto& g : gens)
        bs.leakage = std::max(bs.leakage, bs.off_block_mass(g));
    if (bs.leakage > block_leakage_tol)
        throw NumericalFailure("block_decompose: off-block leakage " + std::to_string(bs.leakage) +
                               " exceeds " + std::to_string(block_leakage_tol));
    return bs;
}

} // namespace qchan
