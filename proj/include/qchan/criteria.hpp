#pragma once

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qchan/algebra.hpp"
#include "qchan/channel.hpp"
#include "qchan/linalg.hpp"

namespace qchan {

namespace detail {

inline std::vector<ComplexMatrix> powers(const ComplexMatrix& a, Index count)
{
    std::vector<ComplexMatrix> out;
    ComplexMatrix p = a;
    for (Index k = 0; k < count; ++k) {
        out.push_back(p);
        p = (p * a).eval();
    }
    return out;
}

/// Kernel of a stack of commutators [P, Q], each block scaled by |P||Q| so
/// that the rank cutoff is insensitive to the size of the powers involved.
inline SubspaceBasis commutator_stack_kernel(std::span<const ComplexMatrix> lhs, std::span<const ComplexMatrix> rhs,
                                             Index n, double tol)
{
    const Index blocks = static_cast<Index>(lhs.size() * rhs.size());
    if (blocks == 0)
        return SubspaceBasis::full(n);
    ComplexMatrix stacked(blocks * n, n);
    Index row = 0;
    for (const auto& p : lhs)
        for (const auto& q : rhs) {
            const double scale = std::max(p.norm() * q.norm(), std::numeric_limits<double>::min());
            stacked.middleRows(row, n) = (p * q - q * p) / scale;
            row += n;
        }
    return linalg::kernel(stacked, tol, 1.0);
}

inline void check_square_pair(const ComplexMatrix& a, const ComplexMatrix& b, const char* op)
{
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw ShapeError(std::string(op) + ": matrices must be square of equal size");
}

} // namespace detail

/// Shemesh subspace: intersection of ker[A^k, B^l] over k, l = 1..n-1.
/// Nonzero iff A and B share an eigenvector; it is invariant under both and
/// they commute on it.
inline SubspaceBasis shemesh(const ComplexMatrix& a, const ComplexMatrix& b, double tol = linalg::default_rank_tol)
{
    detail::check_square_pair(a, b, "shemesh");
    const Index n = a.rows();
    const auto pa = detail::powers(a, n - 1);
    const auto pb = detail::powers(b, n - 1);
    return detail::commutator_stack_kernel(pa, pb, n, tol);
}

inline constexpr double discriminant_cutoff = 1e-10;

/// Discriminant of H / |H|_2; zero means a repeated eigenvalue.
inline Complex scaled_discriminant(const ComplexMatrix& h)
{
    if (h.rows() <= 1)
        return 1.0;
    const double s = linalg::spectral_norm(h);
    if (s == 0.0)
        return 0.0;
    return linalg::char_discriminant(h / s);
}

/// Intersection of ker[H^k, A_i] over k = 1..n-1 and all i. Requires H to have
/// pairwise distinct eigenvalues; then it is nonzero iff H and all A_i share
/// an eigenvector.
inline SubspaceBasis generalized_shemesh(const ComplexMatrix& h, std::span<const ComplexMatrix> others,
                                         double tol = linalg::default_rank_tol)
{
    for (const auto& a : others)
        detail::check_square_pair(h, a, "generalized_shemesh");
    if (h.rows() != h.cols())
        throw ShapeError("generalized_shemesh: H must be square");
    const Complex disc = scaled_discriminant(h);
    if (!(std::abs(disc) > discriminant_cutoff))
        throw PreconditionError("generalized_shemesh: H must have pairwise distinct eigenvalues "
                                "(discriminant of H/|H| is " +
                                std::to_string(std::abs(disc)) + ")");
    const Index n = h.rows();
    const auto ph = detail::powers(h, n - 1);
    return detail::commutator_stack_kernel(ph, others, n, tol);
}

inline constexpr std::size_t standard_polynomial_max_order = 8;

/// S_m(X_1..X_m) = sum over permutations of sign * X_s(1) ... X_s(m), by
/// Heap's algorithm (one transposition per step, so the sign alternates).
inline ComplexMatrix standard_polynomial(std::span<const ComplexMatrix> mats)
{
    const std::size_t m = mats.size();
    if (m == 0)
        throw PreconditionError("standard_polynomial: needs at least one argument");
    if (m > standard_polynomial_max_order)
        throw LimitError("standard_polynomial: order " + std::to_string(m) + " exceeds the cap of " +
                         std::to_string(standard_polynomial_max_order));
    const Index n = mats.front().rows();
    for (const auto& x : mats)
        if (x.rows() != n || x.cols() != n)
            throw ShapeError("standard_polynomial: arguments must be square of equal size");

    std::vector<std::size_t> perm(m), c(m, 0);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double sign = 1.0;
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    auto accumulate = [&] {
        ComplexMatrix p = mats[perm[0]];
        for (std::size_t k = 1; k < m; ++k)
            p = (p * mats[perm[k]]).eval();
        sum += sign * p;
    };

    accumulate();
    std::size_t i = 1;
    while (i < m) {
        if (c[i] < i) {
            std::swap(perm[i % 2 == 0 ? 0 : c[i]], perm[i]);
            sign = -sign;
            accumulate();
            ++c[i];
            i = 1;
        } else {
            c[i] = 0;
            ++i;
        }
    }
    return sum;
}

struct MixedUnitaryCheck {
    ComplexMatrix v;
    bool hermitian_part_nonzero = false;
    double hermitian_part_norm = 0.0; // |V + V^dag|_F
};

inline bool is_unitary(const ComplexMatrix& u, double tol = 1e-8)
{
    if (u.rows() != u.cols())
        return false;
    return (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).norm() < tol;
}

/// V = U_i U_j U_i^+ U_j^+ - U_i^+ U_j U_i U_j^+ + U_i^+ U_j^+ U_i U_j - U_i U_j^+ U_i^+ U_j.
/// V + V^dag equals S_4(U_i, U_j, U_i^+, U_j^+).
inline MixedUnitaryCheck mixed_unitary_V(const ComplexMatrix& ui, const ComplexMatrix& uj)
{
    detail::check_square_pair(ui, uj, "mixed_unitary_V");
    if (!is_unitary(ui) || !is_unitary(uj))
        throw PreconditionError("mixed_unitary_V: both arguments must be unitary within 1e-8");
    const ComplexMatrix ai = ui.adjoint(), aj = uj.adjoint();
    MixedUnitaryCheck out;
    out.v = ui * uj * ai * aj - ai * uj * ui * aj + ai * aj * ui * uj - ui * aj * ai * uj;
    out.hermitian_part_norm = (out.v + out.v.adjoint()).norm();
    out.hermitian_part_nonzero = out.hermitian_part_norm > 1e-8;
    return out;
}

struct PrimitivityResult {
    bool certified = false;
    std::optional<int> witness_m;
    std::vector<Index> span_dims; // dim S_m for m = 1, 2, ...
    int m_max = 0;
};

inline int default_primitivity_cap(Index n) { return static_cast<int>(2 * n * n); }

/// dim S_m for S_1 = span{A_i}, S_{m+1} = span{A_i S_m}. Certified at the
/// first m with S_m = M_n. Stops early once S_{m+1} repeats an earlier S_j,
/// after which the sequence is periodic.
inline PrimitivityResult primitivity(const KrausChannel& ch, std::optional<int> m_max = std::nullopt,
                                     double tol = linalg::default_rank_tol)
{
    const Index n = ch.dim();
    PrimitivityResult out;
    out.m_max = m_max.value_or(default_primitivity_cap(n));
    if (out.m_max < 1)
        throw PreconditionError("primitivity: m_max must be at least 1");

    std::vector<ComplexMatrix> history;
    ComplexMatrix current;
    for (int m = 1; m <= out.m_max; ++m) {
        linalg::SpanAccumulator acc(n * n, tol);
        if (m == 1) {
            for (const auto& a : ch.kraus())
                acc.try_add(linalg::vec(a));
        } else {
            for (Index c = 0; c < current.cols(); ++c) {
                const ComplexMatrix q = linalg::unvec(current.col(c), n, n);
                for (const auto& a : ch.kraus())
                    acc.try_add(linalg::vec(a * q));
            }
        }
        current = acc.orthonormal();
        out.span_dims.push_back(current.cols());
        if (!out.certified && current.cols() == n * n) {
            out.certified = true;
            out.witness_m = m;
        }
        bool repeat = false;
        for (const auto& h : history)
            if (h.cols() == current.cols() && (current - h * (h.adjoint() * current)).norm() < 1e-8) {
                repeat = true;
                break;
            }
        if (repeat)
            break;
        history.push_back(current);
    }
    return out;
}

inline constexpr double invertibility_cutoff = 1e-8;

/// Randomized test for an invertible element in span{A_i}: det of a generic
/// combination vanishes only on a proper subvariety unless it vanishes
/// identically.
inline bool invertible_in_span(std::span<const ComplexMatrix> gens, int trials = 16, std::uint64_t seed = 0)
{
    if (trials < 1)
        throw PreconditionError("invertible_in_span: trials must be at least 1");
    detail::check_generators(gens, "invertible_in_span");
    const Index n = gens.front().rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int t = 0; t < trials; ++t) {
        ComplexMatrix m = ComplexMatrix::Zero(n, n);
        for (const auto& g : gens)
            m += Complex(normal(rng), normal(rng)) * g;
        Eigen::JacobiSVD<ComplexMatrix> svd(m);
        const auto& sv = svd.singularValues();
        if (sv(0) > 0 && sv(sv.size() - 1) > invertibility_cutoff * sv(0))
            return true;
    }
    return false;
}

enum class PredictionStructure { irreducible, star_blocks, inconclusive };

inline const char* to_string(PredictionStructure s)
{
    switch (s) {
    case PredictionStructure::irreducible:
        return "irreducible";
    case PredictionStructure::star_blocks:
        return "star_blocks";
    case PredictionStructure::inconclusive:
        return "inconclusive";
    }
    return "?";
}

struct Certificate {
    std::string name;
    std::optional<std::size_t> block; // block index the evidence refers to
    std::string detail;
};

/// Constraints on the peripheral spectrum: per block, the admissible cyclic
/// orders m (the block contributes the m-th roots of unity for one of them).
/// An empty order set means the block is unconstrained beyond |lambda| = 1.
struct PeripheralPrediction {
    PredictionStructure structure = PredictionStructure::inconclusive;
    std::vector<Index> block_dims;
    std::vector<std::vector<long long>> order_bounds;
    std::optional<long long> period_bound; // empty: unbounded
    std::optional<Index> global_divisor_bound;
    bool primitive = false;
    std::vector<Certificate> certificates;

    bool has_certificate(std::string_view name) const
    {
        return std::any_of(certificates.begin(), certificates.end(),
                           [&](const Certificate& c) { return c.name == name; });
    }
};

inline double distance_to_roots_of_unity(Complex lambda, long long order)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const double k = std::round(std::arg(lambda) * static_cast<double>(order) / two_pi);
    return std::abs(lambda - std::polar(1.0, two_pi * k / static_cast<double>(order)));
}

/// Whether `lambda` lies within `tol` of a value the prediction allows.
inline bool admits(const PeripheralPrediction& p, Complex lambda, double tol)
{
    if (p.primitive)
        return std::abs(lambda - 1.0) < tol;
    if (!p.period_bound)
        return std::abs(std::abs(lambda) - 1.0) < tol;
    for (const auto& orders : p.order_bounds)
        for (long long m : orders)
            if (distance_to_roots_of_unity(lambda, m) < tol)
                return true;
    return false;
}

struct PredictOptions {
    std::uint64_t seed = 0;
    double rank_tol = linalg::default_rank_tol;
    double channel_tol = 1e-10;
    int invertibility_trials = 16;
    std::optional<int> primitivity_m_max;
};

namespace detail {

inline std::vector<long long> divisors(long long d)
{
    std::vector<long long> out;
    for (long long k = 1; k <= d; ++k)
        if (d % k == 0)
            out.push_back(k);
    return out;
}

inline std::vector<long long> one_to(long long d)
{
    std::vector<long long> out(static_cast<std::size_t>(d));
    std::iota(out.begin(), out.end(), 1LL);
    return out;
}

inline std::optional<std::vector<ComplexMatrix>> as_unitaries(const KrausChannel& ch)
{
    const Index n = ch.dim();
    std::vector<ComplexMatrix> out;
    for (const auto& a : ch.kraus()) {
        const ComplexMatrix g = a.adjoint() * a;
        const double p = g.trace().real() / static_cast<double>(n);
        if (!(p > 0) || (g - p * ComplexMatrix::Identity(n, n)).norm() > 1e-10 * std::max(1.0, p))
            return std::nullopt;
        out.push_back(a / std::sqrt(p));
    }
    return out;
}

inline void add_common_eigenvector_evidence(const KrausChannel& ch, double tol, PeripheralPrediction& pred)
{
    const auto& k = ch.kraus();
    if (k.size() == 2) {
        const auto m = shemesh(k[0], k[1], tol);
        if (m.empty())
            pred.certificates.push_back({"shemesh_trivial", std::nullopt, "A1, A2 share no eigenvector"});
        else
            pred.certificates.push_back({"shemesh_common_eigenvector", std::nullopt,
                                         "dim M(A1, A2) = " + std::to_string(m.dim())});
        return;
    }
    if (k.size() < 2)
        return;
    for (std::size_t h = 0; h < k.size(); ++h) {
        if (!(std::abs(scaled_discriminant(k[h])) > discriminant_cutoff))
            continue;
        std::vector<ComplexMatrix> others;
        for (std::size_t j = 0; j < k.size(); ++j)
            if (j != h)
                others.push_back(k[j]);
        const auto nn = generalized_shemesh(k[h], others, tol);
        const std::string who = "H = A" + std::to_string(h + 1);
        if (nn.empty())
            pred.certificates.push_back({"generalized_shemesh_trivial", std::nullopt, who + ", no common eigenvector"});
        else
            pred.certificates.push_back({"generalized_shemesh_common_eigenvector", std::nullopt,
                                         who + ", dim N = " + std::to_string(nn.dim())});
        return;
    }
}

inline void add_amitsur_levitzki_evidence(const KrausChannel& ch, PeripheralPrediction& pred)
{
    if (ch.dim() < 3 || ch.size() < 2)
        return;
    const auto us = as_unitaries(ch);
    if (!us)
        return;
    for (std::size_t i = 0; i < us->size(); ++i)
        for (std::size_t j = i + 1; j < us->size(); ++j) {
            const auto v = mixed_unitary_V((*us)[i], (*us)[j]);
            if (v.hermitian_part_nonzero) {
                pred.certificates.push_back({"AL_S4_nonzero", std::nullopt,
                                             "S4(U" + std::to_string(i + 1) + ", U" + std::to_string(j + 1) +
                                                 ", ...) = V + V^dag != 0; some block has dimension >= 3"});
                return;
            }
        }
}

} // namespace detail

/// Certified constraints on the peripheral spectrum of a trace-preserving or
/// unital channel, from the structure of its Kraus algebra.
inline PeripheralPrediction predict_peripheral(const KrausChannel& ch, const PredictOptions& opt = {})
{
    const auto flags = validate(ch, opt.channel_tol);
    if (!flags.trace_preserving && !flags.unital)
        throw PreconditionError("predict_peripheral: channel is neither trace preserving nor unital "
                                "(residuals " +
                                format_value(flags.tp_residual) + ", " + format_value(flags.unital_residual) +
                                ")");
    const Index n = ch.dim();
    const auto& kraus = ch.kraus();
    PeripheralPrediction pred;

    const auto wb = generate_basis(kraus, true, opt.rank_tol);
    const auto closure = is_star_closed(wb, star_closure_tol);
    pred.certificates.push_back({closure.closed ? "star_closed" : "not_star_closed", std::nullopt,
                                 "algebra dimension " + std::to_string(wb.dimension()) + ", adjoint residual " +
                                     format_value(closure.max_residual)});

    if (wb.dimension() == n * n) {
        pred.structure = PredictionStructure::irreducible;
        pred.block_dims = {n};
        pred.certificates.push_back({"irreducible_burnside", 0, "algebra is all of M_n"});
        if (invertible_in_span(kraus, opt.invertibility_trials, opt.seed)) {
            pred.order_bounds.push_back(detail::divisors(n));
            pred.certificates.push_back({"invertible_span", 0, "orders divide " + std::to_string(n)});
        } else {
            pred.order_bounds.push_back(detail::one_to(n * n));
        }
    } else if (closure.closed) {
        const auto bs = block_decompose(kraus, opt.rank_tol, opt.seed);
        pred.block_dims = bs.block_dims;
        std::vector<Index> sorted = bs.block_dims;
        std::sort(sorted.begin(), sorted.end());
        const bool distinct = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
        pred.structure = PredictionStructure::star_blocks;
        if (distinct) {
            for (std::size_t b = 0; b < bs.block_dims.size(); ++b) {
                const Index d = bs.block_dims[b];
                std::vector<ComplexMatrix> restricted;
                for (const auto& a : kraus)
                    restricted.push_back(bs.restrict(a, b));
                if (invertible_in_span(restricted, opt.invertibility_trials, opt.seed + b + 1)) {
                    pred.order_bounds.push_back(detail::divisors(d));
                    pred.certificates.push_back({"invertible_span", b, "orders divide " + std::to_string(d)});
                } else {
                    pred.order_bounds.push_back(detail::one_to(d * d));
                }
            }
            pred.certificates.push_back({"distinct_block_dimensions", std::nullopt, "block orders bounded by d_i^2"});
            if (invertible_in_span(kraus, opt.invertibility_trials, opt.seed)) {
                pred.global_divisor_bound = n;
                pred.certificates.push_back({"invertible_span_global", std::nullopt,
                                             "span{A_i} has an invertible element; global reading bounds orders "
                                             "by divisors of " +
                                                 std::to_string(n) + " (not applied, per-block bound used)"});
            }
        } else {
            pred.order_bounds.assign(bs.block_dims.size(), {});
            pred.certificates.push_back({"coinciding_dimensions", std::nullopt,
                                         "equal block dimensions; only |lambda| = 1 is certified"});
        }
    } else {
        pred.structure = PredictionStructure::inconclusive;
    }

    // LCM over every admissible order, so any realizable period divides it.
    const bool bounded = !pred.order_bounds.empty() &&
                         std::all_of(pred.order_bounds.begin(), pred.order_bounds.end(),
                                     [](const auto& o) { return !o.empty(); });
    if (bounded) {
        long long l = 1;
        for (const auto& orders : pred.order_bounds)
            for (long long m : orders)
                l = std::lcm(l, m);
        pred.period_bound = l;
    }

    detail::add_common_eigenvector_evidence(ch, opt.rank_tol, pred);
    detail::add_amitsur_levitzki_evidence(ch, pred);

    const auto prim = primitivity(ch, opt.primitivity_m_max, opt.rank_tol);
    if (prim.certified) {
        pred.primitive = true;
        pred.certificates.push_back({"primitive_at_m", std::nullopt, "S_m = M_n at m = " + std::to_string(*prim.witness_m)});
        for (auto& orders : pred.order_bounds)
            orders = {1};
        pred.period_bound = 1;
    }

    if (flags.trace_preserving && flags.unital) {
        const auto df = fixed_space(ch, opt.rank_tol).size();
        const auto dd = fixed_space(dual(ch), opt.rank_tol).size();
        pred.certificates.push_back({"fixed_space_dims", std::nullopt,
                                     "dim chi_F(Phi) = " + std::to_string(df) +
                                         ", dim chi_F(dual) = " + std::to_string(dd)});
        if (df == 1 && dd == 1)
            pred.certificates.push_back({"irreducible_fixed_space", std::nullopt, "both fixed spaces are span{I}"});
    }
    return pred;
}

} // namespace qchan
