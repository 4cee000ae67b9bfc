#include <gtest/gtest.h>

#include <numbers>

#include "qchan/linalg.hpp"
#include "support/oracles.hpp"

using namespace qchan;
using oracle::I1;
using oracle::Mat;

namespace {

Mat diag(std::initializer_list<Complex> d)
{
    Mat m = Mat::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
    Index k = 0;
    for (const auto& x : d) {
        m(k, k) = x;
        ++k;
    }
    return m;
}

ComplexVector unit(Index n, Index k)
{
    ComplexVector v = ComplexVector::Zero(n);
    v(k) = 1.0;
    return v;
}

} // namespace

TEST(Matmul, IdentityAndInvolution)
{
    oracle::Rng rng(1);
    const Mat m = oracle::ginibre(3, rng);
    EXPECT_LT((linalg::matmul(Mat::Identity(3, 3), m) - m).norm(), 1e-15);
    const Mat x = oracle::pauli('X');
    EXPECT_LT((linalg::matmul(x, x) - Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(Matmul, RejectsMismatchedShapes)
{
    EXPECT_THROW(linalg::matmul(Mat::Zero(2, 3), Mat::Zero(2, 3)), ShapeError);
}

TEST(Matmul, Example1CommutatorEntries)
{
    // [A1, A2] = i sqrt2 sin(phi) cos(phi) * [[0,1,0],[1,0,1],[0,1,0]]
    const auto a = oracle::example1(std::numbers::pi / 4);
    const Mat c = linalg::matmul(a[0], a[1]) - linalg::matmul(a[1], a[0]);
    Mat expected = Mat::Zero(3, 3);
    expected(0, 1) = expected(1, 0) = expected(1, 2) = expected(2, 1) = I1 / std::sqrt(2.0);
    EXPECT_LT((c - expected).norm(), 1e-12);
}

TEST(Commutator, MatchesDefinition)
{
    oracle::Rng rng(2);
    const Mat a = oracle::ginibre(4, rng), b = oracle::ginibre(4, rng);
    EXPECT_LT((linalg::commutator(a, b) - (a * b - b * a)).norm(), 1e-14);
    EXPECT_THROW(linalg::commutator(Mat::Zero(2, 2), Mat::Zero(3, 3)), ShapeError);
}

TEST(Vec, ColumnStackingRoundTrip)
{
    Mat m(2, 2);
    m << 1, 2, 3, 4;
    const ComplexVector v = linalg::vec(m);
    EXPECT_EQ(v(0), Complex(1));
    EXPECT_EQ(v(1), Complex(3));
    EXPECT_EQ(v(2), Complex(2));
    EXPECT_EQ(linalg::unvec(v, 2, 2), m);
    EXPECT_THROW(linalg::unvec(v, 3, 2), ShapeError);
}

TEST(Kron, VecIdentity)
{
    // vec(A X B) = (B^T kron A) vec(X)
    oracle::Rng rng(3);
    const Mat a = oracle::ginibre(3, rng), x = oracle::ginibre(3, rng), b = oracle::ginibre(3, rng);
    EXPECT_LT((linalg::vec(a * x * b) - linalg::kron(b.transpose(), a) * linalg::vec(x)).norm(), 1e-12);
}

TEST(Kernel, ZeroMatrixIsEverything)
{
    EXPECT_EQ(linalg::kernel(Mat::Zero(3, 3)).dim(), 3);
}

TEST(Kernel, FullRankIsTrivial)
{
    EXPECT_EQ(linalg::kernel(diag({1, 2, 3})).dim(), 0);
}

TEST(Kernel, Example1CommutatorHasOneDimensionalKernel)
{
    const auto a = oracle::example1(std::numbers::pi / 4);
    const auto k = linalg::kernel(a[0] * a[1] - a[1] * a[0]);
    ASSERT_EQ(k.dim(), 1);
    EXPECT_LT(((a[0] * a[1] - a[1] * a[0]) * k.vectors.col(0)).norm(), 1e-12);
}

TEST(Kernel, OrthonormalBasisOfRandomRankDeficient)
{
    oracle::Rng rng(4);
    const Mat m = oracle::ginibre(6, 3, rng) * oracle::ginibre(3, 6, rng);
    const auto k = linalg::kernel(m);
    ASSERT_EQ(k.dim(), 3);
    EXPECT_LT((k.vectors.adjoint() * k.vectors - Mat::Identity(3, 3)).norm(), 1e-12);
    EXPECT_LT((m * k.vectors).norm(), 1e-10 * m.norm());
    EXPECT_EQ(k.dim(), oracle::null_space(m, 1e-9).cols());
}

TEST(Kernel, TallMatrix)
{
    oracle::Rng rng(5);
    Mat m(8, 3);
    m << oracle::ginibre(8, 2, rng), ComplexVector::Zero(8);
    m.col(2) = m.col(0) + I1 * m.col(1);
    const auto k = linalg::kernel(m);
    ASSERT_EQ(k.dim(), 1);
    EXPECT_LT((m * k.vectors).norm(), 1e-12);
}

TEST(Kernel, RejectsNonPositiveTolerance)
{
    EXPECT_THROW(linalg::kernel(Mat::Zero(2, 2), 0.0), PreconditionError);
}

TEST(Intersect, FullWithFull)
{
    const std::vector<SubspaceBasis> b{SubspaceBasis::full(3), SubspaceBasis::full(3)};
    EXPECT_EQ(linalg::intersect(b).dim(), 3);
}

TEST(Intersect, CoordinatePlanes)
{
    SubspaceBasis p{3, Mat(3, 2)}, q{3, Mat(3, 2)};
    p.vectors << unit(3, 0), unit(3, 1);
    q.vectors << unit(3, 1), unit(3, 2);
    const std::vector<SubspaceBasis> b{p, q};
    const auto r = linalg::intersect(b);
    ASSERT_EQ(r.dim(), 1);
    EXPECT_NEAR(std::abs(r.vectors(1, 0)), 1.0, 1e-12);
}

TEST(Intersect, CommutatorKernelsOfGenericPairAreTrivial)
{
    oracle::Rng rng(6);
    const Mat a = oracle::ginibre(5, rng), b = oracle::ginibre(5, rng);
    ASSERT_FALSE(oracle::has_common_eigenvector(a, b, 1e-7));
    std::vector<SubspaceBasis> ks;
    const Mat a2 = a * a, b2 = b * b;
    for (const Mat* x : {&a, &a2})
        for (const Mat* y : {&b, &b2})
            ks.push_back(linalg::kernel(*x * *y - *y * *x));
    EXPECT_EQ(linalg::intersect(ks).dim(), 0);
}

TEST(Intersect, ZeroSubspaceAbsorbs)
{
    const std::vector<SubspaceBasis> b{SubspaceBasis::full(3), SubspaceBasis::zero(3)};
    EXPECT_EQ(linalg::intersect(b).dim(), 0);
}

TEST(Eigenvalues, KnownSpectra)
{
    const auto id = linalg::eigenvalues(Mat::Identity(3, 3));
    for (const auto& l : id)
        EXPECT_LT(std::abs(l - 1.0), 1e-14);

    Mat comp(2, 2);
    comp << 0, -1, 1, 0; // companion of x^2 + 1
    EXPECT_TRUE(oracle::multiset_match(linalg::eigenvalues(comp), {I1, -I1}, 1e-12));

    const Complex w = std::polar(1.0, 2 * std::numbers::pi / 3);
    EXPECT_TRUE(oracle::multiset_match(linalg::eigenvalues(diag({1.0, w, std::conj(w)})), {1.0, w, std::conj(w)},
                                       1e-12));
}

TEST(Eigenvalues, AgreeWithReferenceSolverOnRandomMatrices)
{
    oracle::Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        const Mat m = oracle::ginibre(2 + t % 5, rng);
        EXPECT_TRUE(oracle::multiset_match(linalg::eigenvalues(m), oracle::eigenvalues(m), 1e-9));
    }
}

TEST(EigenDecompose, ResidualsSmall)
{
    oracle::Rng rng(8);
    const Mat m = oracle::ginibre(5, rng);
    const auto ed = linalg::eigen_decompose(m);
    ASSERT_EQ(ed.values.size(), 5u);
    for (Index k = 0; k < 5; ++k) {
        EXPECT_NEAR(ed.vectors.col(k).norm(), 1.0, 1e-12);
        EXPECT_LT((m * ed.vectors.col(k) - ed.values[static_cast<std::size_t>(k)] * ed.vectors.col(k)).norm(), 1e-10);
    }
}

TEST(CharacteristicPolynomial, MonicAscending)
{
    const auto p = linalg::characteristic_polynomial(diag({1, 2, 3}));
    // (x-1)(x-2)(x-3) = -6 + 11x - 6x^2 + x^3
    ASSERT_EQ(p.size(), 4u);
    EXPECT_LT(std::abs(p[0] + 6.0), 1e-12);
    EXPECT_LT(std::abs(p[1] - 11.0), 1e-12);
    EXPECT_LT(std::abs(p[2] + 6.0), 1e-12);
    EXPECT_LT(std::abs(p[3] - 1.0), 1e-12);
}

TEST(CharDiscriminant, Diagonal)
{
    EXPECT_LT(std::abs(linalg::char_discriminant(diag({1, 2, 3})) - 4.0), 1e-10);
    EXPECT_LT(std::abs(linalg::char_discriminant(Mat::Identity(2, 2))), 1e-14);
}

TEST(CharDiscriminant, MatchesProductOfEigenvalueGaps)
{
    oracle::Rng rng(9);
    for (Index n = 2; n <= 4; ++n) {
        const Mat m = oracle::ginibre(n, rng);
        const auto ev = oracle::eigenvalues(m);
        Complex prod = 1.0;
        for (std::size_t i = 0; i < ev.size(); ++i)
            for (std::size_t j = i + 1; j < ev.size(); ++j)
                prod *= (ev[i] - ev[j]) * (ev[i] - ev[j]);
        EXPECT_LT(std::abs(linalg::char_discriminant(m) - prod), 1e-9 * std::max(1.0, std::abs(prod)));
    }
}

TEST(CharDiscriminant, ThirdKrausOperatorOfSecondFamily)
{
    const double phi = std::numbers::pi / 3, s = std::sin(phi);
    const double closed = 0.5 * (std::pow(s, 6) - 2 * std::pow(s, 4) + s * s);
    EXPECT_NEAR(closed, 3.0 / 128.0, 1e-15);
    const auto a = oracle::example2(phi);
    EXPECT_LT(std::abs(linalg::char_discriminant(a[2]) - closed), 1e-10);
}

TEST(SpectralNorm, Examples)
{
    EXPECT_NEAR(linalg::spectral_norm(Mat::Identity(4, 4)), 1.0, 1e-12);
    EXPECT_NEAR(linalg::spectral_norm(diag({3.0, 4.0 * I1})), 4.0, 1e-12);
    oracle::Rng rng(10);
    EXPECT_NEAR(linalg::spectral_norm(oracle::haar_unitary(4, rng)), 1.0, 1e-9);
    const Mat g = oracle::ginibre(4, rng);
    Eigen::JacobiSVD<Mat> svd(g);
    EXPECT_NEAR(linalg::spectral_norm(g), svd.singularValues()(0), 1e-8 * svd.singularValues()(0));
    EXPECT_EQ(linalg::spectral_norm(Mat::Zero(3, 3)), 0.0);
}

TEST(BasisExtract, RepeatedMatrix)
{
    const std::vector<Mat> mats{Mat::Identity(2, 2), Mat::Identity(2, 2)};
    const auto sel = linalg::basis_extract(mats);
    ASSERT_EQ(sel.selected, (std::vector<std::size_t>{0}));
    EXPECT_LT(std::abs(sel.coordinates(0, 1) - 1.0), 1e-12);
}

TEST(BasisExtract, TwoGeneratorWordListHasFiveElementBasis)
{
    const auto a = oracle::two_generator_algebra();
    std::vector<Mat> words;
    std::vector<std::vector<int>> frontier{{}};
    for (int len = 1; len <= 4; ++len) {
        std::vector<std::vector<int>> next;
        for (const auto& w : frontier)
            for (int g = 0; g < 2; ++g) {
                auto v = w;
                v.push_back(g);
                Mat m = Mat::Identity(3, 3);
                for (int x : v)
                    m = (m * a[static_cast<std::size_t>(x)]).eval();
                words.push_back(m);
                next.push_back(v);
            }
        frontier = std::move(next);
    }
    const auto sel = linalg::basis_extract(words);
    // Word order: 1, 2, 11, 12, 21, 22, ...
    ASSERT_EQ(sel.selected, (std::vector<std::size_t>{0, 1, 2, 3, 4}));
    EXPECT_LT(sel.max_residual, 1e-10);
    EXPECT_EQ(oracle::span_rank(words), 5);
}

TEST(BasisExtract, PauliWords)
{
    const Mat x = oracle::pauli('X'), z = oracle::pauli('Z');
    std::vector<Mat> words;
    std::vector<Mat> level{x, z};
    for (int len = 1; len <= 4; ++len) {
        std::vector<Mat> next;
        for (const auto& w : level) {
            words.push_back(w);
            next.push_back(w * x);
            next.push_back(w * z);
        }
        level = std::move(next);
    }
    EXPECT_EQ(static_cast<Index>(linalg::basis_extract(words).selected.size()), 4);
    EXPECT_EQ(oracle::span_rank(words), 4);
}

TEST(BasisExtract, CoordinatesReconstructInputs)
{
    oracle::Rng rng(11);
    std::vector<Mat> mats{oracle::ginibre(3, rng), oracle::ginibre(3, rng)};
    mats.push_back(2.0 * mats[0] - I1 * mats[1]);
    mats.push_back(oracle::ginibre(3, rng));
    const auto sel = linalg::basis_extract(mats);
    ASSERT_EQ(sel.selected, (std::vector<std::size_t>{0, 1, 3}));
    for (std::size_t i = 0; i < mats.size(); ++i) {
        Mat r = Mat::Zero(3, 3);
        for (std::size_t j = 0; j < sel.selected.size(); ++j)
            r += sel.coordinates(static_cast<Index>(j), static_cast<Index>(i)) * mats[sel.selected[j]];
        EXPECT_LT((r - mats[i]).norm(), 1e-10);
    }
}

TEST(ClusterEigenvalues, GroupsNearbyValues)
{
    const std::vector<Complex> v{1.0, 1.0 + 1e-9, -1.0, Complex(0.0, 1.0)};
    const auto c = linalg::cluster_eigenvalues(v, 1e-6);
    ASSERT_EQ(c.size(), 3u);
    Index total = 0;
    for (const auto& x : c)
        total += x.multiplicity;
    EXPECT_EQ(total, 4);
}

TEST(InvariantProjector, DiagonalizableMatrix)
{
    oracle::Rng rng(12);
    const Mat s = oracle::ginibre(4, rng);
    const Mat d = diag({1.0, -1.0, 0.5, 0.2});
    const Mat m = s * d * s.inverse();
    const std::vector<linalg::EigenCluster> cl{{1.0, 1}, {-1.0, 1}};
    const Mat p = linalg::invariant_projector(m, cl);
    Mat e = Mat::Zero(4, 4);
    e(0, 0) = e(1, 1) = 1.0;
    EXPECT_LT((p - s * e * s.inverse()).norm(), 1e-8);
    EXPECT_LT((p * p - p).norm(), 1e-9);
}

TEST(InvariantProjector, DefectiveClusterFails)
{
    Mat j(2, 2);
    j << 1, 1, 0, 1;
    const std::vector<linalg::EigenCluster> cl{{1.0, 2}};
    EXPECT_THROW(linalg::invariant_projector(j, cl), NumericalFailure);
}
