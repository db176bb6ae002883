#include "cptrank/cp_model.hpp"
#include "cptrank/error.hpp"
#include "cptrank/json_io.hpp"
#include "cptrank/solver.hpp"
#include "cptrank/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace cptrank {
namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = 2.0 * rng.uniform() - 1.0;
    }
    return m;
}

CPModel random_model(const Dims& dims, std::size_t rank, Rng& rng, bool with_weights = false) {
    std::vector<Matrix> f;
    for (std::size_t n : dims) f.push_back(random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank), rng));
    Vector w;
    if (with_weights) w = random_matrix(static_cast<Eigen::Index>(rank), 1, rng).col(0);
    return CPModel(std::move(f), std::move(w));
}

Tensor random_tensor(const Dims& dims, Rng& rng) {
    std::vector<double> data(element_count(dims));
    for (double& x : data) x = rng.uniform();
    return Tensor::from_flat(dims, std::move(data));
}

// Brute-force oracle: walks every multi-index and multiplies factor entries.
double brute_entry(const CPModel& m, const std::vector<std::size_t>& idx) {
    double sum = 0.0;
    for (std::size_t t = 0; t < m.rank(); ++t) {
        double prod = m.weights()(static_cast<Eigen::Index>(t));
        for (std::size_t j = 0; j < idx.size(); ++j) {
            prod *= m.factor(j)(static_cast<Eigen::Index>(idx[j]), static_cast<Eigen::Index>(t));
        }
        sum += prod;
    }
    return sum;
}

template <typename F>
void for_each_index(const Dims& dims, F&& fn) {
    std::vector<std::size_t> idx(dims.size(), 0);
    for (std::size_t flat = 0; flat < element_count(dims); ++flat) {
        fn(idx);
        for (std::size_t j = dims.size(); j-- > 0;) {
            if (++idx[j] < dims[j]) break;
            idx[j] = 0;
        }
    }
}

// ===========================================================================
// Tensor construction and access
// ===========================================================================

TEST(TensorTest, OrderOneStoresDirectly) {
    const Tensor t = Tensor::from_flat({2}, {0.3, 0.7});
    EXPECT_EQ(t.order(), 1u);
    EXPECT_DOUBLE_EQ(t.at({0}), 0.3);
}

TEST(TensorTest, IdentityPattern) {
    const Tensor t = Tensor::from_flat({2, 2}, {1, 0, 0, 1});
    EXPECT_DOUBLE_EQ(t.at({1, 1}), 1.0);
    EXPECT_DOUBLE_EQ(t.at({0, 1}), 0.0);
}

TEST(TensorTest, HailfinderShapedTensorUsesRowMajorLayout) {
    std::vector<double> data(108);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(i);
    const Tensor t = Tensor::from_flat({3, 3, 4, 3}, data);
    EXPECT_EQ(t.order(), 4u);
    // (i0,i1,i2,i3) -> ((i0*3 + i1)*4 + i2)*3 + i3
    EXPECT_DOUBLE_EQ(t.at({2, 1, 3, 2}), static_cast<double>(((2 * 3 + 1) * 4 + 3) * 3 + 2));
    EXPECT_DOUBLE_EQ(t.at({0, 0, 0, 1}), 1.0);
}

TEST(TensorTest, LengthMismatchNamesExpectedAndActual) {
    try {
        (void)Tensor::from_flat({2, 3}, std::vector<double>(5));
        FAIL() << "expected StructuralError";
    } catch (const StructuralError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("6"), std::string::npos);
        EXPECT_NE(msg.find("5"), std::string::npos);
    }
}

TEST(TensorTest, RejectsZeroDimensionAndEmptyDims) {
    EXPECT_THROW((void)Tensor::from_flat({2, 0}, {}), StructuralError);
    EXPECT_THROW((void)Tensor::from_flat({}, {1.0}), StructuralError);
}

// ===========================================================================
// rank_one / reconstruct
// ===========================================================================

TEST(RankOneTest, IndicatorOuterProduct) {
    const std::vector<std::vector<double>> v = {{1, 0}, {1, 0}};
    const Tensor t = rank_one(v);
    EXPECT_EQ(t.dims(), (Dims{2, 2}));
    EXPECT_DOUBLE_EQ(t.at({0, 0}), 1.0);
    EXPECT_DOUBLE_EQ(t.at({0, 1}) + t.at({1, 0}) + t.at({1, 1}), 0.0);
}

TEST(RankOneTest, ScalarProduct) {
    const std::vector<std::vector<double>> v = {{2}, {3}, {4}};
    const Tensor t = rank_one(v);
    EXPECT_EQ(t.dims(), (Dims{1, 1, 1}));
    EXPECT_DOUBLE_EQ(t.at({0, 0, 0}), 24.0);
}

TEST(RankOneTest, EntryIsProductOfComponents) {
    const std::vector<std::vector<double>> v = {{0.5, 0.5}, {0.2, 0.8}};
    EXPECT_DOUBLE_EQ(rank_one(v).at({1, 1}), 0.4);
}

TEST(RankOneTest, EmptyInputIsStructuralError) {
    EXPECT_THROW((void)rank_one(std::vector<std::vector<double>>{}), StructuralError);
    EXPECT_THROW((void)rank_one(std::vector<std::vector<double>>{{1.0}, {}}), StructuralError);
}

TEST(ReconstructTest, RankOneModelMatchesOuterProduct) {
    const std::vector<std::vector<double>> v = {{0.5, 0.5}, {0.2, 0.8}, {1.0, 2.0, 3.0}};
    std::vector<Matrix> f;
    for (const auto& x : v) f.push_back(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())));
    EXPECT_EQ(reconstruct(CPModel(f)), rank_one(v));
}

TEST(ReconstructTest, ZeroFactorsGiveZeroTensor) {
    EXPECT_EQ(reconstruct(CPModel::zeros({2, 3, 4}, 3)), Tensor::zeros({2, 3, 4}));
}

TEST(ReconstructTest, MatchesBruteForceIndexLoop) {
    Rng rng(7);
    const CPModel m = random_model({3, 4, 5}, 3, rng, true);
    const Tensor t = reconstruct(m);
    for_each_index(t.dims(), [&](const std::vector<std::size_t>& idx) {
        EXPECT_NEAR(t(idx), brute_entry(m, idx), 1e-12);
    });
}

TEST(ReconstructTest, OrderOneModelSumsWeightedColumns) {
    Matrix f(3, 2);
    f << 1, 2, 3, 4, 5, 6;
    Vector w(2);
    w << 0.5, 2.0;
    const Tensor t = reconstruct(CPModel({f}, w));
    EXPECT_DOUBLE_EQ(t.at({0}), 0.5 * 1 + 2.0 * 2);
    EXPECT_DOUBLE_EQ(t.at({2}), 0.5 * 5 + 2.0 * 6);
}

TEST(ReconstructTest, SumOfSingleTermReconstructs) {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const CPModel m = random_model({2, 3, 2, 4}, 4, rng, true);
        std::vector<double> sum(element_count(m.dims()), 0.0);
        for (std::size_t t = 0; t < m.rank(); ++t) {
            std::vector<Matrix> cols;
            for (const auto& f : m.factors()) cols.push_back(f.col(static_cast<Eigen::Index>(t)));
            Vector w(1);
            w(0) = m.weights()(static_cast<Eigen::Index>(t));
            const Tensor part = reconstruct(CPModel(cols, w));
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += part.data()[i];
        }
        EXPECT_LT(max_abs_diff(reconstruct(m), Tensor::from_flat(m.dims(), sum)), 1e-12);
    }
}

TEST(ReconstructTest, ColumnRescalingIsInvisible) {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const CPModel m = random_model({3, 2, 4}, 3, rng, true);
        std::vector<Matrix> f = m.factors();
        Vector w = m.weights();
        const double c = 0.25 + 4.0 * rng.uniform();
        f[1].col(2) *= c;
        w(2) /= c;
        EXPECT_LT(max_abs_diff(reconstruct(m), reconstruct(CPModel(f, w))), 1e-12);
    }
}

TEST(ReconstructTest, NormalizedAndAbsorbedPreserveTensor) {
    Rng rng(5);
    const CPModel m = random_model({3, 3, 2}, 2, rng, true);
    EXPECT_LT(max_abs_diff(reconstruct(m), reconstruct(m.normalized())), 1e-12);
    EXPECT_LT(max_abs_diff(reconstruct(m), reconstruct(m.absorbed())), 1e-12);
    const CPModel n = m.normalized();
    for (const auto& f : n.factors()) {
        for (Eigen::Index t = 0; t < f.cols(); ++t) EXPECT_NEAR(f.col(t).norm(), 1.0, 1e-12);
    }
}

TEST(CPModelTest, RejectsInconsistentShapes) {
    EXPECT_THROW(CPModel({Matrix::Zero(2, 2), Matrix::Zero(3, 1)}), StructuralError);
    EXPECT_THROW(CPModel({Matrix::Zero(2, 2)}, Vector::Ones(3)), StructuralError);
    EXPECT_THROW(CPModel(std::vector<Matrix>{}), StructuralError);
}

// ===========================================================================
// Metrics
// ===========================================================================

TEST(MetricTest, MaxAbsDiffHandArithmetic) {
    const Tensor a = Tensor::from_flat({2}, {0.2, 0.8});
    const Tensor b = Tensor::from_flat({2}, {0.25, 0.75});
    EXPECT_NEAR(max_abs_diff(a, b), 0.05, 1e-15);
    EXPECT_EQ(max_abs_diff(a, a), 0.0);
}

TEST(MetricTest, FrobeniusHandArithmetic) {
    const Tensor a = Tensor::from_flat({2}, {1, 0});
    const Tensor b = Tensor::from_flat({2}, {0, 1});
    EXPECT_DOUBLE_EQ(frobenius_dist(a, b), std::sqrt(2.0));
    EXPECT_EQ(frobenius_dist(a, a), 0.0);
}

TEST(MetricTest, FrobeniusMatchesNaiveLoop) {
    Rng rng(19);
    const Tensor a = random_tensor({3, 2, 4}, rng);
    const Tensor b = random_tensor({3, 2, 4}, rng);
    double sum = 0.0;
    for_each_index(a.dims(), [&](const std::vector<std::size_t>& idx) {
        sum += (a(idx) - b(idx)) * (a(idx) - b(idx));
    });
    EXPECT_NEAR(frobenius_dist(a, b), std::sqrt(sum), 1e-12);
}

TEST(MetricTest, ExactModelHasZeroDistance) {
    Rng rng(23);
    const CPModel m = random_model({2, 3, 4}, 2, rng);
    const Tensor t = reconstruct(m);
    EXPECT_LT(max_abs_diff(reconstruct(m), t), 1e-12);
}

TEST(MetricTest, DimsMismatchIsStructuralError) {
    EXPECT_THROW((void)max_abs_diff(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), StructuralError);
    EXPECT_THROW((void)frobenius_dist(Tensor::zeros({2}), Tensor::zeros({2, 1})), StructuralError);
}

TEST(MetricTest, MetricAxiomsOnRandomTriples) {
    Rng rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const Dims dims = {2, 3, 2};
        const Tensor a = random_tensor(dims, rng);
        const Tensor b = random_tensor(dims, rng);
        const Tensor c = random_tensor(dims, rng);
        for (auto dist : {&max_abs_diff, &frobenius_dist}) {
            EXPECT_EQ(dist(a, b), dist(b, a));
            EXPECT_GT(dist(a, b), 0.0);
            EXPECT_EQ(dist(a, a), 0.0);
            EXPECT_LE(dist(a, c), dist(a, b) + dist(b, c) + 1e-15);
        }
    }
}

// ===========================================================================
// unfold / fold / khatri_rao
// ===========================================================================

TEST(UnfoldTest, MatrixCaseIsPlainView) {
    const Tensor t = Tensor::from_flat({2, 3}, {1, 2, 3, 4, 5, 6});
    Matrix expected(2, 3);
    expected << 1, 2, 3, 4, 5, 6;
    EXPECT_EQ(unfold(t, 0), expected);
    EXPECT_EQ(unfold(t, 1), expected.transpose());
}

TEST(UnfoldTest, RowsCollectEntriesWithFixedModeIndex) {
    Rng rng(31);
    const Tensor t = random_tensor({2, 3, 4}, rng);
    const Matrix u = unfold(t, 1);
    ASSERT_EQ(u.rows(), 3);
    ASSERT_EQ(u.cols(), 8);
    for_each_index(t.dims(), [&](const std::vector<std::size_t>& idx) {
        const auto col = static_cast<Eigen::Index>(idx[0] * 4 + idx[2]);
        EXPECT_EQ(u(static_cast<Eigen::Index>(idx[1]), col), t(idx));
    });
}

TEST(UnfoldTest, FoldInvertsUnfoldForEveryMode) {
    Rng rng(37);
    for (const Dims& dims : {Dims{4}, Dims{2, 3}, Dims{3, 1, 2}, Dims{2, 3, 4, 2}}) {
        const Tensor t = random_tensor(dims, rng);
        for (std::size_t m = 0; m < dims.size(); ++m) EXPECT_EQ(fold(unfold(t, m), m, dims), t);
    }
}

TEST(UnfoldTest, ModeOutOfRange) {
    EXPECT_THROW((void)unfold(Tensor::zeros({2, 2}), 2), StructuralError);
    EXPECT_THROW((void)fold(Matrix::Zero(2, 2), 0, Dims{2, 3}), StructuralError);
}

TEST(KhatriRaoTest, SingleMatrixIsIdentity) {
    Matrix a(3, 2);
    a << 1, 2, 3, 4, 5, 6;
    EXPECT_EQ(khatri_rao(std::vector<Matrix>{a}), a);
}

TEST(KhatriRaoTest, HandKronecker) {
    Matrix a(2, 1), b(2, 1);
    a << 1, 2;
    b << 3, 4;
    Matrix expected(4, 1);
    expected << 3, 4, 6, 8;
    EXPECT_EQ(khatri_rao(std::vector<Matrix>{a, b}), expected);
}

TEST(KhatriRaoTest, ColumnMismatchIsStructuralError) {
    EXPECT_THROW((void)khatri_rao(std::vector<Matrix>{Matrix::Zero(2, 2), Matrix::Zero(2, 3)}), StructuralError);
}

TEST(KhatriRaoTest, UnfoldOfModelFactorsThroughKhatriRao) {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const CPModel m = random_model({3, 2, 4, 2}, 3, rng, true);
        const Tensor t = reconstruct(m);
        for (std::size_t mode = 0; mode < m.order(); ++mode) {
            std::vector<Matrix> others;
            for (std::size_t j = 0; j < m.order(); ++j) {
                if (j != mode) others.push_back(m.factor(j));
            }
            const Matrix expected = m.factor(mode) * m.weights().asDiagonal() * khatri_rao(others).transpose();
            EXPECT_LT((unfold(t, mode) - expected).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(KhatriRaoTest, UnfoldOfRankOne) {
    const std::vector<std::vector<double>> v = {{1, 2}, {3, 4, 5}, {6, 7}};
    const Tensor t = rank_one(v);
    std::vector<Matrix> cols;
    for (const auto& x : v) cols.push_back(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size())));
    const Matrix expected = cols[1] * khatri_rao(std::vector<Matrix>{cols[0], cols[2]}).transpose();
    EXPECT_LT((unfold(t, 1) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

// ===========================================================================
// JSON
// ===========================================================================

TEST(JsonTest, TensorAndModelRoundTrip) {
    Rng rng(43);
    const Tensor t = random_tensor({2, 3}, rng);
    EXPECT_EQ(tensor_from_json(Json::parse(tensor_to_json(t).dump())), t);

    const CPModel m = random_model({2, 3, 4}, 2, rng, true);
    const Json j = model_to_json(m);
    EXPECT_EQ(j.at("rank"), 2);
    EXPECT_EQ(j.at("factors").at(1).size(), 6u);
    const CPModel back = model_from_json(Json::parse(j.dump()));
    EXPECT_EQ(back.dims(), m.dims());
    for (std::size_t k = 0; k < m.order(); ++k) EXPECT_EQ(back.factor(k), m.factor(k));
    EXPECT_EQ(back.weights(), m.weights());
}

TEST(JsonTest, FactorMatricesAreRowMajor) {
    Matrix f(2, 2);
    f << 1, 2, 3, 4;
    const Json j = model_to_json(CPModel({f}));
    EXPECT_EQ(j.at("factors").at(0), Json({1.0, 2.0, 3.0, 4.0}));
}

TEST(JsonTest, MalformedInputIsStructuralError) {
    EXPECT_THROW((void)tensor_from_json(Json{{"dims", {2}}, {"data", {1.0}}}), StructuralError);
    EXPECT_THROW((void)tensor_from_json(Json{{"data", {1.0}}}), StructuralError);
    EXPECT_THROW((void)model_from_json(Json{{"dims", {2}}, {"rank", 1}, {"factors", {{1.0}}}}), StructuralError);
}

}  // namespace
}  // namespace cptrank
