#include "erpm/neighborhoods.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace erpm;
using namespace erpm::neighborhoods;

TEST_CASE("knn_index: collinear points") {
    Matrix X(3, 1);
    X << 0, 1, 3;
    const auto idx = knn_index(X, 1);
    CHECK(idx.row(0)[0] == 1);
    CHECK(idx.row(1)[0] == 0);
    CHECK(idx.row(2)[0] == 1);
}

TEST_CASE("knn_index: ties go to the smaller index") {
    Matrix X(3, 1);
    X << 0, -1, 1;
    CHECK(knn_index(X, 1).row(0)[0] == 1);
    CHECK(knn_index(X, 2).row(1)[1] == 2);
}

TEST_CASE("knn_index: k = n-1 lists every other point") {
    std::mt19937_64 gen(1);
    const Matrix X = oracle::random_matrix(7, 2, gen);
    const auto idx = knn_index(X, 6);
    for (Index i = 0; i < 7; ++i) {
        std::set<Index> seen(idx.row(i).begin(), idx.row(i).end());
        CHECK(seen.size() == 6);
        CHECK(seen.count(i) == 0);
    }
}

TEST_CASE("knn_index: matches the full-sort oracle") {
    std::mt19937_64 gen(2);
    const Matrix X = oracle::random_matrix(50, 3, gen);
    const auto idx = knn_index(X, 5);
    for (Index i = 0; i < 50; ++i) {
        const auto order = oracle::full_sort_order(X, i);
        for (Index p = 0; p < 5; ++p) CHECK(idx.row(i)[static_cast<std::size_t>(p)] == order[static_cast<std::size_t>(p)]);
        // distances non-decreasing
        for (Index p = 1; p < 5; ++p) {
            const auto a = idx.row(i)[static_cast<std::size_t>(p - 1)], b = idx.row(i)[static_cast<std::size_t>(p)];
            CHECK((X.row(i) - X.row(a)).squaredNorm() <= (X.row(i) - X.row(b)).squaredNorm());
        }
    }
}

TEST_CASE("knn_index: parameter errors") {
    const Matrix X = Matrix::Random(4, 2);
    CHECK_THROWS_AS(knn_index(X, 4), ParameterError);
    CHECK_THROWS_AS(knn_index(X, 0), ParameterError);
}

TEST_CASE("neighborhood_matrix gathers neighbor columns") {
    std::mt19937_64 gen(3);
    const Matrix X = oracle::random_matrix(20, 4, gen);
    const auto idx1 = knn_index(X, 1);
    for (Index i = 0; i < 20; ++i) {
        const Matrix M = neighborhood_matrix(X, idx1, i);
        CHECK(M.cols() == 1);
        CHECK(M.col(0) == X.row(oracle::full_sort_order(X, i)[0]).transpose());
    }
    const auto idx = knn_index(X, 6);
    const Matrix M = neighborhood_matrix(X, idx, 7);
    CHECK(M.rows() == 4);
    for (Index c = 0; c < 6; ++c) CHECK(M.col(c) == X.row(idx.row(7)[static_cast<std::size_t>(c)]).transpose());

    Matrix D(4, 2);
    D << 1, 1, 1, 1, 5, 5, 9, 9;  // rows 0 and 1 duplicate
    const auto didx = knn_index(D, 1);
    CHECK(neighborhood_matrix(D, didx, 0).col(0) == D.row(1).transpose());
}

TEST_CASE("center_columns") {
    Matrix constant(3, 4);
    constant.colwise() = Vector::LinSpaced(3, 1, 3);
    CHECK(center_columns(constant).cwiseAbs().maxCoeff() == 0.0);

    std::mt19937_64 gen(4);
    const Matrix M = oracle::random_matrix(4, 6, gen);
    const Matrix C = center_columns(M);
    CHECK(C.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    CHECK((center_columns(C) - C).cwiseAbs().maxCoeff() < 1e-12);

    // linear map; centering lowers rank by at most one
    const Matrix N = oracle::random_matrix(4, 6, gen);
    CHECK((center_columns(2.0 * M + N) - (2.0 * C + center_columns(N))).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::FullPivLU<Matrix> lu_m(M), lu_c(C);
    CHECK(lu_c.rank() >= lu_m.rank() - 1);
}

TEST_CASE("rank_table: small cases") {
    Matrix two(2, 1);
    two << 0, 5;
    const auto r2 = rank_table(two);
    CHECK(r2(0, 1) == 1);
    CHECK(r2(1, 0) == 1);

    Matrix line(3, 1);
    line << 0, 1, 2;
    const auto r = rank_table(line);
    CHECK(r(0, 1) == 1);
    CHECK(r(0, 2) == 2);
    CHECK(r(0, 0) == 0);
}

TEST_CASE("rank_table: rows are permutations matching the sort oracle") {
    std::mt19937_64 gen(5);
    const Matrix X = oracle::random_matrix(30, 3, gen);
    const auto r = rank_table(X);
    const auto ref = oracle::rank_matrix(X);
    for (Index i = 0; i < 30; ++i) {
        std::vector<int> row;
        for (Index j = 0; j < 30; ++j) {
            CHECK(r(i, j) == ref[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
            if (j != i) row.push_back(r(i, j));
        }
        std::sort(row.begin(), row.end());
        for (int p = 0; p < 29; ++p) CHECK(row[static_cast<std::size_t>(p)] == p + 1);
    }
}

TEST_CASE("property: ranks invariant under similarity transforms") {
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix X = oracle::random_matrix(25, 3, gen);
        const Matrix Q = oracle::random_orthogonal(3, gen);
        const Eigen::RowVector3d t = oracle::random_matrix(1, 3, gen);
        const Matrix Y = (3.7 * X * Q.transpose()).rowwise() + t;
        CHECK(rank_table(X).table() == rank_table(Y).table());
    }
}

TEST_CASE("property: knn rows agree with rank table") {
    std::mt19937_64 gen(7);
    const Matrix X = oracle::random_matrix(40, 2, gen);
    const auto r = rank_table(X);
    const auto idx = knn_index(X, 8);
    for (Index i = 0; i < 40; ++i)
        for (Index p = 0; p < 8; ++p) CHECK(r(i, idx.row(i)[static_cast<std::size_t>(p)]) == p + 1);
    const auto from_ranks = r.neighbors(8);
    for (Index i = 0; i < 40; ++i)
        CHECK(std::equal(idx.row(i).begin(), idx.row(i).end(), from_ranks.row(i).begin()));
    const auto shorter = idx.truncated(3);
    CHECK(shorter.k() == 3);
    CHECK(std::equal(shorter.row(5).begin(), shorter.row(5).end(), idx.row(5).begin()));
}
