#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "ymr/indexcalc.hpp"
#include "ymr/tensoralg.hpp"

using namespace ymr;

namespace {

long binom(long n, long k)
{
    long r = 1;
    for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// symmetric powers per slot type, product over slot types
long oracle_dim(const MultiIndex& b, int dv)
{
    long d = 1;
    for (auto& [n, k] : b.poly) d *= binom(dv + k - 1, k);
    return d;
}

int rank_of(const Eigen::MatrixXd& m)
{
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    lu.setThreshold(1e-12);
    return static_cast<int>(lu.rank());
}

}  // namespace

TEST_CASE("dimension examples")
{
    auto z = MultiIndex::delta_n({0, 0, 0, 0});
    auto e1 = MultiIndex::delta_n({0, 1, 0, 0});
    for (int k = 0; k <= 5; ++k) CHECK(dim_space(MultiIndex::delta_g(k), 9) == 1);
    CHECK(dim_space(z, 9) == 9);
    CHECK(dim_space(z + z, 9) == 45);
    CHECK(dim_space(z + e1, 9) == 81);
    CHECK(WBasis(z + z + MultiIndex::delta_g(), 9).dim() == 45);
}

TEST_CASE("property: basis sizes match symmetric power counts")
{
    for (auto& b : enumerate_populated(GradedValue(Rational(2), 0, 1), GradeKind::plain)) {
        CHECK(dim_space(b, 9) == oracle_dim(b, 9));
        CHECK(WBasis(b, 3).dim() == oracle_dim(b, 3));
    }
}

TEST_CASE("product map examples")
{
    auto g = MultiIndex::delta_g();
    auto P = product_iso(g, g, 9);
    REQUIRE(P.rows() == 1);
    REQUIRE(P.cols() == 1);
    CHECK(P(0, 0) == 1.0);

    // on two copies of V: the symmetrized pair maps to the unit coefficient of z_a z_b
    auto z = MultiIndex::delta_n({0, 0, 0, 0});
    WBasis w1(z, 9), w2(z + z, 9);
    auto Q = product_iso(z, z, 9);
    REQUIRE(Q.rows() == 45);
    REQUIRE(Q.cols() == 81);
    for (int a = 0; a < 9; ++a)
        for (int b = 0; b < 9; ++b) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(81);
            x(a * 9 + b) += 1;
            x(b * 9 + a) += 1;
            Eigen::VectorXd y = Q * x;
            int r = w2.find(w1.basis[a] * w1.basis[b]);
            REQUIRE(r >= 0);
            for (int i = 0; i < 45; ++i) CHECK(y(i) == doctest::Approx(i == r ? (a == b ? 2.0 : 1.0) : 0.0));
        }
}

TEST_CASE("property: product maps are onto and bijective exactly on disjoint slot types")
{
    auto list = enumerate_populated(GradedValue::integer(2), GradeKind::plain);
    for (auto& b : list)
        for (auto& c : list) {
            if (dim_space(b, 3) * dim_space(c, 3) > 400) continue;
            auto P = product_iso(b, c, 3);
            long ds = dim_space(b + c, 3);
            CHECK(P.rows() == ds);
            CHECK(rank_of(P) == ds);
            bool disjoint = true;
            for (auto& [n, k] : b.poly) disjoint = disjoint && c.count(n) == 0;
            CHECK((P.rows() == P.cols()) == disjoint);
        }
}

TEST_CASE("nonlinearity coefficient tensors")
{
    auto& t = nonlin_tensors();
    // indices shifted to 0-based
    CHECK(t.a(0, 0, 0, 0) == 1.0);
    CHECK(t.a(0, 1, 2, 1) == 0.0);
    CHECK(t.b(1, 0, 0, 1) == 1.0);
    CHECK(t.b(1, 0, 1, 1) == 0.0);
    // independent formula
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    CHECK(t.a(i, j, k, l) == 2 * d(i, j) * d(k, l) - d(i, l) * d(j, k));
                    CHECK(t.b(i, j, k, l) == d(i, l) * d(j, k));
                }
}

TEST_CASE("su(2) bracket")
{
    auto lie = LieData::su2();
    CHECK(lie.dim_k == 3);
    CHECK(lie.dim_v() == 9);
    auto e = [](int a) {
        std::vector<double> v(3, 0.0);
        v[a] = 1;
        return v;
    };
    CHECK(lie_bracket(lie, e(0), e(1)) == e(2));
    CHECK(lie_bracket(lie, e(1), e(2)) == e(0));
    CHECK(lie_bracket(lie, e(2), e(0)) == e(1));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    std::vector<double> x(3);
    for (auto& v : x) v = nd(rng);
    for (double v : lie_bracket(lie, x, x)) CHECK(v == 0.0);
    CHECK(lie.antisymmetry_residual() == 0.0);
    CHECK(lie.jacobi_residual(3) < 1e-12);
    CHECK_FALSE(lie.is_abelian());
    CHECK(LieData::abelian(3).is_abelian());
}

TEST_CASE("structure constants from triples")
{
    auto lie = LieData::from_triples(3, {{0, 1, 2, 1.0}, {1, 2, 0, 1.0}, {2, 0, 1, 1.0}});
    auto su2 = LieData::su2();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) CHECK(lie(a, b, c) == su2(a, b, c));
    // a non-Lie set of constants is detected
    auto bad = LieData::from_triples(3, {{0, 1, 2, 1.0}, {1, 2, 0, 2.0}, {2, 0, 1, 0.5}, {0, 1, 0, 1.0}});
    CHECK(bad.jacobi_residual(3) > 1e-6);
}
