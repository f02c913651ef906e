#include <doctest.h>

#include <cmath>

#include "ymr/model.hpp"

using namespace ymr;

namespace {

double rel_diff(const GridField& a, const GridField& b)
{
    double d = 0, s = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        d = std::max(d, std::abs(a.data[i] - b.data[i]));
        s = std::max({s, std::abs(a.data[i]), std::abs(b.data[i])});
    }
    return s == 0 ? 0 : d / s;
}

const ModelContext& small_ctx()
{
    static ModelContext ctx(IndexSet::build(GradedValue::integer(2), 9), LieData::su2(), ParabolicGrid(8, 4, 2.2));
    return ctx;
}

// the cutoff just above 2 adds g+0+e_i, 2g+3*0 and the |n|=2 polynomials
const ModelContext& ext_ctx()
{
    static ModelContext ctx(IndexSet::build(GradedValue(Rational(2), 0, 1), 9), LieData::su2(),
                            ParabolicGrid(9, 5, 2.5));
    return ctx;
}

RenormConstants some_c()
{
    RenormConstants c;
    c.c = {0.3, -0.2, 0.15, 0.05};
    return c;
}

}  // namespace

TEST_CASE("index set at the default cutoff")
{
    const auto& S = small_ctx().set;
    CHECK(S.size() == 23);
    CHECK(S.list.front().is_zero());
}

TEST_CASE("sparse nonlinearity against the explicit bracket form")
{
    // U polynomial in space; g A(U,U) + g^2 B(U,U,U) = g[U_j, 2 d_j U_i - d_i U_j + g[U_j,U_i]]
    LieData lie = LieData::su2();
    ParabolicGrid grid(4, 6, 3.0);
    GridField U(grid, 9);
    for (size_t p = 0; p < grid.points(); ++p) {
        Point4 y = grid.point(grid.node(p));
        for (int v = 0; v < 9; ++v)
            U.at(p, v) = 0.1 * (v + 1) + 0.3 * std::sin(v) * y[1] - 0.2 * std::cos(2 * v) * y[2] + 0.05 * v * y[3];
    }
    double g = 0.7;
    GridField a = nonlinearity_eval(NonlinKind::A, lie, U, U);
    GridField b = nonlinearity_eval(NonlinKind::B, lie, U, U, &U);
    GridField lhs = a;
    lhs *= g;
    lhs.axpy(g * g, b);

    std::array<GridField, 3> d{fd_derivative(U, {0, 1, 0, 0}), fd_derivative(U, {0, 0, 1, 0}),
                               fd_derivative(U, {0, 0, 0, 1})};
    double worst = 0, scale = 0;
    for (size_t p = 0; p < grid.points(); ++p) {
        for (int i = 0; i < 3; ++i) {
            std::vector<double> acc(3, 0.0);
            for (int j = 0; j < 3; ++j) {
                std::vector<double> Uj(3), Ui(3), inner(3);
                for (int c = 0; c < 3; ++c) {
                    Uj[c] = U.at(p, j * 3 + c);
                    Ui[c] = U.at(p, i * 3 + c);
                }
                auto br = lie_bracket(lie, Uj, Ui);
                for (int c = 0; c < 3; ++c)
                    inner[c] = 2 * d[j].at(p, i * 3 + c) - d[i].at(p, j * 3 + c) + g * br[c];
                auto out = lie_bracket(lie, Uj, inner);
                for (int c = 0; c < 3; ++c) acc[c] += g * out[c];
            }
            for (int c = 0; c < 3; ++c) {
                worst = std::max(worst, std::abs(acc[c] - lhs.at(p, i * 3 + c)));
                scale = std::max(scale, std::abs(acc[c]));
            }
        }
    }
    CHECK(scale > 0.1);
    CHECK(worst < 1e-12 * scale);
}

TEST_CASE("nonlinearity vanishes for constants and abelian algebras")
{
    ParabolicGrid grid(4, 4, 3.0);
    GridField U(grid, 9), V(grid, 9);
    for (size_t p = 0; p < grid.points(); ++p)
        for (int v = 0; v < 9; ++v) {
            U.at(p, v) = 0.3 + v;
            V.at(p, v) = std::sin(p + v);
        }
    CHECK(nonlinearity_eval(NonlinKind::A, LieData::su2(), V, U).max_abs() == 0.0);
    CHECK(nonlinearity_eval(NonlinKind::A, LieData::abelian(3), U, V).max_abs() == 0.0);
    CHECK(nonlinearity_eval(NonlinKind::B, LieData::abelian(3), U, V, &V).max_abs() == 0.0);
    CHECK(NonlinOps(LieData::abelian(2)).vanishes());
}

TEST_CASE("lift basics")
{
    const auto& ctx = ext_ctx();
    GridField xi = mollified_noise(ctx, 11, 0.5);
    Realization L = build_canonical_lift(ctx, xi, some_c());
    int i0 = ctx.set.find(MultiIndex::zero());
    CHECK(rel_diff(*L.phi_minus[i0], xi) == 0.0);
    CHECK(rel_diff(*L.phi[i0], ctx.K.apply(xi)) == 0.0);
    // Pi^-_beta for beta = g + 0 + e1 only sees polynomial inputs: constant in y
    MultiIndex b = MultiIndex::delta_g(1) + MultiIndex::delta_n({0, 0, 0, 0}) + MultiIndex::delta_n({0, 1, 0, 0});
    int ib = ctx.set.find(b);
    REQUIRE(ib >= 0);
    const GridField& m = *L.phi_minus[ib];
    // away from the seam where the periodic stencil sees the jump of y_1
    double spread = 0;
    for (size_t p = 0; p < ctx.grid.points(); ++p) {
        Node y = ctx.grid.node(p);
        if (std::abs(ctx.grid.coord(1, y[1])) > 1.01 * ctx.grid.hx) continue;
        for (int c = 0; c < m.fiber; ++c) spread = std::max(spread, std::abs(m.at(p, c) - m.at(0, c)));
    }
    CHECK(m.max_abs() > 0);
    CHECK(spread < 1e-12 * m.max_abs());
}

TEST_CASE("missing parts are reported")
{
    const auto& ctx = small_ctx();
    IndexSet holey = ctx.set.restricted([](const MultiIndex& b) { return !(b == MultiIndex::delta_g(1)); });
    ModelContext c2(holey, LieData::su2(), ctx.grid);
    GridField xi = mollified_noise(c2, 1, 0.5);
    CHECK_THROWS_AS(build_canonical_lift(c2, xi, RenormConstants{}), std::invalid_argument);
}

TEST_CASE("recentering map and route equivalence")
{
    const auto& ctx = small_ctx();
    const auto& S = ctx.set;
    GridField xi = mollified_noise(ctx, 5, 0.5);
    auto c = some_c();
    Realization L = build_canonical_lift(ctx, xi, c);
    for (Node x : {Node{0, 0, 0, 0}, Node{3, 1, 2, 3}}) {
        BlockMap F = build_recenter_map(ctx, L, x);
        Realization D = build_direct(ctx, xi, c, x);
        double worst = 0;
        for (int i = 0; i < S.size(); ++i) {
            auto r = recentered_fields(ctx, L, F, i);
            worst = std::max(worst, rel_diff(r.pi, *D.phi[i]));
            if (!S.is_pp(i)) worst = std::max(worst, rel_diff(r.pi_minus, *D.phi_minus[i]));
        }
        CHECK(worst < 1e-8);
        // F^*1 = 1
        int i0 = S.find(MultiIndex::zero());
        for (int b = 0; b < S.size(); ++b)
            if (b != i0) CHECK(F.find(b, i0) == nullptr);
        BlockMap Fi = invert_triangular(F);
        CHECK(max_block_diff(compose(F, Fi), identity_map(S)) < 1e-10);
        CHECK(max_block_diff(invert_triangular(Fi), F) < 1e-10);
    }
}
