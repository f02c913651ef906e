#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ymr/fieldgrid.hpp"

using namespace ymr;

namespace {

GridField random_field(const ParabolicGrid& g, int fiber, unsigned seed)
{
    GridField f(g, fiber);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (auto& v : f.data) v = nd(rng);
    return f;
}

template <class F>
GridField tabulate(const ParabolicGrid& g, F fn)
{
    GridField f(g, 1);
    for (size_t p = 0; p < g.points(); ++p) f.at(p, 0) = fn(g.point(g.node(p)));
    return f;
}

// x1 -> -x1 about node 0
GridField reflect1(const GridField& f)
{
    GridField r(f.grid, f.fiber);
    for (size_t p = 0; p < f.grid.points(); ++p) {
        Node n = f.grid.node(p);
        Node m{n[0], -n[1], n[2], n[3]};
        for (int c = 0; c < f.fiber; ++c) r.at(f.grid.index(m), c) = f.at(p, c);
    }
    return r;
}

// nodes whose spatial coordinates stay away from the fundamental-domain seam
bool interior(const ParabolicGrid& g, const Node& n, int margin)
{
    for (int a = 1; a <= 3; ++a) {
        int j = n[a];
        if (j >= g.Nx / 2) j -= g.Nx;
        if (j < -g.Nx / 2 + margin || j > g.Nx / 2 - 1 - margin) return false;
    }
    return true;
}

// independent quadrature of the kernel mass: analytic below t0, nested midpoint above
double kernel_mass_oracle(double m)
{
    KernelSpec k{m};
    const double t0 = 0.004;
    double total = -std::expm1(-m * m * t0) / (m * m);
    const int nt = 240;
    const double t1 = 1.0;
    for (int a = 0; a < nt; ++a) {
        double ta = t0 + (t1 - t0) * (a + 0.5) / nt, dt = (t1 - t0) / nt;
        double h = std::sqrt(ta) / 5;
        int n = static_cast<int>(std::ceil(1.0 / h));
        double s = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) s += kernel_value({ta, (i + .5) * h, (j + .5) * h, (l + .5) * h}, k);
        total += 8 * s * h * h * h * dt;
    }
    return total;
}

}  // namespace

TEST_CASE("parabolic norm examples")
{
    CHECK(parabolic_norm({0, 0, 0, 0}) == 0.0);
    CHECK(parabolic_norm({1, 0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(parabolic_norm({0, 1, 1, 1}) == doctest::Approx(std::pow(3.0, 0.25)).epsilon(1e-15));
    // parabolic scaling
    CHECK(parabolic_norm({0.04, 0.2, -0.2, 0.1}) == doctest::Approx(0.2 * parabolic_norm({1, 1, -1, 0.5})));
}

TEST_CASE("white noise: determinism, centering and pairing variance")
{
    ParabolicGrid g(8, 4, 2.2);
    auto a = sample_white_noise(g, 3, 42), b = sample_white_noise(g, 3, 42);
    CHECK(a.data == b.data);
    CHECK(a.data != sample_white_noise(g, 3, 43).data);
    // grid mean per component within 5 SE
    for (int c = 0; c < 3; ++c) {
        double s = 0;
        for (size_t p = 0; p < g.points(); ++p) s += a.at(p, c);
        double sd = 1.0 / std::sqrt(g.cell_volume());
        CHECK(std::abs(s / g.points()) < 5 * sd / std::sqrt(static_cast<double>(g.points())));
    }
    // Var pair(xi, phi) = ||phi||^2 through the streaming pairing
    TestFunction tf{product_bump(1.0), 1.0, {0, 0, 0, 0}};
    auto w = pairing_weights(g, tf, false);
    double norm2 = 0;
    for (double v : w) norm2 += v * v / g.cell_volume();
    const int n = 2000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        double x = white_noise_pairing(g, 1, 1000 + i, w)[0];
        s1 += x;
        s2 += x * x;
    }
    double var = (s2 - s1 * s1 / n) / (n - 1);
    CHECK(std::abs(var - norm2) < 5 * norm2 * std::sqrt(2.0 / (n - 1)));
    // the streaming pairing sees the same noise as the stored sample
    auto xi = sample_white_noise(g, 1, 77);
    CHECK(white_noise_pairing(g, 1, 77, w)[0] == doctest::Approx(pair_with_weights(xi, w)[0]).epsilon(1e-12));
}

TEST_CASE("mollification")
{
    ParabolicGrid g(16, 8, 4.0);
    auto eta = eta_profile();
    GridField c(g, 2);
    for (size_t p = 0; p < g.points(); ++p) c.at(p, 0) = 1.5, c.at(p, 1) = -0.25;
    auto mc = mollify(c, 0.5, eta);
    for (size_t p = 0; p < g.points(); ++p) {
        CHECK(mc.at(p, 0) == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(mc.at(p, 1) == doctest::Approx(-0.25).epsilon(1e-12));
    }
    // even mollifier commutes with spatial reflection
    auto f = random_field(g, 1, 3);
    auto d = mollify(reflect1(f), 0.5, eta);
    d -= reflect1(mollify(f, 0.5, eta));
    CHECK(d.max_abs() < 1e-10);
    // a smooth periodic field is recovered as rho -> 0
    auto smooth = tabulate(g, [&](const Point4& y) {
        return std::sin(2 * std::numbers::pi * y[1] / g.L) * std::cos(2 * std::numbers::pi * y[0] / g.T);
    });
    double prev = 1e300;
    for (double rho : {0.8, 0.4, 0.2, 0.1}) {
        auto e = mollify(smooth, rho, eta);
        e -= smooth;
        CHECK(e.max_abs() < prev);
        prev = e.max_abs();
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("kernel values")
{
    KernelSpec k{1.0};
    CHECK(kernel_value({-0.1, 0, 0, 0}, k) == 0.0);
    CHECK(kernel_value({0.0, 0.1, 0, 0}, k) == 0.0);
    double t = 0.1;
    double closed = std::pow(4 * std::numbers::pi * t, -1.5) * std::exp(-t);
    CHECK(std::abs(kernel_value({t, 0, 0, 0}, k) / closed - 1) < 1e-12);
    // no support outside the unit parabolic ball
    CHECK(kernel_value({0.5, 1.0, 0.5, 0}, k) == 0.0);

    ParabolicGrid g(16, 8, 4.0);
    auto K = kernel_field(g, k);
    for (size_t p = 0; p < g.points(); ++p) {
        Point4 y = g.point(g.node(p));
        if (y[0] < 0) CHECK(K.at(p, 0) == 0.0);
    }
}

TEST_CASE("kernel mass against a refined quadrature")
{
    double oracle = kernel_mass_oracle(1.0);
    // without cutoff the mass would be 1 - e^{-1}
    CHECK(oracle < 1 - std::exp(-1.0));
    // first order in hx: the slice t = 0 only carries the origin cell
    double prev = 1;
    for (int nx : {16, 32}) {
        double hx = 2.2 / nx;
        ParabolicGrid g(static_cast<int>(std::ceil(2.05 / (hx * hx))), nx, 2.2);
        auto K = kernel_field(g, KernelSpec{1.0});
        double s = 0;
        for (double v : K.data) s += v;
        double err = std::abs(s * g.cell_volume() / oracle - 1);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 0.01);
}

TEST_CASE("convolution")
{
    ParabolicGrid g(8, 4, 2.2);
    auto a = random_field(g, 1, 1), f = random_field(g, 3, 2);
    auto fast = convolve(a, f), slow = convolve_direct(a, f);
    fast -= slow;
    CHECK(fast.max_abs() < 1e-10 * slow.max_abs());

    // one-hot kernel shifts and scales
    GridField hot(g, 1);
    Node s{1, 2, 0, 3};
    hot.at(g.index(s), 0) = 2.0;
    auto sh = convolve(hot, f);
    double worst = 0;
    for (size_t p = 0; p < g.points(); ++p) {
        Node n = g.node(p);
        Node m{n[0] - s[0], n[1] - s[1], n[2] - s[2], n[3] - s[3]};
        for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(sh.at(p, c) - 2.0 * g.cell_volume() * f.at(g.index(m), c)));
    }
    CHECK(worst < 1e-12);

    // kernel applied to a constant is the constant times the kernel mass
    ParabolicGrid g2(16, 8, 4.0);
    auto K = kernel_field(g2, KernelSpec{});
    GridField one(g2, 1);
    for (auto& v : one.data) v = 1;
    auto k1 = KernelOperator(K).apply(one);
    double mass = 0;
    for (double v : K.data) mass += v;
    mass *= g2.cell_volume();
    for (double v : k1.data) CHECK(v == doctest::Approx(mass).epsilon(1e-12));
    // adjoint: <K f, h> = <f, K^T h>
    auto f1 = random_field(g2, 1, 9), h1 = random_field(g2, 1, 10);
    KernelOperator op(K);
    auto kf = op.apply(f1), kth = op.apply_adjoint(h1);
    double l = 0, r = 0;
    for (size_t p = 0; p < g2.points(); ++p) l += kf.data[p] * h1.data[p], r += f1.data[p] * kth.data[p];
    CHECK(l == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("pairing with test functions")
{
    ParabolicGrid g(64, 16, 4.0);
    GridField c(g, 1);
    for (auto& v : c.data) v = 0.7;
    TestFunction tf{default_test_profile(), 1.0, {3, -2, 1, 0}};
    // the band-limited pairing is exact on constants; the point-sampled one only converges
    CHECK(std::abs(pair_spectral(c, tf)[0] - 0.7) < 1e-12);
    double prev = 1e300;
    for (int nx : {8, 16, 32}) {
        ParabolicGrid gg(nx * nx / 4, nx, 4.0);
        GridField cc(gg, 1);
        for (auto& v : cc.data) v = 0.7;
        double err = std::abs(pair(cc, TestFunction{default_test_profile(), 2.0, {0, 0, 0, 0}})[0] - 0.7);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 0.02);
    // linearity
    auto a = random_field(g, 1, 4), b = random_field(g, 1, 5);
    GridField ab = a;
    ab *= 2.0;
    ab.axpy(-3.0, b);
    CHECK(pair(ab, tf)[0] == doctest::Approx(2 * pair(a, tf)[0] - 3 * pair(b, tf)[0]).epsilon(1e-12));
    // omega kills polynomials of degree <= 2 around the base point
    TestFunction tw{omega_profile(3), 1.0, {0, 0, 0, 0}};
    for (N4 n : {N4{0, 1, 0, 0}, N4{0, 0, 1, 1}, N4{1, 0, 0, 0}, N4{0, 2, 0, 0}}) {
        GridField poly(g, 1);
        for (size_t p = 0; p < g.points(); ++p) poly.at(p, 0) = monomial_at(g, g.node(p), {0, 0, 0, 0}, n);
        CHECK(std::abs(pair(poly, tw)[0]) < 1e-6);
    }
}

TEST_CASE("finite differences")
{
    ParabolicGrid g(16, 8, 4.0);
    GridField c(g, 1);
    for (auto& v : c.data) v = 3.25;
    for (N4 n : {N4{1, 0, 0, 0}, N4{0, 1, 0, 0}, N4{0, 1, 1, 0}}) CHECK(fd_derivative(c, n).max_abs() == 0.0);
    auto lin = tabulate(g, [](const Point4& y) { return y[1]; });
    auto d = fd_derivative(lin, {0, 1, 0, 0});
    for (size_t p = 0; p < g.points(); ++p)
        if (interior(g, g.node(p), 1)) CHECK(d.at(p, 0) == doctest::Approx(1.0).epsilon(1e-14));
    // second-order convergence on a smooth field
    double prev = 0;
    for (int nx : {8, 16, 32}) {
        ParabolicGrid gg(1, nx, 4.0);
        double k = 2 * std::numbers::pi / gg.L;
        auto s = tabulate(gg, [&](const Point4& y) { return std::sin(k * y[1]); });
        auto ds = fd_derivative(s, {0, 1, 0, 0});
        double err = 0;
        for (size_t p = 0; p < gg.points(); ++p)
            err = std::max(err, std::abs(ds.at(p, 0) - k * std::cos(k * gg.point(gg.node(p))[1])));
        if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
        prev = err;
    }
}

TEST_CASE("Taylor subtraction")
{
    ParabolicGrid g(16, 8, 4.0);
    auto f = random_field(g, 2, 8);
    Node x{2, 1, -1, 0};
    auto same = taylor_subtract(f, x, GradedValue::integer(0));
    CHECK(same.data == f.data);
    auto r = taylor_subtract(f, x, GradedValue(Rational(1, 2)));
    for (int c = 0; c < 2; ++c) CHECK(r.at(g.index(x), c) == 0.0);
    // affine in y1 is removed with cutoff 2 away from the seam
    auto aff = tabulate(g, [&](const Point4& y) { return 0.4 + 1.5 * (y[1] - g.coord(1, x[1])); });
    auto z = taylor_subtract(aff, x, GradedValue::integer(2));
    for (size_t p = 0; p < g.points(); ++p)
        if (interior(g, g.node(p), 1)) CHECK(std::abs(z.at(p, 0)) < 1e-12);
}

TEST_CASE("bump functions")
{
    auto bs = bump_functions(3);
    CHECK(bs.psi.moment({0, 0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(bs.eta.moment({0, 0, 0, 0}) == doctest::Approx(1.0).epsilon(1e-10));
    // support of psi inside B_{1/2}
    CHECK(bs.psi.support_t() <= 0.25);
    CHECK(bs.psi.support_x() <= 0.5);
    for (double u : {0.0, 0.3, 0.6, 1.0}) {
        Point4 y{bs.psi.support_t() * u, bs.psi.support_x() * (1 - u), bs.psi.support_x() * u * 0.5, 0};
        if (parabolic_norm(y) > 0.5) CHECK(bs.psi.value(y) == 0.0);
    }
    for (N4 m : {N4{1, 0, 0, 0}, N4{0, 1, 0, 0}, N4{0, 0, 1, 1}, N4{0, 2, 0, 0}, N4{0, 0, 0, 1}})
        CHECK(std::abs(bs.omega.moment(m)) < 1e-8);
    // even in every coordinate
    Point4 y{0.01, 0.05, -0.03, 0.02};
    double v = bs.omega.value(y);
    CHECK(bs.omega.value({-0.01, 0.05, -0.03, 0.02}) == v);
    CHECK(bs.omega.value({0.01, -0.05, 0.03, -0.02}) == v);
    // cutoff
    CHECK(bs.varsigma({0.1, 0.1, 0, 0}) == 1.0);
    CHECK(bs.varsigma({0.9, 0.8, 0, 0}) == 0.0);
}

TEST_CASE("field binary format round trips")
{
    ParabolicGrid g(4, 4, 2.0);
    auto f = random_field(g, 3, 12);
    std::string path = "fieldgrid_roundtrip.bin";
    f.save(path);
    auto h = GridField::load(path);
    CHECK(h.grid == g);
    CHECK(h.fiber == 3);
    CHECK(h.data == f.data);
    std::remove(path.c_str());
}
