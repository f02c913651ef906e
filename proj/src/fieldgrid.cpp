#include "ymr/fieldgrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>

namespace ymr {

namespace {

template <class F>
double integrate(F f, double a, double b, double tol = 1e-14)
{
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

int wrap(int j, int n)
{
    int r = j % n;
    return r < 0 ? r + n : r;
}

std::mutex& fftw_mutex()
{
    static std::mutex m;
    return m;
}

size_t spectrum_points(const ParabolicGrid& g)
{
    return static_cast<size_t>(g.Nt) * g.Nx * g.Nx * (g.Nx / 2 + 1);
}

std::vector<std::complex<double>> forward(const GridField& f)
{
    const auto& g = f.grid;
    std::vector<std::complex<double>> out(spectrum_points(g) * f.fiber);
    std::vector<double> in = f.data;   // planning may touch the input under some flags
    int n[4] = {g.Nt, g.Nx, g.Nx, g.Nx};
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        plan = fftw_plan_many_dft_r2c(4, n, f.fiber, in.data(), nullptr, f.fiber, 1,
                                      reinterpret_cast<fftw_complex*>(out.data()), nullptr, f.fiber, 1,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

GridField backward(std::vector<std::complex<double>>& spec, const ParabolicGrid& g, int fiber)
{
    GridField f(g, fiber);
    int n[4] = {g.Nt, g.Nx, g.Nx, g.Nx};
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        plan = fftw_plan_many_dft_c2r(4, n, fiber, reinterpret_cast<fftw_complex*>(spec.data()), nullptr, fiber, 1,
                                      f.data.data(), nullptr, fiber, 1, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        fftw_destroy_plan(plan);
    }
    f *= 1.0 / static_cast<double>(g.points());
    return f;
}

double bump_raw(double u)
{
    double s = 1.0 - u * u;
    return s > 0 ? std::exp(-1.0 / s) : 0.0;
}

double bump_mass()
{
    static const double z = integrate(bump_raw, -1.0, 1.0);
    return z;
}

double bump_moment(int k)
{
    if (k % 2) return 0.0;
    static std::vector<double> cache;
    static std::mutex m;
    std::lock_guard<std::mutex> lk(m);
    while (static_cast<int>(cache.size()) <= k) {
        int j = static_cast<int>(cache.size());
        cache.push_back(integrate([j](double u) { return std::pow(u, j) * bump_raw(u); }, -1.0, 1.0) / bump_mass());
    }
    return cache[k];
}

double binomial(int n, int k)
{
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

double parabolic_norm(const Point4& x)
{
    return std::pow(x[0] * x[0] + std::pow(x[1], 4) + std::pow(x[2], 4) + std::pow(x[3], 4), 0.25);
}

ParabolicGrid::ParabolicGrid(int nt, int nx, double l) : Nt(nt), Nx(nx), L(l)
{
    if (nt <= 0 || nx <= 0 || !(l > 0)) throw std::invalid_argument("grid sizes must be positive");
    hx = L / Nx;
    ht = hx * hx;
    T = Nt * ht;
}

size_t ParabolicGrid::index(const Node& n) const
{
    return ((static_cast<size_t>(wrap(n[0], Nt)) * Nx + wrap(n[1], Nx)) * Nx + wrap(n[2], Nx)) * Nx + wrap(n[3], Nx);
}

Node ParabolicGrid::node(size_t p) const
{
    Node n;
    n[3] = static_cast<int>(p % Nx);
    p /= Nx;
    n[2] = static_cast<int>(p % Nx);
    p /= Nx;
    n[1] = static_cast<int>(p % Nx);
    n[0] = static_cast<int>(p / Nx);
    return n;
}

double ParabolicGrid::coord(int axis, int j) const
{
    int n = extent(axis);
    j = wrap(j, n);
    return (2 * j < n ? j : j - n) * spacing(axis);
}

Point4 ParabolicGrid::point(const Node& n) const
{
    return {coord(0, n[0]), coord(1, n[1]), coord(2, n[2]), coord(3, n[3])};
}

Point4 ParabolicGrid::displacement(const Node& y, const Node& x) const
{
    Point4 d;
    for (int a = 0; a < 4; ++a) d[a] = coord(a, y[a] - x[a]);
    return d;
}

void ParabolicGrid::require_fits(double rt, double rx, const std::string& what) const
{
    if (!(rt < T / 2) || !(rx < L / 2))
        throw std::invalid_argument(what + ": support does not fit in the periodic box");
}

double frequency(const ParabolicGrid& g, int axis, int j)
{
    int n = g.extent(axis);
    int jj = 2 * j <= n ? j : j - n;
    return 2.0 * std::numbers::pi * jj / g.period(axis);
}

GridField& GridField::operator+=(const GridField& o)
{
    require_same_shape(*this, o, "field sum");
    for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
}

GridField& GridField::operator-=(const GridField& o)
{
    require_same_shape(*this, o, "field difference");
    for (size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
    return *this;
}

GridField& GridField::operator*=(double a)
{
    for (auto& v : data) v *= a;
    return *this;
}

void GridField::axpy(double a, const GridField& o)
{
    require_same_shape(*this, o, "field axpy");
    for (size_t i = 0; i < data.size(); ++i) data[i] += a * o.data[i];
}

double GridField::max_abs() const
{
    double m = 0;
    for (double v : data) m = std::max(m, std::abs(v));
    return m;
}

double GridField::l2() const
{
    double s = 0;
    for (double v : data) s += v * v;
    return std::sqrt(s * grid.cell_volume());
}

void require_same_shape(const GridField& a, const GridField& b, const char* what)
{
    if (!(a.grid == b.grid) || a.fiber != b.fiber) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

void GridField::save(const std::string& path) const
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    std::int32_t nt = grid.Nt, nx = grid.Nx, fd = fiber;
    os.write(reinterpret_cast<const char*>(&nt), 4);
    os.write(reinterpret_cast<const char*>(&nx), 4);
    os.write(reinterpret_cast<const char*>(&grid.T), 8);
    os.write(reinterpret_cast<const char*>(&grid.L), 8);
    os.write(reinterpret_cast<const char*>(&fd), 4);
    os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * 8));
}

GridField GridField::load(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::int32_t nt, nx, fd;
    double T, L;
    is.read(reinterpret_cast<char*>(&nt), 4);
    is.read(reinterpret_cast<char*>(&nx), 4);
    is.read(reinterpret_cast<char*>(&T), 8);
    is.read(reinterpret_cast<char*>(&L), 8);
    is.read(reinterpret_cast<char*>(&fd), 4);
    GridField f(ParabolicGrid(nt, nx, L), fd);
    if (std::abs(f.grid.T - T) > 1e-12 * T) throw std::runtime_error("inconsistent grid header in " + path);
    is.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * 8));
    if (!is) throw std::runtime_error("truncated field file " + path);
    return f;
}

void GridField::save_csv_slice(const std::string& path, int axis, const Node& through, int component) const
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "index,coord,value\n";
    os.precision(17);
    for (int j = 0; j < grid.extent(axis); ++j) {
        Node n = through;
        n[axis] = j;
        os << j << "," << grid.coord(axis, j) << "," << at(grid.index(n), component) << "\n";
    }
}

GridField sample_white_noise(const ParabolicGrid& grid, int fiber, std::uint64_t seed)
{
    GridField f(grid, fiber);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(grid.cell_volume()));
    for (auto& v : f.data) v = nd(rng);
    return f;
}

std::vector<std::vector<double>> white_noise_pairings(const ParabolicGrid& grid, int fiber, std::uint64_t seed,
                                                      const std::vector<const std::vector<double>*>& weights)
{
    for (auto* w : weights)
        if (w->size() != grid.points()) throw std::invalid_argument("noise pairing: shape mismatch");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(grid.cell_volume()));
    const size_t nw = weights.size();
    std::vector<std::vector<double>> out(nw, std::vector<double>(fiber, 0.0));
    std::vector<double> z(fiber);
    for (size_t p = 0; p < grid.points(); ++p) {
        for (int c = 0; c < fiber; ++c) z[c] = nd(rng);
        for (size_t k = 0; k < nw; ++k) {
            double w = (*weights[k])[p];
            for (int c = 0; c < fiber; ++c) out[k][c] += z[c] * w;
        }
    }
    return out;
}

std::vector<double> white_noise_pairing(const ParabolicGrid& grid, int fiber, std::uint64_t seed,
                                        const std::vector<double>& weight)
{
    return white_noise_pairings(grid, fiber, seed, {&weight})[0];
}

double bump1d(double u) { return bump_raw(u) / bump_mass(); }

double bump1d_ft(double k)
{
    if (k == 0) return 1.0;
    // the bump is flat to all orders at +-1, so the trapezoid rule converges faster than any power;
    // adaptive quadrature stalls on the tiny oscillatory tails
    constexpr int M = 4096;
    static const std::vector<double> vals = [] {
        std::vector<double> v(M / 2 + 1);
        for (int i = 0; i <= M / 2; ++i) v[i] = bump_raw(2.0 * i / M);
        return v;
    }();
    const double h = 2.0 / M;
    double acc = 0.5 * vals[0];
    for (int i = 1; i < M / 2; ++i) acc += vals[i] * std::cos(k * i * h);
    return 2.0 * h * acc / bump_mass();
}

double Profile1D::value(double u) const
{
    if (widths.size() == 1) return bump1d(u / widths[0]) / widths[0];
    if (widths.size() == 2) {
        double a = widths[0], b = widths[1];
        double lo = std::max(-a, u - b), hi = std::min(a, u + b);
        if (hi <= lo) return 0.0;
        return integrate([&](double v) { return bump1d(v / a) / a * bump1d((u - v) / b) / b; }, lo, hi, 1e-13);
    }
    throw std::logic_error("profile with more than two convolved bumps");
}

double Profile1D::ft(double k) const
{
    double r = 1;
    for (double w : widths) r *= bump1d_ft(k * w);
    return r;
}

double Profile1D::support() const
{
    double s = 0;
    for (double w : widths) s += w;
    return s;
}

namespace {

double profile1d_moment(const Profile1D& p, int k)
{
    // moments of a convolution combine binomially
    std::vector<double> mom(k + 1, 0.0);
    mom[0] = 1.0;
    for (double w : p.widths) {
        std::vector<double> next(k + 1, 0.0);
        for (int n = 0; n <= k; ++n)
            for (int j = 0; j <= n; ++j) next[n] += binomial(n, j) * mom[j] * std::pow(w, n - j) * bump_moment(n - j);
        mom = next;
    }
    return mom[k];
}

}  // namespace

double Profile::value(const Point4& y) const
{
    double v = 0;
    for (auto& t : terms) {
        double p = t.coef;
        for (int d = 0; d < 4 && p != 0.0; ++d) p *= t.dims[d].value(y[d]);
        v += p;
    }
    return v;
}

std::complex<double> Profile::ft(const Point4& k) const
{
    double v = 0;
    for (auto& t : terms) {
        double p = t.coef;
        for (int d = 0; d < 4; ++d) p *= t.dims[d].ft(k[d]);
        v += p;
    }
    return v;
}

double Profile::support_t() const
{
    double s = 0;
    for (auto& t : terms) s = std::max(s, t.dims[0].support());
    return s;
}

double Profile::support_x() const
{
    double s = 0;
    for (auto& t : terms)
        for (int d = 1; d < 4; ++d) s = std::max(s, t.dims[d].support());
    return s;
}

double Profile::moment(const N4& m) const
{
    double v = 0;
    for (auto& t : terms) {
        double p = t.coef;
        for (int d = 0; d < 4; ++d) p *= profile1d_moment(t.dims[d], m[d]);
        v += p;
    }
    return v;
}

Profile Profile::rescaled(double s) const
{
    Profile p = *this;
    for (auto& t : p.terms)
        for (int d = 0; d < 4; ++d)
            for (auto& w : t.dims[d].widths) w *= d == 0 ? s * s : s;
    return p;
}

Profile product_bump(double s)
{
    SeparableTerm t;
    t.dims[0].widths = {s * s / 2};
    for (int d = 1; d < 4; ++d) t.dims[d].widths = {s / 2};
    return Profile{{t}};
}

std::vector<double> omega_coefficients(int r, std::vector<double>* scales)
{
    if (r < 3) throw std::invalid_argument("smoothness r must be at least 3");
    int n = 1 + (r - 1) / 2;
    std::vector<double> s(n);
    for (int j = 0; j < n; ++j) s[j] = (1.0 / 6.0) / std::pow(2.0, j);
    // sum_j a_j s_j^{2q} = [q == 0] for q = 0..n-1 (odd moments vanish by evenness)
    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(0) = 1.0;
    for (int q = 0; q < n; ++q)
        for (int j = 0; j < n; ++j) M(q, j) = std::pow(s[j], 2 * q);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible()) throw std::runtime_error("moment system for omega is singular");
    Eigen::VectorXd a = lu.solve(rhs);
    if (scales) *scales = s;
    return std::vector<double>(a.data(), a.data() + n);
}

Profile omega_profile(int r)
{
    std::vector<double> s;
    auto a = omega_coefficients(r, &s);
    Profile p;
    for (size_t j = 0; j < a.size(); ++j) {
        auto t = product_bump(s[j]).terms[0];
        t.coef = a[j];
        p.terms.push_back(t);
    }
    return p;
}

Profile psi_profile(int r)
{
    std::vector<double> s;
    auto a = omega_coefficients(r, &s);
    Profile p;
    for (size_t j = 0; j < a.size(); ++j)
        for (size_t k = 0; k < a.size(); ++k) {
            SeparableTerm t;
            t.coef = a[j] * a[k];
            t.dims[0].widths = {2 * s[j] * s[j], s[k] * s[k] / 2};
            for (int d = 1; d < 4; ++d) t.dims[d].widths = {s[j], s[k] / 2};
            p.terms.push_back(t);
        }
    return p;
}

Profile eta_profile() { return product_bump(1.0); }

Profile default_test_profile() { return product_bump(0.5); }

double cutoff_varsigma(const Point4& x)
{
    auto h = [](double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; };
    double u = x[0] * x[0] + std::pow(x[1], 4) + std::pow(x[2], 4) + std::pow(x[3], 4);
    double a = h(1.0 - u), b = h(u - 1.0 / 16.0);
    return a / (a + b);
}

BumpSet bump_functions(int r) { return {eta_profile(), omega_profile(r), psi_profile(r)}; }

std::vector<double> pairing_weights(const ParabolicGrid& grid, const TestFunction& tf, bool spectral)
{
    double lam = tf.lambda;
    grid.require_fits(lam * lam * tf.profile.support_t(), lam * tf.profile.support_x(), "test function");
    std::vector<double> w(grid.points(), 0.0);
    for (auto& term : tf.profile.terms) {
        std::array<std::vector<double>, 4> tab;
        for (int d = 0; d < 4; ++d) {
            int n = grid.extent(d);
            double scale = d == 0 ? lam * lam : lam;
            tab[d].assign(n, 0.0);
            if (!spectral) {
                for (int j = 0; j < n; ++j) {
                    double u = grid.coord(d, j - tf.x[d]);
                    tab[d][j] = term.dims[d].value(u / scale) / scale;
                }
            } else {
                std::vector<double> sym(n);
                for (int q = 0; q < n; ++q) sym[q] = term.dims[d].ft(scale * frequency(grid, d, q));
                for (int j = 0; j < n; ++j) {
                    double acc = 0;
                    for (int q = 0; q < n; ++q)
                        acc += sym[q] * std::cos(frequency(grid, d, q) * (j - tf.x[d]) * grid.spacing(d));
                    tab[d][j] = acc / grid.period(d);
                }
            }
        }
        double cv = grid.cell_volume() * term.coef;
        for (size_t p = 0; p < grid.points(); ++p) {
            Node y = grid.node(p);
            w[p] += cv * tab[0][y[0]] * tab[1][y[1]] * tab[2][y[2]] * tab[3][y[3]];
        }
    }
    return w;
}

std::vector<double> pair_with_weights(const GridField& field, const std::vector<double>& w)
{
    if (w.size() != field.grid.points()) throw std::invalid_argument("pairing weights: shape mismatch");
    std::vector<double> out(field.fiber, 0.0);
    for (size_t p = 0; p < w.size(); ++p) {
        if (w[p] == 0.0) continue;
        const double* v = field.ptr(p);
        for (int c = 0; c < field.fiber; ++c) out[c] += w[p] * v[c];
    }
    return out;
}

std::vector<double> pair(const GridField& field, const TestFunction& tf)
{
    return pair_with_weights(field, pairing_weights(field.grid, tf, false));
}

std::vector<double> pair_spectral(const GridField& field, const TestFunction& tf)
{
    return pair_with_weights(field, pairing_weights(field.grid, tf, true));
}

double kernel_value(const Point4& x, const KernelSpec& spec)
{
    double t = x[0];
    if (t <= 0) return 0.0;
    double r2 = x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    double c = cutoff_varsigma(x);
    if (c == 0.0) return 0.0;
    return std::pow(4 * std::numbers::pi * t, -1.5) * std::exp(-r2 / (4 * t) - spec.m * spec.m * t) * c;
}

double kernel_origin_average(const ParabolicGrid& grid, const KernelSpec& spec)
{
    Point4 corner{grid.ht / 2, grid.hx / 2, grid.hx / 2, grid.hx / 2};
    if (!(parabolic_norm(corner) < 0.5))
        throw std::invalid_argument("grid too coarse: origin cell must lie where the kernel cutoff equals one");
    double h = grid.hx, m2 = spec.m * spec.m;
    double v = integrate(
        [&](double t) {
            if (t <= 0) return 0.0;
            double e = std::erf(h / (4 * std::sqrt(t)));
            return std::exp(-m2 * t) * e * e * e;
        },
        0.0, grid.ht / 2, 1e-15);
    return v / grid.cell_volume();
}

GridField kernel_field(const ParabolicGrid& grid, const KernelSpec& spec)
{
    if (!(spec.m > 0)) throw std::invalid_argument("kernel mass must be positive");
    grid.require_fits(1.0, 1.0, "kernel");
    GridField K(grid, 1);
    for (size_t p = 0; p < grid.points(); ++p) K.data[p] = kernel_value(grid.point(grid.node(p)), spec);
    K.data[0] = kernel_origin_average(grid, spec);
    return K;
}

KernelOperator::KernelOperator(const GridField& kernel) : grid_(kernel.grid)
{
    if (kernel.fiber != 1) throw std::invalid_argument("kernel must be scalar");
    spectrum_ = forward(kernel);
    for (auto& c : spectrum_) c *= grid_.cell_volume();
}

GridField KernelOperator::apply(const GridField& field) const
{
    if (!(field.grid == grid_)) throw std::invalid_argument("convolution: grid mismatch");
    auto spec = forward(field);
    size_t np = spectrum_.size();
    int fb = field.fiber;
    for (size_t q = 0; q < np; ++q) {
        auto k = spectrum_[q];
        for (int c = 0; c < fb; ++c) spec[q * fb + c] *= k;
    }
    return backward(spec, grid_, fb);
}

GridField KernelOperator::apply_adjoint(const GridField& field) const
{
    if (!(field.grid == grid_)) throw std::invalid_argument("convolution: grid mismatch");
    auto spec = forward(field);
    size_t np = spectrum_.size();
    int fb = field.fiber;
    for (size_t q = 0; q < np; ++q) {
        auto k = std::conj(spectrum_[q]);
        for (int c = 0; c < fb; ++c) spec[q * fb + c] *= k;
    }
    return backward(spec, grid_, fb);
}

GridField convolve(const GridField& kernel, const GridField& field)
{
    if (!(kernel.grid == field.grid)) throw std::invalid_argument("convolution: grid mismatch");
    return KernelOperator(kernel).apply(field);
}

GridField convolve_direct(const GridField& kernel, const GridField& field)
{
    if (!(kernel.grid == field.grid) || kernel.fiber != 1) throw std::invalid_argument("convolution: shape mismatch");
    const auto& g = field.grid;
    GridField out(g, field.fiber);
    double cv = g.cell_volume();
    for (size_t px = 0; px < g.points(); ++px) {
        Node x = g.node(px);
        for (size_t py = 0; py < g.points(); ++py) {
            double k = kernel.data[py];
            if (k == 0.0) continue;
            Node y = g.node(py);
            size_t q = g.index({x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3]});
            for (int c = 0; c < field.fiber; ++c) out.at(px, c) += k * field.at(q, c) * cv;
        }
    }
    return out;
}

std::vector<double> profile_symbol(const ParabolicGrid& g, const Profile& p, double scale)
{
    std::vector<double> sym(spectrum_points(g));
    int h = g.Nx / 2 + 1;
    // separable terms: tabulate 1D transforms once
    std::vector<std::array<std::vector<double>, 4>> tabs;
    for (auto& t : p.terms) {
        std::array<std::vector<double>, 4> tab;
        for (int d = 0; d < 4; ++d) {
            int n = d == 3 ? h : g.extent(d);
            double s = d == 0 ? scale * scale : scale;
            for (int q = 0; q < n; ++q) tab[d].push_back(t.dims[d].ft(s * frequency(g, d, q)));
        }
        tabs.push_back(std::move(tab));
    }
    size_t i = 0;
    for (int a = 0; a < g.Nt; ++a)
        for (int b = 0; b < g.Nx; ++b)
            for (int c = 0; c < g.Nx; ++c)
                for (int d = 0; d < h; ++d, ++i) {
                    double v = 0;
                    for (size_t k = 0; k < tabs.size(); ++k)
                        v += p.terms[k].coef * tabs[k][0][a] * tabs[k][1][b] * tabs[k][2][c] * tabs[k][3][d];
                    sym[i] = v;
                }
    return sym;
}

std::vector<std::complex<double>> fourier_coefficients(const GridField& field) { return forward(field); }

size_t spectrum_size(const ParabolicGrid& g) { return spectrum_points(g); }

GridField fourier_multiply(const GridField& field, const std::vector<double>& symbol)
{
    if (symbol.size() != spectrum_points(field.grid)) throw std::invalid_argument("symbol: shape mismatch");
    auto spec = forward(field);
    int fb = field.fiber;
    for (size_t q = 0; q < symbol.size(); ++q)
        for (int c = 0; c < fb; ++c) spec[q * fb + c] *= symbol[q];
    return backward(spec, field.grid, fb);
}

GridField mollify(const GridField& field, double rho, const Profile& eta)
{
    if (!(rho > 0)) throw std::invalid_argument("mollification scale must be positive");
    field.grid.require_fits(rho * rho * eta.support_t(), rho * eta.support_x(), "mollifier");
    return fourier_multiply(field, profile_symbol(field.grid, eta, rho));
}

namespace {

GridField derivative_once(const GridField& f, int axis)
{
    const auto& g = f.grid;
    GridField out(g, f.fiber);
    double h = g.spacing(axis);
    for (size_t p = 0; p < g.points(); ++p) {
        Node n = g.node(p);
        Node up = n, dn = n;
        up[axis] += 1;
        double scale;
        if (axis == 0) {
            scale = 1.0 / h;
        } else {
            dn[axis] -= 1;
            scale = 0.5 / h;
        }
        const double* a = f.ptr(g.index(up));
        const double* b = f.ptr(g.index(dn));
        double* o = out.ptr(p);
        for (int c = 0; c < f.fiber; ++c) o[c] = (a[c] - b[c]) * scale;
    }
    return out;
}

}  // namespace

GridField fd_derivative(const GridField& field, const N4& n)
{
    GridField f = field;
    for (int a = 0; a < 4; ++a)
        for (int k = 0; k < n[a]; ++k) f = derivative_once(f, a);
    return f;
}

std::vector<double> stencil_at(const GridField& field, const N4& n, const Node& x)
{
    int axis = -1;
    for (int a = 0; a < 4; ++a)
        if (n[a] > 0) {
            axis = a;
            break;
        }
    if (axis < 0) {
        const double* v = field.ptr(field.grid.index(x));
        return std::vector<double>(v, v + field.fiber);
    }
    N4 m = n;
    m[axis] -= 1;
    Node up = x, dn = x;
    up[axis] += 1;
    double h = field.grid.spacing(axis);
    double scale = axis == 0 ? 1.0 / h : 0.5 / h;
    if (axis != 0) dn[axis] -= 1;
    auto a = stencil_at(field, m, up);
    auto b = stencil_at(field, m, dn);
    for (size_t c = 0; c < a.size(); ++c) a[c] = (a[c] - b[c]) * scale;
    return a;
}

double n4_factorial(const N4& n)
{
    double r = 1;
    for (int a = 0; a < 4; ++a)
        for (int k = 2; k <= n[a]; ++k) r *= k;
    return r;
}

double monomial_at(const ParabolicGrid& g, const Node& y, const Node& x, const N4& n)
{
    double r = 1;
    for (int a = 0; a < 4; ++a)
        if (n[a]) r *= std::pow(g.coord(a, y[a]) - g.coord(a, x[a]), n[a]);
    return r;
}

GridField taylor_subtract(const GridField& field, const Node& x, const GradedValue& cutoff)
{
    GridField out = field;
    if (!(GradedValue::integer(0) < cutoff)) return out;
    long maxdeg = static_cast<long>(std::ceil(boost::rational_cast<double>(cutoff.r)));
    for (auto& n : n4_upto(static_cast<int>(maxdeg))) {
        if (!(GradedValue::integer(parabolic_degree(n)) < cutoff)) continue;
        auto d = stencil_at(field, n, x);
        double inv = 1.0 / n4_factorial(n);
        for (size_t p = 0; p < field.grid.points(); ++p) {
            double mono = monomial_at(field.grid, field.grid.node(p), x, n) * inv;
            if (mono == 0.0) continue;
            double* o = out.ptr(p);
            for (int c = 0; c < field.fiber; ++c) o[c] -= d[c] * mono;
        }
    }
    return out;
}

}  // namespace ymr
