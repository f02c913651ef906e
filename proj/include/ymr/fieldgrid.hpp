#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ymr/indexcalc.hpp"

namespace ymr {

using Node = std::array<int, 4>;          // integer node offsets (t, x1, x2, x3), wrapped on use
using Point4 = std::array<double, 4>;

double parabolic_norm(const Point4& x);

// time-periodic [0,T) times space-periodic [0,L)^3, with ht = hx^2
struct ParabolicGrid {
    int Nt = 0, Nx = 0;
    double T = 0, L = 0, ht = 0, hx = 0;

    ParabolicGrid() = default;
    ParabolicGrid(int Nt, int Nx, double L);

    size_t points() const { return static_cast<size_t>(Nt) * Nx * Nx * Nx; }
    double cell_volume() const { return ht * hx * hx * hx; }
    int extent(int axis) const { return axis == 0 ? Nt : Nx; }
    double spacing(int axis) const { return axis == 0 ? ht : hx; }
    double period(int axis) const { return axis == 0 ? T : L; }

    size_t index(const Node& n) const;   // wraps each coordinate
    Node node(size_t p) const;
    // coordinate of node j along axis in the fixed fundamental domain [-N/2, N/2) * h
    double coord(int axis, int j) const;
    Point4 point(const Node& n) const;
    // torus-minimal representative of y - x
    Point4 displacement(const Node& y, const Node& x) const;
    // kernel support (parabolic radius 1) and the given radius fit in the box
    void require_fits(double radius_t, double radius_x, const std::string& what) const;

    bool operator==(const ParabolicGrid& o) const { return Nt == o.Nt && Nx == o.Nx && T == o.T && L == o.L; }
};

// angular frequency of Fourier index j along an axis
double frequency(const ParabolicGrid& g, int axis, int j);

struct GridField {
    ParabolicGrid grid;
    int fiber = 1;
    std::vector<double> data;

    GridField() = default;
    GridField(const ParabolicGrid& g, int fiber_dim) : grid(g), fiber(fiber_dim), data(g.points() * fiber_dim, 0.0) {}

    double& at(size_t p, int c) { return data[p * fiber + c]; }
    double at(size_t p, int c) const { return data[p * fiber + c]; }
    const double* ptr(size_t p) const { return &data[p * fiber]; }
    double* ptr(size_t p) { return &data[p * fiber]; }

    GridField& operator+=(const GridField& o);
    GridField& operator-=(const GridField& o);
    GridField& operator*=(double a);
    void axpy(double a, const GridField& o);
    double max_abs() const;
    double l2() const;

    void save(const std::string& path) const;
    static GridField load(const std::string& path);
    // values of one fiber component along a spatial axis through a node
    void save_csv_slice(const std::string& path, int axis, const Node& through, int component) const;
};

void require_same_shape(const GridField& a, const GridField& b, const char* what);

// iid N(0, 1/(ht*hx^3)) per component and cell
GridField sample_white_noise(const ParabolicGrid& grid, int fiber, std::uint64_t seed);
// sum_y xi(y) weight(y) for the noise sample_white_noise would draw, without storing it
std::vector<double> white_noise_pairing(const ParabolicGrid& grid, int fiber, std::uint64_t seed,
                                        const std::vector<double>& weight);
std::vector<std::vector<double>> white_noise_pairings(const ParabolicGrid& grid, int fiber, std::uint64_t seed,
                                                      const std::vector<const std::vector<double>*>& weights);

// ---- bumps and test-function profiles ----

// b(u) = exp(-1/(1-u^2)) on (-1,1), normalized to unit integral
double bump1d(double u);
// Fourier transform of the normalized bump, int b(u) cos(k u) du
double bump1d_ft(double k);

// convolution of normalized 1D bumps with the listed half-widths
struct Profile1D {
    std::vector<double> widths;
    double value(double u) const;
    double ft(double k) const;
    double support() const;
};

struct SeparableTerm {
    double coef = 1;
    std::array<Profile1D, 4> dims;
};

// finite sum of separable terms; all profiles used here are even in every coordinate
struct Profile {
    std::vector<SeparableTerm> terms;
    double value(const Point4& y) const;
    std::complex<double> ft(const Point4& k) const;   // real for even profiles
    double support_t() const;
    double support_x() const;
    // int y^m phi(y) dy, exact up to 1D quadrature
    double moment(const N4& m) const;
    Profile rescaled(double s) const;   // s^{-5} phi(t/s^2, x/s)
};

// Phi_s(t,x) = b_{s^2/2}(t) prod_i b_{s/2}(x_i); support inside the parabolic ball B_s, unit mass
Profile product_bump(double s);
// even, supported in B_{1/6}, unit mass, vanishing moments 0 < |m| <= r-1
Profile omega_profile(int r);
// omega rescaled by 2 convolved with omega
Profile psi_profile(int r);
Profile eta_profile();
// default profile of test functions phi in the scaling and Cauchy suites
Profile default_test_profile();
std::vector<double> omega_coefficients(int r, std::vector<double>* scales = nullptr);

// radial cutoff: 1 on B_{1/2}, 0 outside B_1
double cutoff_varsigma(const Point4& x);

struct BumpSet {
    Profile eta, omega, psi;
    double varsigma(const Point4& x) const { return cutoff_varsigma(x); }
};
BumpSet bump_functions(int r);

struct TestFunction {
    Profile profile;
    double lambda = 1;
    Node x{0, 0, 0, 0};
};

// sum_y field(y) phi^lambda_x(y) ht hx^3
std::vector<double> pair(const GridField& field, const TestFunction& tf);
// same sum with band-limited weights whose discrete mass equals the continuum Fourier data
std::vector<double> pair_spectral(const GridField& field, const TestFunction& tf);
// per-point weights (including the cell volume) for either pairing
std::vector<double> pairing_weights(const ParabolicGrid& grid, const TestFunction& tf, bool spectral);
std::vector<double> pair_with_weights(const GridField& field, const std::vector<double>& w);

// ---- kernel and convolution ----

struct KernelSpec {
    double m = 1.0;
};

// continuum cut-off massive heat kernel
double kernel_value(const Point4& x, const KernelSpec& spec);
// cell average of the kernel over the origin cell
double kernel_origin_average(const ParabolicGrid& grid, const KernelSpec& spec);
GridField kernel_field(const ParabolicGrid& grid, const KernelSpec& spec);

// periodic convolution sum_y K(y) f(x-y) ht hx^3, fiberwise, by FFT
GridField convolve(const GridField& kernel, const GridField& field);
// brute-force reference
GridField convolve_direct(const GridField& kernel, const GridField& field);

// convolution operator with a cached kernel spectrum
class KernelOperator {
public:
    KernelOperator(const GridField& kernel);
    GridField apply(const GridField& field) const;
    // correlation with the kernel: sum_y K(y - x) f(y) ht hx^3
    GridField apply_adjoint(const GridField& field) const;
    const ParabolicGrid& grid() const { return grid_; }

private:
    ParabolicGrid grid_;
    std::vector<std::complex<double>> spectrum_;
};

// unnormalized r2c DFT, index q * fiber + c, q over (Nt, Nx, Nx, Nx/2+1) row-major
std::vector<std::complex<double>> fourier_coefficients(const GridField& field);
size_t spectrum_size(const ParabolicGrid& g);
// Fourier multiplier applied fiberwise: symbol(omega, k1, k2, k3) real
GridField fourier_multiply(const GridField& field, const std::vector<double>& symbol);
// symbol table in r2c layout for the parabolically rescaled profile
std::vector<double> profile_symbol(const ParabolicGrid& grid, const Profile& p, double scale);

// convolution with eta^rho by the exact continuum Fourier symbol
GridField mollify(const GridField& field, double rho, const Profile& eta);

// ---- stencils ----

// spatial axes: centered difference; time: forward difference; higher orders compose
GridField fd_derivative(const GridField& field, const N4& n);
std::vector<double> stencil_at(const GridField& field, const N4& n, const Node& x);
// field(y) - sum_{|n| < cutoff} D^n field(x) (y-x)^n / n!
GridField taylor_subtract(const GridField& field, const Node& x, const GradedValue& cutoff);
// (y-x)^n in fundamental-domain coordinates
double monomial_at(const ParabolicGrid& g, const Node& y, const Node& x, const N4& n);

double n4_factorial(const N4& n);

}  // namespace ymr
