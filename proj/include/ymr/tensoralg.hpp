#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "ymr/indexcalc.hpp"

namespace ymr {

// structure constants of the compact algebra k, basis orthonormal for minus the invariant form
struct LieData {
    int dim_k = 0;
    std::vector<double> f;   // f[(a*dim_k + b)*dim_k + c]

    static LieData su2();
    static LieData abelian(int dim_k);
    // triples (a, b, c, value) with antisymmetric completion in (a, b)
    static LieData from_triples(int dim_k, const std::vector<std::tuple<int, int, int, double>>& t);

    double operator()(int a, int b, int c) const { return f[(a * dim_k + b) * dim_k + c]; }
    bool is_abelian() const;
    int dim_v() const { return 3 * dim_k; }

    // out = [x, y] for x, y in k
    void bracket(const double* x, const double* y, double* out) const;
    double antisymmetry_residual() const;
    double jacobi_residual(unsigned seed, int trials = 16) const;
};

std::vector<double> lie_bracket(const LieData& lie, const std::vector<double>& x, const std::vector<double>& y);

// V = k (x) R^3 with component index v = i*dim_k + a (spatial i, algebra a)
inline int v_index(int i, int a, int dim_k) { return i * dim_k + a; }

// formal variable z^v_n packed so that integer order is (|n|, n0..n3, v)
using VarCode = std::uint64_t;
VarCode var_code(const N4& n, int v);
N4 var_n(VarCode c);
int var_v(VarCode c);

// monomial z_g^g * prod z^{v}_{n}; vars sorted ascending
struct Monomial {
    int g = 0;
    std::vector<VarCode> vars;
    bool operator<(const Monomial& o) const { return g != o.g ? g < o.g : vars < o.vars; }
    bool operator==(const Monomial& o) const { return g == o.g && vars == o.vars; }
    Monomial operator*(const Monomial& o) const;
    MultiIndex degree() const;
    // number of ordered slot arrangements, prod_n k_n! / prod_v c_v!
    long multiplicity() const;
};

// basis of W_beta: the coefficients of the z-monomials of z^beta
struct WBasis {
    MultiIndex beta;
    int dim_v = 0;
    std::vector<Monomial> basis;
    std::map<std::vector<VarCode>, int> lookup;

    WBasis() = default;
    WBasis(const MultiIndex& b, int dim_v);
    int dim() const { return static_cast<int>(basis.size()); }
    int find(const Monomial& m) const;   // -1 if absent
};

long dim_space(const MultiIndex& beta, int dim_v);

// W_beta (x) W_gamma -> W_{beta+gamma}; column index = i*dim(W_gamma) + j
Eigen::MatrixXd product_iso(const MultiIndex& beta, const MultiIndex& gamma, int dim_v);

struct NonlinTensors {
    std::array<double, 81> A{}, B{};   // [((i*3+j)*3+k)*3+l]
    double a(int i, int j, int k, int l) const { return A[((i * 3 + j) * 3 + k) * 3 + l]; }
    double b(int i, int j, int k, int l) const { return B[((i * 3 + j) * 3 + k) * 3 + l]; }
};
const NonlinTensors& nonlin_tensors();

}  // namespace ymr
