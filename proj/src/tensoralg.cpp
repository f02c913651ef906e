#include "ymr/tensoralg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

namespace ymr {

LieData LieData::su2()
{
    return from_triples(3, {{0, 1, 2, 1.0}, {1, 2, 0, 1.0}, {2, 0, 1, 1.0}});
}

LieData LieData::abelian(int dim_k)
{
    LieData d;
    d.dim_k = dim_k;
    d.f.assign(static_cast<size_t>(dim_k) * dim_k * dim_k, 0.0);
    return d;
}

LieData LieData::from_triples(int dim_k, const std::vector<std::tuple<int, int, int, double>>& t)
{
    if (dim_k <= 0) throw std::invalid_argument("lie algebra dimension must be positive");
    LieData d = abelian(dim_k);
    for (auto& [a, b, c, v] : t) {
        if (a < 0 || b < 0 || c < 0 || a >= dim_k || b >= dim_k || c >= dim_k)
            throw std::invalid_argument("structure constant index out of range");
        d.f[(a * dim_k + b) * dim_k + c] = v;
        d.f[(b * dim_k + a) * dim_k + c] = -v;
    }
    return d;
}

bool LieData::is_abelian() const
{
    for (double x : f)
        if (x != 0.0) return false;
    return true;
}

void LieData::bracket(const double* x, const double* y, double* out) const
{
    for (int c = 0; c < dim_k; ++c) out[c] = 0.0;
    for (int a = 0; a < dim_k; ++a) {
        if (x[a] == 0.0) continue;
        for (int b = 0; b < dim_k; ++b) {
            double xy = x[a] * y[b];
            if (xy == 0.0) continue;
            const double* fab = &f[(a * dim_k + b) * dim_k];
            for (int c = 0; c < dim_k; ++c) out[c] += fab[c] * xy;
        }
    }
}

double LieData::antisymmetry_residual() const
{
    double r = 0;
    for (int a = 0; a < dim_k; ++a)
        for (int b = 0; b < dim_k; ++b)
            for (int c = 0; c < dim_k; ++c) r = std::max(r, std::abs((*this)(a, b, c) + (*this)(b, a, c)));
    return r;
}

double LieData::jacobi_residual(unsigned seed, int trials) const
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    double worst = 0;
    std::vector<double> x(dim_k), y(dim_k), z(dim_k), t1(dim_k), t2(dim_k), acc(dim_k);
    for (int n = 0; n < trials; ++n) {
        for (int a = 0; a < dim_k; ++a) {
            x[a] = nd(rng);
            y[a] = nd(rng);
            z[a] = nd(rng);
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        auto cyc = [&](const std::vector<double>& p, const std::vector<double>& q, const std::vector<double>& r) {
            bracket(q.data(), r.data(), t1.data());
            bracket(p.data(), t1.data(), t2.data());
            for (int a = 0; a < dim_k; ++a) acc[a] += t2[a];
        };
        cyc(x, y, z);
        cyc(y, z, x);
        cyc(z, x, y);
        for (double v : acc) worst = std::max(worst, std::abs(v));
    }
    return worst;
}

std::vector<double> lie_bracket(const LieData& lie, const std::vector<double>& x, const std::vector<double>& y)
{
    if (static_cast<int>(x.size()) != lie.dim_k || static_cast<int>(y.size()) != lie.dim_k)
        throw std::invalid_argument("bracket operands must lie in k");
    std::vector<double> out(lie.dim_k);
    lie.bracket(x.data(), y.data(), out.data());
    return out;
}

VarCode var_code(const N4& n, int v)
{
    VarCode c = static_cast<VarCode>(parabolic_degree(n)) << 48;
    c |= static_cast<VarCode>(n[0]) << 40;
    c |= static_cast<VarCode>(n[1]) << 32;
    c |= static_cast<VarCode>(n[2]) << 24;
    c |= static_cast<VarCode>(n[3]) << 16;
    return c | static_cast<VarCode>(v);
}

N4 var_n(VarCode c)
{
    return {static_cast<int>((c >> 40) & 0xff), static_cast<int>((c >> 32) & 0xff),
            static_cast<int>((c >> 24) & 0xff), static_cast<int>((c >> 16) & 0xff)};
}

int var_v(VarCode c) { return static_cast<int>(c & 0xffff); }

Monomial Monomial::operator*(const Monomial& o) const
{
    Monomial m;
    m.g = g + o.g;
    m.vars.resize(vars.size() + o.vars.size());
    std::merge(vars.begin(), vars.end(), o.vars.begin(), o.vars.end(), m.vars.begin());
    return m;
}

MultiIndex Monomial::degree() const
{
    MultiIndex b = MultiIndex::delta_g(g);
    for (size_t i = 0; i < vars.size();) {
        size_t j = i;
        VarCode base = vars[i] >> 16;
        while (j < vars.size() && (vars[j] >> 16) == base) ++j;
        b.poly.push_back({var_n(vars[i]), static_cast<int>(j - i)});
        i = j;
    }
    return b;
}

static long factorial(int k)
{
    long r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

long Monomial::multiplicity() const
{
    long m = 1;
    for (size_t i = 0; i < vars.size();) {
        size_t j = i;
        VarCode base = vars[i] >> 16;
        while (j < vars.size() && (vars[j] >> 16) == base) ++j;
        long slot = factorial(static_cast<int>(j - i));
        for (size_t a = i; a < j;) {
            size_t b = a;
            while (b < j && vars[b] == vars[a]) ++b;
            slot /= factorial(static_cast<int>(b - a));
            a = b;
        }
        m *= slot;
        i = j;
    }
    return m;
}

WBasis::WBasis(const MultiIndex& b, int dv) : beta(b), dim_v(dv)
{
    std::vector<std::vector<std::vector<VarCode>>> per_slot;
    for (auto& [n, k] : b.poly) {
        std::vector<std::vector<VarCode>> sets;
        std::vector<VarCode> cur;
        std::function<void(int)> rec = [&](int start) {
            if (static_cast<int>(cur.size()) == k) {
                sets.push_back(cur);
                return;
            }
            for (int v = start; v < dv; ++v) {
                cur.push_back(var_code(n, v));
                rec(v);
                cur.pop_back();
            }
        };
        rec(0);
        per_slot.push_back(std::move(sets));
    }
    std::vector<VarCode> cur;
    std::function<void(size_t)> prod = [&](size_t s) {
        if (s == per_slot.size()) {
            Monomial m{b.g, cur};
            lookup[cur] = static_cast<int>(basis.size());
            basis.push_back(std::move(m));
            return;
        }
        for (auto& set : per_slot[s]) {
            cur.insert(cur.end(), set.begin(), set.end());
            prod(s + 1);
            cur.resize(cur.size() - set.size());
        }
    };
    prod(0);
}

int WBasis::find(const Monomial& m) const
{
    if (m.g != beta.g) return -1;
    auto it = lookup.find(m.vars);
    return it == lookup.end() ? -1 : it->second;
}

static long binom(long n, long k)
{
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

long dim_space(const MultiIndex& beta, int dim_v)
{
    long d = 1;
    for (auto& e : beta.poly) d *= binom(dim_v + e.second - 1, e.second);
    return d;
}

Eigen::MatrixXd product_iso(const MultiIndex& beta, const MultiIndex& gamma, int dim_v)
{
    WBasis wb(beta, dim_v), wg(gamma, dim_v), ws(beta + gamma, dim_v);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ws.dim(), wb.dim() * wg.dim());
    for (int i = 0; i < wb.dim(); ++i)
        for (int j = 0; j < wg.dim(); ++j) {
            Monomial m = wb.basis[i] * wg.basis[j];
            int r = ws.find(m);
            P(r, i * wg.dim() + j) = static_cast<double>(wb.basis[i].multiplicity() * wg.basis[j].multiplicity()) /
                                     static_cast<double>(m.multiplicity());
        }
    return P;
}

const NonlinTensors& nonlin_tensors()
{
    static const NonlinTensors t = [] {
        NonlinTensors n;
        auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    for (int l = 0; l < 3; ++l) {
                        n.A[((i * 3 + j) * 3 + k) * 3 + l] = 2 * d(i, j) * d(k, l) - d(i, l) * d(j, k);
                        n.B[((i * 3 + j) * 3 + k) * 3 + l] = d(i, l) * d(j, k);
                    }
        return n;
    }();
    return t;
}

}  // namespace ymr
