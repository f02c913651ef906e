#include "ymr/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "ymr/renorm.hpp"
#include "ymr/runtime.hpp"

namespace ymr {

void SuiteReport::record(const std::string& name, double value, double tol, const std::string& where, bool fatal)
{
    bool ok = value <= tol;
    for (auto& it : items)
        if (it.name == name) {
            if (value > it.value) {
                it.value = value;
                it.where = where;
            }
            it.pass = it.pass && ok;
            return;
        }
    items.push_back({name, value, tol, ok, fatal, where});
}

const CheckItem* SuiteReport::find(const std::string& name) const
{
    for (auto& it : items)
        if (it.name == name) return &it;
    return nullptr;
}

bool SuiteReport::pass() const
{
    for (auto& it : items)
        if (it.fatal && !it.pass) return false;
    return true;
}

nlohmann::json SuiteReport::to_json() const
{
    nlohmann::json arr = nlohmann::json::array();
    for (auto& it : items)
        arr.push_back({{"check", it.name},
                       {"value", it.value},
                       {"tol", it.tol},
                       {"pass", it.pass},
                       {"fatal", it.fatal},
                       {"where", it.where}});
    return {{"suite", suite}, {"pass", pass()}, {"checks", arr}};
}

double relative_difference(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("relative difference: size mismatch");
    double d = 0, s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        s = std::max({s, std::abs(a[i]), std::abs(b[i])});
    }
    return s == 0 ? 0 : d / s;
}

double relative_difference(const GridField& a, const GridField& b)
{
    require_same_shape(a, b, "relative difference");
    return relative_difference(a.data, b.data);
}

namespace {

std::string node_str(const Node& x)
{
    std::ostringstream os;
    os << "(" << x[0] << "," << x[1] << "," << x[2] << "," << x[3] << ")";
    return os.str();
}

std::string pair_str(const IndexSet& S, int b, int g)
{
    return "beta=" + S.list[b].str() + " gamma=" + S.list[g].str();
}

double block_scale(const BlockMap& m)
{
    double s = 1.0;
    for (auto& [k, b] : m.blocks) s = std::max(s, b.cwiseAbs().maxCoeff());
    return s;
}

double binom_n4(const N4& m, const N4& n)
{
    double r = 1;
    for (int a = 0; a < 4; ++a) {
        if (n[a] > m[a]) return 0.0;
        for (int i = 1; i <= n[a]; ++i) r = r * (m[a] - n[a] + i) / i;
    }
    return r;
}

double power_n4(const Point4& x, const N4& n)
{
    double r = 1;
    for (int a = 0; a < 4; ++a)
        if (n[a]) r *= std::pow(x[a], n[a]);
    return r;
}

// sum_gamma Pi_{x gamma} G_beta^gamma
GridField apply_group(const ModelContext& ctx, const std::vector<GridField>& pix, const BlockMap& G, int beta)
{
    const IndexSet& S = ctx.set;
    const int dv = S.dim_v;
    GridField out(ctx.grid, S.fiber(beta));
    for (int g = 0; g < S.size(); ++g) {
        const Eigen::MatrixXd* blk = G.find(beta, g);
        if (!blk) continue;
        const GridField& in = pix[g];
        for (size_t p = 0; p < ctx.grid.points(); ++p) {
            const double* a = in.ptr(p);
            double* o = out.ptr(p);
            for (int wi = 0; wi < S.dim(g); ++wi)
                for (int wo = 0; wo < S.dim(beta); ++wo) {
                    double m = (*blk)(wi, wo);
                    if (m == 0.0) continue;
                    for (int v = 0; v < dv; ++v) o[wo * dv + v] += m * a[wi * dv + v];
                }
        }
    }
    return out;
}

bool in_Mgeq0_or_pp(const MultiIndex& b)
{
    auto m = membership(b);
    return m.in_Mgeq0 || m.in_Mpp;
}

// slots of beta as a sorted list of N4 with repetition
std::vector<N4> slot_list(const MultiIndex& b)
{
    std::vector<N4> out;
    for (auto& [n, k] : b.poly)
        for (int i = 0; i < k; ++i) out.push_back(n);
    return out;
}

}  // namespace

double vanishing_derivative_check(const ModelContext& ctx, const GridField& pi_x, int beta, const Node& x)
{
    const GradedValue& gb = ctx.set.grades[beta];
    double scale = pi_x.max_abs();
    if (scale == 0) return 0;
    double worst = 0;
    for (auto& n : n4_upto(3)) {
        if (!(GradedValue::integer(parabolic_degree(n)) < gb)) continue;
        for (double v : stencil_at(pi_x, n, x)) worst = std::max(worst, std::abs(v));
    }
    return worst / scale;
}

SuiteReport algebraic_invariant_suite(const ModelContext& ctx, const SuiteSettings& s)
{
    const IndexSet& S = ctx.set;
    const int n = S.size();
    const int nb = static_cast<int>(s.base_points.size());
    if (nb < 3) throw std::invalid_argument("algebra suite needs at least three base points");
    SuiteReport rep;
    rep.suite = "algebra";
    std::vector<GradedValue> mgrade;
    for (auto& b : S.list) mgrade.push_back(grade(b, GradeKind::modified));
    std::vector<Point4> xc;
    for (auto& x : s.base_points) xc.push_back(node_coords(ctx.grid, x));

    for (int smp = 0; smp < s.nsamples; ++smp) {
        std::string tag = "sample " + std::to_string(smp);
        GridField xi = mollified_noise(ctx, derive_seed(s.seed, smp), s.rho);
        Realization lift = build_canonical_lift(ctx, xi, s.c);
        std::vector<BlockMap> F, Fi;
        std::vector<std::vector<GridField>> pix(nb);
        for (int a = 0; a < nb; ++a) {
            F.push_back(build_recenter_map(ctx, lift, s.base_points[a]));
            Fi.push_back(invert_triangular(F.back()));
            for (int b = 0; b < n; ++b) pix[a].push_back(recentered_fields(ctx, lift, F[a], b).pi);
            for (int b = 0; b < n; ++b)
                rep.record("vanishing derivatives at the base point",
                           vanishing_derivative_check(ctx, pix[a][b], b, s.base_points[a]), 1e-10,
                           tag + " x=" + node_str(s.base_points[a]) + " beta=" + S.list[b].str());
        }
        std::vector<std::vector<BlockMap>> G(nb, std::vector<BlockMap>(nb));
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b) G[a][b] = compose(Fi[a], F[b]);

        for (int a = 0; a < nb; ++a) {
            rep.record("G_xx identity", max_block_diff(G[a][a], identity_map(S)) / block_scale(F[a]), 1e-9,
                       tag + " x=" + node_str(s.base_points[a]));
            for (int b = 0; b < nb; ++b) {
                if (a == b) continue;
                const BlockMap& g = G[a][b];
                std::string w = tag + " x=" + node_str(s.base_points[a]) + " y=" + node_str(s.base_points[b]);
                Point4 d{xc[a][0] - xc[b][0], xc[a][1] - xc[b][1], xc[a][2] - xc[b][2], xc[a][3] - xc[b][3]};
                double scale = block_scale(g);
                // polynomial blocks
                for (int bi = 0; bi < n; ++bi) {
                    if (!S.is_pp(bi)) continue;
                    for (int gi = 0; gi < n; ++gi) {
                        if (!S.is_pp(gi)) continue;
                        N4 m = S.list[bi].poly[0].first, nn = S.list[gi].poly[0].first;
                        double c = binom_n4(m, nn);
                        double e = 0;
                        if (c != 0) {
                            N4 diff{m[0] - nn[0], m[1] - nn[1], m[2] - nn[2], m[3] - nn[3]};
                            e = c * power_n4(d, diff);
                        }
                        Eigen::MatrixXd expect = e * Eigen::MatrixXd::Identity(S.dim_v, S.dim_v);
                        double err = (g.block(bi, gi) - expect).cwiseAbs().maxCoeff() / std::max(1.0, std::abs(e));
                        rep.record("polynomial blocks", err, 1e-12, w + " " + pair_str(S, bi, gi));
                    }
                }
                // triangularity and sector zeros, exact
                for (auto& [key, blk] : g.blocks) {
                    auto [bi, gi] = key;
                    double mag = blk.cwiseAbs().maxCoeff();
                    if (mag == 0) continue;
                    double tri = 0;
                    if (S.grades[bi] < S.grades[gi]) tri = mag;
                    if (bi != gi && !(mgrade[gi] < mgrade[bi])) tri = mag;
                    rep.record("triangularity zeros", tri, 0.0, w + " " + pair_str(S, bi, gi));
                    double sec = (in_Mgeq0_or_pp(S.list[gi]) && !in_Mgeq0_or_pp(S.list[bi])) ? mag : 0.0;
                    rep.record("sector zeros", sec, 0.0, w + " " + pair_str(S, bi, gi));
                }
                rep.record("multiplicativity of G", max_block_diff(rebuild_from_pp_rows(g), g) / scale, 1e-10, w);
                for (int bi = 0; bi < n; ++bi)
                    rep.record("Pi_y = Pi_x G_xy", relative_difference(apply_group(ctx, pix[a], g, bi), pix[b][bi]),
                               1e-8, w + " beta=" + S.list[bi].str());
            }
        }
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b)
                for (int c = 0; c < nb; ++c) {
                    if (a == b || b == c || a == c) continue;
                    BlockMap lhs = compose(G[a][b], G[b][c]);
                    rep.record("cocycle", max_block_diff(lhs, G[a][c]) / block_scale(G[a][c]), 1e-9,
                               tag + " x=" + node_str(s.base_points[a]) + " y=" + node_str(s.base_points[b]) +
                                   " z=" + node_str(s.base_points[c]));
                }
        // monomial form of G between b2/b3 indices differing in one slot
        for (int bi = 0; bi < n; ++bi)
            for (int gi = 0; gi < n; ++gi) {
                const auto &B = S.list[bi], &C = S.list[gi];
                if (bi == gi || in_Mgeq0_or_pp(B) || in_Mgeq0_or_pp(C) || B.g != C.g) continue;
                auto sb = slot_list(B), sc = slot_list(C);
                if (sb.size() != sc.size()) continue;
                std::vector<N4> only_b, only_c;
                std::set_difference(sb.begin(), sb.end(), sc.begin(), sc.end(), std::back_inserter(only_b));
                std::set_difference(sc.begin(), sc.end(), sb.begin(), sb.end(), std::back_inserter(only_c));
                if (only_b.size() != 1 || only_c.size() != 1) continue;
                N4 k = only_b[0], m = only_c[0];
                bool le = true;
                for (int q = 0; q < 4; ++q) le = le && m[q] <= k[q];
                if (!le) continue;
                N4 diff{k[0] - m[0], k[1] - m[1], k[2] - m[2], k[3] - m[3]};
                std::optional<Eigen::MatrixXd> ref;
                double worst = 0;
                for (int a = 0; a < nb; ++a)
                    for (int b = 0; b < nb; ++b) {
                        if (a == b) continue;
                        Point4 d{xc[a][0] - xc[b][0], xc[a][1] - xc[b][1], xc[a][2] - xc[b][2], xc[a][3] - xc[b][3]};
                        double mono = power_n4(d, diff);
                        Eigen::MatrixXd blk = G[a][b].block(bi, gi);
                        if (mono == 0) {
                            worst = std::max(worst, blk.cwiseAbs().maxCoeff());
                            continue;
                        }
                        Eigen::MatrixXd A = blk / mono;
                        if (!ref)
                            ref = A;
                        else
                            worst = std::max(worst, (A - *ref).cwiseAbs().maxCoeff() /
                                                        std::max(1.0, ref->cwiseAbs().maxCoeff()));
                    }
                rep.record("monomial form on b2/b3 blocks", worst, 1e-9, tag + " " + pair_str(S, bi, gi));
            }
    }
    return rep;
}

SuiteReport route_equivalence_suite(const ModelContext& ctx, const SuiteSettings& s)
{
    const IndexSet& S = ctx.set;
    SuiteReport rep;
    rep.suite = "route";
    for (int smp = 0; smp < s.nsamples; ++smp) {
        GridField xi = mollified_noise(ctx, derive_seed(s.seed, smp), s.rho);
        Realization lift = build_canonical_lift(ctx, xi, s.c);
        for (auto& x : s.base_points) {
            BlockMap F = build_recenter_map(ctx, lift, x);
            Realization D = build_direct(ctx, xi, s.c, x);
            for (int b = 0; b < S.size(); ++b) {
                if (!(S.grades[b] < GradedValue::integer(2))) continue;
                auto r = recentered_fields(ctx, lift, F, b);
                std::string w = "sample " + std::to_string(smp) + " x=" + node_str(x) + " beta=" + S.list[b].str();
                rep.record("Pi via lift and F_x vs direct", relative_difference(r.pi, *D.phi[b]), 1e-8, w);
                if (!S.is_pp(b))
                    rep.record("Pi^- via lift and F_x vs direct", relative_difference(r.pi_minus, *D.phi_minus[b]),
                               1e-8, w);
            }
        }
    }
    return rep;
}

namespace {

int reflect_sign_v(int v, int dim_k, int axis) { return v / dim_k == axis - 1 ? -1 : 1; }

int reflect_sign_w(const Monomial& m, int dim_k, int axis)
{
    int s = 1;
    for (auto code : m.vars) {
        s *= reflect_sign_v(var_v(code), dim_k, axis);
        if (var_n(code)[axis] % 2) s = -s;
    }
    return s;
}

}  // namespace

GridField reflect_field(const ModelContext& ctx, const GridField& f, int beta, int axis)
{
    const auto& g = ctx.grid;
    if (g.Nx % 2 == 0) throw std::invalid_argument("reflections need an odd number of spatial nodes");
    if (axis < 1 || axis > 3) throw std::invalid_argument("reflection axis must be spatial");
    const int dv = ctx.set.dim_v, dk = ctx.lie.dim_k;
    const WBasis& W = ctx.set.basis[beta];
    std::vector<int> sign(W.dim() * dv);
    for (int w = 0; w < W.dim(); ++w)
        for (int v = 0; v < dv; ++v) sign[w * dv + v] = reflect_sign_w(W.basis[w], dk, axis) * reflect_sign_v(v, dk, axis);
    GridField out(g, f.fiber);
    for (size_t p = 0; p < g.points(); ++p) {
        Node y = g.node(p);
        y[axis] = -y[axis];
        const double* a = f.ptr(g.index(y));
        double* o = out.ptr(p);
        for (int c = 0; c < f.fiber; ++c) o[c] = sign[c] * a[c];
    }
    return out;
}

GridField reflect_noise(const ModelContext& ctx, const GridField& xi, int axis)
{
    return reflect_field(ctx, xi, ctx.set.find(MultiIndex::zero()), axis);
}

SuiteReport symmetry_suite(const ModelContext& ctx, const SuiteSettings& s)
{
    const IndexSet& S = ctx.set;
    SuiteReport rep;
    rep.suite = "symmetry";
    Node origin{0, 0, 0, 0};
    RenormConstants cflip = s.c.parity_flipped();
    for (int smp = 0; smp < s.nsamples; ++smp) {
        std::string tag = "sample " + std::to_string(smp);
        GridField xi = mollified_noise(ctx, derive_seed(s.seed, smp), s.rho);
        Realization R = build_direct(ctx, xi, s.c, origin);
        GridField mxi = xi;
        mxi *= -1.0;
        Realization P = build_direct(ctx, mxi, cflip, origin);
        for (int b = 0; b < S.size(); ++b) {
            if (S.is_pp(b)) continue;
            double sign = ((population(S.list[b]) + 1) % 2 == 0) ? 1.0 : -1.0;
            GridField e = *R.phi_minus[b];
            e *= sign;
            rep.record("parity of Pi^-", relative_difference(*P.phi_minus[b], e), 0.0,
                       tag + " beta=" + S.list[b].str());
            GridField ep = *R.phi[b];
            ep *= sign;
            rep.record("parity of Pi", relative_difference(*P.phi[b], ep), 0.0, tag + " beta=" + S.list[b].str());
        }
        for (int axis = 1; axis <= 3; ++axis) {
            Realization Q = build_direct(ctx, reflect_noise(ctx, xi, axis), s.c, origin);
            for (int b = 0; b < S.size(); ++b) {
                std::string w = tag + " axis " + std::to_string(axis) + " beta=" + S.list[b].str();
                rep.record("reflection of Pi", relative_difference(*Q.phi[b], reflect_field(ctx, *R.phi[b], b, axis)),
                           1e-12, w);
                if (S.is_pp(b)) continue;
                rep.record("reflection of Pi^-",
                           relative_difference(*Q.phi_minus[b], reflect_field(ctx, *R.phi_minus[b], b, axis)), 1e-12,
                           w);
            }
        }
    }
    return rep;
}

std::vector<double> noise_weights_pi0(const ModelContext& ctx, const TestFunction& tf, double rho)
{
    GridField w(ctx.grid, 1);
    w.data = pairing_weights(ctx.grid, tf, true);
    return mollify(ctx.K.apply_adjoint(w), rho, ctx.eta).data;
}

namespace {

std::vector<double> default_lambdas(double rho)
{
    double lo = 8 * rho;
    if (lo > 1) throw std::invalid_argument("scaling window [8 rho, 1] is empty");
    std::vector<double> l;
    for (int i = 0; i < 5; ++i) l.push_back(lo * std::pow(1.0 / lo, i / 4.0));
    return l;
}

// least squares slope of y on x with y standard errors, plain (unweighted) fit
std::pair<double, double> fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                                    const std::vector<double>& sy)
{
    size_t n = x.size();
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    double slope = sxx > 0 ? sxy / sxx : 0;
    // the points share noise samples; summing variances is a conservative bound
    double var = 0;
    for (size_t i = 0; i < n; ++i) var += std::pow((x[i] - mx) / sxx, 2) * sy[i] * sy[i];
    return {slope, std::sqrt(var)};
}

// L2 norm sqrt(E|X|^2) from per-sample squared norms
std::pair<double, double> l2_norm(const std::vector<double>& sq)
{
    double n = static_cast<double>(sq.size());
    double m = 0;
    for (double v : sq) m += v / n;
    double var = 0;
    for (double v : sq) var += (v - m) * (v - m);
    double se_m = n > 1 ? std::sqrt(var / (n - 1) / n) : 0;
    double norm = std::sqrt(m);
    return {norm, norm > 0 ? se_m / (2 * norm) : 0};
}

double sqnorm(const std::vector<double>& v)
{
    double s = 0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

ScalingReport scaling_exponent_fit(const ModelContext& ctx, int beta, const ScalingSettings& s)
{
    const IndexSet& S = ctx.set;
    if (beta < 0 || beta >= S.size()) throw std::invalid_argument("index out of range");
    ScalingReport r;
    r.beta = beta;
    r.rho = s.rho;
    r.nsamples = s.nsamples;
    r.lambdas = s.lambdas.empty() ? default_lambdas(s.rho) : s.lambdas;
    for (double l : r.lambdas)
        if (l < 8 * s.rho * (1 - 1e-12) || l > 1 + 1e-12) throw std::invalid_argument("lambda outside [8 rho, 1]");
    const size_t nl = r.lambdas.size();
    std::vector<std::vector<double>> sq(nl, std::vector<double>(s.nsamples, 0.0));
    Profile phi = default_test_profile();
    bool fast = S.list[beta].is_zero();
    std::vector<std::vector<double>> weights;
    for (double l : r.lambdas) {
        TestFunction tf{phi, l, {0, 0, 0, 0}};
        weights.push_back(fast ? noise_weights_pi0(ctx, tf, s.rho) : pairing_weights(ctx.grid, tf, true));
    }
    parallel_for(s.nsamples, s.workers, [&](int i) {
        std::uint64_t seed = derive_seed(s.seed, i);
        if (fast) {
            std::vector<const std::vector<double>*> ws;
            for (auto& w : weights) ws.push_back(&w);
            auto vals = white_noise_pairings(ctx.grid, S.dim_v, seed, ws);
            for (size_t j = 0; j < nl; ++j) sq[j][i] = sqnorm(vals[j]);
            return;
        }
        BuildRequest req;
        req.want_phi.assign(S.size(), 0);
        req.want_minus.assign(S.size(), 0);
        req.want_phi[beta] = 1;
        Realization R = build_realization(ctx, mollified_noise(ctx, seed, s.rho), RenormConstants{},
                                          Realization::Mode::recentered, {0, 0, 0, 0}, req);
        for (size_t j = 0; j < nl; ++j) sq[j][i] = sqnorm(pair_with_weights(*R.phi[beta], weights[j]));
    });
    std::vector<double> lx, ly, lsy;
    for (size_t j = 0; j < nl; ++j) {
        auto [nrm, se] = l2_norm(sq[j]);
        r.norms.push_back(nrm);
        r.norm_se.push_back(se);
        lx.push_back(std::log(r.lambdas[j]));
        ly.push_back(std::log(nrm));
        lsy.push_back(nrm > 0 ? se / nrm : 0);
    }
    std::tie(r.slope, r.slope_se) = fit_slope(lx, ly, lsy);
    return r;
}

std::string ScalingReport::csv() const
{
    std::ostringstream os;
    os.precision(12);
    os << "lambda,norm,se\n";
    for (size_t i = 0; i < lambdas.size(); ++i) os << lambdas[i] << "," << norms[i] << "," << norm_se[i] << "\n";
    return os.str();
}

nlohmann::json ScalingReport::to_json() const
{
    return {{"beta", beta},   {"p", p},         {"rho", rho},           {"lambda", lambdas}, {"norm", norms},
            {"se", norm_se},  {"slope", slope}, {"slope_se", slope_se}, {"nsamples", nsamples}};
}

bool CauchyReport::ratios_below(double bound) const
{
    for (double r : ratios)
        if (!(r <= bound)) return false;
    return true;
}

std::string CauchyReport::csv() const
{
    std::ostringstream os;
    os.precision(12);
    os << "rho,rho_half,diff_norm,se\n";
    for (size_t i = 0; i < diff_norms.size(); ++i)
        os << rhos[i] << "," << rhos[i + 1] << "," << diff_norms[i] << "," << diff_se[i] << "\n";
    return os.str();
}

nlohmann::json CauchyReport::to_json() const
{
    return {{"beta", beta}, {"rho", rhos}, {"diff_norm", diff_norms}, {"se", diff_se}, {"ratios", ratios},
            {"nsamples", nsamples}};
}

CauchyReport cauchy_in_rho(const ModelContext& ctx, int beta, const std::vector<double>& rhos, double lambda,
                           int nsamples, std::uint64_t seed, int workers)
{
    const IndexSet& S = ctx.set;
    if (rhos.size() < 2) throw std::invalid_argument("need at least two mollification scales");
    CauchyReport r;
    r.beta = beta;
    r.rhos = rhos;
    r.nsamples = nsamples;
    const size_t nd = rhos.size() - 1;
    TestFunction tf{default_test_profile(), lambda, {0, 0, 0, 0}};
    std::vector<std::vector<double>> sq(nd, std::vector<double>(nsamples, 0.0));
    bool fast = S.list[beta].is_zero();
    std::vector<std::vector<double>> dw;
    std::vector<double> pw;
    if (fast) {
        std::vector<std::vector<double>> w;
        for (double rho : rhos) w.push_back(noise_weights_pi0(ctx, tf, rho));
        for (size_t j = 0; j < nd; ++j) {
            std::vector<double> d(w[j].size());
            for (size_t p = 0; p < d.size(); ++p) d[p] = w[j][p] - w[j + 1][p];
            dw.push_back(std::move(d));
        }
    } else {
        pw = pairing_weights(ctx.grid, tf, true);
    }
    parallel_for(nsamples, workers, [&](int i) {
        std::uint64_t sd = derive_seed(seed, i);
        if (fast) {
            std::vector<const std::vector<double>*> ws;
            for (auto& w : dw) ws.push_back(&w);
            auto vals = white_noise_pairings(ctx.grid, S.dim_v, sd, ws);
            for (size_t j = 0; j < nd; ++j) sq[j][i] = sqnorm(vals[j]);
            return;
        }
        GridField xi = sample_white_noise(ctx.grid, S.dim_v, sd);
        std::vector<std::vector<double>> vals;
        BuildRequest req;
        req.want_phi.assign(S.size(), 0);
        req.want_minus.assign(S.size(), 0);
        req.want_phi[beta] = 1;
        for (double rho : rhos) {
            Realization R = build_realization(ctx, mollify(xi, rho, ctx.eta), RenormConstants{},
                                              Realization::Mode::recentered, {0, 0, 0, 0}, req);
            vals.push_back(pair_with_weights(*R.phi[beta], pw));
        }
        for (size_t j = 0; j < nd; ++j) {
            std::vector<double> d(vals[j].size());
            for (size_t c = 0; c < d.size(); ++c) d[c] = vals[j][c] - vals[j + 1][c];
            sq[j][i] = sqnorm(d);
        }
    });
    for (size_t j = 0; j < nd; ++j) {
        auto [nrm, se] = l2_norm(sq[j]);
        r.diff_norms.push_back(nrm);
        r.diff_se.push_back(se);
    }
    for (size_t j = 1; j < nd; ++j)
        r.ratios.push_back(r.diff_norms[j - 1] > 0 ? r.diff_norms[j] / r.diff_norms[j - 1] : 0.0);
    return r;
}

SuiteReport stochastic_stats_suite(const ModelContext& ctx, const SuiteSettings& s)
{
    const IndexSet& S = ctx.set;
    SuiteReport rep;
    rep.suite = "stochastic";
    if (s.nsamples < 32) throw std::invalid_argument("stochastic suite needs at least 32 samples");
    int i0 = S.find(MultiIndex::zero());
    Profile phi = default_test_profile();
    // Pi_{x0} = K xi^rho does not depend on x; compare the laws of its pairing at two base points
    for (size_t k = 1; k < s.base_points.size(); ++k) {
        auto w0 = noise_weights_pi0(ctx, {phi, 1.0, s.base_points[0]}, s.rho);
        auto w1 = noise_weights_pi0(ctx, {phi, 1.0, s.base_points[k]}, s.rho);
        std::vector<double> a, b;
        for (int i = 0; i < s.nsamples; ++i) {
            auto sd = derive_seed(s.seed, i);
            for (double v : white_noise_pairing(ctx.grid, S.dim_v, sd, w0)) a.push_back(v);
            for (double v : white_noise_pairing(ctx.grid, S.dim_v, sd, w1)) b.push_back(v);
        }
        auto moments = [](const std::vector<double>& x) {
            double m = 0, v = 0;
            for (double e : x) m += e / x.size();
            for (double e : x) v += (e - m) * (e - m) / (x.size() - 1);
            return std::make_pair(m, v);
        };
        auto [ma, va] = moments(a);
        auto [mb, vb] = moments(b);
        double ratio = vb / va;
        std::string w = "x=" + node_str(s.base_points[0]) + " y=" + node_str(s.base_points[k]);
        rep.record("variance ratio outside [0.8, 1.25]", (ratio < 0.8 || ratio > 1.25) ? 1.0 : 0.0, 0.0,
                   w + " ratio=" + std::to_string(ratio), false);
        double se = std::sqrt(va / a.size() + vb / b.size());
        rep.record("mean difference in SE", std::abs(ma - mb) / se, 4.0, w, false);
    }
    (void)i0;
    // automatic BPHZ zeros for the k g family
    BphzSettings bs;
    bs.grid = ctx.grid;
    bs.rho = s.rho;
    bs.nsamples = s.nsamples % 2 ? s.nsamples + 1 : s.nsamples;
    bs.seed = s.seed;
    std::vector<int> betas;
    for (int b = 0; b < S.size(); ++b)
        if (!S.is_pp(b) && S.list[b].poly.empty()) betas.push_back(b);
    auto est = mc_pairing_expectation(ctx, betas, s.c, bs);
    for (int b : betas) {
        const auto& e = est.at(b);
        double z = e.proj_se > 0 ? std::abs(e.proj_mean) / e.proj_se : 0.0;
        rep.record("E Pi^-(psi) for k g in SE", e.within(3.0) ? std::min(z, 3.0) : z, 3.0, "beta=" + S.list[b].str(),
                   false);
    }
    return rep;
}

nlohmann::json SupReport::to_json() const
{
    return {{"beta", beta}, {"statistic", statistic}, {"statistic_half", statistic_half}};
}

SupReport pointwise_sup_stats(const ModelContext& ctx, int beta, const SuiteSettings& s)
{
    const IndexSet& S = ctx.set;
    SupReport r;
    r.beta = beta;
    const auto& gb = S.grades[beta];
    GradedValue gc = grade(S.list[beta], GradeKind::corrected);
    double expo = gc.to_double(default_hom().eps, default_hom().eps_minus);
    (void)gb;
    Profile phi = default_test_profile();
    for (int smp = 0; smp < s.nsamples; ++smp) {
        GridField xi = mollified_noise(ctx, derive_seed(s.seed, smp), s.rho);
        Realization lift = build_canonical_lift(ctx, xi, s.c);
        for (size_t k = 0; k < s.base_points.size(); ++k) {
            const Node& x = s.base_points[k];
            BlockMap F = build_recenter_map(ctx, lift, x);
            GridField pi = recentered_fields(ctx, lift, F, beta).pi;
            for (double lam : {0.25, 0.5, 1.0}) {
                double v = std::sqrt(sqnorm(pair_spectral(pi, {phi, lam, x}))) / std::pow(lam, expo);
                r.statistic = std::max(r.statistic, v);
                if (k % 2 == 0) r.statistic_half = std::max(r.statistic_half, v);
            }
        }
    }
    return r;
}

}  // namespace ymr
