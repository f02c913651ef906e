#include "ymr/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ymr {

IndexSet IndexSet::build(const GradedValue& bound, int dim_v)
{
    IndexSet s;
    s.bound = bound;
    s.dim_v = dim_v;
    s.list = enumerate_populated(bound, GradeKind::plain);
    for (size_t i = 0; i < s.list.size(); ++i) {
        s.grades.push_back(grade(s.list[i], GradeKind::plain));
        s.basis.emplace_back(s.list[i], dim_v);
        s.pos[s.list[i]] = static_cast<int>(i);
    }
    return s;
}

IndexSet IndexSet::restricted(const std::function<bool(const MultiIndex&)>& keep) const
{
    IndexSet s;
    s.bound = bound;
    s.dim_v = dim_v;
    for (size_t i = 0; i < list.size(); ++i) {
        if (!keep(list[i])) continue;
        s.pos[list[i]] = static_cast<int>(s.list.size());
        s.list.push_back(list[i]);
        s.grades.push_back(grades[i]);
        s.basis.push_back(basis[i]);
    }
    return s;
}

int IndexSet::find(const MultiIndex& b) const
{
    auto it = pos.find(b);
    return it == pos.end() ? -1 : it->second;
}

RenormConstants RenormConstants::parity_flipped() const
{
    RenormConstants r = *this;
    for (int k = 0; k < 4; ++k)
        if (k % 2 == 0) r.c[k] = -r.c[k];
    return r;
}

nlohmann::json RenormConstants::to_json() const
{
    return {{"c", c}, {"se", se}, {"provenance", provenance}, {"lambda_bar", scale},
            {"nsamples", nsamples}, {"seed", seed}};
}

NonlinOps::NonlinOps(const LieData& lie) : dim_v(lie.dim_v())
{
    const auto& t = nonlin_tensors();
    int dk = lie.dim_k;
    std::map<std::array<int, 4>, double> acc;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    double a = t.a(i, j, k, l);
                    if (a == 0.0) continue;
                    for (int x = 0; x < dk; ++x)
                        for (int y = 0; y < dk; ++y)
                            for (int z = 0; z < dk; ++z) {
                                double f = lie(x, y, z);
                                if (f == 0.0) continue;
                                acc[{v_index(j, x, dk), i + 1, v_index(k, y, dk), v_index(l, z, dk)}] += a * f;
                            }
                }
    for (auto& [key, v] : acc)
        if (v != 0.0) A.push_back({key[0], key[1], key[2], key[3], v});
    acc.clear();
    // [U_j, [U'_k, U''_i]] with e-component sum_{a,d} f_ade U_ja sum_{b,c} f_bcd U'_kb U''_ic
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    double b = t.b(i, j, k, l);
                    if (b == 0.0) continue;
                    for (int a = 0; a < dk; ++a)
                        for (int d = 0; d < dk; ++d)
                            for (int e = 0; e < dk; ++e) {
                                double f1 = lie(a, d, e);
                                if (f1 == 0.0) continue;
                                for (int bb = 0; bb < dk; ++bb)
                                    for (int c = 0; c < dk; ++c) {
                                        double f2 = lie(bb, c, d);
                                        if (f2 == 0.0) continue;
                                        acc[{v_index(j, a, dk), v_index(k, bb, dk), v_index(i, c, dk), v_index(l, e, dk)}] +=
                                            b * f1 * f2;
                                    }
                            }
                }
    for (auto& [key, v] : acc)
        if (v != 0.0) B.push_back({key[0], key[1], key[2], key[3], v});
}

namespace {

// out[p] += A(U[p], dU[.][p]) restricted to the given terms, with per-field strides
void accumulate_A(const std::vector<NonlinOps::Bi>& terms, size_t npts, const double* U, size_t sU,
                  const std::array<const double*, 3>& dU, size_t sD, double* out, size_t sO)
{
    if (terms.empty()) return;
    for (size_t p = 0; p < npts; ++p) {
        const double* u = U + p * sU;
        double* o = out + p * sO;
        size_t off = p * sD;
        for (const auto& t : terms) o[t.out] += t.coef * u[t.v] * dU[t.axis - 1][off + t.v2];
    }
}

void accumulate_B(const std::vector<NonlinOps::Tri>& terms, size_t npts, const double* U, size_t s1,
                  const double* U2, size_t s2, const double* U3, size_t s3, double* out, size_t sO)
{
    if (terms.empty()) return;
    for (size_t p = 0; p < npts; ++p) {
        const double* a = U + p * s1;
        const double* b = U2 + p * s2;
        const double* c = U3 + p * s3;
        double* o = out + p * sO;
        for (const auto& t : terms) o[t.out] += t.coef * a[t.v] * b[t.v2] * c[t.v3];
    }
}

// nz[w*dim_v + v] is set when that component is nonzero somewhere
std::vector<char> nonzero_mask(const GridField& f)
{
    std::vector<char> nz(f.fiber, 0);
    for (size_t p = 0; p < f.grid.points(); ++p) {
        const double* a = f.ptr(p);
        for (int c = 0; c < f.fiber; ++c)
            if (a[c] != 0.0) nz[c] = 1;
    }
    return nz;
}

std::array<GridField, 3> spatial_derivatives(const GridField& f)
{
    return {fd_derivative(f, {0, 1, 0, 0}), fd_derivative(f, {0, 0, 1, 0}), fd_derivative(f, {0, 0, 0, 1})};
}

}  // namespace

GridField nonlinearity_eval(NonlinKind kind, const LieData& lie, const GridField& U, const GridField& U1,
                            const GridField* U2)
{
    int dv = lie.dim_v();
    if (U.fiber != dv || U1.fiber != dv) throw std::invalid_argument("nonlinearity: fields must be V-valued");
    require_same_shape(U, U1, "nonlinearity");
    NonlinOps ops(lie);
    GridField out(U.grid, dv);
    if (kind == NonlinKind::A) {
        auto d = spatial_derivatives(U1);
        accumulate_A(ops.A, U.grid.points(), U.data.data(), dv,
                     {d[0].data.data(), d[1].data.data(), d[2].data.data()}, dv, out.data.data(), dv);
    } else {
        if (!U2) throw std::invalid_argument("nonlinearity B needs three fields");
        require_same_shape(U, *U2, "nonlinearity");
        accumulate_B(ops.B, U.grid.points(), U.data.data(), dv, U1.data.data(), dv, U2->data.data(), dv,
                     out.data.data(), dv);
    }
    return out;
}

ModelContext::ModelContext(IndexSet s, LieData l, const ParabolicGrid& g, KernelSpec k)
    : set(std::move(s)), lie(std::move(l)), grid(g), kspec(k), ops(lie), K(kernel_field(g, k)), eta(eta_profile())
{
    if (set.dim_v != lie.dim_v()) throw std::invalid_argument("index set built for a different V");
}

Point4 node_coords(const ParabolicGrid& g, const Node& x) { return g.point(x); }

GridField polynomial_field(const ModelContext& ctx, int index, const Node& shift, bool recentered)
{
    const auto& b = ctx.set.list[index];
    if (!ctx.set.is_pp(index)) throw std::invalid_argument("polynomial_field: index is not purely polynomial");
    N4 n = b.poly[0].first;
    int dv = ctx.set.dim_v;
    GridField f(ctx.grid, dv * dv);
    Node origin{0, 0, 0, 0};
    for (size_t p = 0; p < ctx.grid.points(); ++p) {
        double m = monomial_at(ctx.grid, ctx.grid.node(p), recentered ? shift : origin, n);
        for (int v = 0; v < dv; ++v) f.at(p, v * dv + v) = m;
    }
    return f;
}

namespace {

struct Closure {
    const IndexSet& set;
    Realization::Mode mode;
    // index of a part, or -1 when its field vanishes identically
    int part(const MultiIndex& b) const
    {
        int i = set.find(b);
        if (i >= 0) return i;
        Membership m = membership(b);
        bool nonzero = mode == Realization::Mode::lift ? m.in_M : (m.in_Mgeq0 || m.in_Mpp);
        if (nonzero) throw std::invalid_argument("index set not closed: missing " + b.str());
        return -1;
    }
};

void field_times_matrix(const GridField& in, int dim_in, const Eigen::MatrixXd& M, GridField& out, int dim_out,
                        int dv)
{
    size_t np = in.grid.points();
    for (size_t p = 0; p < np; ++p) {
        const double* a = in.ptr(p);
        double* o = out.ptr(p);
        for (int wi = 0; wi < dim_in; ++wi) {
            const double* av = a + wi * dv;
            bool any = false;
            for (int v = 0; v < dv; ++v)
                if (av[v] != 0.0) {
                    any = true;
                    break;
                }
            if (!any) continue;
            for (int wo = 0; wo < dim_out; ++wo) {
                double m = M(wi, wo);
                if (m == 0.0) continue;
                double* ov = o + wo * dv;
                for (int v = 0; v < dv; ++v) ov[v] += m * av[v];
            }
        }
    }
}

}  // namespace

Realization build_realization(const ModelContext& ctx, const GridField& xi_rho, const RenormConstants& c,
                              Realization::Mode mode, const Node& x, const BuildRequest& req)
{
    const IndexSet& S = ctx.set;
    const int n = S.size();
    const int dv = S.dim_v;
    if (xi_rho.fiber != dv || !(xi_rho.grid == ctx.grid)) throw std::invalid_argument("noise field: shape mismatch");
    Closure cl{S, mode};
    bool recentered = mode == Realization::Mode::recentered;

    std::vector<char> want_phi(n, 1), want_minus(n, 1);
    if (!req.want_phi.empty()) want_phi = req.want_phi;
    if (!req.want_minus.empty()) want_minus = req.want_minus;
    if (static_cast<int>(want_phi.size()) != n || static_cast<int>(want_minus.size()) != n)
        throw std::invalid_argument("build request size mismatch");

    // which fields must be computed: walk down in grade, marking parts
    std::vector<char> need_phi = want_phi, compute(n, 0), need_deriv(n, 0);
    std::vector<std::vector<Decomposition>> pairs(n), triples(n), kg(n);
    for (int i = n - 1; i >= 0; --i) {
        if (S.is_pp(i)) continue;
        compute[i] = want_minus[i] || need_phi[i];
        if (!compute[i]) continue;
        pairs[i] = decompositions(S.list[i], DecompPattern::pair);
        triples[i] = decompositions(S.list[i], DecompPattern::triple);
        kg[i] = decompositions(S.list[i], DecompPattern::kg_rest);
        for (auto& d : pairs[i]) {
            int a = cl.part(d.parts[0]), b = cl.part(d.parts[1]);
            if (a >= 0 && b >= 0) {
                need_phi[a] = need_phi[b] = 1;
                need_deriv[b] = 1;
            }
        }
        for (auto& d : triples[i]) {
            int a = cl.part(d.parts[0]), b = cl.part(d.parts[1]), e = cl.part(d.parts[2]);
            if (a >= 0 && b >= 0 && e >= 0) need_phi[a] = need_phi[b] = need_phi[e] = 1;
        }
        for (auto& d : kg[i]) {
            int a = cl.part(d.parts[0]);
            if (a >= 0 && c[d.k] != 0.0) need_phi[a] = 1;
        }
    }
    // parts only become known below i; re-run until the marking is stable
    for (bool changed = true; changed;) {
        changed = false;
        for (int i = n - 1; i >= 0; --i) {
            if (S.is_pp(i) || compute[i] || !need_phi[i]) continue;
            compute[i] = 1;
            changed = true;
            pairs[i] = decompositions(S.list[i], DecompPattern::pair);
            triples[i] = decompositions(S.list[i], DecompPattern::triple);
            kg[i] = decompositions(S.list[i], DecompPattern::kg_rest);
            for (auto& d : pairs[i]) {
                int a = cl.part(d.parts[0]), b = cl.part(d.parts[1]);
                if (a >= 0 && b >= 0) {
                    need_phi[a] = need_phi[b] = 1;
                    need_deriv[b] = 1;
                }
            }
            for (auto& d : triples[i]) {
                int a = cl.part(d.parts[0]), b = cl.part(d.parts[1]), e = cl.part(d.parts[2]);
                if (a >= 0 && b >= 0 && e >= 0) need_phi[a] = need_phi[b] = need_phi[e] = 1;
            }
            for (auto& d : kg[i]) {
                int a = cl.part(d.parts[0]);
                if (a >= 0 && c[d.k] != 0.0) need_phi[a] = 1;
            }
        }
    }

    Realization R;
    R.mode = mode;
    R.base = x;
    R.phi.resize(n);
    R.phi_minus.resize(n);
    std::vector<char> zero(n, 0);
    std::vector<std::optional<std::array<GridField, 3>>> deriv(n);
    const size_t np = ctx.grid.points();

    std::vector<std::vector<char>> mask(n);
    std::vector<std::array<std::vector<char>, 3>> dmask(n);
    auto get_deriv = [&](int j) -> const std::array<GridField, 3>& {
        if (!deriv[j]) {
            deriv[j] = spatial_derivatives(*R.phi[j]);
            for (int ax = 0; ax < 3; ++ax) dmask[j][ax] = nonzero_mask((*deriv[j])[ax]);
        }
        return *deriv[j];
    };
    auto get_mask = [&](int j) -> const std::vector<char>& {
        if (mask[j].empty()) mask[j] = nonzero_mask(*R.phi[j]);
        return mask[j];
    };
    std::vector<NonlinOps::Bi> biterms;
    std::vector<NonlinOps::Tri> triterms;

    for (int i = 0; i < n; ++i) {
        const MultiIndex& beta = S.list[i];
        if (S.is_pp(i)) {
            if (need_phi[i]) R.phi[i] = polynomial_field(ctx, i, x, recentered);
            continue;
        }
        if (!compute[i]) continue;
        const WBasis& Wb = S.basis[i];
        GridField minus(ctx.grid, S.fiber(i));
        if (beta.is_zero()) {
            minus = xi_rho;
        } else {
            for (auto& d : pairs[i]) {
                int a = cl.part(d.parts[0]), b = cl.part(d.parts[1]);
                if (a < 0 || b < 0 || zero[a] || zero[b]) continue;
                const auto& Wa = S.basis[a];
                const auto& Wc = S.basis[b];
                const auto& db = get_deriv(b);
                const auto& ma = get_mask(a);
                for (int w1 = 0; w1 < Wa.dim(); ++w1)
                    for (int w2 = 0; w2 < Wc.dim(); ++w2) {
                        biterms.clear();
                        for (const auto& t : ctx.ops.A)
                            if (ma[w1 * dv + t.v] && dmask[b][t.axis - 1][w2 * dv + t.v2]) biterms.push_back(t);
                        if (biterms.empty()) continue;
                        Monomial m = Wa.basis[w1] * Wc.basis[w2];
                        m.g += 1;
                        int w = Wb.find(m);
                        if (w < 0) throw std::logic_error("product monomial outside W_beta");
                        accumulate_A(biterms, np, R.phi[a]->data.data() + w1 * dv, S.fiber(a),
                                     {db[0].data.data() + w2 * dv, db[1].data.data() + w2 * dv,
                                      db[2].data.data() + w2 * dv},
                                     S.fiber(b), minus.data.data() + w * dv, S.fiber(i));
                    }
            }
            for (auto& d : triples[i]) {
                int a = cl.part(d.parts[0]), b = cl.part(d.parts[1]), e = cl.part(d.parts[2]);
                if (a < 0 || b < 0 || e < 0 || zero[a] || zero[b] || zero[e]) continue;
                const auto &W1 = S.basis[a], &W2 = S.basis[b], &W3 = S.basis[e];
                const auto &m1 = get_mask(a), &m2 = get_mask(b), &m3 = get_mask(e);
                for (int w1 = 0; w1 < W1.dim(); ++w1)
                    for (int w2 = 0; w2 < W2.dim(); ++w2)
                        for (int w3 = 0; w3 < W3.dim(); ++w3) {
                            triterms.clear();
                            for (const auto& t : ctx.ops.B)
                                if (m1[w1 * dv + t.v] && m2[w2 * dv + t.v2] && m3[w3 * dv + t.v3])
                                    triterms.push_back(t);
                            if (triterms.empty()) continue;
                            Monomial m = W1.basis[w1] * W2.basis[w2] * W3.basis[w3];
                            m.g += 2;
                            int w = Wb.find(m);
                            if (w < 0) throw std::logic_error("product monomial outside W_beta");
                            accumulate_B(triterms, np, R.phi[a]->data.data() + w1 * dv, S.fiber(a),
                                         R.phi[b]->data.data() + w2 * dv, S.fiber(b),
                                         R.phi[e]->data.data() + w3 * dv, S.fiber(e), minus.data.data() + w * dv,
                                         S.fiber(i));
                        }
            }
            for (auto& d : kg[i]) {
                int a = cl.part(d.parts[0]);
                if (a < 0 || zero[a] || c[d.k] == 0.0) continue;
                minus.axpy(c[d.k], *R.phi[a]);   // W_{beta_1} and W_beta share the slot basis
            }
        }
        if (req.on_minus) req.on_minus(i, minus);
        if (need_phi[i]) {
            if (recentered && population(beta) < 0) {
                R.phi[i] = GridField(ctx.grid, S.fiber(i));
                zero[i] = 1;
            } else {
                GridField k = ctx.K.apply(minus);
                R.phi[i] = recentered ? taylor_subtract(k, x, S.grades[i]) : std::move(k);
            }
        }
        if (want_minus[i]) R.phi_minus[i] = std::move(minus);
    }
    for (int i = 0; i < n; ++i)
        if (!want_phi[i]) R.phi[i].reset();
    return R;
}

Realization build_canonical_lift(const ModelContext& ctx, const GridField& xi_rho, const RenormConstants& c)
{
    return build_realization(ctx, xi_rho, c, Realization::Mode::lift);
}

Realization build_direct(const ModelContext& ctx, const GridField& xi_rho, const RenormConstants& c, const Node& x)
{
    return build_realization(ctx, xi_rho, c, Realization::Mode::recentered, x);
}

const Eigen::MatrixXd* BlockMap::find(int beta, int gamma) const
{
    auto it = blocks.find({beta, gamma});
    return it == blocks.end() ? nullptr : &it->second;
}

Eigen::MatrixXd BlockMap::block(int beta, int gamma) const
{
    if (auto* m = find(beta, gamma)) return *m;
    return Eigen::MatrixXd::Zero(set->dim(gamma), set->dim(beta));
}

void BlockMap::set_block(int beta, int gamma, Eigen::MatrixXd m) { blocks[{beta, gamma}] = std::move(m); }

BlockMap identity_map(const IndexSet& set)
{
    BlockMap m;
    m.set = &set;
    for (int i = 0; i < set.size(); ++i) m.set_block(i, i, Eigen::MatrixXd::Identity(set.dim(i), set.dim(i)));
    return m;
}

BlockMap compose(const BlockMap& a, const BlockMap& b)
{
    BlockMap r;
    r.set = a.set;
    std::map<int, std::vector<std::pair<int, const Eigen::MatrixXd*>>> by_source;
    for (auto& [key, m] : a.blocks) by_source[key.first].push_back({key.second, &m});
    for (auto& [key, mb] : b.blocks) {
        auto it = by_source.find(key.second);
        if (it == by_source.end()) continue;
        for (auto& [gamma, ma] : it->second) {
            Eigen::MatrixXd prod = (*ma) * mb;
            auto f = r.blocks.find({key.first, gamma});
            if (f == r.blocks.end())
                r.blocks.emplace(std::make_pair(key.first, gamma), std::move(prod));
            else
                f->second += prod;
        }
    }
    return r;
}

BlockMap invert_triangular(const BlockMap& f)
{
    const IndexSet& S = *f.set;
    BlockMap neg_n;
    neg_n.set = f.set;
    for (auto& [key, m] : f.blocks) {
        if (key.first == key.second) {
            if ((m - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() != 0.0)
                throw std::invalid_argument("invert_triangular: diagonal block is not the identity");
            continue;
        }
        if (!(S.grades[key.second] < S.grades[key.first]))
            throw std::invalid_argument("invert_triangular: block above the diagonal");
        neg_n.set_block(key.first, key.second, -m);
    }
    for (int i = 0; i < S.size(); ++i)
        if (!f.find(i, i)) throw std::invalid_argument("invert_triangular: missing diagonal block");
    BlockMap result = identity_map(S);
    BlockMap term = identity_map(S);
    for (int k = 0; k < S.size() && !neg_n.blocks.empty(); ++k) {
        term = compose(term, neg_n);
        if (term.blocks.empty()) break;
        for (auto& [key, m] : term.blocks) {
            auto it = result.blocks.find(key);
            if (it == result.blocks.end())
                result.blocks.emplace(key, m);
            else
                it->second += m;
        }
    }
    return result;
}

double max_block_diff(const BlockMap& a, const BlockMap& b)
{
    double d = 0;
    for (auto& [key, m] : a.blocks) {
        auto other = b.block(key.first, key.second);
        d = std::max(d, (m - other).cwiseAbs().maxCoeff());
    }
    for (auto& [key, m] : b.blocks)
        if (!a.find(key.first, key.second)) d = std::max(d, m.cwiseAbs().maxCoeff());
    return d;
}

Eigen::MatrixXd substitution_block(const BlockMap& rows, int beta_i, int gamma_i)
{
    const IndexSet& S = *rows.set;
    const MultiIndex& beta = S.list[beta_i];
    const MultiIndex& gamma = S.list[gamma_i];
    const WBasis& Wg = S.basis[gamma_i];
    const WBasis& Wb = S.basis[beta_i];
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(Wg.dim(), Wb.dim());
    if (gamma.g > beta.g) return M;
    MultiIndex rest = beta - MultiIndex::delta_g(gamma.g);
    if (!beta.contains(MultiIndex::delta_g(gamma.g))) return M;

    for (int r = 0; r < Wg.dim(); ++r) {
        const auto& vars = Wg.basis[r].vars;
        std::function<void(size_t, const MultiIndex&, const Monomial&, double)> rec =
            [&](size_t j, const MultiIndex& remaining, const Monomial& mono, double coef) {
                if (j == vars.size()) {
                    if (!remaining.is_zero()) return;
                    Monomial full = mono;
                    full.g += gamma.g;
                    int col = Wb.find(full);
                    if (col < 0) throw std::logic_error("substitution produced a monomial outside W_beta");
                    M(r, col) += coef;
                    return;
                }
                int pp = S.find(MultiIndex::delta_n(var_n(vars[j])));
                if (pp < 0) return;
                int vj = var_v(vars[j]);
                for (int b = 0; b < S.size(); ++b) {
                    if (!remaining.contains(S.list[b])) continue;
                    const Eigen::MatrixXd* blk = rows.find(b, pp);
                    if (!blk) continue;
                    MultiIndex rem2 = remaining - S.list[b];
                    const WBasis& Wj = S.basis[b];
                    for (int w = 0; w < Wj.dim(); ++w) {
                        double e = (*blk)(vj, w);
                        if (e == 0.0) continue;
                        rec(j + 1, rem2, mono * Wj.basis[w], coef * e);
                    }
                }
            };
        rec(0, rest, Monomial{}, 1.0);
    }
    return M;
}

BlockMap rebuild_from_pp_rows(const BlockMap& rows)
{
    const IndexSet& S = *rows.set;
    BlockMap r;
    r.set = rows.set;
    for (int b = 0; b < S.size(); ++b)
        for (int g = 0; g < S.size(); ++g) {
            if (S.is_pp(g)) {
                if (auto* m = rows.find(b, g)) r.set_block(b, g, *m);
                continue;
            }
            if (S.grades[b] < S.grades[g]) continue;
            Eigen::MatrixXd m = substitution_block(rows, b, g);
            if (m.cwiseAbs().maxCoeff() != 0.0) r.set_block(b, g, std::move(m));
        }
    return r;
}

namespace {

double binom_n4(const N4& m, const N4& n)
{
    double r = 1;
    for (int a = 0; a < 4; ++a) {
        if (n[a] > m[a]) return 0.0;
        for (int i = 1; i <= n[a]; ++i) r = r * (m[a] - n[a] + i) / i;
    }
    return r;
}

double power_n4(const Point4& x, const N4& n, double sign)
{
    double r = 1;
    for (int a = 0; a < 4; ++a)
        if (n[a]) r *= std::pow(sign * x[a], n[a]);
    return r;
}

}  // namespace

BlockMap build_recenter_map(const ModelContext& ctx, const Realization& lift, const Node& x)
{
    const IndexSet& S = ctx.set;
    const int dv = S.dim_v;
    if (lift.mode != Realization::Mode::lift) throw std::invalid_argument("recentering needs the canonical lift");
    BlockMap F = identity_map(S);
    Point4 xc = node_coords(ctx.grid, x);
    std::map<std::pair<int, N4>, std::vector<double>> stencils;
    auto D = [&](int gamma, const N4& k) -> const std::vector<double>& {
        auto key = std::make_pair(gamma, k);
        auto it = stencils.find(key);
        if (it != stencils.end()) return it->second;
        if (!lift.phi[gamma]) throw std::invalid_argument("canonical lift lacks a field needed for recentering");
        return stencils[key] = stencil_at(*lift.phi[gamma], k, x);
    };

    for (int i = 0; i < S.size(); ++i) {
        const MultiIndex& beta = S.list[i];
        if (S.is_pp(i)) {
            N4 m = beta.poly[0].first;
            for (int j = 0; j < S.size(); ++j) {
                if (j == i || !S.is_pp(j)) continue;
                N4 nn = S.list[j].poly[0].first;
                double c = binom_n4(m, nn);
                if (c == 0.0) continue;
                N4 diff{m[0] - nn[0], m[1] - nn[1], m[2] - nn[2], m[3] - nn[3]};
                double v = c * power_n4(xc, diff, -1.0);
                if (v != 0.0) F.set_block(i, j, v * Eigen::MatrixXd::Identity(dv, dv));
            }
            continue;
        }
        for (int j = 0; j < S.size(); ++j) {
            if (j == i || S.is_pp(j) || !(S.grades[j] < S.grades[i])) continue;
            Eigen::MatrixXd m = substitution_block(F, i, j);
            if (m.cwiseAbs().maxCoeff() != 0.0) F.set_block(i, j, std::move(m));
        }
        const GradedValue& gb = S.grades[i];
        int maxdeg = static_cast<int>(std::ceil(boost::rational_cast<double>(gb.r))) + 1;
        auto degs = n4_upto(std::max(maxdeg, 0));
        const int db = S.dim(i);
        for (int j = 0; j < S.size(); ++j) {
            if (!S.is_pp(j)) continue;
            N4 nn = S.list[j].poly[0].first;
            if (!(GradedValue::integer(parabolic_degree(nn)) < gb)) continue;
            Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dv, db);
            for (auto& m : degs) {
                if (!(GradedValue::integer(parabolic_degree(nn) + parabolic_degree(m)) < gb)) continue;
                double coef = -power_n4(xc, m, -1.0) / (n4_factorial(nn) * n4_factorial(m));
                if (coef == 0.0) continue;
                N4 k{nn[0] + m[0], nn[1] + m[1], nn[2] + m[2], nn[3] + m[3]};
                for (int g = 0; g < S.size(); ++g) {
                    if (S.is_pp(g)) continue;
                    const Eigen::MatrixXd* blk = F.find(i, g);
                    if (!blk) continue;
                    const auto& d = D(g, k);
                    // d[w'][v] times F[w'][w]
                    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> Dm(
                        d.data(), S.dim(g), dv);
                    acc += coef * Dm.transpose() * (*blk);
                }
            }
            if (acc.cwiseAbs().maxCoeff() != 0.0) F.set_block(i, j, std::move(acc));
        }
    }
    return F;
}

BlockMap structure_group(const BlockMap& Fx, const BlockMap& Fy) { return compose(invert_triangular(Fx), Fy); }

RecenteredPair recentered_fields(const ModelContext& ctx, const Realization& lift, const BlockMap& Fx, int beta)
{
    const IndexSet& S = ctx.set;
    RecenteredPair r{GridField(ctx.grid, S.fiber(beta)), GridField(ctx.grid, S.fiber(beta))};
    for (int g = 0; g < S.size(); ++g) {
        const Eigen::MatrixXd* blk = Fx.find(beta, g);
        if (!blk) continue;
        if (!lift.phi[g]) throw std::invalid_argument("canonical lift lacks a needed field");
        field_times_matrix(*lift.phi[g], S.dim(g), *blk, r.pi, S.dim(beta), S.dim_v);
        if (!S.is_pp(g)) {
            if (!lift.phi_minus[g]) throw std::invalid_argument("canonical lift lacks a needed field");
            field_times_matrix(*lift.phi_minus[g], S.dim(g), *blk, r.pi_minus, S.dim(beta), S.dim_v);
        }
    }
    return r;
}

GridField reconstruct_ansatz(const ModelContext& ctx, const Realization& lift, const GridField& v, double g)
{
    int i0 = ctx.set.find(MultiIndex::zero()), ig = ctx.set.find(MultiIndex::delta_g(1));
    if (i0 < 0 || ig < 0 || !lift.phi[i0] || !lift.phi[ig]) throw std::invalid_argument("lift lacks Pi_0 or Pi_g");
    if (v.fiber != ctx.set.dim_v) throw std::invalid_argument("ansatz: v must be V-valued");
    GridField a = v;
    a += *lift.phi[i0];
    a.axpy(g, *lift.phi[ig]);
    return a;
}

GridField mollified_noise(const ModelContext& ctx, std::uint64_t seed, double rho)
{
    return mollify(sample_white_noise(ctx.grid, ctx.set.dim_v, seed), rho, ctx.eta);
}

ModelInstance make_instance(const ModelContext& ctx, std::uint64_t seed, double rho, const RenormConstants& c,
                            const std::vector<Node>& base_points)
{
    ModelInstance m;
    m.seed = seed;
    m.rho = rho;
    m.c = c;
    m.xi_rho = mollified_noise(ctx, seed, rho);
    m.lift = build_canonical_lift(ctx, m.xi_rho, c);
    m.base_points = base_points;
    for (auto& x : base_points) m.F.push_back(build_recenter_map(ctx, m.lift, x));
    return m;
}

nlohmann::json ModelInstance::manifest(const ModelContext& ctx) const
{
    nlohmann::json idx = nlohmann::json::array();
    for (int i = 0; i < ctx.set.size(); ++i)
        idx.push_back({{"beta", ctx.set.list[i].str()}, {"grade", ctx.set.grades[i].to_json()},
                       {"dim_W", ctx.set.dim(i)}});
    nlohmann::json bp = nlohmann::json::array();
    for (auto& x : base_points) bp.push_back(x);
    return {{"seed", seed},
            {"rho", rho},
            {"c", c.to_json()},
            {"grid", {{"Nt", ctx.grid.Nt}, {"Nx", ctx.grid.Nx}, {"T", ctx.grid.T}, {"L", ctx.grid.L}}},
            {"indices", idx},
            {"base_points", bp}};
}

}  // namespace ymr
