#include "ymr/renorm.hpp"

#include <cmath>
#include <stdexcept>

#include "ymr/runtime.hpp"

namespace ymr {

bool McEstimate::within(double k) const
{
    return std::abs(proj_mean) <= k * proj_se + 1e-12 * proj_scale;
}

nlohmann::json McEstimate::to_json() const
{
    return {{"mean", mean},         {"se", se},         {"proj_mean", proj_mean},
            {"proj_se", proj_se},   {"nsamples", nsamples}, {"seed", seed}};
}

std::vector<double> projection_vector(int dim_w, int dim_v)
{
    std::vector<double> p(static_cast<size_t>(dim_w) * dim_v, 0.0);
    if (dim_w == dim_v) {
        for (int v = 0; v < dim_v; ++v) p[v * dim_v + v] = 1.0 / dim_v;
    } else {
        for (auto& x : p) x = 1.0 / std::sqrt(static_cast<double>(p.size()));
    }
    return p;
}

std::map<int, McEstimate> mc_pairing_expectation(const ModelContext& ctx, const std::vector<int>& betas,
                                                 const RenormConstants& c, const BphzSettings& s)
{
    const IndexSet& S = ctx.set;
    for (int b : betas) {
        if (b < 0 || b >= S.size()) throw std::invalid_argument("index out of range");
        if (S.is_pp(b)) throw std::invalid_argument("purely polynomial indices have no Pi^-");
        if (!(S.grades[b] < GradedValue::integer(2))) throw std::invalid_argument("BPHZ indices must have grade < 2");
    }
    if (s.nsamples < 2 || (s.antithetic && s.nsamples % 2)) throw std::invalid_argument("bad sample count");
    TestFunction tf{psi_profile(s.r), s.lambda_bar, {0, 0, 0, 0}};
    auto w = pairing_weights(ctx.grid, tf, true);

    BuildRequest req;
    req.want_phi.assign(S.size(), 0);
    req.want_minus.assign(S.size(), 0);
    for (int b : betas) req.want_minus[b] = 1;

    int draws = s.antithetic ? s.nsamples / 2 : s.nsamples;
    // samples[draw][beta slot] = paired values
    std::vector<std::vector<std::vector<double>>> samples(draws);
    auto run = [&](const GridField& xi) {
        std::vector<std::vector<double>> out(betas.size());
        BuildRequest r = req;
        r.on_minus = [&](int i, const GridField& f) {
            for (size_t j = 0; j < betas.size(); ++j)
                if (betas[j] == i) out[j] = pair_with_weights(f, w);
        };
        build_realization(ctx, xi, c, Realization::Mode::recentered, {0, 0, 0, 0}, r);
        return out;
    };
    parallel_for(draws, s.workers, [&](int d) {
        GridField xi = mollified_noise(ctx, derive_seed(s.seed, d), s.rho);
        auto a = run(xi);
        if (s.antithetic) {
            xi *= -1.0;
            auto b = run(xi);
            for (size_t j = 0; j < a.size(); ++j)
                for (size_t c2 = 0; c2 < a[j].size(); ++c2) a[j][c2] = 0.5 * (a[j][c2] + b[j][c2]);
        }
        samples[d] = std::move(a);
    });

    std::map<int, McEstimate> res;
    for (size_t j = 0; j < betas.size(); ++j) {
        int b = betas[j];
        McEstimate e;
        e.nsamples = draws;
        e.seed = s.seed;
        size_t fb = S.fiber(b);
        e.mean.assign(fb, 0.0);
        e.se.assign(fb, 0.0);
        auto pv = projection_vector(S.dim(b), S.dim_v);
        std::vector<double> proj(draws, 0.0);
        for (int d = 0; d < draws; ++d) {
            const auto& x = samples[d][j];
            for (size_t c2 = 0; c2 < fb; ++c2) {
                e.mean[c2] += x[c2] / draws;
                proj[d] += pv[c2] * x[c2];
            }
            e.proj_scale = std::max(e.proj_scale, std::abs(proj[d]));
        }
        for (int d = 0; d < draws; ++d) {
            const auto& x = samples[d][j];
            for (size_t c2 = 0; c2 < fb; ++c2) e.se[c2] += std::pow(x[c2] - e.mean[c2], 2);
            e.proj_mean += proj[d] / draws;
        }
        double pvar = 0;
        for (int d = 0; d < draws; ++d) pvar += std::pow(proj[d] - e.proj_mean, 2);
        e.proj_se = std::sqrt(pvar / (draws - 1) / draws);
        for (auto& v : e.se) v = std::sqrt(v / (draws - 1) / draws);
        res[b] = std::move(e);
    }
    return res;
}

IndexSet bphz_family(const IndexSet& full)
{
    return full.restricted([](const MultiIndex& b) {
        if (b.poly.empty()) return true;
        return b.poly.size() == 1 && b.poly[0].first == N4{0, 0, 0, 0} && b.poly[0].second == 1;
    });
}

namespace {

IndexSet default_set(int dim_v) { return IndexSet::build(GradedValue::integer(2), dim_v); }

}  // namespace

RenormConstants fix_bphz_constants(const LieData& lie, const BphzSettings& s, const KernelSpec& k)
{
    ModelContext ctx(bphz_family(default_set(lie.dim_v())), lie, s.grid, k);
    RenormConstants c;
    c.provenance = "bphz";
    c.scale = s.lambda_bar;
    c.nsamples = s.nsamples;
    c.seed = s.seed;
    for (int kk = 1; kk <= 4; ++kk) {
        int b = ctx.set.find(MultiIndex::delta_g(kk) + MultiIndex::delta_n({0, 0, 0, 0}));
        if (b < 0) throw std::logic_error("BPHZ family lacks k g + 0");
        c.c[kk - 1] = 0.0;
        BphzSettings sk = s;
        sk.seed = derive_seed(s.seed, 100 + kk);
        auto est = mc_pairing_expectation(ctx, {b}, c, sk).at(b);
        c.c[kk - 1] = 0.0 - est.proj_mean;   // no negative zero
        c.se[kk - 1] = est.proj_se;
    }
    return c;
}

std::vector<ClosureEntry> bphz_closure(const LieData& lie, const RenormConstants& c, const BphzSettings& s,
                                       const KernelSpec& k)
{
    ModelContext ctx(default_set(lie.dim_v()), lie, s.grid, k);
    const IndexSet& S = ctx.set;
    std::vector<int> betas;
    std::vector<ClosureEntry> out;
    for (int i = 0; i < S.size(); ++i) {
        if (S.is_pp(i)) continue;
        const auto& b = S.list[i];
        ClosureEntry e;
        e.beta = b;
        if (b.poly.empty())
            e.type = BphzType::I1;
        else if (b.slots() == 1 && b.poly[0].first == N4{0, 0, 0, 0})
            e.type = BphzType::I2;
        else if (b.slots() == 2)
            e.type = BphzType::I3;
        else
            e.type = BphzType::I4;
        betas.push_back(i);
        out.push_back(e);
    }
    BphzSettings sc = s;
    sc.seed = derive_seed(s.seed, 999);
    auto est = mc_pairing_expectation(ctx, betas, c, sc);
    for (size_t j = 0; j < betas.size(); ++j) {
        out[j].est = est.at(betas[j]);
        out[j].pass = out[j].est.within(3.0);
    }
    return out;
}

}  // namespace ymr
