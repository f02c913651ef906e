#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymr/model.hpp"

namespace ymr {

struct CheckItem {
    std::string name;
    double value = 0;
    double tol = 0;
    bool pass = true;
    bool fatal = true;   // statistical checks are reported but not fatal
    std::string where;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckItem> items;

    // keeps the worst value per check name
    void record(const std::string& name, double value, double tol, const std::string& where, bool fatal = true);
    const CheckItem* find(const std::string& name) const;
    bool pass() const;   // all fatal items pass
    nlohmann::json to_json() const;
};

struct SuiteSettings {
    RenormConstants c;
    std::vector<Node> base_points{{0, 0, 0, 0}, {1, 1, 0, 0}, {2, -1, 1, 0}};
    int nsamples = 4;
    std::uint64_t seed = 7;
    double rho = 0.5;
};

// max |a - b| / max(|a|, |b|), 0 when both vanish
double relative_difference(const std::vector<double>& a, const std::vector<double>& b);
double relative_difference(const GridField& a, const GridField& b);

// cocycle, G_xx, polynomial blocks, triangularity, sector zeros, Pi_y = Pi_x G_xy, vanishing derivatives,
// multiplicativity of G and the monomial form of G on b2/b3 blocks
SuiteReport algebraic_invariant_suite(const ModelContext& ctx, const SuiteSettings& s);
// max over |n| < |beta| of |d^n Pi_{x beta}(x)|, relative to max |Pi_{x beta}|
double vanishing_derivative_check(const ModelContext& ctx, const GridField& pi_x, int beta, const Node& x);
// lift + F_x against the direct construction, all indices and base points
SuiteReport route_equivalence_suite(const ModelContext& ctx, const SuiteSettings& s);
// xi -> -xi parity and spatial reflections of Pi^-_{0 beta} and Pi_{0 beta}; reflections need odd Nx
SuiteReport symmetry_suite(const ModelContext& ctx, const SuiteSettings& s);

// Hom(W,V) field reflected in spatial axis (1..3) about the origin node, with the induced signs
GridField reflect_field(const ModelContext& ctx, const GridField& f, int beta, int axis);
GridField reflect_noise(const ModelContext& ctx, const GridField& xi, int axis);

struct ScalingReport {
    int beta = 0;
    int p = 2;
    double rho = 0;
    std::vector<double> lambdas, norms, norm_se;
    double slope = 0, slope_se = 0;
    int nsamples = 0;
    std::string csv() const;
    nlohmann::json to_json() const;
};

struct ScalingSettings {
    ParabolicGrid grid{144, 24, 3.0};
    double rho = 1.0 / 32;
    std::vector<double> lambdas;   // empty: five geometric points on [8 rho, 1]
    int nsamples = 64;
    std::uint64_t seed = 11;
    int workers = 0;
};

// weights whose dot product with white noise equals pair(K (eta^rho * xi), phi^lambda_0)
std::vector<double> noise_weights_pi0(const ModelContext& ctx, const TestFunction& tf, double rho);
// L2 norms of Pi_{0 beta}(phi^lambda_0) and their log-log slope; beta = 0 uses noise weights
ScalingReport scaling_exponent_fit(const ModelContext& ctx, int beta, const ScalingSettings& s);

struct CauchyReport {
    int beta = 0;
    std::vector<double> rhos, diff_norms, diff_se, ratios;
    int nsamples = 0;
    bool ratios_below(double bound) const;
    std::string csv() const;
    nlohmann::json to_json() const;
};
// coupled differences Pi(rho_j) - Pi(rho_{j+1}) tested with phi^lambda_0
CauchyReport cauchy_in_rho(const ModelContext& ctx, int beta, const std::vector<double>& rhos, double lambda,
                           int nsamples, std::uint64_t seed, int workers = 0);

// translation invariance of Pi_{x0}(phi_x) moments and the automatic BPHZ zeros (statistical, not fatal)
SuiteReport stochastic_stats_suite(const ModelContext& ctx, const SuiteSettings& s);

// sup over base points and scales of |Pi_{x beta}(phi^lambda_x)| / lambda^{|beta|_-}, constant weight
struct SupReport {
    int beta = 0;
    double statistic = 0, statistic_half = 0;   // all base points, every other base point
    nlohmann::json to_json() const;
};
SupReport pointwise_sup_stats(const ModelContext& ctx, int beta, const SuiteSettings& s);

}  // namespace ymr
