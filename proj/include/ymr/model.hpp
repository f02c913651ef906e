#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ymr/fieldgrid.hpp"
#include "ymr/indexcalc.hpp"
#include "ymr/tensoralg.hpp"

namespace ymr {

// populated indices below a grade bound, with their W bases
struct IndexSet {
    GradedValue bound;
    int dim_v = 0;
    std::vector<MultiIndex> list;   // grade order
    std::vector<GradedValue> grades;
    std::vector<WBasis> basis;
    std::map<MultiIndex, int> pos;

    static IndexSet build(const GradedValue& bound, int dim_v);
    // keep only indices accepted by the predicate (closure is checked when used)
    IndexSet restricted(const std::function<bool(const MultiIndex&)>& keep) const;

    int size() const { return static_cast<int>(list.size()); }
    int find(const MultiIndex& b) const;
    bool is_pp(int i) const { return list[i].g == 0 && list[i].slots() == 1; }
    int dim(int i) const { return basis[i].dim(); }
    int fiber(int i) const { return basis[i].dim() * dim_v; }
};

struct RenormConstants {
    std::array<double, 4> c{0, 0, 0, 0};
    std::array<double, 4> se{0, 0, 0, 0};
    std::string provenance = "zero";
    double scale = 0;
    int nsamples = 0;
    std::uint64_t seed = 0;

    double operator[](int k) const { return c[k - 1]; }   // k = 1..4
    RenormConstants parity_flipped() const;                 // c_k -> (-1)^k c_k
    nlohmann::json to_json() const;
};

// sparse forms of the quadratic and cubic nonlinearities for a given Lie algebra
struct NonlinOps {
    struct Bi {
        int v, axis, v2, out;
        double coef;
    };
    struct Tri {
        int v, v2, v3, out;
        double coef;
    };
    int dim_v = 0;
    std::vector<Bi> A;    // A(U,U')_out += coef U_v d_axis U'_v2 (axis in 1..3)
    std::vector<Tri> B;   // B(U,U',U'')_out += coef U_v U'_v2 U''_v3
    explicit NonlinOps(const LieData& lie);
    bool vanishes() const { return A.empty() && B.empty(); }
};

enum class NonlinKind { A, B };
// V-valued fields; the caller multiplies by powers of g
GridField nonlinearity_eval(NonlinKind kind, const LieData& lie, const GridField& U, const GridField& U1,
                            const GridField* U2 = nullptr);

// grid, kernel, algebra and index set shared by all noise samples
struct ModelContext {
    IndexSet set;
    LieData lie;
    ParabolicGrid grid;
    KernelSpec kspec;
    NonlinOps ops;
    KernelOperator K;
    Profile eta;

    ModelContext(IndexSet s, LieData l, const ParabolicGrid& g, KernelSpec k = {});
};

// values of Phi_beta and Phi^-_beta as Hom(W_beta, V)-valued fields, fiber index w*dim_v + v
struct Realization {
    enum class Mode { lift, recentered };
    Mode mode = Mode::lift;
    Node base{0, 0, 0, 0};
    std::vector<std::optional<GridField>> phi, phi_minus;
};

struct BuildRequest {
    std::vector<char> want_phi, want_minus;   // per index; empty means everything
    // called with Phi^-_beta as soon as it is known; the field is dropped afterwards unless wanted
    std::function<void(int, const GridField&)> on_minus;
};

// canonical lift (polynomials y^n) or direct recentered construction at x (polynomials (y-x)^n)
Realization build_realization(const ModelContext& ctx, const GridField& xi_rho, const RenormConstants& c,
                              Realization::Mode mode, const Node& x = {0, 0, 0, 0}, const BuildRequest& req = {});
Realization build_canonical_lift(const ModelContext& ctx, const GridField& xi_rho, const RenormConstants& c);
Realization build_direct(const ModelContext& ctx, const GridField& xi_rho, const RenormConstants& c, const Node& x);

// polynomial field y^n Id (lift) or (y-x)^n Id (recentered)
GridField polynomial_field(const ModelContext& ctx, int index, const Node& shift, bool recentered);

// block linear maps (F)_beta^gamma : W_beta -> W_gamma, stored as dim(W_gamma) x dim(W_beta)
struct BlockMap {
    const IndexSet* set = nullptr;
    std::map<std::pair<int, int>, Eigen::MatrixXd> blocks;   // key (beta, gamma)

    const Eigen::MatrixXd* find(int beta, int gamma) const;
    Eigen::MatrixXd block(int beta, int gamma) const;
    void set_block(int beta, int gamma, Eigen::MatrixXd m);
};

BlockMap identity_map(const IndexSet& set);
BlockMap compose(const BlockMap& a, const BlockMap& b);   // (ab)_beta^gamma = sum_delta a_delta^gamma b_beta^delta
BlockMap invert_triangular(const BlockMap& f);
double max_block_diff(const BlockMap& a, const BlockMap& b);
// block (beta, gamma) of the algebra endomorphism fixed by its rows on purely polynomial gamma
Eigen::MatrixXd substitution_block(const BlockMap& rows, int beta, int gamma);
// every block rebuilt multiplicatively from the purely polynomial rows
BlockMap rebuild_from_pp_rows(const BlockMap& rows);

// recentering automorphism F_x from the canonical lift
BlockMap build_recenter_map(const ModelContext& ctx, const Realization& lift, const Node& x);
BlockMap structure_group(const BlockMap& Fx, const BlockMap& Fy);

struct RecenteredPair {
    GridField pi, pi_minus;
};
RecenteredPair recentered_fields(const ModelContext& ctx, const Realization& lift, const BlockMap& Fx, int beta);

// A(x) = v(x) + Pi_{x0}(x) + g Pi_{x delta_g}(x)
GridField reconstruct_ansatz(const ModelContext& ctx, const Realization& lift, const GridField& v, double g);

// one noise sample with its lift and recentering maps
struct ModelInstance {
    std::uint64_t seed = 0;
    double rho = 0;
    RenormConstants c;
    GridField xi_rho;
    Realization lift;
    std::vector<Node> base_points;
    std::vector<BlockMap> F;

    nlohmann::json manifest(const ModelContext& ctx) const;
};

GridField mollified_noise(const ModelContext& ctx, std::uint64_t seed, double rho);
ModelInstance make_instance(const ModelContext& ctx, std::uint64_t seed, double rho, const RenormConstants& c,
                            const std::vector<Node>& base_points);

// displacement x - y as a real point in fundamental-domain coordinates
Point4 node_coords(const ParabolicGrid& g, const Node& x);

}  // namespace ymr
