#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <json.hpp>

#include "ymr/model.hpp"

namespace ymr {

struct McEstimate {
    std::vector<double> mean, se;   // per fiber component
    double proj_mean = 0, proj_se = 0;
    double proj_scale = 0;   // largest |projected sample|, sets the roundoff floor
    int nsamples = 0;        // independent samples (antithetic pairs count once)
    std::uint64_t seed = 0;

    // |projected mean| <= k SE, up to roundoff of the summands
    bool within(double k) const;
    nlohmann::json to_json() const;
};

struct BphzSettings {
    ParabolicGrid grid{24, 8, 2.4};
    double rho = 0.5;
    double lambda_bar = 1.0;
    int nsamples = 64;
    bool antithetic = true;
    std::uint64_t seed = 1;
    int workers = 0;
    int r = 3;
};

// unit scalar functional on Hom(W,V): normalized trace when dim W = dim V, else the normalized sum
std::vector<double> projection_vector(int dim_w, int dim_v);

// E pair(Pi^-_{0 beta}, psi^lambda_bar) for the listed indices of ctx.set
std::map<int, McEstimate> mc_pairing_expectation(const ModelContext& ctx, const std::vector<int>& betas,
                                                 const RenormConstants& c, const BphzSettings& s);

// the indices l g and l g + 0 (and the constant polynomial) that the fixing needs
IndexSet bphz_family(const IndexSet& full);

// c_k = -E pair(Pi^-_{0, k g + 0}, psi) with c_k = 0 and the lower constants fixed, k = 1..4
RenormConstants fix_bphz_constants(const LieData& lie, const BphzSettings& s, const KernelSpec& k = {});

enum class BphzType { I1, I2, I3, I4 };
struct ClosureEntry {
    MultiIndex beta;
    BphzType type;
    McEstimate est;
    bool pass = false;
};
// fresh samples with the given constants, every type within 3 SE
std::vector<ClosureEntry> bphz_closure(const LieData& lie, const RenormConstants& c, const BphzSettings& s,
                                       const KernelSpec& k = {});

}  // namespace ymr
