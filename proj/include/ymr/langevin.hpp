#pragma once

#include <cstdint>
#include <array>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymr/model.hpp"

namespace ymr {

// experimental: spatial torus only, time handled by the integrator
struct LangevinConfig {
    int Nx = 16;
    double L = 4.0;
    double m = 1.0;
    double g = 0.0;
    double rho = 0.125;   // spatial mollification of the noise
    RenormConstants c;
    double dt = 0.01;
    double horizon = 1.0;
    int record_every = 10;
    std::uint64_t seed = 1;
    double blowup = 1e8;   // abort when max |A| exceeds this
};

struct NumericalAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LangevinTrajectory {
    std::vector<double> times, l2;
    GridField final;
    std::string csv() const;
};

// exponential integrator for (d_t - Delta + m^2) A = g A(A,A) + g^2 B(A,A,A) + c A + xi^rho
class LangevinIntegrator {
public:
    LangevinIntegrator(const LieData& lie, const LangevinConfig& cfg);

    const ParabolicGrid& grid() const { return grid_; }
    int dim_v() const { return lie_.dim_v(); }
    // |k|^2 + m^2 per r2c mode
    const std::vector<double>& symbol() const { return lambda_; }
    // spatial white-noise increment over dt, variance dt / hx^3 per cell and component
    GridField noise_increment(std::mt19937_64& rng) const;
    // deterministic part plus the given increment filtered by the mollifier symbol
    GridField step(const GridField& A, const GridField* dW, const std::vector<double>* filter = nullptr) const;
    // without noise when with_noise is false
    LangevinTrajectory run(const GridField& A0, bool with_noise) const;
    // A(t) = exp(-t(-Delta + m^2)) A0 in one spectral step
    GridField linear_flow(const GridField& A0, double t) const;
    const std::vector<double>& mollifier() const { return moll_; }
    const LangevinConfig& config() const { return cfg_; }

private:
    LieData lie_;
    LangevinConfig cfg_;
    ParabolicGrid grid_;
    std::vector<double> lambda_, decay_, phi1_, noise_gain_, moll_;
    double counterterm_ = 0;
};

struct ModeVariance {
    std::array<int, 3> mode;
    double measured = 0, expected = 0;
};
// time average of E|a_k|^2 / L^3 per component, a = hx^3 DFT(A), after a burn-in
std::vector<ModeVariance> stationary_mode_variances(const LangevinIntegrator& integ, double burnin, double horizon,
                                                    int max_mode, std::uint64_t seed);

struct CoupledReport {
    double rho = 0, rho2 = 0;
    double distance_with = 0, distance_without = 0;   // sup_t ||A_rho - A_rho2||_L2, counterterm on/off
    nlohmann::json to_json() const;
};
// same white-noise increments mollified at rho and rho2
CoupledReport run_coupled_comparison(const LieData& lie, const LangevinConfig& cfg, double rho, double rho2);
// sup_t ||A_rho - A_rho2||_L2 for one trajectory pair
double coupled_distance(const LieData& lie, const LangevinConfig& cfg, double rho, double rho2,
                        const RenormConstants& c);

}  // namespace ymr
