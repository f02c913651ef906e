#include "ymr/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ymr {

namespace {
// spatial L2 norm on a one-slice grid
double spatial_l2(const GridField& f)
{
    double s = 0;
    for (double v : f.data) s += v * v;
    return std::sqrt(s * std::pow(f.grid.hx, 3));
}
}  // namespace

std::string LangevinTrajectory::csv() const
{
    std::ostringstream os;
    os.precision(12);
    os << "t,l2\n";
    for (size_t i = 0; i < times.size(); ++i) os << times[i] << "," << l2[i] << "\n";
    return os.str();
}

LangevinIntegrator::LangevinIntegrator(const LieData& lie, const LangevinConfig& cfg)
    : lie_(lie), cfg_(cfg), grid_(1, cfg.Nx, cfg.L)
{
    if (!(cfg.dt > 0) || !(cfg.horizon >= 0) || !(cfg.m > 0)) throw std::invalid_argument("langevin: bad time step");
    if (cfg.Nx < 4) throw std::invalid_argument("langevin: grid too small");
    // explicit nonlinear part: dt <= hx^2
    if (cfg.g != 0.0 && !lie.is_abelian() && cfg.dt > grid_.hx * grid_.hx)
        throw std::invalid_argument("langevin: dt exceeds the stability bound hx^2");
    const size_t nq = spectrum_size(grid_);
    const int h = grid_.Nx / 2 + 1;
    lambda_.resize(nq);
    size_t q = 0;
    for (int b = 0; b < grid_.Nx; ++b)
        for (int c = 0; c < grid_.Nx; ++c)
            for (int d = 0; d < h; ++d, ++q) {
                double k1 = frequency(grid_, 1, b), k2 = frequency(grid_, 2, c), k3 = frequency(grid_, 3, d);
                lambda_[q] = k1 * k1 + k2 * k2 + k3 * k3 + cfg.m * cfg.m;
            }
    for (double l : lambda_) {
        double z = l * cfg.dt;
        decay_.push_back(std::exp(-z));
        phi1_.push_back(-std::expm1(-z) / l);
        noise_gain_.push_back(std::sqrt(-std::expm1(-2 * z) / (2 * z)));
    }
    // spatial factor of eta; on a one-slice grid the time frequency is zero
    moll_ = cfg.rho > 0 ? profile_symbol(grid_, eta_profile(), cfg.rho) : std::vector<double>(nq, 1.0);
    for (int k = 1; k <= 4; ++k) counterterm_ += cfg.c[k] * std::pow(cfg.g, k);
}

GridField LangevinIntegrator::noise_increment(std::mt19937_64& rng) const
{
    GridField f(grid_, dim_v());
    std::normal_distribution<double> nd(0.0, std::sqrt(cfg_.dt / std::pow(grid_.hx, 3)));
    for (auto& v : f.data) v = nd(rng);
    return f;
}

GridField LangevinIntegrator::step(const GridField& A, const GridField* dW, const std::vector<double>* filter) const
{
    GridField out = fourier_multiply(A, decay_);
    bool nonlinear = cfg_.g != 0.0 && !lie_.is_abelian();
    if (nonlinear || counterterm_ != 0.0) {
        GridField N(grid_, dim_v());
        if (nonlinear) {
            N.axpy(cfg_.g, nonlinearity_eval(NonlinKind::A, lie_, A, A));
            N.axpy(cfg_.g * cfg_.g, nonlinearity_eval(NonlinKind::B, lie_, A, A, &A));
        }
        if (counterterm_ != 0.0) N.axpy(counterterm_, A);
        out += fourier_multiply(N, phi1_);
    }
    if (dW) {
        const auto& f = filter ? *filter : moll_;
        std::vector<double> gain(f.size());
        for (size_t q = 0; q < f.size(); ++q) gain[q] = f[q] * noise_gain_[q];
        out += fourier_multiply(*dW, gain);
    }
    double mx = out.max_abs();
    if (!std::isfinite(mx) || mx > cfg_.blowup)
        throw NumericalAbort("langevin: solution blew up (max |A| = " + std::to_string(mx) + ")");
    return out;
}

LangevinTrajectory LangevinIntegrator::run(const GridField& A0, bool with_noise) const
{
    if (!(A0.grid == grid_) || A0.fiber != dim_v()) throw std::invalid_argument("langevin: initial datum shape");
    std::mt19937_64 rng(cfg_.seed);
    LangevinTrajectory tr;
    GridField A = A0;
    int steps = static_cast<int>(std::llround(cfg_.horizon / cfg_.dt));
    auto record = [&](double t) {
        tr.times.push_back(t);
        tr.l2.push_back(spatial_l2(A));
    };
    record(0);
    for (int s = 1; s <= steps; ++s) {
        if (with_noise) {
            GridField dW = noise_increment(rng);
            A = step(A, &dW);
        } else {
            A = step(A, nullptr);
        }
        if (s % cfg_.record_every == 0 || s == steps) record(s * cfg_.dt);
    }
    tr.final = std::move(A);
    return tr;
}

GridField LangevinIntegrator::linear_flow(const GridField& A0, double t) const
{
    std::vector<double> e(lambda_.size());
    for (size_t q = 0; q < e.size(); ++q) e[q] = std::exp(-t * lambda_[q]);
    return fourier_multiply(A0, e);
}

std::vector<ModeVariance> stationary_mode_variances(const LangevinIntegrator& integ, double burnin, double horizon,
                                                    int max_mode, std::uint64_t seed)
{
    const auto& g = integ.grid();
    const auto& cfg = integ.config();
    if (max_mode < 0 || 2 * max_mode >= g.Nx) throw std::invalid_argument("mode range exceeds the grid");
    std::mt19937_64 rng(seed);
    GridField A(g, integ.dim_v());
    const int h = g.Nx / 2 + 1;
    const int dv = integ.dim_v();
    // third component >= 0 is stored directly in the r2c layout; skip conjugate duplicates
    std::vector<std::pair<std::array<int, 3>, size_t>> modes;
    for (int a = -max_mode; a <= max_mode; ++a)
        for (int b = -max_mode; b <= max_mode; ++b)
            for (int c = 0; c <= max_mode; ++c) {
                if (c == 0 && (b < 0 || (b == 0 && a < 0))) continue;
                size_t q = (static_cast<size_t>((a + g.Nx) % g.Nx) * g.Nx + (b + g.Nx) % g.Nx) * h + c;
                modes.push_back({{a, b, c}, q});
            }
    std::vector<double> acc(modes.size(), 0.0);
    const double hx3 = std::pow(g.hx, 3), L3 = std::pow(g.L, 3);
    const long nburn = std::lround(burnin / cfg.dt), nrun = std::lround(horizon / cfg.dt);
    for (long s = 0; s < nburn + nrun; ++s) {
        GridField dW = integ.noise_increment(rng);
        A = integ.step(A, &dW);
        if (s < nburn) continue;
        auto F = fourier_coefficients(A);
        for (size_t i = 0; i < modes.size(); ++i)
            for (int v = 0; v < dv; ++v) acc[i] += std::norm(F[modes[i].second * dv + v] * hx3);
    }
    std::vector<ModeVariance> out;
    for (size_t i = 0; i < modes.size(); ++i) {
        ModeVariance mv;
        mv.mode = modes[i].first;
        mv.measured = acc[i] / (static_cast<double>(nrun) * dv * L3);
        mv.expected = 0.5 / integ.symbol()[modes[i].second];
        out.push_back(mv);
    }
    return out;
}

nlohmann::json CoupledReport::to_json() const
{
    return {{"rho", rho}, {"rho2", rho2}, {"distance_with_counterterm", distance_with},
            {"distance_without_counterterm", distance_without}};
}

double coupled_distance(const LieData& lie, const LangevinConfig& cfg, double rho, double rho2,
                        const RenormConstants& c)
{
    LangevinConfig a = cfg, b = cfg;
    a.rho = rho;
    a.c = c;
    b.rho = rho2;
    b.c = c;
    LangevinIntegrator ia(lie, a), ib(lie, b);
    std::mt19937_64 rng(cfg.seed);
    GridField A(ia.grid(), ia.dim_v()), B = A;
    double sup = 0;
    long steps = std::lround(cfg.horizon / cfg.dt);
    for (long s = 0; s < steps; ++s) {
        GridField dW = ia.noise_increment(rng);
        A = ia.step(A, &dW);
        B = ib.step(B, &dW);
        GridField d = A;
        d -= B;
        sup = std::max(sup, spatial_l2(d));
    }
    return sup;
}

CoupledReport run_coupled_comparison(const LieData& lie, const LangevinConfig& cfg, double rho, double rho2)
{
    CoupledReport r;
    r.rho = rho;
    r.rho2 = rho2;
    r.distance_with = coupled_distance(lie, cfg, rho, rho2, cfg.c);
    r.distance_without = coupled_distance(lie, cfg, rho, rho2, RenormConstants{});
    return r;
}

}  // namespace ymr
