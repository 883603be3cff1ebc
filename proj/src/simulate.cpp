#include "vmar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vmar/dist.hpp"
#include "vmar/errors.hpp"

namespace vmar {

int default_burn_in(const MultiplicativeVMAR& model) {
    const auto rep = check_stationarity(model);
    const double radius = std::max(rep.lag_radius, rep.lead_radius);
    int burn = 200;
    if (radius > 0.0 && radius < 1.0) {
        const double needed = std::ceil(std::log(1e-8) / std::log(radius));
        burn = std::max(burn, static_cast<int>(std::min(needed, 1e6)));
    }
    if (model.lambda <= 2.0) burn *= 2;
    return burn;
}

TimeSeriesPanel simulate_vmar(const MultiplicativeVMAR& model, const SimulationConfig& cfg) {
    model.validate();
    const ModelOrder& o = model.order;
    if (model.representation != Representation::LeadFirst) {
        throw ModelInvalidError("simulation requires the lead-first representation");
    }
    const auto rep = check_stationarity(model);
    if (!rep.stationary) {
        throw ModelInvalidError("model is not stationary (lag radius " + std::to_string(rep.lag_radius) +
                                ", lead radius " + std::to_string(rep.lead_radius) + ")");
    }
    if (cfg.T < o.r + o.s + 10) throw StructuralError("simulation length T must be >= r + s + 10");
    const int burn = cfg.burn_in.value_or(default_burn_in(model));
    if (burn < 0) throw StructuralError("burn-in must be non-negative");

    const int N = o.N;
    const int L = cfg.T + 2 * burn;
    const MvtParams law(model.sigma, model.lambda);
    // Separate streams for the kept window and each burn-in side, drawn outward
    // from the window, so the burn-in length never changes the kept shocks.
    auto stream = [&](std::uint64_t part) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(part)};
        return Rng(seq);
    };
    Matrix eps(N, L);
    Rng central = stream(0), future = stream(1), past = stream(2);
    eps.middleCols(burn, cfg.T) = sample(cfg.T, law, central).transpose();
    if (burn > 0) {
        eps.rightCols(burn) = sample(burn, law, future).transpose();
        eps.leftCols(burn) = sample(burn, law, past).transpose().rowwise().reverse();
    }

    Matrix z = Matrix::Zero(N, L);
    for (int t = L - 1; t >= 0; --t) {
        Vector acc = eps.col(t);
        for (int j = 1; j <= o.s && t + j < L; ++j) acc.noalias() += model.psi[static_cast<std::size_t>(j - 1)] * z.col(t + j);
        z.col(t) = acc;
    }
    Matrix y = Matrix::Zero(N, L);
    for (int t = 0; t < L; ++t) {
        Vector acc = z.col(t);
        for (int i = 1; i <= o.r && t - i >= 0; ++i) acc.noalias() += model.phi[static_cast<std::size_t>(i - 1)] * y.col(t - i);
        y.col(t) = acc;
    }
    return TimeSeriesPanel::from_values(y.middleCols(burn, cfg.T).transpose());
}

}  // namespace vmar
