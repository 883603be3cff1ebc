#pragma once

#include <cstdint>
#include <optional>

#include "vmar/model.hpp"
#include "vmar/panel.hpp"

namespace vmar {

struct SimulationConfig {
    int T = 500;
    std::optional<int> burn_in;  // per side; default_burn_in() when empty
    std::uint64_t seed = 0;
};

/// max(200, ceil(log(1e-8) / log(rho))) with rho the larger companion radius,
/// doubled when lambda <= 2.
int default_burn_in(const MultiplicativeVMAR& model);

/// Sample path of a stationary lead-first VMAR with Student-t innovations.
///
/// The noncausal block Z_t = sum_j Psi_j Z_{t+j} + eps_t is run backward from
/// a zero far-future edge, then Y_t = sum_i Phi_i Y_{t-i} + Z_t forward from a
/// zero far-past edge, over T + 2 * burn_in points; the central T are kept.
/// Throws ModelInvalidError for non-stationary or lag-first models.
TimeSeriesPanel simulate_vmar(const MultiplicativeVMAR& model, const SimulationConfig& cfg);

}  // namespace vmar
