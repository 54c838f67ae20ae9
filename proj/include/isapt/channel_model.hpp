#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "isapt/sensing_model.hpp"
#include "isapt/types.hpp"

namespace isapt {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// Output block k of stream s under key `seed` is Philox(counter = {k_lo, k_hi, s_lo, s_hi},
/// key = {seed_lo, seed_hi}). Any block can be produced independently of the others.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    Block block(std::uint64_t index) const;

    /// Uniform double in (0, 1) built from 53 bits; never returns 0 or 1.
    double uniform();

    /// Standard normal via the Box-Muller transform; consumes one block per pair.
    double normal();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    Block buffer_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;

    std::uint32_t next_word();
};

struct EhNodePlacement {
    double distance = 5.0;  ///< [m]
    double angle = 0.0;     ///< [rad]
    double weight = 1.0;
};

struct ChannelSet {
    std::vector<CVector> vectors;  ///< h_m, length N_t each
    std::vector<EhNodePlacement> placements;
    std::uint64_t seed = 0;
};

/// Free-space path gain lambda^2 / (4 pi R)^2.
double path_loss(double wavelength, double distance);

/**
 * One Rician channel vector
 *   h = sqrt(PL) (sqrt(k/(1+k)) u(angle) + sqrt(1/(1+k)) g),
 * g ~ CN(0, I). The scattered part is drawn from stream `stream` of `seed`. A k_factor of
 * +infinity gives the pure line-of-sight vector.
 */
CVector rician_channel(std::uint64_t seed, std::uint64_t stream, const EhNodePlacement& placement,
                       const ArrayGeometry& geometry, double k_factor);

/// All nodes of one realization; node m uses stream m of `seed`.
ChannelSet generate_channels(std::uint64_t seed, const std::vector<EhNodePlacement>& placements,
                             const ArrayGeometry& geometry, double k_factor);

}  // namespace isapt
