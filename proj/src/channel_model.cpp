#include "isapt/channel_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isapt {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream)
{
}

Philox4x32::Block Philox4x32::block(std::uint64_t index) const
{
    Block ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
              static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return ctr;
}

std::uint32_t Philox4x32::next_word()
{
    if (used_ == 4) {
        buffer_ = block(counter_++);
        used_ = 0;
    }
    return buffer_[static_cast<std::size_t>(used_++)];
}

double Philox4x32::uniform()
{
    const std::uint64_t hi = next_word() >> 5;  // 27 bits
    const std::uint64_t lo = next_word() >> 6;  // 26 bits
    const std::uint64_t bits = (hi << 26) | lo;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Philox4x32::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double path_loss(double wavelength, double distance)
{
    if (!(distance > 0.0)) {
        throw std::invalid_argument("path_loss: distance must be positive");
    }
    const double f = wavelength / (4.0 * kPi * distance);
    return f * f;
}

CVector rician_channel(std::uint64_t seed, std::uint64_t stream, const EhNodePlacement& placement,
                       const ArrayGeometry& geometry, double k_factor)
{
    if (!(k_factor >= 0.0)) {
        throw std::invalid_argument("rician_channel: K-factor must be non-negative");
    }
    const double gain = std::sqrt(path_loss(geometry.wavelength, placement.distance));
    const CVector los = steering_vector(geometry, placement.angle);
    if (std::isinf(k_factor)) {
        return gain * los;
    }
    const double los_weight = std::sqrt(k_factor / (1.0 + k_factor));
    const double nlos_weight = std::sqrt(1.0 / (1.0 + k_factor));
    Philox4x32 rng(seed, stream);
    const double component_sd = std::sqrt(0.5);
    CVector h(geometry.n_t);
    for (int n = 0; n < geometry.n_t; ++n) {
        const double re = rng.normal() * component_sd;
        const double im = rng.normal() * component_sd;
        h[n] = gain * (los_weight * los[n] + nlos_weight * Complex(re, im));
    }
    return h;
}

ChannelSet generate_channels(std::uint64_t seed, const std::vector<EhNodePlacement>& placements,
                             const ArrayGeometry& geometry, double k_factor)
{
    ChannelSet set;
    set.seed = seed;
    set.placements = placements;
    set.vectors.reserve(placements.size());
    for (std::size_t m = 0; m < placements.size(); ++m) {
        set.vectors.push_back(rician_channel(seed, m, placements[m], geometry, k_factor));
    }
    return set;
}

}  // namespace isapt
