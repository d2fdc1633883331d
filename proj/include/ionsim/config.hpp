#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionsim/noise.hpp"

namespace ionsim {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Mode : std::size_t { Axial = 0, Radial = 1 };
inline constexpr std::size_t kNumModes = 2;

struct ModeParams {
    double eta = 0.0;
    double nbar = 0.0;
    double freq_mhz = 0.0;
};

// Ground-state-effective Rabi frequencies (rad/us) per drive type. The engine
// rescales to the bare coupling by dividing out the all-modes-ground matrix
// element, so a carrier calibrated to pi/7us really produces a 7 us pi time
// on |S,0>.
struct Calibration {
    double omega_carrier_rad_us = 3.141592653589793 / 7.0;
    double omega_bsb_rad_us = 3.141592653589793 / 30.0;
    double omega_rsb_rad_us = 3.141592653589793 / 30.0;
    double omega_raman_rad_us = 3.141592653589793 / 1000.0;
    double omega_shelve_rad_us = 3.141592653589793 / 7.0;
};

struct RunConfig {
    BFieldNoise bfield;
    LaserNoise laser;
    OpenSystemRates rates;
    ModeParams modes[kNumModes] = {
        {0.068, 0.0, kOmegaAxialMHz},
        {0.016, 3.0, kOmegaRadialMHz},
    };
    Calibration calib;
    double detection_error = 0.0;
    long n_max = kDefaultNMax;
    std::uint64_t master_seed = 1;
    long shots_per_point = 100;
    int workers = 1;

    const ModeParams& mode(Mode m) const { return modes[static_cast<std::size_t>(m)]; }
    ModeParams& mode(Mode m) { return modes[static_cast<std::size_t>(m)]; }

    double heating_rate_per_ms(Mode m) const {
        return m == Mode::Axial ? rates.heating_axial_per_ms : rates.heating_radial_per_ms;
    }
    void set_heating_rate_per_ms(Mode m, double r) {
        (m == Mode::Axial ? rates.heating_axial_per_ms : rates.heating_radial_per_ms) = r;
    }
};

// Strict JSON round trip: parse rejects unknown keys and reports missing ones
// by path; serialize emits the complete document with stable key order.
RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& cfg);

// FNV-1a over the canonical serialization; recorded in output manifests.
std::uint64_t config_hash(const RunConfig& cfg);

void validate_config(const RunConfig& cfg);  // throws ConfigError

}  // namespace ionsim
