#include "ionsim/config.hpp"

#include <cstdint>
#include <initializer_list>
#include <string>

#include <json.hpp>

namespace ionsim {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError("config section '" + path + "' must be an object");
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> keys) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : keys) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) throw ConfigError("unknown config key '" + path + item.key() + "'");
    }
}

const json& get(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError("missing config key '" + path + key + "'");
    return *it;
}

double num(const json& obj, const std::string& path, const char* key) {
    const json& j = get(obj, path, key);
    if (!j.is_number()) throw ConfigError("config key '" + path + key + "' must be a number");
    return j.get<double>();
}

long integer(const json& obj, const std::string& path, const char* key) {
    const json& j = get(obj, path, key);
    if (!j.is_number_integer()) {
        throw ConfigError("config key '" + path + key + "' must be an integer");
    }
    return j.get<long>();
}

std::uint64_t uint64(const json& obj, const std::string& path, const char* key) {
    const json& j = get(obj, path, key);
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        throw ConfigError("config key '" + path + key + "' must be a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

bool boolean(const json& obj, const std::string& path, const char* key) {
    const json& j = get(obj, path, key);
    if (!j.is_boolean()) throw ConfigError("config key '" + path + key + "' must be a boolean");
    return j.get<bool>();
}

ModeParams parse_mode(const json& obj, const std::string& path) {
    require_object(obj, path);
    check_keys(obj, path + ".", {"eta", "nbar", "freq_mhz"});
    ModeParams m;
    m.eta = num(obj, path + ".", "eta");
    m.nbar = num(obj, path + ".", "nbar");
    m.freq_mhz = num(obj, path + ".", "freq_mhz");
    return m;
}

}  // namespace

RunConfig config_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    require_object(root, "(root)");
    check_keys(root, "", {"bfield", "laser", "rates", "modes", "calibration", "detection_error",
                          "n_max", "master_seed", "shots_per_point", "workers"});

    RunConfig cfg;

    {
        const json& b = get(root, "", "bfield");
        require_object(b, "bfield");
        check_keys(b, "bfield.",
                   {"b0_gauss", "amp_50hz_mgauss", "compensation_factor", "drift_sigma_mgauss",
                    "triggered", "trigger_base_delay_ms"});
        cfg.bfield.b0_gauss = num(b, "bfield.", "b0_gauss");
        cfg.bfield.amp_50hz_mgauss = num(b, "bfield.", "amp_50hz_mgauss");
        cfg.bfield.compensation_factor = num(b, "bfield.", "compensation_factor");
        cfg.bfield.drift_sigma_mgauss = num(b, "bfield.", "drift_sigma_mgauss");
        cfg.bfield.triggered = boolean(b, "bfield.", "triggered");
        cfg.bfield.trigger_base_delay_ms = num(b, "bfield.", "trigger_base_delay_ms");
    }
    {
        const json& l = get(root, "", "laser");
        require_object(l, "laser");
        check_keys(l, "laser.",
                   {"sigma_shot_hz", "lorentzian_hz", "intensity_sigma_rel", "intensity_as_rabi",
                    "sideband_reference_weight"});
        cfg.laser.sigma_shot_hz = num(l, "laser.", "sigma_shot_hz");
        cfg.laser.lorentzian_hz = num(l, "laser.", "lorentzian_hz");
        cfg.laser.intensity_sigma_rel = num(l, "laser.", "intensity_sigma_rel");
        cfg.laser.intensity_as_rabi = boolean(l, "laser.", "intensity_as_rabi");
        cfg.laser.sideband_reference_weight = num(l, "laser.", "sideband_reference_weight");
    }
    {
        const json& r = get(root, "", "rates");
        require_object(r, "rates");
        check_keys(r, "rates.",
                   {"d_lifetime_ms", "leak_854_per_ms", "heating_axial_per_ms",
                    "heating_radial_per_ms"});
        cfg.rates.d_lifetime_ms = num(r, "rates.", "d_lifetime_ms");
        cfg.rates.leak_854_per_ms = num(r, "rates.", "leak_854_per_ms");
        cfg.rates.heating_axial_per_ms = num(r, "rates.", "heating_axial_per_ms");
        cfg.rates.heating_radial_per_ms = num(r, "rates.", "heating_radial_per_ms");
    }
    {
        const json& m = get(root, "", "modes");
        require_object(m, "modes");
        check_keys(m, "modes.", {"axial", "radial"});
        cfg.mode(Mode::Axial) = parse_mode(get(m, "modes.", "axial"), "modes.axial");
        cfg.mode(Mode::Radial) = parse_mode(get(m, "modes.", "radial"), "modes.radial");
    }
    {
        const json& c = get(root, "", "calibration");
        require_object(c, "calibration");
        check_keys(c, "calibration.",
                   {"omega_carrier_rad_us", "omega_bsb_rad_us", "omega_rsb_rad_us",
                    "omega_raman_rad_us", "omega_shelve_rad_us"});
        cfg.calib.omega_carrier_rad_us = num(c, "calibration.", "omega_carrier_rad_us");
        cfg.calib.omega_bsb_rad_us = num(c, "calibration.", "omega_bsb_rad_us");
        cfg.calib.omega_rsb_rad_us = num(c, "calibration.", "omega_rsb_rad_us");
        cfg.calib.omega_raman_rad_us = num(c, "calibration.", "omega_raman_rad_us");
        cfg.calib.omega_shelve_rad_us = num(c, "calibration.", "omega_shelve_rad_us");
    }
    cfg.detection_error = num(root, "", "detection_error");
    cfg.n_max = integer(root, "", "n_max");
    cfg.master_seed = uint64(root, "", "master_seed");
    cfg.shots_per_point = integer(root, "", "shots_per_point");
    cfg.workers = static_cast<int>(integer(root, "", "workers"));

    validate_config(cfg);
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    ordered_json j;
    j["bfield"] = {{"b0_gauss", cfg.bfield.b0_gauss},
                   {"amp_50hz_mgauss", cfg.bfield.amp_50hz_mgauss},
                   {"compensation_factor", cfg.bfield.compensation_factor},
                   {"drift_sigma_mgauss", cfg.bfield.drift_sigma_mgauss},
                   {"triggered", cfg.bfield.triggered},
                   {"trigger_base_delay_ms", cfg.bfield.trigger_base_delay_ms}};
    j["laser"] = {{"sigma_shot_hz", cfg.laser.sigma_shot_hz},
                  {"lorentzian_hz", cfg.laser.lorentzian_hz},
                  {"intensity_sigma_rel", cfg.laser.intensity_sigma_rel},
                  {"intensity_as_rabi", cfg.laser.intensity_as_rabi},
                  {"sideband_reference_weight", cfg.laser.sideband_reference_weight}};
    j["rates"] = {{"d_lifetime_ms", cfg.rates.d_lifetime_ms},
                  {"leak_854_per_ms", cfg.rates.leak_854_per_ms},
                  {"heating_axial_per_ms", cfg.rates.heating_axial_per_ms},
                  {"heating_radial_per_ms", cfg.rates.heating_radial_per_ms}};
    j["modes"] = {{"axial",
                   {{"eta", cfg.mode(Mode::Axial).eta},
                    {"nbar", cfg.mode(Mode::Axial).nbar},
                    {"freq_mhz", cfg.mode(Mode::Axial).freq_mhz}}},
                  {"radial",
                   {{"eta", cfg.mode(Mode::Radial).eta},
                    {"nbar", cfg.mode(Mode::Radial).nbar},
                    {"freq_mhz", cfg.mode(Mode::Radial).freq_mhz}}}};
    j["calibration"] = {{"omega_carrier_rad_us", cfg.calib.omega_carrier_rad_us},
                        {"omega_bsb_rad_us", cfg.calib.omega_bsb_rad_us},
                        {"omega_rsb_rad_us", cfg.calib.omega_rsb_rad_us},
                        {"omega_raman_rad_us", cfg.calib.omega_raman_rad_us},
                        {"omega_shelve_rad_us", cfg.calib.omega_shelve_rad_us}};
    j["detection_error"] = cfg.detection_error;
    j["n_max"] = cfg.n_max;
    j["master_seed"] = cfg.master_seed;
    j["shots_per_point"] = cfg.shots_per_point;
    j["workers"] = cfg.workers;
    return j.dump(2) + "\n";
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string text = config_to_json(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void validate_config(const RunConfig& cfg) {
    const auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("invalid config: ") + what);
    };
    require(cfg.bfield.b0_gauss > 0.0, "bfield.b0_gauss must be positive");
    require(cfg.bfield.amp_50hz_mgauss >= 0.0, "bfield.amp_50hz_mgauss must be non-negative");
    require(cfg.bfield.compensation_factor > 0.0, "bfield.compensation_factor must be positive");
    require(cfg.bfield.drift_sigma_mgauss >= 0.0, "bfield.drift_sigma_mgauss must be non-negative");
    require(cfg.bfield.trigger_base_delay_ms >= 0.0 && cfg.bfield.trigger_base_delay_ms < 20.0,
            "bfield.trigger_base_delay_ms must lie in [0, 20)");
    require(cfg.laser.sigma_shot_hz >= 0.0, "laser.sigma_shot_hz must be non-negative");
    require(cfg.laser.lorentzian_hz >= 0.0, "laser.lorentzian_hz must be non-negative");
    require(cfg.laser.intensity_sigma_rel >= 0.0, "laser.intensity_sigma_rel must be non-negative");
    require(cfg.laser.sideband_reference_weight >= 0.0,
            "laser.sideband_reference_weight must be non-negative");
    require(cfg.rates.d_lifetime_ms > 0.0, "rates.d_lifetime_ms must be positive");
    require(cfg.rates.leak_854_per_ms >= 0.0, "rates.leak_854_per_ms must be non-negative");
    require(cfg.rates.heating_axial_per_ms >= 0.0,
            "rates.heating_axial_per_ms must be non-negative");
    require(cfg.rates.heating_radial_per_ms >= 0.0,
            "rates.heating_radial_per_ms must be non-negative");
    for (std::size_t i = 0; i < kNumModes; ++i) {
        const ModeParams& m = cfg.modes[i];
        require(m.eta >= 0.0, "modes.*.eta must be non-negative");
        require(m.nbar >= 0.0, "modes.*.nbar must be non-negative");
        require(m.freq_mhz > 0.0, "modes.*.freq_mhz must be positive");
    }
    require(cfg.calib.omega_carrier_rad_us > 0.0, "calibration.omega_carrier_rad_us must be positive");
    require(cfg.calib.omega_bsb_rad_us > 0.0, "calibration.omega_bsb_rad_us must be positive");
    require(cfg.calib.omega_rsb_rad_us > 0.0, "calibration.omega_rsb_rad_us must be positive");
    require(cfg.calib.omega_raman_rad_us > 0.0, "calibration.omega_raman_rad_us must be positive");
    require(cfg.calib.omega_shelve_rad_us > 0.0, "calibration.omega_shelve_rad_us must be positive");
    require(cfg.detection_error >= 0.0 && cfg.detection_error <= 0.5,
            "detection_error must lie in [0, 0.5]");
    require(cfg.n_max >= 1, "n_max must be at least 1");
    require(cfg.shots_per_point >= 1, "shots_per_point must be at least 1");
    require(cfg.workers >= 1, "workers must be at least 1");
}

}  // namespace ionsim
