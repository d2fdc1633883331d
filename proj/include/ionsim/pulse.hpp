#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ionsim/config.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/state.hpp"

namespace ionsim {

struct SequenceError : std::runtime_error {
    explicit SequenceError(const std::string& what) : std::runtime_error(what) {}
};

enum class DriveKind { Carrier, BlueSideband, RedSideband, RamanGround };

Sideband drive_sideband(DriveKind k);

// One laser pulse. omega0 is the bare Rabi frequency (rad/us) before
// motional matrix elements and intensity noise; detuning is the laser offset
// from the unshifted (B = B0, noise-free) resonance of the addressed pair.
struct Pulse {
    DriveKind kind = DriveKind::Carrier;
    Mode mode = Mode::Axial;  // driven mode; ignored for carrier and Raman
    ZeemanState from{Level::S, -1};
    ZeemanState to{Level::D, -1};
    double omega0_rad_us = 0.0;
    double duration_us = 0.0;
    double phase_rad = 0.0;
    double detuning_hz = 0.0;
};

struct WaitElem {
    double duration_us = 0.0;
};

// Final projective readout (electron shelving detection). For Raman
// sequences the optional shelving pulse maps the ground qubit onto D first.
struct MeasureElem {
    std::optional<Pulse> shelve;
};

using SequenceElement = std::variant<Pulse, WaitElem, MeasureElem>;

// A pulse program for single shots. The two register slots are fixed Zeeman
// levels; every pulse addresses the (slot_s, slot_d) pair except a measure
// shelving pulse, which moves slot_s to a fresh D level after the ground
// qubit is projectively resolved.
struct Sequence {
    std::string name;
    ZeemanState slot_s{Level::S, -1};
    ZeemanState slot_d{Level::D, -5};
    bool raman = false;             // ground-ground register; immune to laser offset
    Mode active_mode = Mode::Axial; // the quantized mode
    Level prep_level = Level::S;
    long prep_n = -1;               // >= 0 pins the active mode's initial Fock state
    double nbar_override[kNumModes] = {-1.0, -1.0};  // < 0: use config nbar
    double trigger_delay_ms = 0.0;
    std::vector<SequenceElement> elements;
};

// Throws SequenceError on structural problems: a pulse addressing a pair
// other than the register, |delta m| > 2 on an optical pulse, measure before
// the end, more than one measure, bad durations.
void check_sequence(const Sequence& seq, const RunConfig& cfg);

enum class ScanAxis { Detuning, Duration, Wait, Delay, Repeat, Cutoff };

std::string scan_axis_name(ScanAxis axis);
std::string scan_axis_unit(ScanAxis axis);

// One scanned quantity and its grid. Detuning values add to every pulse's
// detuning (Hz); Duration sets every pulse's duration (us); Wait sets every
// wait (us); Delay sets the trigger delay (ms); Cutoff truncates the
// sequence at an absolute time (us); Repeat reruns the identical point.
struct ScanDirective {
    ScanAxis axis = ScanAxis::Repeat;
    std::vector<double> values = {0.0};
};

// Inclusive range with step rounding toward more points: the interval count
// is ceil(span/step - 1e-9) and the actual step shrinks to fit.
std::vector<double> scan_grid(double first, double last, double step);

enum class Readout { BrightFraction, MeanPhonon };

struct ScanPoint {
    double value = 0.0;
    double stat = 0.0;     // P_D estimate or mean phonon number
    double stderr_ = 0.0;  // binomial / sample standard error
    long shots = 0;
};

struct ScanResult {
    ScanAxis axis = ScanAxis::Repeat;
    Readout readout = Readout::BrightFraction;
    std::vector<ScanPoint> points;
};

struct ShotOutcome {
    bool detected_d = false;
    double p_d = 0.0;     // pre-projection D population
    double mean_n = 0.0;  // quantized-mode <n> before the measurement
};

// Runs one shot. The RNG stream is derived from (master_seed, stream,
// shot_index) alone, so any parallel schedule reproduces identical results.
// cutoff_us < 0 disables truncation.
ShotOutcome run_shot(const Sequence& seq, const RunConfig& cfg, std::uint64_t master_seed,
                     std::uint64_t stream, std::uint64_t shot_index, double cutoff_us = -1.0);

// Runs shots_per_point shots per grid value with globally sequential shot
// indices, split across `workers` threads without affecting the output.
ScanResult run_scan(const Sequence& seq, const ScanDirective& scan, const RunConfig& cfg,
                    std::uint64_t master_seed, std::uint64_t stream, long shots_per_point,
                    int workers, Readout readout = Readout::BrightFraction);

// Calibration helpers. The config stores ground-state-effective Rabi
// frequencies; the bare omega0 divides out the all-modes-ground matrix
// element so calibrated areas come out exact on |S, 0>.
double calibrated_omega_rad_us(DriveKind kind, const RunConfig& cfg);
double ground_matrix_element(DriveKind kind, Mode active_mode, const RunConfig& cfg);
double bare_omega0_rad_us(DriveKind kind, Mode active_mode, const RunConfig& cfg);
double area_to_duration_us(double area_rad, DriveKind kind, const RunConfig& cfg);

// Applies one pulse to a state given the shot environment. Exposed for
// oracle tests; run_shot uses the same path.
void propagate_pulse(JointState& st, const Pulse& p, const RunConfig& cfg, const Sequence& seq,
                     const ShotNoise& shot, const std::vector<long>& spectator_ns,
                     double t_start_ms, double extra_detuning_hz = 0.0,
                     double duration_override_us = -1.0);

}  // namespace ionsim
