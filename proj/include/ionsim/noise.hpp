#pragma once

#include "ionsim/rng.hpp"
#include "ionsim/state.hpp"

namespace ionsim {

// 50 Hz magnetic field modulation plus slow drift, milligauss around B0.
// t is measured in ms from the line trigger; in triggered mode every shot
// starts at the same line phase (phase 0 at the trigger), in random mode
// b_phase is drawn uniformly per shot.
struct BFieldNoise {
    double b0_gauss = kDefaultB0Gauss;
    double amp_50hz_mgauss = 1.0;   // sine amplitude (not rms)
    double compensation_factor = 1.0;  // feed-forward divides the 50 Hz term
    double drift_sigma_mgauss = 0.0;   // quasi-static drift, one draw per scan
    bool triggered = true;
    double trigger_base_delay_ms = 0.0;  // added to every sequence's delay
};

struct LaserNoise {
    // Per-shot Gaussian frequency offset (Hz std). Models the slow laser and
    // field noise that is quasi-static within one shot; yields Gaussian
    // Ramsey contrast decay exp(-(2 pi sigma t)^2 / 2).
    double sigma_shot_hz = 240.0;
    // Lorentzian (white frequency noise) linewidth, Hz. Contrast exp(-2 pi nu t).
    double lorentzian_hz = 0.0;
    // Relative intensity noise, per shot.
    double intensity_sigma_rel = 0.03;
    // If false (default) Rabi frequency scales with sqrt(intensity); if true
    // the 3% is read as Rabi-frequency noise directly.
    bool intensity_as_rabi = false;
    // Weight with which the per-shot offset is imprinted on the motional
    // ladder phase during waits (sideband reference model for echo-type
    // sequences; 0 restores the exactly laser-insensitive memory interval).
    double sideband_reference_weight = 0.5;
};

struct OpenSystemRates {
    double d_lifetime_ms = 1168.0;    // natural D_5/2 lifetime
    double leak_854_per_ms = 1.3296e-4;  // residual 854 nm deshelving rate
    double heating_axial_per_ms = 1.0 / 190.0;
    double heating_radial_per_ms = 1.0 / 70.0;

    double gamma_eff_per_ms() const { return 1.0 / d_lifetime_ms + leak_854_per_ms; }
};

// Noise realization for one shot. Fully determined by (master seed, stream,
// shot index); drawing it is the first thing a shot does.
struct ShotNoise {
    double laser_offset_hz = 0.0;
    double intensity_factor = 1.0;  // clamped to >= 0.5
    double b_phase_rad = 0.0;       // 50 Hz phase at the trigger
    double drift_mgauss = 0.0;      // quasi-static, shared by a whole scan
};

ShotNoise sample_shot_noise(const BFieldNoise& bf, const LaserNoise& lz, Rng& rng);

// Field at time t_ms past the line trigger (Gauss):
// B0 + 1e-3 [ (amp/comp) sin(2 pi 0.05 t + b_phase) + drift ].
double sample_bfield(const BFieldNoise& bf, const ShotNoise& shot, double t_ms);

// Deviation from B0 integrated over [t0_ms, t1_ms] (milligauss * ms, exact).
double bfield_deviation_integral_mgauss_ms(const BFieldNoise& bf, const ShotNoise& shot,
                                           double t0_ms, double t1_ms);

// Incoherent evolution over a wait: D -> S spontaneous decay (quantum jump,
// motional state carried along) and heating of the quantized mode as Poisson
// n -> n+1 Fock shifts that erase the mode's phase coherence. Spectator-mode
// heating is handled by the shot bookkeeping, not here.
void evolve_open(JointState& st, double duration_ms, const OpenSystemRates& rates,
                 double heating_rate_per_ms, Rng& rng);

// White-frequency-noise dephasing of the S-D coherence over one wait:
// a Gaussian phase kick of variance 4 pi nu t (t in seconds), giving
// ensemble contrast exp(-2 pi nu t).
void white_noise_dephase(JointState& st, double duration_ms, double lorentzian_hz, Rng& rng);

}  // namespace ionsim
