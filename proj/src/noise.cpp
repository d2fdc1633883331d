#include "ionsim/noise.hpp"

#include <cmath>

namespace ionsim {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
// 50 Hz expressed per millisecond.
constexpr double kLineFreqPerMs = 0.05;
}  // namespace

ShotNoise sample_shot_noise(const BFieldNoise& bf, const LaserNoise& lz, Rng& rng) {
    ShotNoise s;
    s.laser_offset_hz = lz.sigma_shot_hz > 0.0 ? lz.sigma_shot_hz * rng.normal() : 0.0;
    double intensity = 1.0;
    if (lz.intensity_sigma_rel > 0.0) {
        intensity = 1.0 + lz.intensity_sigma_rel * rng.normal();
        if (intensity < 0.5) intensity = 0.5;
    }
    s.intensity_factor = intensity;
    s.b_phase_rad = bf.triggered ? 0.0 : kTwoPi * rng.uniform();
    // drift_mgauss is quasi-static (constant within a scan); the engine
    // fills it in once per stream rather than per shot.
    return s;
}

double sample_bfield(const BFieldNoise& bf, const ShotNoise& shot, double t_ms) {
    const double amp = bf.amp_50hz_mgauss / bf.compensation_factor;
    const double dev = amp * std::sin(kTwoPi * kLineFreqPerMs * t_ms + shot.b_phase_rad) + shot.drift_mgauss;
    return bf.b0_gauss + 1e-3 * dev;
}

double bfield_deviation_integral_mgauss_ms(const BFieldNoise& bf, const ShotNoise& shot,
                                           double t0_ms, double t1_ms) {
    const double amp = bf.amp_50hz_mgauss / bf.compensation_factor;
    const double w = kTwoPi * kLineFreqPerMs;
    // Exact antiderivative of the sine; midpoint sampling would be badly
    // wrong for waits comparable to the 20 ms line period.
    const double sine_part =
        (amp / w) * (std::cos(w * t0_ms + shot.b_phase_rad) - std::cos(w * t1_ms + shot.b_phase_rad));
    return sine_part + shot.drift_mgauss * (t1_ms - t0_ms);
}

void evolve_open(JointState& st, double duration_ms, const OpenSystemRates& rates,
                 double heating_rate_per_ms, Rng& rng) {
    if (duration_ms < 0.0) throw std::invalid_argument("evolve_open: negative duration");
    if (duration_ms == 0.0) return;

    // D -> S spontaneous decay, quantum-jump unraveling. The jump projects
    // onto the decayed branch and carries the D branch's motional state
    // along; the no-jump branch reweights D down by exp(-Gamma t / 2).
    const double gamma = rates.gamma_eff_per_ms();
    if (gamma > 0.0) {
        const double p_d = st.population(Level::D);
        const double p_jump = p_d * (1.0 - std::exp(-gamma * duration_ms));
        if (p_d > 0.0 && rng.uniform() < p_jump) {
            for (long n = 0; n <= st.n_max(); ++n) {
                st.amp(Level::S, n) = st.amp(Level::D, n);
                st.amp(Level::D, n) = 0.0;
            }
            st.renormalize();
        } else if (p_d > 0.0 && p_d < 1.0) {
            const double f = std::exp(-0.5 * gamma * duration_ms);
            for (long n = 0; n <= st.n_max(); ++n) st.amp(Level::D, n) *= f;
            st.renormalize();
        }
        // p_d == 1: the no-jump branch is the unchanged state.
    }

    // Heating of the quantized mode: Poisson number of n -> n+1 shifts at a
    // rate independent of n, so <n> grows exactly linearly. Each event is
    // incoherent; composing k shifts with one phase scramble is
    // distribution-identical to scrambling at every event.
    if (heating_rate_per_ms > 0.0) {
        const long k = rng.poisson(heating_rate_per_ms * duration_ms);
        if (k > 0) {
            const long nmax = st.n_max();
            const bool mostly_d = st.population(Level::D) >= 0.5;
            for (long n = nmax; n >= 0; --n) {
                const cplx phase = std::polar(1.0, kTwoPi * rng.uniform());
                if (n + k <= nmax) {
                    st.amp(Level::S, n + k) = st.amp(Level::S, n) * phase;
                    st.amp(Level::D, n + k) = st.amp(Level::D, n) * phase;
                }
                if (n < k) {
                    st.amp(Level::S, n) = 0.0;
                    st.amp(Level::D, n) = 0.0;
                }
            }
            if (st.norm_sq() < 1e-12) {
                // Everything shifted past the cutoff; park at the edge.
                st.amp(mostly_d ? Level::D : Level::S, nmax) = 1.0;
            }
            st.renormalize();
        }
    }
}

void white_noise_dephase(JointState& st, double duration_ms, double lorentzian_hz, Rng& rng) {
    if (duration_ms < 0.0) throw std::invalid_argument("white_noise_dephase: negative duration");
    if (lorentzian_hz <= 0.0 || duration_ms == 0.0) return;
    // White frequency noise: the S-D relative phase random-walks with
    // variance 4 pi nu t, giving ensemble contrast exp(-2 pi nu t).
    const double var = 4.0 * 3.14159265358979323846 * lorentzian_hz * duration_ms * 1e-3;
    const cplx kick = std::polar(1.0, std::sqrt(var) * rng.normal());
    for (long n = 0; n <= st.n_max(); ++n) st.amp(Level::D, n) *= kick;
}

}  // namespace ionsim
