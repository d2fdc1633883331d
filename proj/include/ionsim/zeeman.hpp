#pragma once

#include <string>

namespace ionsim {

// Bohr magneton over Planck constant, MHz per Gauss. Numerically equal to
// kHz per milligauss, which is the unit most shifts are quoted in here.
inline constexpr double kMuBOverH = 1.399624;

inline constexpr double kGFactorS = 2.0;      // S_1/2 Lande factor
inline constexpr double kGFactorD = 6.0 / 5.0;  // D_5/2 Lande factor

inline constexpr double kDefaultB0Gauss = 2.4;
inline constexpr double kOmegaAxialMHz = 1.7;
inline constexpr double kOmegaRadialMHz = 5.0;

enum class Level { S, D };

// A Zeeman sublevel. m is half-odd-integer, stored doubled so the parity
// constraint is exact: m_times2 must be odd, |m| <= 1/2 for S, 5/2 for D.
struct ZeemanState {
    Level level;
    int m_times2;

    double m() const { return 0.5 * m_times2; }
    bool operator==(const ZeemanState&) const = default;
};

bool zeeman_valid(const ZeemanState& z);
ZeemanState make_zeeman(Level level, int m_times2);  // throws std::invalid_argument
std::string zeeman_label(const ZeemanState& z);

double g_factor(Level level);

// First-order shift of the |from> -> |to> transition frequency per field,
// mu_B/h * (g_to m_to - g_from m_from), in kHz per milligauss (signed).
double susceptibility_khz_per_mgauss(const ZeemanState& from, const ZeemanState& to);

// Transition frequency shift at field B (Gauss), in kHz (signed).
double zeeman_shift_khz(const ZeemanState& from, const ZeemanState& to, double b_gauss);

}  // namespace ionsim
