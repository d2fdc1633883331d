#include "ionsim/zeeman.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace ionsim {

double g_factor(Level level) { return level == Level::S ? kGFactorS : kGFactorD; }

bool zeeman_valid(const ZeemanState& z) {
    if (z.m_times2 % 2 == 0) return false;  // m is half-odd-integer
    const int limit = z.level == Level::S ? 1 : 5;
    return std::abs(z.m_times2) <= limit;
}

ZeemanState make_zeeman(Level level, int m_times2) {
    ZeemanState z{level, m_times2};
    if (!zeeman_valid(z)) {
        throw std::invalid_argument("invalid Zeeman sublevel: " + zeeman_label(z));
    }
    return z;
}

std::string zeeman_label(const ZeemanState& z) {
    std::string s = z.level == Level::S ? "S(" : "D(";
    if (z.m_times2 < 0) s += '-';
    s += std::to_string(std::abs(z.m_times2));
    s += "/2)";
    return s;
}

double susceptibility_khz_per_mgauss(const ZeemanState& from, const ZeemanState& to) {
    // First-order Zeeman: each level shifts by g*m*mu_B/h*B, the transition
    // by the difference. MHz/Gauss equals kHz/mGauss.
    const double gm_to = g_factor(to.level) * to.m();
    const double gm_from = g_factor(from.level) * from.m();
    return kMuBOverH * (gm_to - gm_from);
}

double zeeman_shift_khz(const ZeemanState& from, const ZeemanState& to, double b_gauss) {
    return susceptibility_khz_per_mgauss(from, to) * b_gauss * 1000.0;
}

}  // namespace ionsim
