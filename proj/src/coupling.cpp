#include "ionsim/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace ionsim {

double laguerre(int n, int alpha, double x) {
    if (n < 0) throw std::invalid_argument("laguerre: negative order");
    double lkm1 = 1.0;  // L_0
    if (n == 0) return lkm1;
    double lk = 1.0 + alpha - x;  // L_1
    for (int k = 1; k < n; ++k) {
        const double lkp1 = ((2.0 * k + 1.0 + alpha - x) * lk - (k + alpha) * lkm1) / (k + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    return lk;
}

double debye_waller(double eta, long n) {
    const double x = eta * eta;
    return std::exp(-0.5 * x) * laguerre(static_cast<int>(n), 0, x);
}

double motional_element(Sideband sb, double eta, long n) {
    if (n < 0) throw std::invalid_argument("motional_element: negative n");
    const double x = eta * eta;
    const double dw = std::exp(-0.5 * x);
    switch (sb) {
        case Sideband::Carrier:
            return dw * laguerre(static_cast<int>(n), 0, x);
        case Sideband::Blue:
            return dw * eta * laguerre(static_cast<int>(n), 1, x) / std::sqrt(n + 1.0);
        case Sideband::Red:
            // <n-1|e^{i eta (a+a^dag)}|n> mirrors the blue element one rung
            // down; the ground state is dark.
            if (n == 0) return 0.0;
            return dw * eta * laguerre(static_cast<int>(n - 1), 1, x) / std::sqrt(static_cast<double>(n));
    }
    return 0.0;
}

double coupling_strength(double omega0, Sideband sb, std::size_t active,
                         const std::vector<double>& etas, const std::vector<long>& ns) {
    if (etas.size() != ns.size()) throw std::invalid_argument("coupling_strength: mode count mismatch");
    if (active >= etas.size()) throw std::invalid_argument("coupling_strength: bad active mode");
    double value = omega0;
    for (std::size_t m = 0; m < etas.size(); ++m) {
        if (m == active) {
            value *= motional_element(sb, etas[m], ns[m]);
        } else {
            value *= debye_waller(etas[m], ns[m]);
        }
    }
    return value;
}

}  // namespace ionsim
