#include "ionsim/thermal.hpp"

#include <cmath>
#include <stdexcept>

namespace ionsim {

ThermalDistribution::ThermalDistribution(double nbar, long cutoff) : nbar_(nbar), cutoff_(cutoff) {
    if (nbar < 0.0) throw std::invalid_argument("ThermalDistribution: nbar < 0");
    if (cutoff_ < 0) cutoff_ = 0;
    if (nbar_ > 0.0) {
        // Raise the cutoff until the geometric tail q^(cutoff+1) is < 1e-6.
        const double lq = std::log(nbar_ / (1.0 + nbar_));
        const long needed = static_cast<long>(std::ceil(std::log(kMaxTail) / lq)) - 1;
        if (needed > cutoff_) cutoff_ = needed;
    }
}

double ThermalDistribution::probability(long n) const {
    if (n < 0 || n > cutoff_) return 0.0;
    if (nbar_ <= 0.0) return n == 0 ? 1.0 : 0.0;
    // nbar^n / (1+nbar)^(n+1), evaluated in logs for large n.
    const double lp = n * std::log(nbar_) - (n + 1.0) * std::log1p(nbar_);
    return std::exp(lp);
}

double ThermalDistribution::tail_mass() const {
    if (nbar_ <= 0.0) return 0.0;
    const double q = nbar_ / (1.0 + nbar_);
    return std::pow(q, static_cast<double>(cutoff_ + 1));
}

long ThermalDistribution::sample(Rng& rng) const {
    const long n = rng.thermal_n(nbar_);
    return n > cutoff_ ? cutoff_ : n;
}

}  // namespace ionsim
