#pragma once

#include "ionsim/rng.hpp"

namespace ionsim {

// Thermal (geometric) distribution over Fock states,
// p(n) = nbar^n / (1 + nbar)^(n+1), truncated at `cutoff`.
// The cutoff is raised at construction until the discarded tail mass is
// below 1e-6, so a hot mode cannot be silently clipped.
class ThermalDistribution {
public:
    ThermalDistribution(double nbar, long cutoff);  // throws on nbar < 0

    double nbar() const { return nbar_; }
    long cutoff() const { return cutoff_; }

    double probability(long n) const;  // 0 outside [0, cutoff]
    double tail_mass() const;          // mass beyond cutoff before truncation

    // Geometric sample clamped to the cutoff.
    long sample(Rng& rng) const;

    static constexpr double kMaxTail = 1e-6;

private:
    double nbar_;
    long cutoff_;
};

}  // namespace ionsim
