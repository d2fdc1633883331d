#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "ionsim/zeeman.hpp"

namespace ionsim {

using cplx = std::complex<double>;

inline constexpr long kDefaultNMax = 40;

// Pure state of the two-level electronic register joined with one quantized
// motional mode: amplitudes over {S, D} x {0..n_max}. Other modes are carried
// classically by the shot (they only rescale couplings), not here.
class JointState {
public:
    explicit JointState(long n_max = kDefaultNMax);

    long n_max() const { return n_max_; }
    std::size_t dim() const { return amps_.size(); }

    std::size_t index(Level e, long n) const {
        return static_cast<std::size_t>((e == Level::D ? n_max_ + 1 : 0) + n);
    }
    cplx& amp(Level e, long n) { return amps_[index(e, n)]; }
    const cplx& amp(Level e, long n) const { return amps_[index(e, n)]; }

    std::vector<cplx>& amplitudes() { return amps_; }
    const std::vector<cplx>& amplitudes() const { return amps_; }

    // Collapse to the basis state |e, n>.
    void set_basis(Level e, long n);

    double norm_sq() const;
    void renormalize();  // throws std::runtime_error on (near-)zero norm

    double population(Level e) const;
    double p_D() const { return population(Level::D); }

    // <n> and the Fock populations of the quantized mode.
    double mean_n() const;
    double fock_population(long n) const;

    static constexpr double kNormTolerance = 1e-9;
    // Throws if |norm^2 - 1| exceeds the tolerance. Called between sequence
    // elements; a failure means an engine bug, not bad user input.
    void check_norm() const;

private:
    long n_max_;
    std::vector<cplx> amps_;
};

}  // namespace ionsim
