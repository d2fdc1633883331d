#include "ionsim/state.hpp"

#include <cmath>
#include <stdexcept>

namespace ionsim {

JointState::JointState(long n_max) : n_max_(n_max) {
    if (n_max < 0) throw std::invalid_argument("JointState: n_max < 0");
    amps_.assign(static_cast<std::size_t>(2 * (n_max_ + 1)), cplx{0.0, 0.0});
    amps_[index(Level::S, 0)] = 1.0;
}

void JointState::set_basis(Level e, long n) {
    if (n < 0 || n > n_max_) throw std::invalid_argument("JointState: Fock index out of range");
    amps_.assign(amps_.size(), cplx{0.0, 0.0});
    amps_[index(e, n)] = 1.0;
}

double JointState::norm_sq() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
}

void JointState::renormalize() {
    const double n2 = norm_sq();
    if (n2 < 1e-24) throw std::runtime_error("JointState: cannot renormalize zero state");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amps_) a *= inv;
}

double JointState::population(Level e) const {
    double s = 0.0;
    for (long n = 0; n <= n_max_; ++n) s += std::norm(amps_[index(e, n)]);
    return s;
}

double JointState::mean_n() const {
    double s = 0.0;
    for (long n = 0; n <= n_max_; ++n) {
        s += n * (std::norm(amps_[index(Level::S, n)]) + std::norm(amps_[index(Level::D, n)]));
    }
    return s;
}

double JointState::fock_population(long n) const {
    if (n < 0 || n > n_max_) return 0.0;
    return std::norm(amps_[index(Level::S, n)]) + std::norm(amps_[index(Level::D, n)]);
}

void JointState::check_norm() const {
    if (std::abs(norm_sq() - 1.0) > kNormTolerance) {
        throw std::runtime_error("JointState: norm invariant violated");
    }
}

}  // namespace ionsim
