#pragma once

#include <cstddef>
#include <vector>

namespace ionsim {

// Generalized Laguerre polynomial L_n^alpha(x) by three-term recurrence.
double laguerre(int n, int alpha, double x);

// Debye-Waller factor for a spectator mode in Fock state n:
// <n| exp(i eta (a + a^dagger)) |n> = exp(-eta^2/2) L_n(eta^2).
double debye_waller(double eta, long n);

enum class Sideband { Carrier, Blue, Red };

// Motional matrix element for the driven mode, relative to the bare Rabi
// frequency:
//   carrier  <n|..|n>     = exp(-eta^2/2) L_n(eta^2)
//   blue     <n+1|..|n>   = exp(-eta^2/2) eta L_n^1(eta^2) / sqrt(n+1)
//   red      <n-1|..|n>   = exp(-eta^2/2) eta L_{n-1}^1(eta^2) / sqrt(n), 0 for n = 0
double motional_element(Sideband sb, double eta, long n);

// Effective Rabi frequency of a pulse on an ion with several motional modes:
// omega0 times the driven mode's element times every spectator's
// Debye-Waller factor. `active` indexes etas/ns; for a carrier every mode is
// a spectator and `active` only selects which n the sideband element would
// use, so pass any valid index.
double coupling_strength(double omega0, Sideband sb, std::size_t active,
                         const std::vector<double>& etas, const std::vector<long>& ns);

}  // namespace ionsim
