#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "ionsim/coupling.hpp"
#include "ionsim/rng.hpp"
#include "ionsim/state.hpp"
#include "ionsim/thermal.hpp"
#include "ionsim/zeeman.hpp"

using namespace ionsim;

namespace {

const ZeemanState kSm{Level::S, -1};
const ZeemanState kSp{Level::S, +1};
const ZeemanState kDm5{Level::D, -5};
const ZeemanState kDm1{Level::D, -1};
const ZeemanState kDp3{Level::D, +3};

// Independent Laguerre evaluation: L_n^a(x) = sum_k (-1)^k C(n+a, n-k) x^k / k!.
double laguerre_sum(int n, int a, double x) {
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        double binom = 1.0;
        for (int j = 1; j <= n - k; ++j) binom *= static_cast<double>(a + k + j) / j;
        double term = binom;
        for (int j = 1; j <= k; ++j) term *= -x / j;
        total += term;
    }
    return total;
}

}  // namespace

TEST_CASE("zeeman sublevel validity") {
    CHECK(zeeman_valid(kSm));
    CHECK(zeeman_valid(kSp));
    CHECK(zeeman_valid(kDm5));
    CHECK(zeeman_valid(ZeemanState{Level::D, 5}));
    CHECK_FALSE(zeeman_valid(ZeemanState{Level::S, 0}));   // integer m
    CHECK_FALSE(zeeman_valid(ZeemanState{Level::S, 3}));   // |m| > 1/2
    CHECK_FALSE(zeeman_valid(ZeemanState{Level::D, 7}));   // |m| > 5/2
    CHECK_FALSE(zeeman_valid(ZeemanState{Level::D, -4}));  // even
    CHECK_THROWS_AS(make_zeeman(Level::S, 3), std::invalid_argument);
    CHECK(zeeman_label(kDm5) == "D(-5/2)");
    CHECK(zeeman_label(kSp) == "S(1/2)");
}

TEST_CASE("susceptibility reference values") {
    // Ground-state splitting: g_S = 2, delta m = 1 -> 2 mu_B/h.
    CHECK(susceptibility_khz_per_mgauss(kSm, kSp) == doctest::Approx(2.799248).epsilon(1e-12));
    // D(-5/2) -> D(+3/2): g_D = 6/5, delta(g m) = 4.8.
    CHECK(susceptibility_khz_per_mgauss(kDm5, kDp3) == doctest::Approx(6.7181952).epsilon(1e-12));
    // Optical pairs from S(-1/2).
    CHECK(susceptibility_khz_per_mgauss(kSm, kDm1) == doctest::Approx(0.5598496).epsilon(1e-12));
    CHECK(susceptibility_khz_per_mgauss(kSm, kDm5) == doctest::Approx(-2.799248).epsilon(1e-12));
    // Three significant figures, as quoted.
    CHECK(std::abs(susceptibility_khz_per_mgauss(kSm, kSp) - 2.80) < 0.005);
    CHECK(std::abs(susceptibility_khz_per_mgauss(kDm5, kDp3) - 6.72) < 0.005);
}

TEST_CASE("delta-m 0 to 2 ratio is exactly 1:5") {
    const double dm0 = susceptibility_khz_per_mgauss(kSm, kDm1);
    const double dm2 = susceptibility_khz_per_mgauss(kSm, kDm5);
    // The underlying g m differences are rational with denominator 10:
    // 10 delta(g m) = 6 m2_D - 10 m2_S is an integer, 4 vs -20, ratio 5 exact.
    const long n0 = std::lround(10.0 * dm0 / kMuBOverH);
    const long n2 = std::lround(10.0 * dm2 / kMuBOverH);
    CHECK(n0 == 4);
    CHECK(n2 == -20);
    CHECK(n2 % n0 == 0);
    CHECK(n2 / n0 == -5);
    CHECK(dm2 / dm0 == doctest::Approx(-5.0).epsilon(1e-13));
}

TEST_CASE("zeeman shift scales with field") {
    CHECK(zeeman_shift_khz(kSm, kSp, 2.4) == doctest::Approx(6718.1952).epsilon(1e-12));
    CHECK(zeeman_shift_khz(kSm, kDm5, 0.0) == 0.0);
    // Linear: doubling B doubles the shift.
    CHECK(zeeman_shift_khz(kSm, kDm5, 4.8) ==
          doctest::Approx(2.0 * zeeman_shift_khz(kSm, kDm5, 2.4)).epsilon(1e-14));
}

TEST_CASE("laguerre recurrence matches the explicit sum") {
    for (int a : {0, 1}) {
        for (int n = 0; n <= 8; ++n) {
            for (double x : {0.0, 0.004624, 0.1, 1.0, 3.7}) {
                CHECK(laguerre(n, a, x) ==
                      doctest::Approx(laguerre_sum(n, a, x)).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("motional matrix elements") {
    const double eta = 0.068;
    // Frozen reference values, eta = 0.068.
    CHECK(motional_element(Sideband::Carrier, eta, 0) ==
          doctest::Approx(0.9976906706134507).epsilon(1e-14));
    CHECK(motional_element(Sideband::Blue, eta, 0) ==
          doctest::Approx(0.06784296560171466).epsilon(1e-14));
    CHECK(motional_element(Sideband::Carrier, eta, 3) ==
          doctest::Approx(0.9838826871898803).epsilon(1e-13));
    CHECK(motional_element(Sideband::Blue, eta, 2) ==
          doctest::Approx(0.11696452759295806).epsilon(1e-13));
    // Red sideband from the ground state is dark, exactly.
    CHECK(motional_element(Sideband::Red, eta, 0) == 0.0);
    // <n+1|..|n> is the same element seen from either side.
    for (long n = 0; n < 12; ++n) {
        CHECK(motional_element(Sideband::Blue, eta, n) ==
              doctest::Approx(motional_element(Sideband::Red, eta, n + 1)).epsilon(1e-13));
    }
}

TEST_CASE("debye-waller factor") {
    CHECK(debye_waller(0.016, 0) == doctest::Approx(0.9998720081916505).epsilon(1e-14));
    for (long n : {0L, 1L, 5L, 20L}) {
        const double x = 0.016 * 0.016;
        CHECK(debye_waller(0.016, n) ==
              doctest::Approx(std::exp(-x / 2) * laguerre_sum(static_cast<int>(n), 0, x))
                  .epsilon(1e-12));
    }
}

TEST_CASE("coupling strength composes element and spectators") {
    const std::vector<double> etas{0.068, 0.016};
    const std::vector<long> ns{2, 7};
    const double omega0 = 0.5;
    const double expect_carrier =
        omega0 * motional_element(Sideband::Carrier, 0.068, 2) * debye_waller(0.016, 7);
    CHECK(coupling_strength(omega0, Sideband::Carrier, 0, etas, ns) ==
          doctest::Approx(expect_carrier).epsilon(1e-14));
    const double expect_blue =
        omega0 * motional_element(Sideband::Blue, 0.068, 2) * debye_waller(0.016, 7);
    CHECK(coupling_strength(omega0, Sideband::Blue, 0, etas, ns) ==
          doctest::Approx(expect_blue).epsilon(1e-14));
    // Driving the radial mode makes the axial one the spectator.
    const double expect_rad =
        omega0 * motional_element(Sideband::Blue, 0.016, 7) * debye_waller(0.068, 2);
    CHECK(coupling_strength(omega0, Sideband::Blue, 1, etas, ns) ==
          doctest::Approx(expect_rad).epsilon(1e-14));
}

TEST_CASE("thermal distribution") {
    CHECK_THROWS(ThermalDistribution(-0.5, 10));
    ThermalDistribution cold(0.0, 10);
    CHECK(cold.probability(0) == 1.0);
    CHECK(cold.probability(1) == 0.0);

    ThermalDistribution hot(7.0, 40);
    CHECK(hot.probability(0) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(hot.probability(5) == doctest::Approx(0.06411361694335938).epsilon(1e-12));
    // Cutoff raised until the discarded tail is below 1e-6.
    ThermalDistribution doppler(15.0, 40);
    CHECK(doppler.cutoff() > 40);
    CHECK(doppler.tail_mass() < ThermalDistribution::kMaxTail);

    double mass = 0.0;
    for (long n = 0; n <= doppler.cutoff(); ++n) mass += doppler.probability(n);
    CHECK(mass == doctest::Approx(1.0 - doppler.tail_mass()).epsilon(1e-9));

    Rng rng(42);
    double mean = 0.0;
    const int reps = 200000;
    for (int i = 0; i < reps; ++i) mean += static_cast<double>(hot.sample(rng));
    mean /= reps;
    CHECK(mean == doctest::Approx(7.0).epsilon(0.02));
}

TEST_CASE("joint state bookkeeping") {
    JointState st(10);
    CHECK(st.dim() == 22);
    st.set_basis(Level::D, 3);
    CHECK(st.p_D() == 1.0);
    CHECK(st.mean_n() == 3.0);
    CHECK(st.fock_population(3) == 1.0);
    CHECK_NOTHROW(st.check_norm());

    st.amp(Level::S, 0) = 0.5;  // norm broken on purpose
    CHECK_THROWS_AS(st.check_norm(), std::runtime_error);

    JointState sup(4);
    sup.set_basis(Level::S, 0);
    sup.amp(Level::S, 0) = cplx(std::sqrt(0.5), 0.0);
    sup.amp(Level::D, 1) = cplx(0.0, std::sqrt(0.5));
    CHECK(sup.p_D() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sup.mean_n() == doctest::Approx(0.5).epsilon(1e-14));
    sup.renormalize();
    CHECK(sup.norm_sq() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rng streams are deterministic and well-behaved") {
    Rng a(123), b(123), c(124);
    bool identical = true, differs = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t x = a.next_u64();
        identical = identical && x == b.next_u64();
        differs = differs || x != c.next_u64();
    }
    CHECK(identical);
    CHECK(differs);

    Rng r(7);
    double lo = 1.0, hi = 0.0, mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        mean += u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));

    double psum = 0.0, nsum = 0.0, n2sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        psum += static_cast<double>(r.poisson(3.7));
        const double g = r.normal();
        nsum += g;
        n2sum += g * g;
    }
    CHECK(psum / 100000 == doctest::Approx(3.7).epsilon(0.01));
    CHECK(nsum / 100000 == doctest::Approx(0.0).epsilon(0.02));
    CHECK(n2sum / 100000 == doctest::Approx(1.0).epsilon(0.02));

    // Large-mean Poisson splits recursively; mean must survive the split.
    double big = 0.0;
    for (int i = 0; i < 20000; ++i) big += static_cast<double>(r.poisson(100.0));
    CHECK(big / 20000 == doctest::Approx(100.0).epsilon(0.01));

    double tsum = 0.0;
    for (int i = 0; i < 100000; ++i) tsum += static_cast<double>(r.thermal_n(7.0));
    CHECK(tsum / 100000 == doctest::Approx(7.0).epsilon(0.02));
}
