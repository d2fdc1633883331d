#include <cmath>

#include "doctest.h"
#include "ionsim/experiments.hpp"
#include "ionsim/fit.hpp"
#include "ionsim/pulse.hpp"

using namespace ionsim;

namespace {

constexpr double kPi = 3.141592653589793;

RunConfig noiseless() {
    RunConfig cfg;
    cfg.bfield.amp_50hz_mgauss = 0.0;
    cfg.bfield.drift_sigma_mgauss = 0.0;
    cfg.laser.sigma_shot_hz = 0.0;
    cfg.laser.lorentzian_hz = 0.0;
    cfg.laser.intensity_sigma_rel = 0.0;
    cfg.rates.d_lifetime_ms = 1e18;
    cfg.rates.leak_854_per_ms = 0.0;
    cfg.rates.heating_axial_per_ms = 0.0;
    cfg.rates.heating_radial_per_ms = 0.0;
    cfg.mode(Mode::Axial).nbar = 0.0;
    cfg.mode(Mode::Radial).nbar = 0.0;
    cfg.detection_error = 0.0;
    return cfg;
}

Sequence single_pulse_seq(const Pulse& p) {
    Sequence seq;
    seq.prep_n = 0;
    seq.elements.push_back(p);
    return seq;
}

}  // namespace

TEST_CASE("calibration divides out the ground matrix element") {
    RunConfig cfg = noiseless();
    // Calibrated pi area comes out at exactly pi / omega.
    CHECK(area_to_duration_us(kPi, DriveKind::Carrier, cfg) ==
          doctest::Approx(7.0).epsilon(1e-12));
    CHECK(area_to_duration_us(kPi / 2, DriveKind::Carrier, cfg) ==
          doctest::Approx(3.5).epsilon(1e-12));
    // Bare omega0 is boosted above the effective one by the matrix elements.
    const double bare = bare_omega0_rad_us(DriveKind::Carrier, Mode::Axial, cfg);
    CHECK(bare > cfg.calib.omega_carrier_rad_us);
    const double elem = ground_matrix_element(DriveKind::Carrier, Mode::Axial, cfg);
    CHECK(bare * elem == doctest::Approx(cfg.calib.omega_carrier_rad_us).epsilon(1e-13));
}

TEST_CASE("noiseless carrier flop matches the two-level closed form") {
    RunConfig cfg = noiseless();
    const double omega = cfg.calib.omega_carrier_rad_us;
    for (double t = 0.0; t <= 30.0; t += 0.5) {
        Pulse p = make_pulse(DriveKind::Carrier, kPi, cfg);
        p.duration_us = t;
        const ShotOutcome o = run_shot(single_pulse_seq(p), cfg, 1, 0, 0);
        const double expect = std::sin(omega * t / 2) * std::sin(omega * t / 2);
        CHECK(std::abs(o.p_d - expect) < 1e-10);
    }
}

TEST_CASE("noiseless detuned flop matches the closed form") {
    RunConfig cfg = noiseless();
    const double omega = cfg.calib.omega_carrier_rad_us;
    // Detuning equal to the Rabi frequency, in Hz.
    const double det_hz = omega / (2 * kPi) * 1e6;
    const double w = std::sqrt(2.0) * omega;
    for (double t = 0.0; t <= 20.0; t += 0.5) {
        Pulse p = make_pulse(DriveKind::Carrier, kPi, cfg);
        p.duration_us = t;
        p.detuning_hz = det_hz;
        const ShotOutcome o = run_shot(single_pulse_seq(p), cfg, 1, 0, 0);
        const double s = std::sin(w * t / 2);
        const double expect = 0.5 * s * s;
        CHECK(std::abs(o.p_d - expect) < 1e-10);
    }
    // At t = pi/omega the excitation is sin^2(pi/sqrt(2))/2.
    Pulse p = make_pulse(DriveKind::Carrier, kPi, cfg);
    p.detuning_hz = det_hz;
    const ShotOutcome o = run_shot(single_pulse_seq(p), cfg, 1, 0, 0);
    const double s = std::sin(kPi / std::sqrt(2.0));
    CHECK(std::abs(o.p_d - 0.5 * s * s) < 1e-10);
}

TEST_CASE("blue sideband pi transfers |S,0> to |D,1> exactly") {
    RunConfig cfg = noiseless();
    Pulse p = make_pulse(DriveKind::BlueSideband, kPi, cfg, Mode::Axial);
    const ShotOutcome o = run_shot(single_pulse_seq(p), cfg, 1, 0, 0);
    CHECK(o.p_d == 1.0);
    CHECK(o.mean_n == 1.0);
}

TEST_CASE("motional echo at T = 0 returns the initial state exactly") {
    RunConfig cfg = noiseless();
    const ShotOutcome p0 = run_shot(make_echo_sequence(cfg, 0.0, 0.0), cfg, 1, 0, 0);
    const ShotOutcome ppi = run_shot(make_echo_sequence(cfg, 0.0, kPi), cfg, 1, 0, 0);
    CHECK(p0.p_d < 1e-12);   // back to |S,0>
    CHECK(p0.mean_n < 1e-12);
    CHECK(ppi.p_d == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(ppi.p_d - p0.p_d) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pulse cutoff truncates mid-rotation") {
    RunConfig cfg = noiseless();
    const double omega = cfg.calib.omega_carrier_rad_us;
    Pulse p = make_pulse(DriveKind::Carrier, kPi, cfg);  // 7 us
    const Sequence seq = single_pulse_seq(p);
    const ShotOutcome o = run_shot(seq, cfg, 1, 0, 0, 3.5);
    const double s = std::sin(omega * 3.5 / 2);
    CHECK(std::abs(o.p_d - s * s) < 1e-10);
    // Cutoff beyond the sequence changes nothing.
    const ShotOutcome full = run_shot(seq, cfg, 1, 0, 0, 100.0);
    const ShotOutcome ref = run_shot(seq, cfg, 1, 0, 0);
    CHECK(full.p_d == ref.p_d);
}

TEST_CASE("scan grid: inclusive endpoints, step rounds toward more points") {
    const auto g1 = scan_grid(0.0, 80.0, 1.0);
    CHECK(g1.size() == 81);
    CHECK(g1.front() == 0.0);
    CHECK(g1.back() == 80.0);

    const auto g2 = scan_grid(0.0, 1.0, 0.3);  // 1/0.3 -> 4 intervals
    CHECK(g2.size() == 5);
    CHECK(g2.back() == 1.0);
    CHECK(g2[1] == doctest::Approx(0.25).epsilon(1e-14));

    const auto g3 = scan_grid(5.0, 5.0, 1.0);
    CHECK(g3.size() == 1);
    CHECK(g3[0] == 5.0);

    // An exact divisor is kept as-is.
    const auto g4 = scan_grid(-20.0, 20.0, 0.25);
    CHECK(g4.size() == 161);

    CHECK_THROWS_AS(scan_grid(0.0, 1.0, 0.0), SequenceError);
    CHECK_THROWS_AS(scan_grid(0.0, 1.0, -0.5), SequenceError);
    CHECK_THROWS_AS(scan_grid(1.0, 0.0, 0.5), SequenceError);
}

TEST_CASE("check_sequence rejects structural problems") {
    RunConfig cfg = noiseless();
    Sequence seq = make_rabi_sequence(cfg, 7.0);
    CHECK_NOTHROW(check_sequence(seq, cfg));

    Sequence bad = seq;
    bad.trigger_delay_ms = 25.0;
    CHECK_THROWS_AS(check_sequence(bad, cfg), SequenceError);

    Sequence wrong_pair = seq;
    for (auto& el : wrong_pair.elements) {
        if (Pulse* p = std::get_if<Pulse>(&el)) p->to = ZeemanState{Level::D, -1};
    }
    CHECK_THROWS_AS(check_sequence(wrong_pair, cfg), SequenceError);

    Sequence neg = seq;
    for (auto& el : neg.elements) {
        if (Pulse* p = std::get_if<Pulse>(&el)) p->duration_us = -1.0;
    }
    CHECK_THROWS_AS(check_sequence(neg, cfg), SequenceError);
}

TEST_CASE("shots are schedule independent") {
    RunConfig cfg;  // default noise on
    cfg.mode(Mode::Radial).nbar = 3.0;
    Sequence seq = make_rabi_sequence(cfg, 7.0);
    ScanDirective scan;
    scan.axis = ScanAxis::Duration;
    scan.values = scan_grid(0.0, 20.0, 2.0);

    const ScanResult a = run_scan(seq, scan, cfg, 42, 0, 50, 1);
    const ScanResult b = run_scan(seq, scan, cfg, 42, 0, 50, 4);
    const ScanResult c = run_scan(seq, scan, cfg, 42, 0, 50, 3);
    REQUIRE(a.points.size() == b.points.size());
    REQUIRE(a.points.size() == c.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].stat == b.points[i].stat);
        CHECK(a.points[i].stat == c.points[i].stat);
        CHECK(a.points[i].stderr_ == b.points[i].stderr_);
    }

    // Same (master, stream, shot) triple reproduces the identical outcome.
    const ShotOutcome s1 = run_shot(seq, cfg, 42, 3, 17);
    const ShotOutcome s2 = run_shot(seq, cfg, 42, 3, 17);
    CHECK(s1.p_d == s2.p_d);
    CHECK(s1.detected_d == s2.detected_d);

    // Different master seeds decorrelate.
    const ShotOutcome s3 = run_shot(seq, cfg, 43, 3, 17);
    CHECK(s1.p_d != s3.p_d);
}

TEST_CASE("quasi-static drift is shared within a stream") {
    RunConfig cfg = noiseless();
    cfg.bfield.drift_sigma_mgauss = 50.0;  // huge, so the fringe shift dominates

    // A Ramsey fringe scan: every point in one stream sees the same drift,
    // so the whole fringe pattern shifts coherently; a different stream
    // draws a different shift.
    Sequence seq = make_ramsey_sequence(cfg, 200.0, kPi / 2);
    ScanDirective scan;
    scan.axis = ScanAxis::Detuning;
    scan.values = scan_grid(-400000.0, 400000.0, 10000.0);

    const ScanResult r0 = run_scan(seq, scan, cfg, 9, 0, 1, 1);
    const ScanResult r0b = run_scan(seq, scan, cfg, 9, 0, 1, 1);
    const ScanResult r1 = run_scan(seq, scan, cfg, 9, 1, 1, 1);

    bool identical = true, any_diff = false;
    for (std::size_t i = 0; i < r0.points.size(); ++i) {
        identical = identical && r0.points[i].stat == r0b.points[i].stat;
        any_diff = any_diff || r0.points[i].stat != r1.points[i].stat;
    }
    CHECK(identical);   // same stream -> same drift draw, bit-for-bit
    CHECK(any_diff);    // new stream -> new drift draw

    // With zero sigma the pre-projection physics is stream independent.
    cfg.bfield.drift_sigma_mgauss = 0.0;
    Pulse det = make_pulse(DriveKind::Carrier, kPi, cfg);
    det.detuning_hz = 30000.0;
    const Sequence dseq = single_pulse_seq(det);
    CHECK(run_shot(dseq, cfg, 9, 0, 0).p_d == run_shot(dseq, cfg, 9, 1, 0).p_d);
}

TEST_CASE("scan readouts") {
    RunConfig cfg = noiseless();
    Sequence seq = make_heating_sequence(cfg, Mode::Axial, 0.0);
    ScanDirective scan;
    scan.axis = ScanAxis::Wait;
    scan.values = {0.0};
    const ScanResult r = run_scan(seq, scan, cfg, 1, 0, 100, 1, Readout::MeanPhonon);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].stat == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.points[0].shots == 100);

    // The scan stores the raw binomial stderr (zero at p = 0); the fitting
    // layer is where the small-count floor comes in.
    Sequence rabi = make_rabi_sequence(cfg, 0.0);
    ScanDirective rep;
    rep.axis = ScanAxis::Repeat;
    rep.values = {0.0};
    const ScanResult rb = run_scan(rabi, rep, cfg, 1, 0, 100, 1);
    CHECK(rb.points[0].stat == 0.0);
    CHECK(rb.points[0].stderr_ == 0.0);
    const auto floored = scan_to_points(rb);
    CHECK(floored[0].sigma == doctest::Approx(binomial_sigma(0.0, 100)).epsilon(1e-12));
}
