#include "ionsim/experiments.hpp"

#include <cmath>
#include <sstream>

namespace ionsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

const ZeemanState kGroundLower{Level::S, -1};   // S(-1/2)
const ZeemanState kGroundUpper{Level::S, +1};   // S(+1/2)
const ZeemanState kShelf{Level::D, -5};         // D(-5/2)

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

// Measured contrast of a two-point fringe: (max - min)/(max + min).
double two_point_contrast(double p0, double p_pi) {
    const double hi = std::max(p0, p_pi), lo = std::min(p0, p_pi);
    const double den = hi + lo;
    return den > 1e-9 ? (hi - lo) / den : 0.0;
}

double two_point_contrast_sigma(double p0, double s0, double p_pi, double s_pi) {
    const double den = p0 + p_pi;
    if (den <= 1e-9) return 1.0;
    const double d0 = 2.0 * p_pi / (den * den);
    const double d1 = 2.0 * p0 / (den * den);
    return std::sqrt(d0 * d0 * s0 * s0 + d1 * d1 * s_pi * s_pi);
}

double single_point_p(const Sequence& seq, const RunConfig& cfg, std::uint64_t stream,
                      long shots, double* sigma_out) {
    ScanDirective one{ScanAxis::Repeat, {0.0}};
    const ScanResult r = run_scan(seq, one, cfg, cfg.master_seed, stream, shots, cfg.workers,
                                  Readout::BrightFraction);
    if (sigma_out) *sigma_out = binomial_sigma(r.points[0].stat, shots);
    return r.points[0].stat;
}

Table scan_table(const std::string& name, const ScanResult& scan) {
    Table t;
    t.name = name;
    t.columns = {scan_axis_name(scan.axis) + "_" + scan_axis_unit(scan.axis),
                 scan.readout == Readout::BrightFraction ? "p_d" : "mean_n", "std_err", "shots"};
    for (const auto& p : scan.points) {
        t.rows.push_back({p.value, p.stat, p.stderr_, static_cast<double>(p.shots)});
    }
    return t;
}

Table points_table(const std::string& name, const std::string& xcol, const std::string& ycol,
                   const std::vector<DataPoint>& pts) {
    Table t;
    t.name = name;
    t.columns = {xcol, ycol, "sigma"};
    for (const auto& p : pts) t.rows.push_back({p.x, p.y, p.sigma});
    return t;
}

}  // namespace

std::string experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::RabiFlop: return "rabi-flop";
        case ExperimentKind::RamseyFringe: return "ramsey-fringe";
        case ExperimentKind::RamseyContrast: return "ramsey-contrast";
        case ExperimentKind::LineTrigger: return "line-trigger";
        case ExperimentKind::RamanSpectrum: return "raman-spectrum";
        case ExperimentKind::RamanVsDelay: return "raman-vs-delay";
        case ExperimentKind::Lifetime: return "lifetime";
        case ExperimentKind::Heating: return "heating";
        case ExperimentKind::MotionalEcho: return "motional-echo";
    }
    return "unknown";
}

std::vector<std::string> experiment_kind_names() {
    return {"rabi-flop",      "ramsey-fringe",  "ramsey-contrast", "line-trigger",
            "raman-spectrum", "raman-vs-delay", "lifetime",        "heating",
            "motional-echo"};
}

Pulse make_pulse(DriveKind kind, double area_rad, const RunConfig& cfg, Mode mode,
                 double phase_rad, double detuning_hz) {
    Pulse p;
    p.kind = kind;
    p.mode = mode;
    if (kind == DriveKind::RamanGround) {
        p.from = kGroundLower;
        p.to = kGroundUpper;
    } else {
        p.from = kGroundLower;
        p.to = kShelf;
    }
    p.omega0_rad_us = bare_omega0_rad_us(kind, mode, cfg);
    p.duration_us = area_to_duration_us(area_rad, kind, cfg);
    p.phase_rad = phase_rad;
    p.detuning_hz = detuning_hz;
    return p;
}

Sequence make_rabi_sequence(const RunConfig& cfg, double duration_us) {
    Sequence seq;
    seq.name = "rabi-flop";
    Pulse p = make_pulse(DriveKind::Carrier, kPi, cfg);
    p.duration_us = duration_us;
    seq.elements.push_back(p);
    seq.elements.push_back(MeasureElem{});
    return seq;
}

Sequence make_ramsey_sequence(const RunConfig& cfg, double wait_us, double area_rad,
                              double pulse_area_each, double second_phase_rad) {
    Sequence seq;
    seq.name = "ramsey";
    const double a1 = area_rad;
    const double a2 = pulse_area_each >= 0.0 ? pulse_area_each : area_rad;
    seq.elements.push_back(make_pulse(DriveKind::Carrier, a1, cfg));
    seq.elements.push_back(WaitElem{wait_us});
    seq.elements.push_back(make_pulse(DriveKind::Carrier, a2, cfg, Mode::Axial, second_phase_rad));
    seq.elements.push_back(MeasureElem{});
    return seq;
}

Sequence make_line_trigger_sequence(const RunConfig& cfg, double pulse_ms, double delay_ms) {
    Sequence seq;
    seq.name = "line-trigger";
    seq.trigger_delay_ms = delay_ms;
    // Long weak probe: pi area stretched over the full pulse, giving a
    // Fourier-limited line a fitter can track.
    Pulse p = make_pulse(DriveKind::Carrier, kPi, cfg);
    p.duration_us = pulse_ms * 1e3;
    p.omega0_rad_us = kPi / p.duration_us / ground_matrix_element(DriveKind::Carrier, Mode::Axial, cfg);
    seq.elements.push_back(p);
    seq.elements.push_back(MeasureElem{});
    return seq;
}

Sequence make_raman_sequence(const RunConfig& cfg, double pulse_ms, double delay_ms) {
    Sequence seq;
    seq.name = "raman";
    seq.raman = true;
    seq.slot_s = kGroundLower;
    seq.slot_d = kGroundUpper;
    seq.trigger_delay_ms = delay_ms;
    Pulse p = make_pulse(DriveKind::RamanGround, kPi, cfg);
    p.duration_us = pulse_ms * 1e3;
    p.omega0_rad_us = kPi / p.duration_us;
    seq.elements.push_back(p);
    MeasureElem m;
    Pulse sh = make_pulse(DriveKind::Carrier, kPi, cfg);
    sh.omega0_rad_us = cfg.calib.omega_shelve_rad_us /
                       ground_matrix_element(DriveKind::Carrier, Mode::Axial, cfg);
    sh.duration_us = kPi / cfg.calib.omega_shelve_rad_us;
    m.shelve = sh;
    seq.elements.push_back(m);
    return seq;
}

Sequence make_lifetime_sequence(const RunConfig& cfg, double wait_ms) {
    (void)cfg;
    Sequence seq;
    seq.name = "lifetime";
    seq.prep_level = Level::D;
    seq.elements.push_back(WaitElem{wait_ms * 1e3});
    seq.elements.push_back(MeasureElem{});
    return seq;
}

Sequence make_heating_sequence(const RunConfig& cfg, Mode mode, double wait_ms) {
    (void)cfg;
    Sequence seq;
    seq.name = "heating";
    seq.active_mode = mode;
    seq.prep_n = 0;  // ground-state cooled
    seq.elements.push_back(WaitElem{wait_ms * 1e3});
    seq.elements.push_back(MeasureElem{});
    return seq;
}

Sequence make_echo_sequence(const RunConfig& cfg, double wait_us, double final_phase_rad) {
    Sequence seq;
    seq.name = "motional-echo";
    seq.prep_n = 0;
    seq.elements.push_back(WaitElem{10.0});
    seq.elements.push_back(make_pulse(DriveKind::Carrier, kPi / 2.0, cfg));
    seq.elements.push_back(WaitElem{10.0});
    seq.elements.push_back(make_pulse(DriveKind::BlueSideband, kPi, cfg));
    seq.elements.push_back(WaitElem{wait_us});
    seq.elements.push_back(make_pulse(DriveKind::BlueSideband, kPi, cfg));
    seq.elements.push_back(WaitElem{10.0});
    seq.elements.push_back(make_pulse(DriveKind::Carrier, kPi / 2.0, cfg, Mode::Axial, final_phase_rad));
    seq.elements.push_back(MeasureElem{});
    return seq;
}

RabiResult run_rabi_flop(const RunConfig& cfg, double t_max_us, double step_us) {
    Sequence seq = make_rabi_sequence(cfg, 0.0);
    ScanDirective scan{ScanAxis::Duration, scan_grid(0.0, t_max_us, step_us)};
    RabiResult out;
    out.scan = run_scan(seq, scan, cfg, cfg.master_seed, 0, cfg.shots_per_point, cfg.workers,
                        Readout::BrightFraction);

    // Contrast after the 10 pi rotation: the height of the flop's next
    // maximum (the odd-pi peak just past 10 pi, near 75 us for a 7 us pi
    // time). 10 pi itself sits at a minimum of sin^2(Omega t / 2).
    const double omega = cfg.calib.omega_carrier_rad_us;
    out.t_10pi_us = 10.0 * kPi / omega;
    const double t_peak = 11.0 * kPi / omega;
    const double period = 2.0 * kPi / omega;
    double hi = 0.0;
    for (const auto& p : out.scan.points) {
        if (std::fabs(p.value - t_peak) <= 0.5 * period) hi = std::max(hi, p.stat);
    }
    out.contrast_10pi = hi;
    return out;
}

RamseyFringeResult run_ramsey_fringe(const RunConfig& cfg, double wait_us, double span_hz,
                                     double step_hz, double area_each) {
    const double area = area_each >= 0.0 ? area_each : kPi / 2.0;
    Sequence seq = make_ramsey_sequence(cfg, wait_us, area);
    ScanDirective scan{ScanAxis::Detuning, scan_grid(-0.5 * span_hz, 0.5 * span_hz, step_hz)};
    RamseyFringeResult out;
    out.wait_us = wait_us;
    out.scan = run_scan(seq, scan, cfg, cfg.master_seed, 0, cfg.shots_per_point, cfg.workers,
                        Readout::BrightFraction);
    out.fringe = fit_fringe(scan_to_points(out.scan));
    return out;
}

RamseyContrastResult run_ramsey_contrast(const RunConfig& cfg, const std::vector<double>& waits_us) {
    std::vector<double> waits = waits_us;
    if (waits.empty()) {
        waits = {100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0, 900.0, 1000.0};
    }
    RamseyContrastResult out;
    std::uint64_t stream = 0;
    for (double w : waits) {
        double s0 = 0.0, s1 = 0.0;
        Sequence a = make_ramsey_sequence(cfg, w, kPi / 2.0, -1.0, 0.0);
        Sequence b = make_ramsey_sequence(cfg, w, kPi / 2.0, -1.0, kPi);
        const double p0 = single_point_p(a, cfg, stream++, cfg.shots_per_point, &s0);
        const double p1 = single_point_p(b, cfg, stream++, cfg.shots_per_point, &s1);
        DataPoint d;
        d.x = w * 1e-3;
        d.y = two_point_contrast(p0, p1);
        d.sigma = std::max(two_point_contrast_sigma(p0, s0, p1, s1), 1e-4);
        out.contrast_vs_wait.push_back(d);
    }
    out.decay = fit_contrast_decay(out.contrast_vs_wait);
    return out;
}

namespace {

CenterVsDelayResult centers_vs_delay(const RunConfig& cfg, bool raman, double pulse_ms,
                                     double delay_step_ms, double span_khz, double step_khz) {
    CenterVsDelayResult out;
    std::vector<DataPoint> sine_pts;
    std::uint64_t stream = 0;
    for (double delay = 0.0; delay < 20.0 - 1e-9; delay += delay_step_ms) {
        Sequence seq = raman ? make_raman_sequence(cfg, pulse_ms, delay)
                             : make_line_trigger_sequence(cfg, pulse_ms, delay);
        ScanDirective scan{ScanAxis::Detuning,
                           scan_grid(-500.0 * span_khz, 500.0 * span_khz, step_khz * 1e3)};
        const ScanResult r = run_scan(seq, scan, cfg, cfg.master_seed, stream++,
                                      cfg.shots_per_point, cfg.workers, Readout::BrightFraction);
        std::vector<DataPoint> pts = scan_to_points(r);
        if (raman) {
            // Shelved readout leaves the transferred population bright, so
            // the resonance appears as a dip in detected D; flip it for the
            // peak-shaped line model.
            for (auto& p : pts) p.y = 1.0 - p.y;
        }
        const FitReport line = fit_line_center(pts, pulse_ms * 1e3);
        const double c_khz = line.param("center_hz") * 1e-3;
        const double s_khz = std::max(line.sigma("center_hz") * 1e-3, 1e-3);
        out.centers.push_back({delay, c_khz, s_khz, line.param("omega_rad_us")});
        sine_pts.push_back({delay, c_khz, s_khz});
    }
    out.sine = fit_sine_drift(sine_pts);
    const double w = 2.0 * kPi * 0.05;
    double ss = 0.0;
    for (const auto& p : sine_pts) {
        const double m = out.sine.param("offset") +
                         out.sine.param("amplitude") * std::sin(w * p.x + out.sine.param("phase_rad"));
        ss += (p.y - m) * (p.y - m);
    }
    out.residual_std_khz = sine_pts.empty() ? 0.0 : std::sqrt(ss / sine_pts.size());
    return out;
}

}  // namespace

CenterVsDelayResult run_line_trigger(const RunConfig& cfg, double pulse_ms, double delay_step_ms,
                                     double span_khz, double step_khz) {
    return centers_vs_delay(cfg, false, pulse_ms, delay_step_ms, span_khz, step_khz);
}

ScanResult run_raman_spectrum(const RunConfig& cfg, double delay_ms, double pulse_ms,
                              double span_khz, double step_khz) {
    Sequence seq = make_raman_sequence(cfg, pulse_ms, delay_ms);
    ScanDirective scan{ScanAxis::Detuning,
                       scan_grid(-500.0 * span_khz, 500.0 * span_khz, step_khz * 1e3)};
    return run_scan(seq, scan, cfg, cfg.master_seed, 0, cfg.shots_per_point, cfg.workers,
                    Readout::BrightFraction);
}

CenterVsDelayResult run_raman_vs_delay(const RunConfig& cfg, double pulse_ms, double delay_step_ms,
                                       double span_khz, double step_khz) {
    return centers_vs_delay(cfg, true, pulse_ms, delay_step_ms, span_khz, step_khz);
}

LifetimeResult run_lifetime(const RunConfig& cfg, const std::vector<double>& waits_ms,
                            long shots_per_point) {
    std::vector<double> waits = waits_ms;
    if (waits.empty()) waits = {25.0, 50.0, 75.0, 100.0, 125.0, 150.0};
    const long shots = shots_per_point > 0 ? shots_per_point : cfg.shots_per_point;

    Sequence seq = make_lifetime_sequence(cfg, 0.0);
    ScanDirective scan{ScanAxis::Wait, {}};
    for (double w : waits) scan.values.push_back(w * 1e3);

    LifetimeResult out;
    out.scan = run_scan(seq, scan, cfg, cfg.master_seed, 0, shots, cfg.workers,
                        Readout::BrightFraction);
    std::vector<DataPoint> pts;
    for (std::size_t i = 0; i < waits.size(); ++i) {
        const auto& p = out.scan.points[i];
        pts.push_back({waits[i], p.stat, binomial_sigma(p.stat, p.shots)});
    }
    out.fit = fit_exponential_decay(pts);
    return out;
}

HeatingResult run_heating(const RunConfig& cfg, Mode mode, const std::vector<double>& waits_ms,
                          long trajectories) {
    std::vector<double> waits = waits_ms;
    if (waits.empty()) waits = {0.0, 15.0, 30.0, 45.0, 60.0};

    Sequence seq = make_heating_sequence(cfg, mode, 0.0);
    ScanDirective scan{ScanAxis::Wait, {}};
    for (double w : waits) scan.values.push_back(w * 1e3);

    HeatingResult out;
    out.mode = mode;
    out.scan = run_scan(seq, scan, cfg, cfg.master_seed, 0, trajectories, cfg.workers,
                        Readout::MeanPhonon);
    std::vector<DataPoint> pts;
    for (std::size_t i = 0; i < waits.size(); ++i) {
        const auto& p = out.scan.points[i];
        pts.push_back({waits[i], p.stat, std::max(p.stderr_, 1e-6)});
    }
    out.fit = fit_linear(pts);
    return out;
}

EchoResult run_motional_echo(const RunConfig& cfg, double wait_us, bool with_trace) {
    EchoResult out;
    out.wait_us = wait_us;

    Sequence s0 = make_echo_sequence(cfg, wait_us, 0.0);
    Sequence s1 = make_echo_sequence(cfg, wait_us, kPi);
    double sig0 = 0.0, sig1 = 0.0;
    const double p0 = single_point_p(s0, cfg, 0, cfg.shots_per_point, &sig0);
    const double p1 = single_point_p(s1, cfg, 1, cfg.shots_per_point, &sig1);
    out.contrast = std::fabs(p1 - p0);

    if (with_trace) {
        double total = 0.0;
        for (const auto& el : s0.elements) {
            if (const Pulse* p = std::get_if<Pulse>(&el)) total += p->duration_us;
            if (const WaitElem* w = std::get_if<WaitElem>(&el)) total += w->duration_us;
        }
        ScanDirective scan{ScanAxis::Cutoff, scan_grid(0.0, total, total / 192.0)};
        out.trace = run_scan(s0, scan, cfg, cfg.master_seed, 2, cfg.shots_per_point, cfg.workers,
                             Readout::BrightFraction);
    }
    return out;
}

EchoResult run_echo_vs_wait(const RunConfig& cfg, const std::vector<double>& waits_ms,
                            long shots_per_phase) {
    EchoResult out;
    std::uint64_t stream = 10;
    for (double w_ms : waits_ms) {
        Sequence s0 = make_echo_sequence(cfg, w_ms * 1e3, 0.0);
        Sequence s1 = make_echo_sequence(cfg, w_ms * 1e3, kPi);
        double sig0 = 0.0, sig1 = 0.0;
        const double p0 = single_point_p(s0, cfg, stream++, shots_per_phase, &sig0);
        const double p1 = single_point_p(s1, cfg, stream++, shots_per_phase, &sig1);
        DataPoint d;
        d.x = w_ms;
        d.y = std::fabs(p1 - p0);
        d.sigma = std::max(std::sqrt(sig0 * sig0 + sig1 * sig1), 1e-4);
        out.contrast_vs_wait.push_back(d);
    }
    out.decay = fit_contrast_decay(out.contrast_vs_wait);
    return out;
}

std::vector<std::string> figure_names() {
    return {"fig2", "fig3", "fig4", "fig5", "fig7a", "fig7b", "fig8", "fig9", "fig10"};
}

bool is_figure_name(const std::string& name) {
    for (const auto& n : figure_names()) {
        if (n == name) return true;
    }
    return false;
}

namespace {

ExperimentResult figure_fig2(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.bfield.amp_50hz_mgauss = 1.2;
    cfg.bfield.compensation_factor = 1.0;
    const auto r = run_line_trigger(cfg, 1.0, 1.0, 10.0, 0.5);

    ExperimentResult out;
    out.name = "fig2";
    Table t;
    t.name = "center_vs_delay";
    t.columns = {"delay_ms", "center_khz", "center_sigma_khz", "width_omega_rad_us"};
    t.rows = r.centers;
    out.tables.push_back(t);
    out.fits.push_back(r.sine);
    const double ref = std::fabs(susceptibility_khz_per_mgauss(kGroundLower, kShelf)) *
                       cfg.bfield.amp_50hz_mgauss;
    out.summary.push_back("line-triggered 50 Hz center modulation: fitted amplitude " +
                          fmt(r.sine.param("amplitude")) + " kHz (configured-field reference " +
                          fmt(ref) + " kHz)");
    out.summary.push_back("residual center scatter " + fmt(r.residual_std_khz) + " kHz");
    out.meta["amplitude_khz"] = fmt(r.sine.param("amplitude"), 8);
    out.meta["reference_khz"] = fmt(ref, 8);
    out.meta["residual_std_khz"] = fmt(r.residual_std_khz, 8);
    return out;
}

ExperimentResult figure_fig3(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.modes[1].nbar = 7.0;  // hot radial spectator after Doppler cooling
    const auto r = run_rabi_flop(cfg, 80.0, 1.0);

    ExperimentResult out;
    out.name = "fig3";
    out.tables.push_back(scan_table("rabi_flop", r.scan));
    out.summary.push_back("carrier Rabi contrast at 10 pi: " + fmt(r.contrast_10pi) +
                          " (reference: better than 0.94)");
    out.meta["contrast_10pi"] = fmt(r.contrast_10pi, 8);
    out.meta["t_10pi_us"] = fmt(r.t_10pi_us, 8);
    return out;
}

ExperimentResult figure_fig4(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.calib.omega_carrier_rad_us = (kPi / 2.0) / 9.5;  // 9.5 us pi/2 pulses
    // sigma_shot_hz stands for the combined laser + field frequency noise
    // here; the explicit 50 Hz modulation would double-count it.
    cfg.bfield.amp_50hz_mgauss = 0.0;
    cfg.bfield.drift_sigma_mgauss = 0.0;
    const auto r = run_ramsey_fringe(cfg, 100.0, 40000.0, 250.0);

    ExperimentResult out;
    out.name = "fig4";
    out.tables.push_back(scan_table("ramsey_fringe", r.scan));
    out.fits.push_back(r.fringe);
    out.summary.push_back("Ramsey fringe contrast at 100 us: " + fmt(r.fringe.param("contrast")) +
                          " (reference: approximately 0.99)");
    out.meta["contrast"] = fmt(r.fringe.param("contrast"), 8);
    return out;
}

ExperimentResult figure_fig5(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.shots_per_point = std::max<long>(cfg.shots_per_point, 200);
    cfg.bfield.amp_50hz_mgauss = 0.0;
    cfg.bfield.drift_sigma_mgauss = 0.0;
    const auto r = run_ramsey_contrast(cfg);

    ExperimentResult out;
    out.name = "fig5";
    out.tables.push_back(points_table("contrast_vs_wait", "wait_ms", "contrast",
                                      r.contrast_vs_wait));
    out.fits.push_back(r.decay);
    out.summary.push_back("Gaussian contrast decay tau = " + fmt(r.decay.param("tau_gauss_ms")) +
                          " ms (reference 0.94(5) ms); implied nu = " +
                          fmt(r.decay.param("nu_hz")) + " Hz (reference 170(10) Hz)");
    out.summary.push_back("preferred model: " + r.decay.flags.front() + "; best exponential tau = " +
                          fmt(r.decay.param("tau_exp_ms")) + " ms");
    out.meta["tau_gauss_ms"] = fmt(r.decay.param("tau_gauss_ms"), 8);
    out.meta["nu_hz"] = fmt(r.decay.param("nu_hz"), 8);
    out.meta["tau_exp_ms"] = fmt(r.decay.param("tau_exp_ms"), 8);
    return out;
}

ExperimentResult figure_fig7(const RunConfig& base, bool compensated) {
    RunConfig cfg = base;
    // Field amplitude chosen so the ground-pair drift spans the reference
    // 3.8 kHz sine.
    cfg.bfield.amp_50hz_mgauss =
        3.8 / susceptibility_khz_per_mgauss(kGroundLower, kGroundUpper);
    cfg.bfield.compensation_factor = compensated ? 20.0 : 1.0;
    // Slow non-line-synchronous field wander, visible as the ~0.3 kHz
    // scatter of the fitted centers about the sine.
    cfg.bfield.drift_sigma_mgauss =
        0.3 / susceptibility_khz_per_mgauss(kGroundLower, kGroundUpper);
    const auto r = run_raman_vs_delay(cfg, 1.0, 1.0, 10.0, 0.5);

    ExperimentResult out;
    out.name = compensated ? "fig7b" : "fig7a";
    Table t;
    t.name = "raman_center_vs_delay";
    t.columns = {"delay_ms", "center_khz", "center_sigma_khz", "width_omega_rad_us"};
    t.rows = r.centers;
    out.tables.push_back(t);
    out.fits.push_back(r.sine);
    if (compensated) {
        out.summary.push_back("feed-forward compensated drift amplitude: " +
                              fmt(r.sine.param("amplitude")) +
                              " kHz (reference: 20-fold suppression of 3.8 kHz to about 0.19 kHz)");
        out.summary.push_back("residual scatter " + fmt(r.residual_std_khz) +
                              " kHz (reference scale about 0.3 kHz)");
    } else {
        out.summary.push_back("ground-pair drift amplitude: " + fmt(r.sine.param("amplitude")) +
                              " kHz (reference 3.8 kHz); implied field " +
                              fmt(r.sine.param("field_mgauss")) + " mGauss");
    }
    out.meta["amplitude_khz"] = fmt(r.sine.param("amplitude"), 8);
    out.meta["residual_std_khz"] = fmt(r.residual_std_khz, 8);
    return out;
}

ExperimentResult figure_fig8(const RunConfig& base) {
    const auto r = run_lifetime(base, {25.0, 50.0, 75.0, 100.0, 125.0, 150.0}, 25000);

    ExperimentResult out;
    out.name = "fig8";
    out.tables.push_back(scan_table("survival", r.scan));
    out.fits.push_back(r.fit);
    out.summary.push_back("fitted D lifetime tau = " + fmt(r.fit.param("tau_ms")) + " +/- " +
                          fmt(r.fit.sigma("tau_ms"), 3) +
                          " ms (reference 1011(6) ms effective)");
    out.meta["tau_ms"] = fmt(r.fit.param("tau_ms"), 8);
    out.meta["tau_sigma_ms"] = fmt(r.fit.sigma("tau_ms"), 8);
    return out;
}

ExperimentResult figure_fig9(const RunConfig& base) {
    ExperimentResult out;
    out.name = "fig9";
    const char* names[2] = {"axial", "radial"};
    for (int m = 0; m < 2; ++m) {
        const Mode mode = static_cast<Mode>(m);
        const auto r = run_heating(base, mode, {}, 10000);
        out.tables.push_back(scan_table(std::string("heating_") + names[m], r.scan));
        out.fits.push_back(r.fit);
        const double ref = base.heating_rate_per_ms(mode);
        out.summary.push_back(std::string(names[m]) + " heating slope " +
                              fmt(r.fit.param("slope"), 4) + " per ms (configured " + fmt(ref, 4) +
                              "; reference 1/190 and 1/70 per ms)");
        out.meta[std::string("slope_") + names[m]] = fmt(r.fit.param("slope"), 8);
    }
    return out;
}

ExperimentResult figure_fig10(const RunConfig& base) {
    RunConfig cfg = base;
    // Echo-trap presets: 10 us pi/2 carrier pulses and the roughly
    // one-phonon-per-100-ms heating of the trap used for this measurement.
    cfg.calib.omega_carrier_rad_us = (kPi / 2.0) / 10.0;
    cfg.set_heating_rate_per_ms(Mode::Axial, 0.01);

    ExperimentResult out;
    out.name = "fig10";

    const auto echo = run_motional_echo(cfg, 850.0, true);
    out.tables.push_back(scan_table("echo_trace_phase0", echo.trace));
    out.summary.push_back("motional echo contrast at T = 850 us: " + fmt(echo.contrast) +
                          " (reference 0.80)");
    out.meta["contrast_850us"] = fmt(echo.contrast, 8);

    // Long-interval decay with only the motional (heating) channel active,
    // isolating the quantum-memory lifetime from the electronic noise that
    // dominates inside the pulse pairs.
    RunConfig heat_only = cfg;
    heat_only.laser.sigma_shot_hz = 0.0;
    heat_only.laser.lorentzian_hz = 0.0;
    heat_only.laser.intensity_sigma_rel = 0.0;
    heat_only.bfield.amp_50hz_mgauss = 0.0;
    heat_only.bfield.drift_sigma_mgauss = 0.0;
    heat_only.rates.d_lifetime_ms = 1e12;
    heat_only.rates.leak_854_per_ms = 0.0;
    const auto decay = run_echo_vs_wait(heat_only, {10.0, 30.0, 60.0, 100.0, 150.0, 200.0}, 2000);
    out.tables.push_back(points_table("contrast_vs_wait_heating_only", "wait_ms", "contrast",
                                      decay.contrast_vs_wait));
    out.fits.push_back(decay.decay);
    out.summary.push_back("heating-limited motional coherence 1/e time: " +
                          fmt(decay.decay.param("tau_exp_ms")) +
                          " ms (reference: approximately 100 ms)");
    out.meta["tau_exp_ms"] = fmt(decay.decay.param("tau_exp_ms"), 8);
    return out;
}

}  // namespace

ExperimentResult run_figure(const std::string& name, const RunConfig& base) {
    if (name == "fig2") return figure_fig2(base);
    if (name == "fig3") return figure_fig3(base);
    if (name == "fig4") return figure_fig4(base);
    if (name == "fig5") return figure_fig5(base);
    if (name == "fig7a") return figure_fig7(base, false);
    if (name == "fig7b") return figure_fig7(base, true);
    if (name == "fig8") return figure_fig8(base);
    if (name == "fig9") return figure_fig9(base);
    if (name == "fig10") return figure_fig10(base);
    std::string msg = "unknown figure '" + name + "'; available:";
    for (const auto& n : figure_names()) msg += " " + n;
    throw SequenceError(msg);
}

}  // namespace ionsim
