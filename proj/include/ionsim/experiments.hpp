#pragma once

#include <map>
#include <string>
#include <vector>

#include "ionsim/fit.hpp"
#include "ionsim/pulse.hpp"

namespace ionsim {

enum class ExperimentKind {
    RabiFlop,
    RamseyFringe,
    RamseyContrast,
    LineTrigger,
    RamanSpectrum,
    RamanVsDelay,
    Lifetime,
    Heating,
    MotionalEcho,
};

std::string experiment_kind_name(ExperimentKind k);
std::vector<std::string> experiment_kind_names();

// A generic numeric table with named columns, ready for CSV output.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// Everything one experiment or figure preset produces: raw tables, fit
// reports, and one-line summaries comparing headline numbers against their
// reference values.
struct ExperimentResult {
    std::string name;
    std::vector<Table> tables;
    std::vector<FitReport> fits;
    std::vector<std::string> summary;
    std::map<std::string, std::string> meta;
};

// --- sequence builders (also used by tests and the DSL examples) ---

Pulse make_pulse(DriveKind kind, double area_rad, const RunConfig& cfg, Mode mode = Mode::Axial,
                 double phase_rad = 0.0, double detuning_hz = 0.0);

Sequence make_rabi_sequence(const RunConfig& cfg, double duration_us);
Sequence make_ramsey_sequence(const RunConfig& cfg, double wait_us, double area_rad,
                              double pulse_area_each = -1.0, double second_phase_rad = 0.0);
Sequence make_line_trigger_sequence(const RunConfig& cfg, double pulse_ms, double delay_ms);
Sequence make_raman_sequence(const RunConfig& cfg, double pulse_ms, double delay_ms);
Sequence make_lifetime_sequence(const RunConfig& cfg, double wait_ms);
Sequence make_heating_sequence(const RunConfig& cfg, Mode mode, double wait_ms);
// Four-pulse motional interferometer: pi/2 carrier, pi blue sideband,
// Wait(T), pi blue sideband, pi/2 carrier with the analysis phase.
Sequence make_echo_sequence(const RunConfig& cfg, double wait_us, double final_phase_rad);

// --- experiment runners ---

struct RabiResult {
    ScanResult scan;
    double t_10pi_us = 0.0;
    double contrast_10pi = 0.0;  // max/min over the Rabi period around 10 pi
};
RabiResult run_rabi_flop(const RunConfig& cfg, double t_max_us = 80.0, double step_us = 1.0);

struct RamseyFringeResult {
    ScanResult scan;
    FitReport fringe;
    double wait_us = 0.0;
};
RamseyFringeResult run_ramsey_fringe(const RunConfig& cfg, double wait_us = 100.0,
                                     double span_hz = 40000.0, double step_hz = 500.0,
                                     double area_each = -1.0);

struct RamseyContrastResult {
    std::vector<DataPoint> contrast_vs_wait;  // x in ms
    FitReport decay;
};
RamseyContrastResult run_ramsey_contrast(const RunConfig& cfg,
                                         const std::vector<double>& waits_us = {});

struct CenterVsDelayResult {
    // rows: delay_ms, center_khz, center_sigma_khz, width_omega_rad_us
    std::vector<std::vector<double>> centers;
    FitReport sine;
    double residual_std_khz = 0.0;
};
CenterVsDelayResult run_line_trigger(const RunConfig& cfg, double pulse_ms = 1.0,
                                     double delay_step_ms = 1.0, double span_khz = 6.0,
                                     double step_khz = 0.4);
ScanResult run_raman_spectrum(const RunConfig& cfg, double delay_ms = 0.0, double pulse_ms = 1.0,
                              double span_khz = 8.0, double step_khz = 0.4);
CenterVsDelayResult run_raman_vs_delay(const RunConfig& cfg, double pulse_ms = 1.0,
                                       double delay_step_ms = 1.0, double span_khz = 8.0,
                                       double step_khz = 0.4);

struct LifetimeResult {
    ScanResult scan;  // survival vs wait (ms)
    FitReport fit;
};
LifetimeResult run_lifetime(const RunConfig& cfg, const std::vector<double>& waits_ms = {},
                            long shots_per_point = -1);

struct HeatingResult {
    Mode mode = Mode::Axial;
    ScanResult scan;  // mean phonon number vs wait (ms)
    FitReport fit;    // linear
};
HeatingResult run_heating(const RunConfig& cfg, Mode mode, const std::vector<double>& waits_ms = {},
                          long trajectories = 10000);

struct EchoResult {
    ScanResult trace;                        // P_D vs sequence cutoff time (us)
    std::vector<DataPoint> contrast_vs_wait; // x in ms
    FitReport decay;                         // exponential 1/e fit (when scanned)
    double wait_us = 0.0;
    double contrast = 0.0;                   // |P_D(phi=0) - P_D(phi=pi)| at wait_us
};
EchoResult run_motional_echo(const RunConfig& cfg, double wait_us = 850.0, bool with_trace = true);
EchoResult run_echo_vs_wait(const RunConfig& cfg, const std::vector<double>& waits_ms,
                            long shots_per_phase = 2000);

// --- figure presets ---

// fig2 line-triggered resonance drift, fig3 Rabi flops, fig4 Ramsey fringe,
// fig5 Ramsey contrast decay, fig7a/fig7b Raman drift (plain/compensated),
// fig8 D lifetime, fig9 heating rates, fig10 motional echo.
std::vector<std::string> figure_names();
bool is_figure_name(const std::string& name);
// Applies the preset's config adjustments on top of `base` and runs it.
ExperimentResult run_figure(const std::string& name, const RunConfig& base);

}  // namespace ionsim
