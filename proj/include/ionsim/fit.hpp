#pragma once

#include <string>
#include <vector>

#include "ionsim/pulse.hpp"

namespace ionsim {

struct FitError : std::runtime_error {
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// Weighted-least-squares result. params/sigmas are model specific and
// documented per fitter; residual_ss is the weighted sum of squares.
struct FitReport {
    std::string model;
    std::vector<std::string> param_names;
    std::vector<double> params;
    std::vector<double> sigmas;
    double residual_ss = 0.0;
    long n_points = 0;
    int dof = 0;
    bool converged = false;
    std::vector<std::string> flags;

    double param(const std::string& name) const;   // throws FitError
    double sigma(const std::string& name) const;
    double reduced_chi2() const { return dof > 0 ? residual_ss / dof : 0.0; }
};

struct DataPoint {
    double x = 0.0;
    double y = 0.0;
    double sigma = 1.0;
};

// Standard error of a binomial fraction estimate with a floor that keeps
// weights finite at p = 0 or 1: sqrt((p(1-p) + 1/(4N^2)) / N).
double binomial_sigma(double p, long shots);

std::vector<DataPoint> scan_to_points(const ScanResult& scan);

// Rabi resonance line P(delta) = A (Omega^2/W^2) sin^2(W tau / 2),
// W = sqrt(Omega^2 + (delta - delta0)^2), tau fixed. x in Hz.
// params: center_hz, omega_rad_us, amplitude.
FitReport fit_line_center(const std::vector<DataPoint>& pts, double pulse_duration_us);

// Ramsey fringe P(delta) = offset + (C/2) cos(2 pi delta T + phi). x in Hz,
// T in seconds. params: contrast (peak-to-trough over twice the offset, the
// fitted-extrema definition), phase_rad, period_s, offset.
FitReport fit_fringe(const std::vector<DataPoint>& pts);

// Contrast decay: fits both exp(-(t/tau)^2) and exp(-t/tau) (unit amplitude,
// matching contrast = 1 at zero wait), reports each tau with its implied
// frequency scale nu = 1/(2 pi tau), and which model has the lower weighted
// residual. params: tau_gauss_ms, nu_hz, tau_exp_ms, nu_half_hz,
// gauss_residual_ss, exp_residual_ss; flags contain "prefer_gaussian" or
// "prefer_exponential", plus "non_identifiable" when the data never decays.
// x in ms.
FitReport fit_contrast_decay(const std::vector<DataPoint>& pts);

// Sine at the fixed line frequency: y = offset + A sin(2 pi (0.05/ms) t + phi).
// Linear in (A sin, A cos, offset), solved exactly. x in ms; when y is in
// kHz the implied field amplitude via the ground-pair susceptibility is
// reported too. params: amplitude, phase_rad, offset, field_mgauss.
FitReport fit_sine_drift(const std::vector<DataPoint>& pts);

// Survival exp(-t/tau). x in ms. params: tau_ms; flags contain
// "tau_lower_bound" when the data never visibly decays.
FitReport fit_exponential_decay(const std::vector<DataPoint>& pts);

// Ordinary least squares line. params: slope, intercept.
FitReport fit_linear(const std::vector<DataPoint>& pts);

namespace detail {

// Nelder-Mead simplex with box penalties, multi-start, and a finite-
// difference Hessian of chi^2 for parameter uncertainties at the optimum.
struct SimplexResult {
    std::vector<double> params;
    std::vector<double> sigmas;
    double chi2 = 0.0;
    bool converged = false;
};

using ChiSqFn = double (*)(const double*, const void*);

SimplexResult simplex_fit(ChiSqFn fn, const void* ctx, const std::vector<std::vector<double>>& starts,
                          const std::vector<double>& lo, const std::vector<double>& hi,
                          int max_iter = 4000);

}  // namespace detail

}  // namespace ionsim
