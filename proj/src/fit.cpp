#include "ionsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ionsim/zeeman.hpp"

namespace ionsim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<DataPoint> sorted_by_x(std::vector<DataPoint> pts) {
    std::sort(pts.begin(), pts.end(),
              [](const DataPoint& a, const DataPoint& b) { return a.x < b.x; });
    return pts;
}

void require_points(const std::vector<DataPoint>& pts, std::size_t n_params, const char* model) {
    if (pts.size() < n_params) {
        throw FitError(std::string(model) + ": need at least " + std::to_string(n_params) +
                       " points, got " + std::to_string(pts.size()));
    }
    for (const auto& p : pts) {
        if (!(p.sigma > 0.0)) throw FitError(std::string(model) + ": non-positive point sigma");
    }
}

// Gauss-Jordan inverse with partial pivoting; returns false when singular.
bool invert_matrix(std::vector<double>& a, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
        }
        if (std::fabs(a[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[piv * n + c], a[col * n + c]);
                std::swap(inv[piv * n + c], inv[col * n + c]);
            }
        }
        const double d = a[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r * n + c] -= f * a[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    a = inv;
    return true;
}

// Exact weighted linear least squares: y ~ sum_k beta_k * basis_k(x).
// Returns beta, covariance (X^T W X)^{-1}, and the weighted residual SS.
struct LinearFit {
    std::vector<double> beta;
    std::vector<double> cov;  // k x k
    double residual_ss = 0.0;
};

template <typename BasisFn>
LinearFit weighted_linear(const std::vector<DataPoint>& pts, std::size_t k, BasisFn basis) {
    std::vector<double> ata(k * k, 0.0), atb(k, 0.0), row(k);
    for (const auto& p : pts) {
        basis(p.x, row.data());
        const double w = 1.0 / (p.sigma * p.sigma);
        for (std::size_t i = 0; i < k; ++i) {
            atb[i] += w * row[i] * p.y;
            for (std::size_t j = 0; j < k; ++j) ata[i * k + j] += w * row[i] * row[j];
        }
    }
    if (!invert_matrix(ata, k)) throw FitError("degenerate linear system");
    LinearFit out;
    out.cov = ata;
    out.beta.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) out.beta[i] += ata[i * k + j] * atb[j];
    }
    for (const auto& p : pts) {
        basis(p.x, row.data());
        double m = 0.0;
        for (std::size_t i = 0; i < k; ++i) m += out.beta[i] * row[i];
        const double r = (p.y - m) / p.sigma;
        out.residual_ss += r * r;
    }
    return out;
}

}  // namespace

double FitReport::param(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i) {
        if (param_names[i] == name) return params[i];
    }
    throw FitError("fit '" + model + "' has no parameter '" + name + "'");
}

double FitReport::sigma(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i) {
        if (param_names[i] == name) return i < sigmas.size() ? sigmas[i] : 0.0;
    }
    throw FitError("fit '" + model + "' has no parameter '" + name + "'");
}

double binomial_sigma(double p, long shots) {
    if (shots <= 0) throw FitError("binomial sigma needs a positive shot count");
    const double n = static_cast<double>(shots);
    return std::sqrt((p * (1.0 - p) + 1.0 / (4.0 * n * n)) / n);
}

std::vector<DataPoint> scan_to_points(const ScanResult& scan) {
    std::vector<DataPoint> pts;
    pts.reserve(scan.points.size());
    for (const auto& p : scan.points) {
        DataPoint d;
        d.x = p.value;
        d.y = p.stat;
        if (scan.readout == Readout::BrightFraction) {
            d.sigma = binomial_sigma(p.stat, p.shots);
        } else {
            d.sigma = std::max(p.stderr_, 1e-6);
        }
        pts.push_back(d);
    }
    return pts;
}

namespace detail {

namespace {

double penalized(ChiSqFn fn, const void* ctx, std::vector<double> p, const std::vector<double>& lo,
                 const std::vector<double>& hi) {
    double penalty = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < lo[i]) {
            const double d = lo[i] - p[i];
            penalty += 1e8 * d * d;
            p[i] = lo[i];
        } else if (p[i] > hi[i]) {
            const double d = p[i] - hi[i];
            penalty += 1e8 * d * d;
            p[i] = hi[i];
        }
    }
    const double f = fn(p.data(), ctx);
    return (std::isfinite(f) ? f : 1e30) + penalty;
}

struct Vertex {
    std::vector<double> x;
    double f = 0.0;
};

Vertex nelder_mead(ChiSqFn fn, const void* ctx, const std::vector<double>& start,
                   const std::vector<double>& lo, const std::vector<double>& hi, int max_iter,
                   bool* converged) {
    const std::size_t n = start.size();
    std::vector<Vertex> s(n + 1);
    s[0].x = start;
    for (std::size_t i = 0; i < n; ++i) {
        s[i + 1].x = start;
        double h = 0.1 * std::fabs(start[i]);
        const double span = hi[i] - lo[i];
        if (h == 0.0) h = std::isfinite(span) ? 0.05 * span : 0.1;
        if (!(h > 0.0) || !std::isfinite(h)) h = 0.1;
        s[i + 1].x[i] += h;
    }
    for (auto& v : s) v.f = penalized(fn, ctx, v.x, lo, hi);

    auto order = [&]() {
        std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    order();

    *converged = false;
    for (int iter = 0; iter < max_iter; ++iter) {
        if (s[n].f - s[0].f < 1e-12 * (1.0 + std::fabs(s[0].f))) {
            *converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) centroid[j] += s[i].x[j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (centroid[j] - s[n].x[j]);
            return p;
        };

        std::vector<double> xr = blend(1.0);
        const double fr = penalized(fn, ctx, xr, lo, hi);
        if (fr < s[0].f) {
            std::vector<double> xe = blend(2.0);
            const double fe = penalized(fn, ctx, xe, lo, hi);
            if (fe < fr) {
                s[n] = {std::move(xe), fe};
            } else {
                s[n] = {std::move(xr), fr};
            }
        } else if (fr < s[n - 1].f) {
            s[n] = {std::move(xr), fr};
        } else {
            std::vector<double> xc = blend(fr < s[n].f ? 0.5 : -0.5);
            const double fc = penalized(fn, ctx, xc, lo, hi);
            if (fc < std::min(fr, s[n].f)) {
                s[n] = {std::move(xc), fc};
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        s[i].x[j] = s[0].x[j] + 0.5 * (s[i].x[j] - s[0].x[j]);
                    }
                    s[i].f = penalized(fn, ctx, s[i].x, lo, hi);
                }
            }
        }
        order();
    }
    return s[0];
}

}  // namespace

SimplexResult simplex_fit(ChiSqFn fn, const void* ctx, const std::vector<std::vector<double>>& starts,
                          const std::vector<double>& lo, const std::vector<double>& hi, int max_iter) {
    if (starts.empty()) throw FitError("simplex fit needs at least one start");
    const std::size_t n = starts.front().size();

    SimplexResult best;
    best.chi2 = 1e300;
    for (const auto& start : starts) {
        if (start.size() != n) throw FitError("simplex starts disagree on dimension");
        bool conv = false;
        Vertex v = nelder_mead(fn, ctx, start, lo, hi, max_iter, &conv);
        if (v.f < best.chi2) {
            best.chi2 = v.f;
            best.params = v.x;
            best.converged = conv;
        }
    }

    // Parameter uncertainties from the chi^2 curvature: cov = 2 H^{-1}.
    best.sigmas.assign(n, 0.0);
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) h[i] = 1e-4 * (1.0 + std::fabs(best.params[i]));
    auto feval = [&](const std::vector<double>& p) { return penalized(fn, ctx, p, lo, hi); };
    const double f0 = feval(best.params);
    std::vector<double> hess(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> pp = best.params, pm = best.params;
        pp[i] += h[i];
        pm[i] -= h[i];
        hess[i * n + i] = (feval(pp) - 2.0 * f0 + feval(pm)) / (h[i] * h[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            std::vector<double> a = best.params, b = best.params, c = best.params, d = best.params;
            a[i] += h[i]; a[j] += h[j];
            b[i] += h[i]; b[j] -= h[j];
            c[i] -= h[i]; c[j] += h[j];
            d[i] -= h[i]; d[j] -= h[j];
            const double v = (feval(a) - feval(b) - feval(c) + feval(d)) / (4.0 * h[i] * h[j]);
            hess[i * n + j] = v;
            hess[j * n + i] = v;
        }
    }
    std::vector<double> cov = hess;
    if (invert_matrix(cov, n)) {
        for (std::size_t i = 0; i < n; ++i) {
            const double var = 2.0 * cov[i * n + i];
            best.sigmas[i] = var > 0.0 ? std::sqrt(var) : 0.0;
        }
    }
    return best;
}

}  // namespace detail

namespace {

struct LineCenterCtx {
    const std::vector<DataPoint>* pts;
    double tau_us;
};

double line_center_chi2(const double* p, const void* vctx) {
    const auto& ctx = *static_cast<const LineCenterCtx*>(vctx);
    const double center = p[0], omega = p[1], amp = p[2];
    double ss = 0.0;
    for (const auto& d : *ctx.pts) {
        const double det = kTwoPi * 1e-6 * (d.x - center);
        const double w2 = omega * omega + det * det;
        const double w = std::sqrt(w2);
        const double s = std::sin(0.5 * w * ctx.tau_us);
        const double m = w2 > 0.0 ? amp * (omega * omega / w2) * s * s : 0.0;
        const double r = (d.y - m) / d.sigma;
        ss += r * r;
    }
    return ss;
}

struct FringeCtx {
    const std::vector<DataPoint>* pts;
};

double fringe_chi2(const double* p, const void* vctx) {
    const auto& ctx = *static_cast<const FringeCtx*>(vctx);
    const double half_amp = p[0], phase = p[1], period_s = p[2], offset = p[3];
    double ss = 0.0;
    for (const auto& d : *ctx.pts) {
        const double m = offset + half_amp * std::cos(kTwoPi * d.x * period_s + phase);
        const double r = (d.y - m) / d.sigma;
        ss += r * r;
    }
    return ss;
}

struct DecayCtx {
    const std::vector<DataPoint>* pts;
    bool gaussian;
};

double decay_chi2(const double* p, const void* vctx) {
    const auto& ctx = *static_cast<const DecayCtx*>(vctx);
    const double tau = p[0];
    double ss = 0.0;
    for (const auto& d : *ctx.pts) {
        const double u = d.x / tau;
        const double m = std::exp(ctx.gaussian ? -u * u : -u);
        const double r = (d.y - m) / d.sigma;
        ss += r * r;
    }
    return ss;
}

struct SurvivalCtx {
    const std::vector<DataPoint>* pts;
};

double survival_chi2(const double* p, const void* vctx) {
    const auto& ctx = *static_cast<const SurvivalCtx*>(vctx);
    const double tau = p[0];
    double ss = 0.0;
    for (const auto& d : *ctx.pts) {
        const double m = std::exp(-d.x / tau);
        const double r = (d.y - m) / d.sigma;
        ss += r * r;
    }
    return ss;
}

}  // namespace

FitReport fit_line_center(const std::vector<DataPoint>& pts_in, double pulse_duration_us) {
    auto pts = sorted_by_x(pts_in);
    require_points(pts, 3, "line-center");
    if (!(pulse_duration_us > 0.0)) throw FitError("line-center: pulse duration must be positive");

    LineCenterCtx ctx{&pts, pulse_duration_us};
    double x_lo = pts.front().x, x_hi = pts.back().x;
    const double span = std::max(x_hi - x_lo, 1.0);

    double best_x = pts.front().x, best_y = pts.front().y;
    double wsum = 0.0, xw = 0.0;
    for (const auto& d : pts) {
        if (d.y > best_y) {
            best_y = d.y;
            best_x = d.x;
        }
        wsum += d.y;
        xw += d.y * d.x;
    }
    const double centroid = wsum > 0.0 ? xw / wsum : 0.5 * (x_lo + x_hi);
    const double omega_pi = 3.14159265358979323846 / pulse_duration_us;

    std::vector<std::vector<double>> starts = {
        {best_x, omega_pi, std::min(1.0, std::max(best_y, 0.1))},
        {centroid, omega_pi, std::min(1.0, std::max(best_y, 0.1))},
        {best_x, 0.5 * omega_pi, std::min(1.0, std::max(best_y, 0.1))},
        {best_x, 2.0 * omega_pi, std::min(1.0, std::max(best_y, 0.1))},
    };
    const std::vector<double> lo = {x_lo - span, 1e-6 * omega_pi, 0.0};
    const std::vector<double> hi = {x_hi + span, 1e3 * omega_pi, 1.2};

    const auto res = detail::simplex_fit(&line_center_chi2, &ctx, starts, lo, hi);

    FitReport rep;
    rep.model = "line-center";
    rep.param_names = {"center_hz", "omega_rad_us", "amplitude"};
    rep.params = res.params;
    rep.sigmas = res.sigmas;
    rep.residual_ss = res.chi2;
    rep.n_points = static_cast<long>(pts.size());
    rep.dof = static_cast<int>(pts.size()) - 3;
    rep.converged = res.converged;
    return rep;
}

FitReport fit_fringe(const std::vector<DataPoint>& pts_in) {
    auto pts = sorted_by_x(pts_in);
    require_points(pts, 4, "fringe");

    const double span = std::max(pts.back().x - pts.front().x, 1e-12);
    // Coarse period scan with the conditionally-linear parameters solved
    // exactly at each trial period, then a simplex polish of all four.
    double best_t = 1.0 / span, best_ss = 1e300;
    double best_a = 0.0, best_b = 0.0, best_off = 0.5;
    for (int i = 1; i <= 600; ++i) {
        const double t = (0.25 + 0.05 * i) / span;  // 0.3 .. 30 periods over the span
        LinearFit lf;
        try {
            lf = weighted_linear(pts, 3, [&](double x, double* row) {
                row[0] = std::cos(kTwoPi * x * t);
                row[1] = std::sin(kTwoPi * x * t);
                row[2] = 1.0;
            });
        } catch (const FitError&) {
            continue;
        }
        if (lf.residual_ss < best_ss) {
            best_ss = lf.residual_ss;
            best_t = t;
            best_a = lf.beta[0];
            best_b = lf.beta[1];
            best_off = lf.beta[2];
        }
    }

    const double half_amp = std::sqrt(best_a * best_a + best_b * best_b);
    const double phase = std::atan2(-best_b, best_a);
    FringeCtx ctx{&pts};
    std::vector<std::vector<double>> starts = {{half_amp, phase, best_t, best_off}};
    const std::vector<double> lo = {0.0, -10.0, 0.01 / span, -0.5};
    const std::vector<double> hi = {1.0, 10.0, 100.0 / span, 1.5};
    const auto res = detail::simplex_fit(&fringe_chi2, &ctx, starts, lo, hi);

    const double a = res.params[0], off = res.params[3];
    double contrast = off != 0.0 ? a / off : 0.0;
    contrast = std::clamp(contrast, 0.0, 1.0);
    double c_sigma = 0.0;
    if (a > 0.0 && off > 0.0) {
        const double ra = res.sigmas[0] / a, ro = res.sigmas[3] / off;
        c_sigma = contrast * std::sqrt(ra * ra + ro * ro);
    }

    FitReport rep;
    rep.model = "fringe";
    rep.param_names = {"contrast", "phase_rad", "period_s", "offset"};
    rep.params = {contrast, res.params[1], res.params[2], off};
    rep.sigmas = {c_sigma, res.sigmas[1], res.sigmas[2], res.sigmas[3]};
    rep.residual_ss = res.chi2;
    rep.n_points = static_cast<long>(pts.size());
    rep.dof = static_cast<int>(pts.size()) - 4;
    rep.converged = res.converged;
    return rep;
}

FitReport fit_contrast_decay(const std::vector<DataPoint>& pts_in) {
    auto pts = sorted_by_x(pts_in);
    require_points(pts, 2, "contrast-decay");

    double tau0 = pts.back().x > 0.0 ? 0.5 * pts.back().x : 1.0;
    for (const auto& d : pts) {
        if (d.y < 0.3678794411714423 && d.x > 0.0) {
            tau0 = d.x;
            break;
        }
    }

    const std::vector<double> lo = {1e-6};
    const std::vector<double> hi = {1e6};
    std::vector<std::vector<double>> starts = {{tau0}, {2.0 * tau0}, {0.5 * tau0}};

    DecayCtx gctx{&pts, true};
    const auto g = detail::simplex_fit(&decay_chi2, &gctx, starts, lo, hi);
    DecayCtx ectx{&pts, false};
    const auto e = detail::simplex_fit(&decay_chi2, &ectx, starts, lo, hi);

    const double tau_g = g.params[0];
    const double tau_e = e.params[0];
    const double nu_hz = 1.0 / (kTwoPi * tau_g * 1e-3);
    const double nu_sigma = tau_g > 0.0 ? nu_hz * g.sigmas[0] / tau_g : 0.0;
    const double nu_half = 1.0 / (kTwoPi * tau_e * 1e-3);
    const double nu_half_sigma = tau_e > 0.0 ? nu_half * e.sigmas[0] / tau_e : 0.0;

    FitReport rep;
    rep.model = "contrast-decay";
    rep.param_names = {"tau_gauss_ms", "nu_hz", "tau_exp_ms", "nu_half_hz",
                       "gauss_residual_ss", "exp_residual_ss"};
    rep.params = {tau_g, nu_hz, tau_e, nu_half, g.chi2, e.chi2};
    rep.sigmas = {g.sigmas[0], nu_sigma, e.sigmas[0], nu_half_sigma, 0.0, 0.0};
    rep.residual_ss = std::min(g.chi2, e.chi2);
    rep.n_points = static_cast<long>(pts.size());
    rep.dof = static_cast<int>(pts.size()) - 1;
    rep.converged = g.converged && e.converged;
    rep.flags.push_back(g.chi2 <= e.chi2 ? "prefer_gaussian" : "prefer_exponential");
    if (tau_g > 10.0 * pts.back().x && tau_e > 10.0 * pts.back().x) {
        rep.flags.push_back("non_identifiable");
    }
    return rep;
}

FitReport fit_sine_drift(const std::vector<DataPoint>& pts_in) {
    auto pts = sorted_by_x(pts_in);
    require_points(pts, 3, "sine-drift");

    const double w = kTwoPi * 0.05;  // fixed line frequency, rad per ms
    const LinearFit lf = weighted_linear(pts, 3, [&](double x, double* row) {
        row[0] = std::sin(w * x);
        row[1] = std::cos(w * x);
        row[2] = 1.0;
    });

    const double a = lf.beta[0], b = lf.beta[1];
    const double amp = std::sqrt(a * a + b * b);
    const double phase = std::atan2(b, a);
    const double va = lf.cov[0], vb = lf.cov[4], cab = lf.cov[1];
    double amp_sigma = 0.0, phase_sigma = 0.0;
    if (amp > 0.0) {
        const double v_amp = (a * a * va + b * b * vb + 2.0 * a * b * cab) / (amp * amp);
        const double v_ph = (b * b * va + a * a * vb - 2.0 * a * b * cab) / (amp * amp * amp * amp);
        amp_sigma = v_amp > 0.0 ? std::sqrt(v_amp) : 0.0;
        phase_sigma = v_ph > 0.0 ? std::sqrt(v_ph) : 0.0;
    }

    // Implied field amplitude when the drift is expressed in kHz, via the
    // ground-pair splitting susceptibility.
    const double ground_khz_per_mg = susceptibility_khz_per_mgauss(
        ZeemanState{Level::S, -1}, ZeemanState{Level::S, +1});
    const double field_mg = amp / ground_khz_per_mg;

    FitReport rep;
    rep.model = "sine-drift";
    rep.param_names = {"amplitude", "phase_rad", "offset", "field_mgauss"};
    rep.params = {amp, phase, lf.beta[2], field_mg};
    rep.sigmas = {amp_sigma, phase_sigma, std::sqrt(std::max(lf.cov[8], 0.0)),
                  amp_sigma / ground_khz_per_mg};
    rep.residual_ss = lf.residual_ss;
    rep.n_points = static_cast<long>(pts.size());
    rep.dof = static_cast<int>(pts.size()) - 3;
    rep.converged = true;
    return rep;
}

FitReport fit_exponential_decay(const std::vector<DataPoint>& pts_in) {
    auto pts = sorted_by_x(pts_in);
    require_points(pts, 1, "exponential-decay");

    double tau0 = pts.back().x > 0.0 ? pts.back().x : 1.0;
    for (const auto& d : pts) {
        if (d.y < 0.3678794411714423 && d.x > 0.0) {
            tau0 = d.x;
            break;
        }
    }
    SurvivalCtx ctx{&pts};
    std::vector<std::vector<double>> starts = {{tau0}, {2.0 * tau0}, {0.5 * tau0}};
    const std::vector<double> lo = {1e-6};
    const std::vector<double> hi = {1e9};
    const auto res = detail::simplex_fit(&survival_chi2, &ctx, starts, lo, hi);

    FitReport rep;
    rep.model = "exponential-decay";
    rep.param_names = {"tau_ms"};
    rep.params = res.params;
    rep.sigmas = res.sigmas;
    rep.residual_ss = res.chi2;
    rep.n_points = static_cast<long>(pts.size());
    rep.dof = static_cast<int>(pts.size()) - 1;
    rep.converged = res.converged;
    if (res.params[0] > 10.0 * pts.back().x) rep.flags.push_back("tau_lower_bound");
    return rep;
}

FitReport fit_linear(const std::vector<DataPoint>& pts_in) {
    auto pts = sorted_by_x(pts_in);
    require_points(pts, 2, "linear");

    const LinearFit lf = weighted_linear(pts, 2, [](double x, double* row) {
        row[0] = x;
        row[1] = 1.0;
    });

    FitReport rep;
    rep.model = "linear";
    rep.param_names = {"slope", "intercept"};
    rep.params = lf.beta;
    rep.sigmas = {std::sqrt(std::max(lf.cov[0], 0.0)), std::sqrt(std::max(lf.cov[3], 0.0))};
    rep.residual_ss = lf.residual_ss;
    rep.n_points = static_cast<long>(pts.size());
    rep.dof = static_cast<int>(pts.size()) - 2;
    rep.converged = true;
    return rep;
}

}  // namespace ionsim
