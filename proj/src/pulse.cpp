#include "ionsim/pulse.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "ionsim/thermal.hpp"

namespace ionsim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// One resonant two-level block:
// U = [[cos(W tau/2) - i (d/W) sin, -i (O/W) e^{-i phi} sin],
//      [-i (O/W) e^{i phi} sin,     cos(W tau/2) + i (d/W) sin]]
// with W = sqrt(O^2 + d^2). Signed O is fine; the sign is a phase.
inline void apply_block(cplx& a_s, cplx& a_d, double omega, double delta, double phi, double tau) {
    const double w = std::sqrt(omega * omega + delta * delta);
    const double half = 0.5 * w * tau;
    const double c = std::cos(half);
    const double s = std::sin(half);
    double ds = 0.0, os = 0.0;
    if (w > 0.0) {
        ds = delta / w * s;
        os = omega / w * s;
    }
    const cplx u00{c, -ds};
    const cplx u11{c, ds};
    const cplx mi_os{0.0, -os};
    const cplx u01 = mi_os * std::polar(1.0, -phi);
    const cplx u10 = mi_os * std::polar(1.0, phi);
    const cplx ns = u00 * a_s + u01 * a_d;
    const cplx nd = u10 * a_s + u11 * a_d;
    a_s = ns;
    a_d = nd;
}

struct CouplingTables {
    std::vector<double> carrier, blue, red;

    CouplingTables(double eta, long n_max) {
        carrier.resize(n_max + 1);
        blue.resize(n_max + 1);
        red.resize(n_max + 1);
        for (long n = 0; n <= n_max; ++n) {
            carrier[n] = motional_element(Sideband::Carrier, eta, n);
            blue[n] = motional_element(Sideband::Blue, eta, n);
            red[n] = motional_element(Sideband::Red, eta, n);
        }
    }

    const std::vector<double>& table(Sideband sb) const {
        switch (sb) {
            case Sideband::Carrier: return carrier;
            case Sideband::Blue: return blue;
            case Sideband::Red: return red;
        }
        return carrier;
    }
};

double spectator_factor(const Pulse& p, const Sequence& seq, const RunConfig& cfg,
                        const std::vector<long>& mode_n) {
    if (p.kind == DriveKind::RamanGround) return 1.0;  // copropagating, eta ~ 0
    double f = 1.0;
    for (std::size_t m = 0; m < kNumModes; ++m) {
        if (m == static_cast<std::size_t>(seq.active_mode)) continue;
        f *= debye_waller(cfg.modes[m].eta, mode_n[m]);
    }
    return f;
}

void apply_pulse(JointState& st, const Pulse& p, const Sequence& seq, const RunConfig& cfg,
                 const ShotNoise& noise, const CouplingTables& tables,
                 const std::vector<long>& mode_n, double t_start_ms, double extra_detuning_hz,
                 double dur_us) {
    if (dur_us <= 0.0) return;

    const double intensity_scale =
        cfg.laser.intensity_as_rabi ? noise.intensity_factor : std::sqrt(noise.intensity_factor);

    double laser_hz = p.detuning_hz + extra_detuning_hz;
    if (p.kind != DriveKind::RamanGround) laser_hz += noise.laser_offset_hz;

    // Quasi-static field during the pulse, evaluated at the midpoint.
    const double t_mid_ms = t_start_ms + 0.5e-3 * dur_us;
    const double dev_mg = (sample_bfield(cfg.bfield, noise, t_mid_ms) - cfg.bfield.b0_gauss) * 1e3;
    const double shift_khz = susceptibility_khz_per_mgauss(p.from, p.to) * dev_mg;
    const double delta = kTwoPi * (laser_hz * 1e-6 + shift_khz * 1e-3);

    const double omega_base = p.omega0_rad_us * intensity_scale * spectator_factor(p, seq, cfg, mode_n);
    const long n_max = st.n_max();

    if (p.kind == DriveKind::RamanGround) {
        for (long n = 0; n <= n_max; ++n) {
            apply_block(st.amp(Level::S, n), st.amp(Level::D, n), omega_base, delta, p.phase_rad, dur_us);
        }
        return;
    }

    const Sideband sb = drive_sideband(p.kind);
    const std::vector<double>& elem = tables.table(sb);
    switch (sb) {
        case Sideband::Carrier:
            for (long n = 0; n <= n_max; ++n) {
                apply_block(st.amp(Level::S, n), st.amp(Level::D, n), omega_base * elem[n], delta,
                            p.phase_rad, dur_us);
            }
            break;
        case Sideband::Blue:
            // |S,n> <-> |D,n+1>; |D,0> and |S,n_max> are dark.
            for (long n = 0; n + 1 <= n_max; ++n) {
                apply_block(st.amp(Level::S, n), st.amp(Level::D, n + 1), omega_base * elem[n], delta,
                            p.phase_rad, dur_us);
            }
            break;
        case Sideband::Red:
            // |S,n> <-> |D,n-1>; |S,0> is dark.
            for (long n = 1; n <= n_max; ++n) {
                apply_block(st.amp(Level::S, n), st.amp(Level::D, n - 1), omega_base * elem[n], delta,
                            p.phase_rad, dur_us);
            }
            break;
    }
}

struct Walker {
    const Sequence& seq;
    const RunConfig& cfg;
    const CouplingTables& tables;
    ScanAxis axis;
    double value;
    double cutoff_us;
    Rng rng;

    ShotNoise noise;
    JointState st;
    std::vector<long> mode_n;
    double t_us = 0.0;
    double ctx_detuning_hz = 0.0;
    bool measured = false;
    ShotOutcome out;

    double drift_mgauss = 0.0;

    Walker(const Sequence& s, const RunConfig& c, const CouplingTables& t, ScanAxis ax, double val,
           double cut, std::uint64_t stream_seed)
        : seq(s), cfg(c), tables(t), axis(ax), value(val), cutoff_us(cut), rng(stream_seed),
          st(c.n_max), mode_n(kNumModes, 0) {}

    double trigger_delay_ms() const {
        double d = seq.trigger_delay_ms;
        if (axis == ScanAxis::Delay) d = value;
        return cfg.bfield.trigger_base_delay_ms + d;
    }
    double t_abs_ms() const { return trigger_delay_ms() + t_us * 1e-3; }

    void prep() {
        noise = sample_shot_noise(cfg.bfield, cfg.laser, rng);
        noise.drift_mgauss = drift_mgauss;
        for (std::size_t m = 0; m < kNumModes; ++m) {
            double nbar = seq.nbar_override[m] >= 0.0 ? seq.nbar_override[m] : cfg.modes[m].nbar;
            ThermalDistribution dist(nbar, cfg.n_max);
            long n = dist.sample(rng);
            if (m == static_cast<std::size_t>(seq.active_mode)) {
                if (seq.prep_n >= 0) n = seq.prep_n;
                if (n > cfg.n_max) n = cfg.n_max;
            }
            mode_n[m] = n;
        }
        st.set_basis(seq.prep_level, mode_n[static_cast<std::size_t>(seq.active_mode)]);
    }

    // Remaining room before the cutoff; negative means past it.
    double room_us() const {
        if (cutoff_us < 0.0) return 1e300;
        return cutoff_us - t_us;
    }

    void do_pulse(const Pulse& p) {
        double dur = axis == ScanAxis::Duration ? value : p.duration_us;
        const double extra = axis == ScanAxis::Detuning ? value : 0.0;
        const double room = room_us();
        if (room <= 0.0) return;
        if (dur > room) dur = room;  // sequence truncated mid-pulse
        apply_pulse(st, p, seq, cfg, noise, tables, mode_n, t_abs_ms(), extra, dur);
        t_us += dur;
        ctx_detuning_hz = p.detuning_hz + extra;
        st.check_norm();
    }

    void do_wait(const WaitElem& w) {
        double dur = axis == ScanAxis::Wait ? value : w.duration_us;
        const double room = room_us();
        if (room <= 0.0) return;
        if (dur > room) dur = room;
        if (dur <= 0.0) return;

        const double t0_ms = t_abs_ms();
        const double t1_ms = t0_ms + dur * 1e-3;

        // Coherence phase of the register pair in the laser frame: set
        // detuning plus the per-shot offset plus the integrated Zeeman
        // excursion. Matches the pulse propagator's convention (D advances
        // by +delta t relative to S).
        double laser_hz = ctx_detuning_hz;
        if (!seq.raman) laser_hz += noise.laser_offset_hz;
        const double zee_int_khz_ms =
            susceptibility_khz_per_mgauss(seq.slot_s, seq.slot_d) *
            bfield_deviation_integral_mgauss_ms(cfg.bfield, noise, t0_ms, t1_ms);
        const double phi_el = kTwoPi * (laser_hz * 1e-6 * dur + zee_int_khz_ms);
        const cplx el_kick = std::polar(1.0, phi_el);
        for (long n = 0; n <= st.n_max(); ++n) st.amp(Level::D, n) *= el_kick;

        // Sideband reference model: the per-shot offset leaks onto the
        // motional ladder with a configurable weight, dephasing
        // Fock-superposition memory (echo-type sequences). Zero weight makes
        // the memory interval exactly laser-insensitive.
        const double w_ref = cfg.laser.sideband_reference_weight;
        if (w_ref != 0.0 && noise.laser_offset_hz != 0.0) {
            const double dphi = kTwoPi * w_ref * noise.laser_offset_hz * 1e-6 * dur;
            for (long n = 1; n <= st.n_max(); ++n) {
                const cplx kick = std::polar(1.0, dphi * n);
                st.amp(Level::S, n) *= kick;
                st.amp(Level::D, n) *= kick;
            }
        }

        if (!seq.raman) white_noise_dephase(st, dur * 1e-3, cfg.laser.lorentzian_hz, rng);

        // Incoherent channels. The ground-ground register has no decaying
        // level, so decay applies only to optical sequences.
        OpenSystemRates rates = cfg.rates;
        if (seq.raman) {
            rates.d_lifetime_ms = 1e300;
            rates.leak_854_per_ms = 0.0;
        }
        evolve_open(st, dur * 1e-3, rates, cfg.heating_rate_per_ms(seq.active_mode), rng);

        // Spectator heating only moves the classical occupation.
        for (std::size_t m = 0; m < kNumModes; ++m) {
            if (m == static_cast<std::size_t>(seq.active_mode)) continue;
            const double rate = cfg.heating_rate_per_ms(static_cast<Mode>(m));
            if (rate > 0.0) mode_n[m] += rng.poisson(rate * dur * 1e-3);
        }

        t_us += dur;
        st.check_norm();
    }

    void do_measure(const MeasureElem& m) {
        // Detection happens after the sequence window closes, so a cutoff
        // that truncates the sequence still reads out the frozen state:
        // the cutoff trace is P_D versus where the sequence stopped.
        out.mean_n = st.mean_n();

        double p_d = 0.0;
        if (m.shelve.has_value()) {
            // Ground-qubit readout: resolve the register, then shelve the
            // remaining slot_s population onto D. Exact for the final
            // D-versus-bright dichotomy because the branches end in
            // orthogonal sectors.
            const double p_upper = st.population(Level::D);
            if (rng.uniform() < p_upper) {
                p_d = 0.0;  // stays in the upper ground state: bright
            } else {
                for (long n = 0; n <= st.n_max(); ++n) st.amp(Level::D, n) = 0.0;
                st.renormalize();
                const Pulse& sh = *m.shelve;
                apply_pulse(st, sh, seq, cfg, noise, tables, mode_n, t_abs_ms(), 0.0, sh.duration_us);
                t_us += sh.duration_us;
                p_d = st.p_D();
            }
        } else {
            p_d = st.p_D();
        }

        out.p_d = p_d;
        bool d = rng.uniform() < p_d;
        if (cfg.detection_error > 0.0 && rng.uniform() < cfg.detection_error) d = !d;
        out.detected_d = d;
        measured = true;
    }

    ShotOutcome run() {
        prep();
        for (const auto& el : seq.elements) {
            if (measured) break;
            std::visit([this](const auto& e) { this->dispatch(e); }, el);
        }
        if (!measured) do_measure(MeasureElem{});
        return out;
    }

    void dispatch(const Pulse& p) { do_pulse(p); }
    void dispatch(const WaitElem& w) { do_wait(w); }
    void dispatch(const MeasureElem& m) { do_measure(m); }
};

std::uint64_t shot_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t shot) {
    return mix64(mix64(master, stream), shot);
}

// Slow field drift: quasi-static over one scan, so the draw depends on the
// stream alone, never on the shot index.
double stream_drift_mgauss(const RunConfig& cfg, std::uint64_t master, std::uint64_t stream) {
    if (cfg.bfield.drift_sigma_mgauss <= 0.0) return 0.0;
    Rng rng(mix64(mix64(master, stream), 0x64726966745f6d67ULL));
    return cfg.bfield.drift_sigma_mgauss * rng.normal();
}

}  // namespace

Sideband drive_sideband(DriveKind k) {
    switch (k) {
        case DriveKind::BlueSideband: return Sideband::Blue;
        case DriveKind::RedSideband: return Sideband::Red;
        default: return Sideband::Carrier;
    }
}

std::string scan_axis_name(ScanAxis axis) {
    switch (axis) {
        case ScanAxis::Detuning: return "detuning";
        case ScanAxis::Duration: return "duration";
        case ScanAxis::Wait: return "wait";
        case ScanAxis::Delay: return "delay";
        case ScanAxis::Repeat: return "repeat";
        case ScanAxis::Cutoff: return "cutoff";
    }
    return "scan";
}

std::string scan_axis_unit(ScanAxis axis) {
    switch (axis) {
        case ScanAxis::Detuning: return "Hz";
        case ScanAxis::Duration: return "us";
        case ScanAxis::Wait: return "us";
        case ScanAxis::Delay: return "ms";
        case ScanAxis::Repeat: return "index";
        case ScanAxis::Cutoff: return "us";
    }
    return "";
}

std::vector<double> scan_grid(double first, double last, double step) {
    if (!(step > 0.0)) throw SequenceError("scan step must be positive");
    if (last < first) throw SequenceError("scan range end precedes start");
    if (last == first) return {first};
    const double span = last - first;
    // Inclusive endpoints; fractional steps round toward more points.
    const long intervals = static_cast<long>(std::ceil(span / step - 1e-9));
    const double actual = span / intervals;
    std::vector<double> values(intervals + 1);
    for (long i = 0; i <= intervals; ++i) values[i] = first + actual * i;
    values.back() = last;
    return values;
}

void check_sequence(const Sequence& seq, const RunConfig& cfg) {
    if (seq.trigger_delay_ms < 0.0 || seq.trigger_delay_ms >= 20.0) {
        throw SequenceError("trigger delay must lie in [0, 20) ms");
    }
    if (seq.raman) {
        if (seq.slot_s.level != Level::S || seq.slot_d.level != Level::S) {
            throw SequenceError("Raman register must use two ground sublevels");
        }
    } else if (seq.slot_s.level != Level::S || seq.slot_d.level != Level::D) {
        throw SequenceError("optical register must pair a ground and a D sublevel");
    }
    if (!zeeman_valid(seq.slot_s) || !zeeman_valid(seq.slot_d)) {
        throw SequenceError("register uses an invalid Zeeman sublevel");
    }
    if (!seq.raman && std::abs(seq.slot_d.m_times2 - seq.slot_s.m_times2) > 4) {
        throw SequenceError("quadrupole selection rule forbids |delta m| > 2");
    }

    bool seen_measure = false;
    for (const auto& el : seq.elements) {
        if (seen_measure) throw SequenceError("measure must be the final element");
        if (const Pulse* p = std::get_if<Pulse>(&el)) {
            if (p->duration_us < 0.0) throw SequenceError("pulse duration must be non-negative");
            const bool is_raman = p->kind == DriveKind::RamanGround;
            if (is_raman != seq.raman) {
                throw SequenceError("pulse drive type does not match the sequence register");
            }
            if (!(p->from == seq.slot_s && p->to == seq.slot_d)) {
                throw SequenceError("pulse addresses a pair other than the register");
            }
            if (!is_raman && std::abs(p->to.m_times2 - p->from.m_times2) > 4) {
                throw SequenceError("quadrupole selection rule forbids |delta m| > 2");
            }
        } else if (const WaitElem* w = std::get_if<WaitElem>(&el)) {
            if (w->duration_us < 0.0) throw SequenceError("wait duration must be non-negative");
        } else if (const MeasureElem* m = std::get_if<MeasureElem>(&el)) {
            seen_measure = true;
            if (m->shelve.has_value()) {
                if (!seq.raman) throw SequenceError("shelved readout requires a Raman sequence");
                const Pulse& sh = *m->shelve;
                if (!(sh.from == seq.slot_s)) throw SequenceError("shelving must start from the lower slot");
                if (sh.to.level != Level::D || !zeeman_valid(sh.to)) {
                    throw SequenceError("shelving target must be a D sublevel");
                }
                if (std::abs(sh.to.m_times2 - sh.from.m_times2) > 4) {
                    throw SequenceError("quadrupole selection rule forbids |delta m| > 2");
                }
            }
        }
    }
    if (cfg.n_max < 1) throw SequenceError("n_max must be at least 1");
}

double calibrated_omega_rad_us(DriveKind kind, const RunConfig& cfg) {
    switch (kind) {
        case DriveKind::Carrier: return cfg.calib.omega_carrier_rad_us;
        case DriveKind::BlueSideband: return cfg.calib.omega_bsb_rad_us;
        case DriveKind::RedSideband: return cfg.calib.omega_rsb_rad_us;
        case DriveKind::RamanGround: return cfg.calib.omega_raman_rad_us;
    }
    return cfg.calib.omega_carrier_rad_us;
}

double ground_matrix_element(DriveKind kind, Mode active_mode, const RunConfig& cfg) {
    if (kind == DriveKind::RamanGround) return 1.0;
    const std::size_t active = static_cast<std::size_t>(active_mode);
    double f = 1.0;
    for (std::size_t m = 0; m < kNumModes; ++m) {
        const double eta = cfg.modes[m].eta;
        if (m == active) {
            switch (drive_sideband(kind)) {
                case Sideband::Carrier: f *= motional_element(Sideband::Carrier, eta, 0); break;
                case Sideband::Blue: f *= motional_element(Sideband::Blue, eta, 0); break;
                // The red sideband is dark from n = 0; its calibration is
                // referenced to the |S,1> -> |D,0> element instead.
                case Sideband::Red: f *= motional_element(Sideband::Red, eta, 1); break;
            }
        } else {
            f *= debye_waller(eta, 0);
        }
    }
    return f;
}

double bare_omega0_rad_us(DriveKind kind, Mode active_mode, const RunConfig& cfg) {
    return calibrated_omega_rad_us(kind, cfg) / ground_matrix_element(kind, active_mode, cfg);
}

double area_to_duration_us(double area_rad, DriveKind kind, const RunConfig& cfg) {
    const double omega = calibrated_omega_rad_us(kind, cfg);
    if (omega <= 0.0) throw SequenceError("calibrated Rabi frequency must be positive");
    return area_rad / omega;
}

void propagate_pulse(JointState& st, const Pulse& p, const RunConfig& cfg, const Sequence& seq,
                     const ShotNoise& shot, const std::vector<long>& spectator_ns, double t_start_ms,
                     double extra_detuning_hz, double duration_override_us) {
    const CouplingTables tables(cfg.mode(seq.active_mode).eta, st.n_max());
    const double dur = duration_override_us >= 0.0 ? duration_override_us : p.duration_us;
    apply_pulse(st, p, seq, cfg, shot, tables, spectator_ns, t_start_ms, extra_detuning_hz, dur);
    st.check_norm();
}

ShotOutcome run_shot(const Sequence& seq, const RunConfig& cfg, std::uint64_t master_seed,
                     std::uint64_t stream, std::uint64_t shot_index, double cutoff_us) {
    const CouplingTables tables(cfg.mode(seq.active_mode).eta, cfg.n_max);
    const ScanAxis axis = cutoff_us >= 0.0 ? ScanAxis::Cutoff : ScanAxis::Repeat;
    Walker w(seq, cfg, tables, axis, cutoff_us, cutoff_us, shot_seed(master_seed, stream, shot_index));
    w.drift_mgauss = stream_drift_mgauss(cfg, master_seed, stream);
    return w.run();
}

ScanResult run_scan(const Sequence& seq, const ScanDirective& scan, const RunConfig& cfg,
                    std::uint64_t master_seed, std::uint64_t stream, long shots_per_point,
                    int workers, Readout readout) {
    check_sequence(seq, cfg);
    if (shots_per_point <= 0) throw SequenceError("shots per point must be positive");

    ScanResult result;
    result.axis = scan.axis;
    result.readout = readout;
    const std::size_t n_points = scan.values.size();
    result.points.resize(n_points);
    if (n_points == 0) return result;

    const CouplingTables tables(cfg.mode(seq.active_mode).eta, cfg.n_max);
    const double drift = stream_drift_mgauss(cfg, master_seed, stream);

    auto run_point = [&](std::size_t i) {
        const double value = scan.values[i];
        const double cutoff = scan.axis == ScanAxis::Cutoff ? value : -1.0;
        long count = 0;
        double sum = 0.0, sum_sq = 0.0;
        for (long j = 0; j < shots_per_point; ++j) {
            const std::uint64_t shot_index = static_cast<std::uint64_t>(i) * shots_per_point + j;
            Walker w(seq, cfg, tables, scan.axis, value, cutoff,
                     shot_seed(master_seed, stream, shot_index));
            w.drift_mgauss = drift;
            const ShotOutcome out = w.run();
            if (readout == Readout::BrightFraction) {
                count += out.detected_d ? 1 : 0;
            } else {
                sum += out.mean_n;
                sum_sq += out.mean_n * out.mean_n;
            }
        }
        ScanPoint& pt = result.points[i];
        pt.value = value;
        pt.shots = shots_per_point;
        if (readout == Readout::BrightFraction) {
            const double p = static_cast<double>(count) / shots_per_point;
            pt.stat = p;
            pt.stderr_ = std::sqrt(p * (1.0 - p) / shots_per_point);
        } else {
            const double mean = sum / shots_per_point;
            pt.stat = mean;
            const double var = std::max(0.0, sum_sq / shots_per_point - mean * mean);
            pt.stderr_ = std::sqrt(var / shots_per_point);
        }
    };

    int n_workers = workers > 0 ? workers : 1;
    if (static_cast<std::size_t>(n_workers) > n_points) n_workers = static_cast<int>(n_points);
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < n_points; ++i) run_point(i);
    } else {
        // Points are independent and each one is computed identically no
        // matter which thread picks it up, so the output is byte-stable
        // across worker counts.
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int t = 0; t < n_workers; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n_points) return;
                    run_point(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return result;
}

}  // namespace ionsim
