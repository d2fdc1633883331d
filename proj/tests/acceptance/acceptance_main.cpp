// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here and nowhere else.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ionsim/config.hpp"
#include "ionsim/experiments.hpp"
#include "ionsim/output.hpp"
#include "ionsim/rng.hpp"
#include "ionsim/seqlang.hpp"
#include "ionsim/zeeman.hpp"

using namespace ionsim;

namespace {

constexpr double kPi = 3.141592653589793;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Check {
    bool ok = true;
    std::string log;

    void expect(bool cond, const std::string& what) {
        if (!ok && cond) return;  // keep the first failure prominent
        if (!cond) ok = false;
        if (!log.empty()) log += "; ";
        log += what + (cond ? "" : " [FAILED]");
    }
};

std::string num(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    return buf;
}

double meta_value(const ExperimentResult& res, const std::string& key) {
    return std::stod(res.meta.at(key));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RunConfig noiseless_config() {
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

// Electronic noise of criterion 4: the 240 Hz combined slow laser+field
// frequency noise, with the explicit 50 Hz field term off so it is not
// counted twice.
RunConfig criterion4_config() {
    RunConfig cfg;
    cfg.laser.sigma_shot_hz = 240.0;
    cfg.laser.lorentzian_hz = 0.0;
    cfg.bfield.amp_50hz_mgauss = 0.0;
    cfg.bfield.drift_sigma_mgauss = 0.0;
    return cfg;
}

// --- criterion 1: Zeeman susceptibilities -------------------------------

Outcome criterion1() {
    Check c;
    const ZeemanState s_lo{Level::S, -1}, s_hi{Level::S, +1};
    const ZeemanState d_lo{Level::D, -5}, d_hi{Level::D, +3}, d_m1{Level::D, -1};

    const double ground = susceptibility_khz_per_mgauss(s_lo, s_hi);
    const double d_pair = susceptibility_khz_per_mgauss(d_lo, d_hi);
    c.expect(std::abs(ground - 2.80) < 0.005, "S splitting " + num(ground, 6) + " ~ 2.80");
    c.expect(std::abs(d_pair - 6.72) < 0.005, "D -5/2 -> +3/2 " + num(d_pair, 6) + " ~ 6.72");

    const double dm0 = susceptibility_khz_per_mgauss(s_lo, d_m1);
    const double dm2 = susceptibility_khz_per_mgauss(s_lo, d_lo);
    // The g m differences are rationals over 10: 4/10 vs -20/10, so the
    // ratio is exactly 1:5; floating point reproduces it to roundoff.
    const long n0 = std::lround(10.0 * dm0 / kMuBOverH);
    const long n2 = std::lround(10.0 * dm2 / kMuBOverH);
    c.expect(n0 == 4 && n2 == -20 && n2 / n0 == -5 && n2 % n0 == 0,
             "dm0:dm2 = " + std::to_string(n0) + ":" + std::to_string(n2) + " = 1:5 exact");
    c.expect(std::abs(std::abs(dm2 / dm0) - 5.0) < 1e-12,
             "|ratio| = " + num(std::abs(dm2 / dm0), 16));
    return {c.ok, c.log};
}

// --- criterion 2: noiseless closed-form oracles --------------------------

Outcome criterion2() {
    Check c;
    const RunConfig cfg = noiseless_config();
    const double omega = cfg.calib.omega_carrier_rad_us;

    double worst_carrier = 0.0;
    for (double t = 0.0; t <= 30.0; t += 0.25) {
        Sequence seq;
        seq.prep_n = 0;
        Pulse p = make_pulse(DriveKind::Carrier, kPi, cfg);
        p.duration_us = t;
        seq.elements.push_back(p);
        const double got = run_shot(seq, cfg, 1, 0, 0).p_d;
        const double s = std::sin(omega * t / 2);
        worst_carrier = std::max(worst_carrier, std::abs(got - s * s));
    }
    c.expect(worst_carrier < 1e-10, "carrier flop max err " + num(worst_carrier, 3));

    const double det_hz = omega / (2 * kPi) * 1e6;  // detuning = Rabi frequency
    const double w = std::sqrt(2.0) * omega;
    double worst_det = 0.0;
    for (double t = 0.0; t <= 20.0; t += 0.25) {
        Sequence seq;
        seq.prep_n = 0;
        Pulse p = make_pulse(DriveKind::Carrier, kPi, cfg);
        p.duration_us = t;
        p.detuning_hz = det_hz;
        seq.elements.push_back(p);
        const double got = run_shot(seq, cfg, 1, 0, 0).p_d;
        const double s = std::sin(w * t / 2);
        worst_det = std::max(worst_det, std::abs(got - 0.5 * s * s));
    }
    c.expect(worst_det < 1e-10, "detuned flop max err " + num(worst_det, 3));

    Sequence bsb;
    bsb.prep_n = 0;
    bsb.elements.push_back(make_pulse(DriveKind::BlueSideband, kPi, cfg, Mode::Axial));
    const ShotOutcome b = run_shot(bsb, cfg, 1, 0, 0);
    c.expect(std::abs(b.p_d - 1.0) < 1e-12 && std::abs(b.mean_n - 1.0) < 1e-12,
             "BSB pi: |S,0> -> |D,1> (p_D=" + num(b.p_d, 17) + ", <n>=" + num(b.mean_n, 17) + ")");

    const ShotOutcome e0 = run_shot(make_echo_sequence(cfg, 0.0, 0.0), cfg, 1, 0, 0);
    const ShotOutcome epi = run_shot(make_echo_sequence(cfg, 0.0, kPi), cfg, 1, 0, 0);
    c.expect(e0.p_d < 1e-12 && e0.mean_n < 1e-12 && std::abs(epi.p_d - 1.0) < 1e-12,
             "echo T=0 returns |S,0> (p_D=" + num(e0.p_d, 3) + ", inverted port " +
                 num(epi.p_d, 17) + ")");
    return {c.ok, c.log};
}

// --- criterion 3: Rabi flop contrast ------------------------------------

Outcome criterion3() {
    Check c;
    RunConfig base;
    base.mode(Mode::Axial).eta = 0.068;
    base.mode(Mode::Radial).eta = 0.016;
    base.laser.intensity_sigma_rel = 0.03;
    base.shots_per_point = 100;
    const ExperimentResult res = run_figure("fig3", base);  // sets nbar_rad = 7
    const double contrast = meta_value(res, "contrast_10pi");
    c.expect(contrast >= 0.90 && contrast <= 0.99,
             "10 pi contrast " + num(contrast) + " in [0.90, 0.99]");
    return {c.ok, c.log};
}

// --- criterion 4: Ramsey contrast decay ---------------------------------

Outcome criterion4() {
    Check c;
    std::vector<double> taus, nus, tau_exps;
    int gauss_wins = 0;
    const std::vector<double> waits = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RunConfig cfg = criterion4_config();
        cfg.master_seed = seed;
        cfg.shots_per_point = 200;
        const RamseyContrastResult r = run_ramsey_contrast(cfg, waits);
        taus.push_back(r.decay.param("tau_gauss_ms"));
        nus.push_back(r.decay.param("nu_hz"));
        tau_exps.push_back(r.decay.param("tau_exp_ms"));
        if (r.decay.param("gauss_residual_ss") < r.decay.param("exp_residual_ss")) ++gauss_wins;
    }
    const double tau = median(taus), nu = median(nus), te = median(tau_exps);
    c.expect(tau >= 0.85 && tau <= 1.05, "median tau_gauss " + num(tau) + " ms in [0.85, 1.05]");
    c.expect(nu >= 150.0 && nu <= 190.0, "median nu " + num(nu) + " Hz in [150, 190]");
    c.expect(gauss_wins >= 19,
             "gaussian beats exponential " + std::to_string(gauss_wins) + "/20 (need >= 19)");
    c.expect(te >= 1.1 && te <= 1.8, "median tau_exp " + num(te) + " ms in [1.1, 1.8]");
    return {c.ok, c.log};
}

// --- criterion 5: line-triggered 50 Hz envelope --------------------------

Outcome criterion5() {
    Check c;
    const RunConfig base;  // fig2 preset sets amp = 1.2 mG, compensation 1
    const ExperimentResult res = run_figure("fig2", base);
    const double amp = meta_value(res, "amplitude_khz");
    const double ref = meta_value(res, "reference_khz");
    const double resid = meta_value(res, "residual_std_khz");

    double excursion = 0.0;
    for (const Table& t : res.tables) {
        if (t.name != "center_vs_delay") continue;
        for (const auto& row : t.rows) excursion = std::max(excursion, std::abs(row[1]));
    }
    c.expect(excursion > 0.0 && excursion <= 5.0,
             "max excursion " + num(excursion) + " kHz within +-5");
    c.expect(std::abs(amp - ref) <= 0.10 * ref,
             "sine amplitude " + num(amp) + " kHz within 10% of configured " + num(ref));
    // 50 Hz periodicity: the fixed-frequency sine explains the trace.
    c.expect(resid <= 0.2 * amp,
             "residual " + num(resid) + " kHz small against amplitude (50 Hz periodic)");
    return {c.ok, c.log};
}

// --- criterion 6: Raman drift, plain and compensated ----------------------

Outcome criterion6() {
    Check c;
    const RunConfig base;
    const ExperimentResult plain = run_figure("fig7a", base);
    const double amp = meta_value(plain, "amplitude_khz");
    c.expect(std::abs(amp - 3.8) <= 0.38, "uncompensated amplitude " + num(amp) + " kHz ~ 3.8");

    const ExperimentResult comp = run_figure("fig7b", base);
    const double amp_c = meta_value(comp, "amplitude_khz");
    const double resid = meta_value(comp, "residual_std_khz");
    c.expect(amp_c < 0.5, "compensated amplitude " + num(amp_c) + " kHz < 0.5");
    c.expect(resid >= 0.15 && resid <= 0.6,
             "residual scatter " + num(resid) + " kHz on the 0.3 kHz scale");
    return {c.ok, c.log};
}

// --- criterion 7: D-state lifetime through the fit pipeline ---------------

Outcome criterion7() {
    Check c;
    const RunConfig cfg;  // 1/1168 + 1.3296e-4 = (1011 ms)^-1
    const std::vector<double> waits = {25, 50, 75, 100, 125, 150};
    const LifetimeResult r = run_lifetime(cfg, waits, 25000);  // 1.5e5 shots
    const double tau = r.fit.param("tau_ms");
    const double sig = r.fit.sigma("tau_ms");
    c.expect(std::abs(tau - 1011.0) <= 3.0 * sig,
             "tau " + num(tau, 6) + " ms within 3 sigma (" + num(sig, 3) + ") of 1011");
    c.expect(sig >= 5.0 && sig <= 12.0, "sigma_fit " + num(sig, 3) + " ms of order 6-10");
    return {c.ok, c.log};
}

// --- criterion 8: heating-rate recovery -----------------------------------

Outcome criterion8() {
    Check c;
    const RunConfig cfg;
    const HeatingResult ax = run_heating(cfg, Mode::Axial, {}, 10000);
    const HeatingResult rad = run_heating(cfg, Mode::Radial, {}, 10000);
    const double s_ax = ax.fit.param("slope");
    const double s_rad = rad.fit.param("slope");
    const double want_ax = cfg.rates.heating_axial_per_ms;    // 0.0053/ms
    const double want_rad = cfg.rates.heating_radial_per_ms;  // 1/70 ms
    c.expect(std::abs(s_ax - want_ax) <= 0.10 * want_ax,
             "axial slope " + num(s_ax) + "/ms ~ " + num(want_ax) + " within 10%");
    c.expect(std::abs(s_rad - want_rad) <= 0.10 * want_rad,
             "radial slope " + num(s_rad) + "/ms ~ " + num(want_rad) + " within 10%");
    return {c.ok, c.log};
}

// --- criterion 9: motional echo -------------------------------------------

Outcome criterion9() {
    Check c;
    const ExperimentResult res = run_figure("fig10", criterion4_config());
    const double contrast = meta_value(res, "contrast_850us");
    const double tau = meta_value(res, "tau_exp_ms");
    c.expect(contrast >= 0.72 && contrast <= 0.88,
             "echo contrast at 850 us " + num(contrast) + " in [0.72, 0.88]");
    c.expect(tau >= 80.0 && tau <= 120.0,
             "heating-only 1/e time " + num(tau, 4) + " ms in [80, 120]");
    return {c.ok, c.log};
}

// --- criterion 10: parser round-trip and fuzz ------------------------------

Outcome criterion10() {
    Check c;
    const std::filesystem::path dir(IONSIM_SEQ_DIR);
    std::vector<std::string> sources;
    std::string all_names;
    int programs = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".ionseq") continue;
        std::ifstream in(entry.path());
        std::ostringstream os;
        os << in.rdbuf();
        sources.push_back(os.str());
        ++programs;

        const seq::Program p = seq::parse(sources.back());
        const seq::Program again = seq::parse(seq::pretty_print(p));
        if (!(p == again)) {
            c.expect(false, "round-trip failed for " + entry.path().filename().string());
        }
        for (const auto& b : p.blocks) all_names += b.name + " ";
    }
    c.expect(programs >= 10, std::to_string(programs) + " corpus programs round-trip");

    int covered = 0;
    for (const char* stem : {"rabi_flop", "ramsey_fringe", "ramsey_contrast", "line_trigger",
                             "raman_spectrum", "raman_vs_delay", "lifetime", "heating",
                             "motional_echo"}) {
        if (all_names.find(stem) != std::string::npos) ++covered;
    }
    c.expect(covered == 9, "all 9 experiment kinds covered (" + std::to_string(covered) + "/9)");

    const RunConfig cfg;
    const char alphabet[] =
        "experiment pulse wait scan prep measure shots trigger carrier blue red raman "
        "axial radial nbar phase detuning step repeat duration delay line shelve "
        "S-1/2 D-5/2 .. -> { } ( ) + - 0 1 9 . pi us ms s Hz kHz MHz deg rad \n # ;";
    Rng rng(1337);
    long crashes = 0;
    for (long i = 0; i < 100000; ++i) {
        std::string text;
        const int flavor = static_cast<int>(rng.next_u64() % 3);
        if (flavor == 0) {
            const int len = static_cast<int>(rng.next_u64() % 160);
            for (int j = 0; j < len; ++j) text += static_cast<char>(rng.next_u64() % 256);
        } else if (flavor == 1) {
            const int len = static_cast<int>(rng.next_u64() % 48);
            for (int j = 0; j < len; ++j) {
                text += alphabet[rng.next_u64() % (sizeof(alphabet) - 1)];
            }
        } else {
            text = sources[rng.next_u64() % sources.size()];
            const int edits = 1 + static_cast<int>(rng.next_u64() % 8);
            for (int j = 0; j < edits && !text.empty(); ++j) {
                const std::size_t pos = rng.next_u64() % text.size();
                switch (rng.next_u64() % 3) {
                    case 0: text[pos] = static_cast<char>(rng.next_u64() % 256); break;
                    case 1: text.erase(pos, 1); break;
                    default:
                        text.insert(pos, 1, alphabet[rng.next_u64() % (sizeof(alphabet) - 1)]);
                }
            }
        }
        try {
            const seq::Program p = seq::parse(text);
            if (!(seq::parse(seq::pretty_print(p)) == p)) {
                ++crashes;  // canonical-form violation counts as a defect
                continue;
            }
            try {
                seq::validate(p, cfg);
            } catch (const seq::SeqError&) {
            }
        } catch (const seq::SeqError&) {
        } catch (...) {
            ++crashes;
        }
    }
    c.expect(crashes == 0, "fuzz 100000 inputs, " + std::to_string(crashes) + " crashes");
    return {c.ok, c.log};
}

// --- criterion 11: worker-count determinism through the CLI ----------------

std::string read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome criterion11() {
    Check c;
    const std::filesystem::path base =
        std::filesystem::temp_directory_path() / "ionsim_acceptance_c11";
    const std::filesystem::path dir1 = base / "w1";
    const std::filesystem::path dir3 = base / "w3";
    std::filesystem::remove_all(base);
    std::filesystem::create_directories(dir1);
    std::filesystem::create_directories(dir3);

    const std::string cli = IONSIM_CLI_PATH;
    for (const auto& [dir, workers] : {std::pair{dir1, 1}, std::pair{dir3, 3}}) {
        const std::string cmd = "\"" + cli + "\" figure fig3 --seed 5 --workers " +
                                std::to_string(workers) + " --out \"" + dir.string() +
                                "\" > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        c.expect(rc == 0, "figure fig3 --workers " + std::to_string(workers) + " exits 0");
    }

    int compared = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir1)) {
        const std::string name = entry.path().filename().string();
        if (name.find("manifest") != std::string::npos) continue;  // records the command line
        const std::filesystem::path other = dir3 / name;
        if (!std::filesystem::exists(other)) {
            c.expect(false, name + " missing from the --workers 3 run");
            continue;
        }
        ++compared;
        if (read_file_bytes(entry.path()) != read_file_bytes(other)) {
            c.expect(false, name + " differs between worker counts");
        }
    }
    c.expect(compared >= 2, std::to_string(compared) + " data files byte-identical across workers");
    std::filesystem::remove_all(base);
    return {c.ok, c.log};
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* label;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries = {
        {1, "Zeeman susceptibilities", 10.0, criterion1},
        {2, "noiseless closed-form oracles", 1.0, criterion2},
        {3, "Rabi flop 10 pi contrast", 10.0, criterion3},
        {4, "Ramsey contrast decay", 60.0, criterion4},
        {5, "line-triggered 50 Hz envelope", 60.0, criterion5},
        {6, "Raman drift and compensation", 60.0, criterion6},
        {7, "lifetime fit pipeline", 60.0, criterion7},
        {8, "heating-rate recovery", 30.0, criterion8},
        {9, "motional echo coherence", 60.0, criterion9},
        {10, "parser round-trip and fuzz", 30.0, criterion10},
        {11, "worker-count determinism", 60.0, criterion11},
    };

    int failures = 0;
    for (const auto& e : entries) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = e.run();
        } catch (const std::exception& ex) {
            out = {false, std::string("exception: ") + ex.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > e.limit_s) {
            out.pass = false;
            out.detail += "; over time budget " + num(e.limit_s, 3) + " s";
        }
        if (!out.pass) ++failures;
        std::printf("%s  criterion %2d: %s (%s) [%.2f s]\n", out.pass ? "PASS" : "FAIL", e.id,
                    e.label, out.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/11 criteria passed\n", 11 - failures);
    return failures == 0 ? 0 : 1;
}
