#include "ionsim/seqlang.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "ionsim/output.hpp"

namespace ionsim {
namespace seq {

namespace {

constexpr double kPi = 3.14159265358979323846;

const std::set<std::string> kUnits = {"us", "ms", "s", "Hz", "kHz", "MHz", "deg", "rad", "pi"};
const std::set<std::string> kKeywords = {
    "experiment", "prep",   "pulse",   "wait",  "measure", "scan",   "shots",
    "trigger",    "line",   "delay",   "phase", "detuning", "step",  "nbar",
    "shelve",     "carrier", "blue",   "red",   "raman",   "axial",  "radial",
    "duration",   "repeat"};

bool word_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    bool gap = true;  // whitespace (or start of input) seen before next token

    auto push = [&](TokenKind kind, std::string t, int l, int c) {
        out.push_back(Token{kind, std::move(t), l, c, !gap});
        gap = false;
    };

    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            gap = true;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == ';') {
            ++i;
            ++col;
            gap = true;
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            gap = true;
            continue;
        }
        const int tl = line, tc = col;
        if (word_start(c)) {
            std::size_t j = i;
            while (j < text.size() && word_char(text[j])) ++j;
            std::string w = text.substr(i, j - i);
            col += static_cast<int>(j - i);
            i = j;
            if (kUnits.count(w)) {
                push(TokenKind::Unit, std::move(w), tl, tc);
            } else if (kKeywords.count(w)) {
                push(TokenKind::Keyword, std::move(w), tl, tc);
            } else {
                push(TokenKind::Identifier, std::move(w), tl, tc);
            }
            continue;
        }
        if (digit(c) || (c == '.' && i + 1 < text.size() && digit(text[i + 1]))) {
            std::size_t j = i;
            bool seen_dot = false;
            while (j < text.size()) {
                if (digit(text[j])) {
                    ++j;
                } else if (text[j] == '.' && !seen_dot && !(j + 1 < text.size() && text[j + 1] == '.')) {
                    seen_dot = true;
                    ++j;
                } else {
                    break;
                }
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
                if (k < text.size() && digit(text[k])) {
                    while (k < text.size() && digit(text[k])) ++k;
                    j = k;
                }
            }
            std::string num = text.substr(i, j - i);
            col += static_cast<int>(j - i);
            i = j;
            push(TokenKind::Number, std::move(num), tl, tc);
            continue;
        }
        if (c == '.' && i + 1 < text.size() && text[i + 1] == '.') {
            push(TokenKind::Punct, "..", tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
            push(TokenKind::Punct, "->", tl, tc);
            i += 2;
            col += 2;
            continue;
        }
        if (c == '{' || c == '}' || c == '(' || c == ')' || c == ',' || c == '/' || c == '+' ||
            c == '-' || c == '.' || c == ':') {
            push(TokenKind::Punct, std::string(1, c), tl, tc);
            ++i;
            ++col;
            continue;
        }
        throw SeqError(line, col, std::string("illegal character '") +
                                      (std::isprint(static_cast<unsigned char>(c))
                                           ? std::string(1, c)
                                           : "\\x" + std::to_string(static_cast<unsigned char>(c))) +
                                      "'");
    }
    out.push_back(Token{TokenKind::End, "", line, col, false});
    return out;
}

namespace {

// Decimal-exact unit scaling: the unit's power of ten is folded into the
// literal's decimal exponent before the one and only decimal-to-binary
// conversion, so 0.1ms and 100us produce identical doubles.
double decimal_with_shift(const std::string& raw, int shift, const Token& at) {
    std::string mantissa = raw;
    long exp10 = 0;
    const std::size_t e = raw.find_first_of("eE");
    if (e != std::string::npos) {
        mantissa = raw.substr(0, e);
        exp10 = std::strtol(raw.c_str() + e + 1, nullptr, 10);
    }
    const std::string merged = mantissa + "e" + std::to_string(exp10 + shift);
    const double v = std::strtod(merged.c_str(), nullptr);
    if (!std::isfinite(v)) throw SeqError(at.line, at.col, "number out of range");
    return v;
}

struct UnitInfo {
    Dimension dim;
    int shift;     // decimal exponent added (exact powers of ten)
    double scale;  // extra non-decimal factor (deg, pi)
};

UnitInfo unit_info(const std::string& u, const Token& at) {
    if (u == "us") return {Dimension::Time, 0, 1.0};
    if (u == "ms") return {Dimension::Time, 3, 1.0};
    if (u == "s") return {Dimension::Time, 6, 1.0};
    if (u == "Hz") return {Dimension::Frequency, 0, 1.0};
    if (u == "kHz") return {Dimension::Frequency, 3, 1.0};
    if (u == "MHz") return {Dimension::Frequency, 6, 1.0};
    if (u == "rad") return {Dimension::Angle, 0, 1.0};
    if (u == "deg") return {Dimension::Angle, 0, kPi / 180.0};
    if (u == "pi") return {Dimension::Angle, 0, kPi};
    throw SeqError(at.line, at.col, "unknown unit '" + u + "'");
}

const char* dim_name(Dimension d) {
    switch (d) {
        case Dimension::Time: return "duration";
        case Dimension::Frequency: return "frequency";
        case Dimension::Angle: return "angle";
        case Dimension::Pure: return "pure number";
    }
    return "value";
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Program parse_program() {
        Program p;
        while (!at_end()) {
            expect_keyword("experiment");
            p.blocks.push_back(parse_block());
        }
        if (p.blocks.empty()) {
            throw SeqError(peek().line, peek().col, "expected at least one experiment block");
        }
        return p;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == TokenKind::End; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw SeqError(peek().line, peek().col, msg);
    }

    bool is_keyword(const char* kw, std::size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Keyword && peek(ahead).text == kw;
    }
    bool is_punct(const char* p, std::size_t ahead = 0) const {
        return peek(ahead).kind == TokenKind::Punct && peek(ahead).text == p;
    }
    void expect_keyword(const char* kw) {
        if (!is_keyword(kw)) fail(std::string("expected '") + kw + "'");
        advance();
    }
    void expect_punct(const char* p) {
        if (!is_punct(p)) fail(std::string("expected '") + p + "'");
        advance();
    }

    // quantity := ['-'|'+'] (number [unit ['/' number]] | 'pi' ['/' number])
    Quantity parse_quantity(std::initializer_list<Dimension> allowed, const char* what) {
        double sign = 1.0;
        if (is_punct("-")) {
            advance();
            sign = -1.0;
        } else if (is_punct("+")) {
            advance();
        }

        double magnitude = 0.0;
        Dimension dim = Dimension::Pure;

        if (peek().kind == TokenKind::Unit && peek().text == "pi") {
            const Token t = advance();
            magnitude = kPi;
            dim = Dimension::Angle;
            magnitude = apply_pi_fraction(magnitude);
            (void)t;
        } else if (peek().kind == TokenKind::Number) {
            const Token num = advance();
            if (peek().kind == TokenKind::Unit && peek().glued) {
                const Token u = advance();
                const UnitInfo info = unit_info(u.text, u);
                dim = info.dim;
                magnitude = decimal_with_shift(num.text, info.shift, num) * info.scale;
                if (u.text == "pi") magnitude = apply_pi_fraction(magnitude);
            } else {
                magnitude = decimal_with_shift(num.text, 0, num);
                dim = Dimension::Pure;
            }
        } else {
            fail(std::string("expected ") + what);
        }

        bool ok = false;
        for (Dimension d : allowed) {
            if (d == dim) ok = true;
            // A bare number is acceptable where an angle is expected (radians).
            if (d == Dimension::Angle && dim == Dimension::Pure) {
                dim = Dimension::Angle;
                ok = true;
            }
        }
        if (!ok) {
            std::string exp;
            for (Dimension d : allowed) {
                if (!exp.empty()) exp += " or ";
                exp += dim_name(d);
            }
            fail("expected " + exp + ", got " + dim_name(dim));
        }
        return Quantity{dim, sign * magnitude};
    }

    double apply_pi_fraction(double magnitude) {
        if (is_punct("/") && peek().glued && peek(1).kind == TokenKind::Number && peek(1).glued) {
            advance();
            const Token den = advance();
            const double d = decimal_with_shift(den.text, 0, den);
            if (d == 0.0) throw SeqError(den.line, den.col, "zero denominator");
            return magnitude / d;
        }
        return magnitude;
    }

    long parse_positive_int(const char* what) {
        if (peek().kind != TokenKind::Number) fail(std::string("expected ") + what);
        const Token t = advance();
        const double v = decimal_with_shift(t.text, 0, t);
        if (v < 1.0 || v > 1e9 || v != std::floor(v)) {
            throw SeqError(t.line, t.col, std::string(what) + " must be a positive integer");
        }
        return static_cast<long>(v);
    }

    // level label := ('S'|'D') sign digits '/' '2', all glued, or bare letter.
    // Returns the letter; writes the half-integer m (doubled) to *m2_out.
    char parse_level_label(char expect_letter, int* m2_out) {
        if (peek().kind != TokenKind::Identifier || (peek().text != "S" && peek().text != "D")) {
            fail("expected a level label (S or D)");
        }
        const Token letter = advance();
        if (expect_letter != 0 && letter.text[0] != expect_letter) {
            throw SeqError(letter.line, letter.col,
                           std::string("expected level '") + expect_letter + "', got '" +
                               letter.text + "'");
        }
        *m2_out = letter.text == "S" ? -1 : -5;
        if ((is_punct("-") || is_punct("+")) && peek().glued && peek(1).kind == TokenKind::Number &&
            peek(1).glued) {
            const int sign = is_punct("-") ? -1 : 1;
            advance();
            const Token num = advance();
            if (!is_punct("/") || !peek().glued || peek(1).kind != TokenKind::Number ||
                !peek(1).glued) {
                fail("malformed level label, expected m/2 fraction");
            }
            advance();
            const Token den = advance();
            if (den.text != "2" || num.text.find('.') != std::string::npos) {
                throw SeqError(num.line, num.col, "level label m must be a half-integer");
            }
            const double nv = decimal_with_shift(num.text, 0, num);
            if (nv < 1.0 || nv > 5.0 || nv != std::floor(nv)) {
                throw SeqError(num.line, num.col, "level label m out of range");
            }
            *m2_out = sign * static_cast<int>(nv);
        }
        return letter.text[0];
    }

    char level_letter_for(DriveKind kind, bool is_to) const {
        if (kind == DriveKind::RamanGround) return 'S';
        return is_to ? 'D' : 'S';
    }

    PulseStmt parse_pulse() {
        PulseStmt s;
        if (is_keyword("carrier")) {
            s.kind = DriveKind::Carrier;
        } else if (is_keyword("blue")) {
            s.kind = DriveKind::BlueSideband;
        } else if (is_keyword("red")) {
            s.kind = DriveKind::RedSideband;
        } else if (is_keyword("raman")) {
            s.kind = DriveKind::RamanGround;
        } else {
            fail("expected drive kind (carrier, blue, red, raman)");
        }
        advance();

        if (peek().kind == TokenKind::Identifier && (peek().text == "S" || peek().text == "D")) {
            parse_level_label('S', &s.from_m2);
            expect_punct("->");
            parse_level_label(level_letter_for(s.kind, true), &s.to_m2);
            s.has_pair = true;
        }
        if (is_keyword("axial") || is_keyword("radial")) {
            s.has_mode = true;
            s.mode = is_keyword("axial") ? Mode::Axial : Mode::Radial;
            advance();
        }

        const Quantity q = parse_quantity({Dimension::Angle, Dimension::Time}, "pulse area or duration");
        if (q.dim == Dimension::Angle) {
            s.by_area = true;
            s.area_rad = q.value;
        } else {
            s.by_area = false;
            s.duration_us = q.value;
        }

        while (is_keyword("phase") || is_keyword("detuning")) {
            if (is_keyword("phase")) {
                advance();
                s.phase_rad = parse_quantity({Dimension::Angle}, "phase angle").value;
            } else {
                advance();
                s.detuning_hz = parse_quantity({Dimension::Frequency}, "detuning frequency").value;
            }
        }
        return s;
    }

    PrepStmt parse_prep() {
        PrepStmt s;
        int m2 = -1;
        const char letter = parse_level_label(0, &m2);
        s.level = ZeemanState{letter == 'S' ? Level::S : Level::D, m2};
        if (!zeeman_valid(s.level)) fail("invalid prep sublevel");
        while (is_keyword("nbar")) {
            advance();
            std::size_t mode_idx = 0;
            if (is_keyword("axial")) {
                mode_idx = 0;
            } else if (is_keyword("radial")) {
                mode_idx = 1;
            } else {
                fail("expected mode (axial or radial) after 'nbar'");
            }
            advance();
            const Quantity q = parse_quantity({Dimension::Pure}, "mean phonon number");
            if (q.value < 0.0) fail("nbar must be non-negative");
            s.nbar[mode_idx] = q.value;
        }
        return s;
    }

    MeasureStmt parse_measure() {
        MeasureStmt s;
        if (is_keyword("shelve")) {
            advance();
            s.has_shelve = true;
            s.shelve_from_m2 = -1;
            s.shelve_to_m2 = -5;
            s.shelve_area_rad = kPi;
            if (peek().kind == TokenKind::Identifier &&
                (peek().text == "S" || peek().text == "D")) {
                parse_level_label('S', &s.shelve_from_m2);
                expect_punct("->");
                parse_level_label('D', &s.shelve_to_m2);
            }
            if (peek().kind == TokenKind::Number || (peek().kind == TokenKind::Unit && peek().text == "pi")) {
                s.shelve_area_rad = parse_quantity({Dimension::Angle}, "shelve area").value;
            }
        }
        return s;
    }

    ScanStmt parse_scan() {
        ScanStmt s;
        Dimension dim = Dimension::Pure;
        if (is_keyword("detuning")) {
            s.axis = ScanAxis::Detuning;
            dim = Dimension::Frequency;
        } else if (is_keyword("duration")) {
            s.axis = ScanAxis::Duration;
            dim = Dimension::Time;
        } else if (is_keyword("wait")) {
            s.axis = ScanAxis::Wait;
            dim = Dimension::Time;
        } else if (is_keyword("delay")) {
            s.axis = ScanAxis::Delay;
            dim = Dimension::Time;
        } else if (is_keyword("repeat")) {
            s.axis = ScanAxis::Repeat;
        } else {
            fail("expected scan axis (detuning, duration, wait, delay, repeat)");
        }
        advance();

        if (s.axis == ScanAxis::Repeat) {
            s.is_range = false;
            s.count = parse_positive_int("repeat count");
            return s;
        }
        s.is_range = true;
        s.first = parse_quantity({dim}, "range start").value;
        expect_punct("..");
        s.last = parse_quantity({dim}, "range end").value;
        expect_keyword("step");
        s.step = parse_quantity({dim}, "range step").value;
        return s;
    }

    Block parse_block() {
        Block b;
        if (peek().kind != TokenKind::Identifier && peek().kind != TokenKind::Keyword &&
            peek().kind != TokenKind::Unit) {
            fail("expected experiment name");
        }
        b.name = advance().text;
        expect_punct("{");
        while (!is_punct("}")) {
            if (at_end()) fail("unterminated experiment block, expected '}'");
            const Token& t = peek();
            if (t.kind != TokenKind::Keyword) {
                fail("expected a clause keyword (prep, pulse, wait, measure, scan, shots, trigger)");
            }
            if (t.text == "prep") {
                if (b.prep) throw SeqError(t.line, t.col, "duplicate 'prep' clause");
                advance();
                b.prep = parse_prep();
            } else if (t.text == "pulse") {
                advance();
                b.elements.push_back(parse_pulse());
            } else if (t.text == "wait") {
                advance();
                WaitStmt w;
                w.duration_us = parse_quantity({Dimension::Time}, "wait duration").value;
                b.elements.push_back(w);
            } else if (t.text == "measure") {
                advance();
                b.elements.push_back(parse_measure());
            } else if (t.text == "scan") {
                if (b.scan) throw SeqError(t.line, t.col, "duplicate 'scan' clause");
                advance();
                b.scan = parse_scan();
            } else if (t.text == "shots") {
                if (b.shots) throw SeqError(t.line, t.col, "duplicate 'shots' clause");
                advance();
                b.shots = parse_positive_int("shot count");
            } else if (t.text == "trigger") {
                if (b.trigger_delay_us) throw SeqError(t.line, t.col, "duplicate 'trigger' clause");
                advance();
                expect_keyword("line");
                expect_keyword("delay");
                b.trigger_delay_us = parse_quantity({Dimension::Time}, "trigger delay").value;
            } else {
                fail("unexpected keyword '" + t.text + "' in experiment block");
            }
        }
        expect_punct("}");
        return b;
    }
};

}  // namespace

Program parse(const std::string& text) {
    Parser p(tokenize(text));
    return p.parse_program();
}

namespace {

std::string level_label(Level level, int m2) {
    std::string s(level == Level::S ? "S" : "D");
    s += m2 < 0 ? '-' : '+';
    s += std::to_string(std::abs(m2));
    s += "/2";
    return s;
}

std::string qty_us(double v) { return format_double(v) + "us"; }
std::string qty_hz(double v) { return format_double(v) + "Hz"; }
std::string qty_rad(double v) { return format_double(v) + "rad"; }

const char* kind_word(DriveKind k) {
    switch (k) {
        case DriveKind::Carrier: return "carrier";
        case DriveKind::BlueSideband: return "blue";
        case DriveKind::RedSideband: return "red";
        case DriveKind::RamanGround: return "raman";
    }
    return "carrier";
}

}  // namespace

std::string pretty_print(const Program& p) {
    std::ostringstream os;
    bool first = true;
    for (const Block& b : p.blocks) {
        if (!first) os << "\n";
        first = false;
        os << "experiment " << b.name << " {\n";
        if (b.prep) {
            os << "  prep " << level_label(b.prep->level.level, b.prep->level.m_times2);
            for (std::size_t m = 0; m < kNumModes; ++m) {
                if (b.prep->nbar[m] >= 0.0) {
                    os << " nbar " << (m == 0 ? "axial" : "radial") << " "
                       << format_double(b.prep->nbar[m]);
                }
            }
            os << "\n";
        }
        for (const Statement& st : b.elements) {
            if (const PulseStmt* ps = std::get_if<PulseStmt>(&st)) {
                os << "  pulse " << kind_word(ps->kind);
                if (ps->has_pair) {
                    const char to_level = ps->kind == DriveKind::RamanGround ? 'S' : 'D';
                    os << " " << level_label(Level::S, ps->from_m2) << " -> "
                       << level_label(to_level == 'S' ? Level::S : Level::D, ps->to_m2);
                }
                if (ps->has_mode) os << (ps->mode == Mode::Axial ? " axial" : " radial");
                os << " " << (ps->by_area ? qty_rad(ps->area_rad) : qty_us(ps->duration_us));
                if (ps->phase_rad != 0.0) os << " phase " << qty_rad(ps->phase_rad);
                if (ps->detuning_hz != 0.0) os << " detuning " << qty_hz(ps->detuning_hz);
                os << "\n";
            } else if (const WaitStmt* ws = std::get_if<WaitStmt>(&st)) {
                os << "  wait " << qty_us(ws->duration_us) << "\n";
            } else if (const MeasureStmt* ms = std::get_if<MeasureStmt>(&st)) {
                os << "  measure";
                if (ms->has_shelve) {
                    os << " shelve " << level_label(Level::S, ms->shelve_from_m2) << " -> "
                       << level_label(Level::D, ms->shelve_to_m2) << " "
                       << qty_rad(ms->shelve_area_rad);
                }
                os << "\n";
            }
        }
        if (b.scan) {
            os << "  scan ";
            switch (b.scan->axis) {
                case ScanAxis::Detuning:
                    os << "detuning " << qty_hz(b.scan->first) << ".." << qty_hz(b.scan->last)
                       << " step " << qty_hz(b.scan->step);
                    break;
                case ScanAxis::Duration:
                case ScanAxis::Wait:
                case ScanAxis::Delay:
                    os << (b.scan->axis == ScanAxis::Duration
                               ? "duration "
                               : (b.scan->axis == ScanAxis::Wait ? "wait " : "delay "))
                       << qty_us(b.scan->first) << ".." << qty_us(b.scan->last) << " step "
                       << qty_us(b.scan->step);
                    break;
                case ScanAxis::Repeat:
                    os << "repeat " << b.scan->count;
                    break;
                case ScanAxis::Cutoff:
                    os << "repeat 1";  // not expressible; placeholder never produced by parse
                    break;
            }
            os << "\n";
        }
        if (b.shots) os << "  shots " << *b.shots << "\n";
        if (b.trigger_delay_us) os << "  trigger line delay " << qty_us(*b.trigger_delay_us) << "\n";
        os << "}\n";
    }
    return os.str();
}

namespace {

[[noreturn]] void vfail(const Block& b, const std::string& msg) {
    throw SeqError(0, 0, "experiment '" + b.name + "': " + msg);
}

}  // namespace

std::vector<CompiledBlock> validate(const Program& p, const RunConfig& cfg) {
    std::vector<CompiledBlock> out;
    for (const Block& b : p.blocks) {
        CompiledBlock cb;
        cb.name = b.name;
        Sequence& seq = cb.sequence;
        seq.name = b.name;

        // Register resolution: Raman programs use the two ground sublevels,
        // optical ones a ground + D pair (defaults S(-1/2), D(-5/2)).
        bool any_raman = false, any_optical = false;
        for (const Statement& st : b.elements) {
            if (const PulseStmt* ps = std::get_if<PulseStmt>(&st)) {
                (ps->kind == DriveKind::RamanGround ? any_raman : any_optical) = true;
            }
        }
        if (any_raman && any_optical) {
            vfail(b, "cannot mix Raman and optical pulses in one experiment");
        }
        if (any_raman) {
            seq.raman = true;
            seq.slot_s = ZeemanState{Level::S, -1};
            seq.slot_d = ZeemanState{Level::S, +1};
        } else {
            seq.slot_s = ZeemanState{Level::S, -1};
            seq.slot_d = ZeemanState{Level::D, -5};
        }

        bool pair_set = false, mode_set = false;
        for (const Statement& st : b.elements) {
            const PulseStmt* ps = std::get_if<PulseStmt>(&st);
            if (!ps) continue;
            if (ps->has_pair) {
                const ZeemanState from{Level::S, ps->from_m2};
                const ZeemanState to{ps->kind == DriveKind::RamanGround ? Level::S : Level::D,
                                     ps->to_m2};
                if (!zeeman_valid(from) || !zeeman_valid(to)) {
                    vfail(b, "invalid Zeeman sublevel in pulse pair");
                }
                if (to.level == Level::D && std::abs(to.m_times2 - from.m_times2) > 4) {
                    vfail(b, "quadrupole selection rule forbids |delta m| > 2 for " +
                                 level_label(from.level, from.m_times2) + " -> " +
                                 level_label(to.level, to.m_times2));
                }
                if (pair_set && !(seq.slot_s == from && seq.slot_d == to)) {
                    vfail(b, "all pulses must address the same register pair");
                }
                seq.slot_s = from;
                seq.slot_d = to;
                pair_set = true;
            }
            if (ps->has_mode) {
                const bool sideband = ps->kind == DriveKind::BlueSideband ||
                                      ps->kind == DriveKind::RedSideband;
                if (sideband) {
                    if (mode_set && seq.active_mode != ps->mode) {
                        vfail(b, "sideband pulses must share one active mode");
                    }
                    seq.active_mode = ps->mode;
                    mode_set = true;
                }
            }
        }

        if (b.prep) {
            seq.prep_level = b.prep->level.level;
            for (std::size_t m = 0; m < kNumModes; ++m) seq.nbar_override[m] = b.prep->nbar[m];
        }
        if (b.trigger_delay_us) {
            seq.trigger_delay_ms = *b.trigger_delay_us * 1e-3;
            if (seq.trigger_delay_ms < 0.0 || seq.trigger_delay_ms >= 20.0) {
                vfail(b, "trigger delay must lie in [0, 20) ms");
            }
        }

        // Lower statements.
        bool measured = false;
        bool first_element = true;
        for (const Statement& st : b.elements) {
            if (measured) vfail(b, "measure must be the final element");
            if (const PulseStmt* ps = std::get_if<PulseStmt>(&st)) {
                Pulse pu;
                pu.kind = ps->kind;
                pu.mode = ps->has_mode ? ps->mode : seq.active_mode;
                pu.from = seq.slot_s;
                pu.to = seq.slot_d;
                pu.phase_rad = ps->phase_rad;
                pu.detuning_hz = ps->detuning_hz;
                pu.omega0_rad_us = bare_omega0_rad_us(ps->kind, seq.active_mode, cfg);
                if (ps->by_area) {
                    if (ps->area_rad < 0.0) vfail(b, "pulse area must be non-negative");
                    pu.duration_us = area_to_duration_us(ps->area_rad, ps->kind, cfg);
                } else {
                    if (ps->duration_us < 0.0) vfail(b, "pulse duration must be non-negative");
                    pu.duration_us = ps->duration_us;
                }
                if (first_element && ps->kind == DriveKind::RedSideband &&
                    seq.prep_level == Level::S) {
                    const double nbar = seq.nbar_override[static_cast<std::size_t>(seq.active_mode)] >= 0.0
                                            ? seq.nbar_override[static_cast<std::size_t>(seq.active_mode)]
                                            : cfg.mode(seq.active_mode).nbar;
                    if (nbar == 0.0) {
                        cb.warnings.push_back(
                            "red sideband as first pulse from |S, n=0> is dark");
                    }
                }
                seq.elements.push_back(pu);
            } else if (const WaitStmt* ws = std::get_if<WaitStmt>(&st)) {
                if (ws->duration_us < 0.0) vfail(b, "wait duration must be non-negative");
                seq.elements.push_back(WaitElem{ws->duration_us});
            } else if (const MeasureStmt* ms = std::get_if<MeasureStmt>(&st)) {
                MeasureElem me;
                if (ms->has_shelve) {
                    if (!seq.raman) vfail(b, "shelved readout requires a Raman experiment");
                    const ZeemanState from{Level::S, ms->shelve_from_m2};
                    const ZeemanState to{Level::D, ms->shelve_to_m2};
                    if (!zeeman_valid(from) || !zeeman_valid(to)) {
                        vfail(b, "invalid Zeeman sublevel in shelve pair");
                    }
                    if (std::abs(to.m_times2 - from.m_times2) > 4) {
                        vfail(b, "quadrupole selection rule forbids |delta m| > 2 for shelving");
                    }
                    if (!(from == seq.slot_s)) {
                        vfail(b, "shelving must start from the register's lower slot");
                    }
                    Pulse sh;
                    sh.kind = DriveKind::Carrier;
                    sh.mode = seq.active_mode;
                    sh.from = from;
                    sh.to = to;
                    sh.omega0_rad_us = cfg.calib.omega_shelve_rad_us /
                                       ground_matrix_element(DriveKind::Carrier, seq.active_mode, cfg);
                    sh.duration_us = ms->shelve_area_rad / cfg.calib.omega_shelve_rad_us;
                    me.shelve = sh;
                }
                seq.elements.push_back(me);
                measured = true;
            }
            first_element = false;
        }

        // Scan clause: exactly one per block, and its axis must act on
        // something the block contains.
        if (!b.scan) vfail(b, "missing 'scan' clause (exactly one is required)");
        const ScanStmt& sc = *b.scan;
        cb.scan.axis = sc.axis;
        bool has_pulse = false, has_wait = false;
        for (const Statement& st : b.elements) {
            if (std::holds_alternative<PulseStmt>(st)) has_pulse = true;
            if (std::holds_alternative<WaitStmt>(st)) has_wait = true;
        }
        switch (sc.axis) {
            case ScanAxis::Detuning:
            case ScanAxis::Duration:
                if (!has_pulse) vfail(b, "scan axis needs at least one pulse element");
                break;
            case ScanAxis::Wait:
                if (!has_wait) vfail(b, "scan axis needs at least one wait element");
                break;
            case ScanAxis::Delay:
                if (!b.trigger_delay_us) vfail(b, "delay scan needs a 'trigger line' clause");
                break;
            case ScanAxis::Repeat:
            case ScanAxis::Cutoff:
                break;
        }
        if (sc.is_range) {
            double first_v = sc.first, last_v = sc.last, step_v = sc.step;
            if (sc.axis == ScanAxis::Delay) {
                first_v *= 1e-3;
                last_v *= 1e-3;
                step_v *= 1e-3;
            }
            try {
                cb.scan.values = scan_grid(first_v, last_v, step_v);
            } catch (const SequenceError& e) {
                vfail(b, e.what());
            }
        } else {
            for (long i = 0; i < sc.count; ++i) cb.scan.values.push_back(static_cast<double>(i));
        }

        cb.shots = b.shots ? *b.shots : cfg.shots_per_point;

        try {
            check_sequence(seq, cfg);
        } catch (const SequenceError& e) {
            vfail(b, e.what());
        }
        out.push_back(std::move(cb));
    }
    return out;
}

}  // namespace seq
}  // namespace ionsim
