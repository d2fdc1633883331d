#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ionsim/pulse.hpp"

namespace ionsim {
namespace seq {

// Error with a source position, thrown by tokenize/parse/validate. Anything
// else escaping the parser on arbitrary input is a bug (fuzzed).
class SeqError : public std::runtime_error {
public:
    SeqError(int line, int col, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line_(line),
          col_(col) {}
    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

enum class TokenKind { Keyword, Identifier, Number, Unit, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;   // raw spelling; for numbers the exact decimal literal
    int line = 1;
    int col = 1;
    bool glued = false;  // no whitespace between this token and the previous
};

std::vector<Token> tokenize(const std::string& text);

// Dimensioned literal resolved to canonical units (time us, frequency Hz,
// angle rad). Unit scaling is applied to the decimal exponent before the
// single decimal-to-binary conversion, so 0.1ms and 100us are bit-identical.
enum class Dimension { Time, Frequency, Angle, Pure };

struct Quantity {
    Dimension dim = Dimension::Pure;
    double value = 0.0;  // canonical units
    bool operator==(const Quantity&) const = default;
};

struct PrepStmt {
    ZeemanState level{Level::S, -1};
    double nbar[kNumModes] = {-1.0, -1.0};  // < 0: not specified
    bool operator==(const PrepStmt&) const = default;
};

struct PulseStmt {
    DriveKind kind = DriveKind::Carrier;
    bool has_pair = false;
    int from_m2 = 0, to_m2 = 0;  // doubled m for the explicit pair
    bool has_mode = false;
    Mode mode = Mode::Axial;
    bool by_area = false;
    double area_rad = 0.0;     // when by_area
    double duration_us = 0.0;  // otherwise
    double phase_rad = 0.0;
    double detuning_hz = 0.0;
    bool operator==(const PulseStmt&) const = default;
};

struct WaitStmt {
    double duration_us = 0.0;
    bool operator==(const WaitStmt&) const = default;
};

struct MeasureStmt {
    bool has_shelve = false;
    int shelve_from_m2 = 0, shelve_to_m2 = 0;
    double shelve_area_rad = 0.0;
    bool operator==(const MeasureStmt&) const = default;
};

using Statement = std::variant<PulseStmt, WaitStmt, MeasureStmt>;

struct ScanStmt {
    ScanAxis axis = ScanAxis::Repeat;
    bool is_range = false;
    double first = 0.0, last = 0.0, step = 0.0;  // canonical units
    long count = 1;                              // repeat
    bool operator==(const ScanStmt&) const = default;
};

struct Block {
    std::string name;
    std::optional<PrepStmt> prep;
    std::vector<Statement> elements;
    std::optional<ScanStmt> scan;
    std::optional<long> shots;
    std::optional<double> trigger_delay_us;  // canonical time units
    bool operator==(const Block&) const = default;
};

struct Program {
    std::vector<Block> blocks;
    bool operator==(const Program&) const = default;
};

Program parse(const std::string& text);

// Canonical form; parse(pretty_print(p)) == p exactly.
std::string pretty_print(const Program& p);

struct CompiledBlock {
    std::string name;
    Sequence sequence;
    ScanDirective scan;
    long shots = 0;
    std::vector<std::string> warnings;
};

// Semantic checking and lowering: selection rules, register consistency,
// area-to-duration conversion through the calibration, scan-grid
// construction. Throws SeqError (messages name the offending block).
std::vector<CompiledBlock> validate(const Program& p, const RunConfig& cfg);

}  // namespace seq
}  // namespace ionsim
