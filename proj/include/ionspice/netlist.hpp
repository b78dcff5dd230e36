#pragma once

// Line-oriented, SPICE-flavoured netlist format.
//
//   * comment
//   .model <name> iontronic [r_e=<n>] [r_p_fwd=<n>] [r_p_rev=<n>] [c_p_fwd=<n>] [c_p_rev=<n>]
//   D<name> <anode> <cathode> <model> [<param>=<n> ...]   per-instance overrides
//   R<name> <n1> <n2> <ohms>
//   C<name> <n1> <n2> <farads>
//   V<name> <n+> <n-> DC <volts>
//   V<name> <n+> <n-> PWL ( <t> <v> [<t> <v> ...] )
//   V<name> <n+> <n-> SIN ( <offset> <amplitude> <hz> [<phase rad>] )
//   .end
//
// Numbers are plain SI values (scientific notation allowed, no "1k" style
// suffixes). Node "0" is ground. Keywords are case-insensitive; names are not.

#include "ionspice/circuit.hpp"
#include "ionspice/error.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ionspice {

struct Diagnostic {
    int line = 0;    // 1-based, 0 when unknown
    int column = 0;  // 1-based, 0 when unknown
    std::string message;

    [[nodiscard]] std::string to_string() const;
};

struct ParseResult {
    std::optional<Circuit> circuit;  // set iff diagnostics is empty
    std::vector<Diagnostic> diagnostics;

    [[nodiscard]] bool ok() const noexcept { return circuit.has_value(); }
};

class NetlistError : public Error {
public:
    explicit NetlistError(std::vector<Diagnostic> diags);
    [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const noexcept { return diags_; }

private:
    std::vector<Diagnostic> diags_;
};

[[nodiscard]] ParseResult parse_netlist(std::string_view text);

/// Throws NetlistError carrying every diagnostic.
[[nodiscard]] Circuit parse_netlist_or_throw(std::string_view text);

[[nodiscard]] std::string serialize_netlist(const Circuit& c);

/// One diagnostic per violated circuit invariant; empty iff valid.
[[nodiscard]] std::vector<Diagnostic> validate_circuit(const Circuit& c);

}  // namespace ionspice
