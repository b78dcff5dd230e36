#pragma once

// Circuit generators: diode-logic OR/AND gates, dual-rail AND, gate chains,
// the 3-to-8 dual-rail decoder and the diode-bridge rectifier.
//
// Every generator returns a complete circuit: one model named "iontronic",
// a DC voltage source per logical input (value 0 V; drive it with
// SourceValues) and sources for any non-zero supply rail. A supply at 0 V is
// ground itself.
//
// Pull element orientation:
//   OR  gate pulls the output toward supply_low
//       ReverseBiasedLoad  anode = supply_low, cathode = output
//       ForwardBiasedLoad  anode = output,     cathode = supply_low
//   AND gate pulls the output toward supply_high
//       ReverseBiasedLoad  anode = output,     cathode = supply_high
//       ForwardBiasedLoad  anode = supply_high, cathode = output

#include "ionspice/circuit.hpp"
#include "ionspice/engine.hpp"

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ionspice {

enum class GateKind { Or, And };

struct ReverseBiasedLoad {
    friend bool operator==(const ReverseBiasedLoad&, const ReverseBiasedLoad&) = default;
};
struct ForwardBiasedLoad {
    friend bool operator==(const ForwardBiasedLoad&, const ForwardBiasedLoad&) = default;
};
struct ExplicitResistor {
    double ohms = 1e6;
    friend bool operator==(const ExplicitResistor&, const ExplicitResistor&) = default;
};

using PullOrientation = std::variant<ReverseBiasedLoad, ForwardBiasedLoad, ExplicitResistor>;

struct GateTopology {
    GateKind kind = GateKind::Or;
    int fan_in = 2;
    PullOrientation pull = ReverseBiasedLoad{};
    double supply_high = 1.0;
    double supply_low = 0.0;
    DiodeParams params{};

    /// Throws DomainError when fan_in < 2, supply_high <= supply_low or the
    /// explicit pull resistance is not positive.
    void validate() const;

    /// Diodes per gate: fan_in plus one for a diode pull.
    [[nodiscard]] int diodes_per_gate() const;
};

struct Port {
    std::string name;    ///< logical name, e.g. "a", "A.t", "D3"
    std::string node;
    std::string source;  ///< driving voltage source (inputs only)
};

struct PortMap {
    std::vector<Port> inputs;
    std::vector<Port> outputs;
    std::string supply_high;  ///< node name, empty when unused
    std::string supply_low;
    std::size_t gates = 0;    ///< physical gate count

    [[nodiscard]] const Port& input(const std::string& name) const;
    [[nodiscard]] const Port& output(const std::string& name) const;

    /// Source values assigning volts[k] to inputs[k].
    [[nodiscard]] SourceValues drive(std::span<const double> volts) const;
};

struct Generated {
    Circuit circuit;
    PortMap ports;
};

[[nodiscard]] Generated or_gate(GateTopology t = {});
[[nodiscard]] Generated and_gate(GateTopology t = {GateKind::And});

/// Y.t = AND(A.t, B.t), Y.f = OR(A.f, B.f). Inputs A.t, A.f, B.t, B.f;
/// outputs Y.t, Y.f. Two physical gates.
[[nodiscard]] Generated dual_rail_and(GateTopology t = {});

enum class ChainDrive { TieSecondInputLow, TieSecondInputHigh };

/// n gates of t.kind; gate 1's first input is the single port "in", gate
/// k+1's first input is gate k's output. Outputs y1..yn.
[[nodiscard]] Generated chain(int n, GateTopology t = {}, ChainDrive drive = ChainDrive::TieSecondInputLow);

/// Dual-rail inputs A, B, C (ports A.t, A.f, B.t, ...); outputs D0..D7 are
/// the true rails of the second level. Code index = 4A + 2B + C.
[[nodiscard]] Generated decoder_3to8(GateTopology t = {});

/// Full bridge: source Vac between ac_p and ac_n, load between dc_p and
/// ground, optional smoothing capacitor across the load. Output port "dc".
[[nodiscard]] Generated diode_bridge(double load_ohms, std::optional<double> smoothing = std::nullopt,
                                     const DiodeParams& params = {},
                                     const Stimulus& input = SineStimulus{0.0, 1.0, 1e-4, 0.0});

/// Rail voltages for dual-rail bits: (t, f) per bit, high = 1 rail.
[[nodiscard]] std::vector<double> dual_rail_levels(const std::vector<bool>& bits, double high = 1.0, double low = 0.0);

}  // namespace ionspice
