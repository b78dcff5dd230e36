#include "ionspice/library.hpp"

#include "ionspice/error.hpp"

#include <stdexcept>

namespace ionspice {

namespace {

constexpr const char* kModel = "iontronic";

std::string input_letter(int k, int fan_in) {
    if (fan_in <= 26) return std::string(1, static_cast<char>('a' + k));
    return "in" + std::to_string(k + 1);
}

class Builder {
public:
    explicit Builder(const GateTopology& t) : t_(t) {
        t_.validate();
        g_.circuit.set_model(kModel, t.params);
    }

    explicit Builder(const DiodeParams& p) {
        g_.circuit.set_model(kModel, p);
    }

    std::string high() {
        if (g_.ports.supply_high.empty()) g_.ports.supply_high = rail("vdd", "Vdd", t_.supply_high);
        return g_.ports.supply_high;
    }
    std::string low() {
        if (g_.ports.supply_low.empty()) g_.ports.supply_low = rail("vss", "Vss", t_.supply_low);
        return g_.ports.supply_low;
    }

    std::string input(const std::string& name, const std::string& node) {
        const std::string src = "V" + node;
        g_.circuit.add(src, VoltageSource{node, kGround, DcStimulus{0.0}});
        g_.ports.inputs.push_back({name, node, src});
        return node;
    }

    void output(const std::string& name, const std::string& node) { g_.ports.outputs.push_back({name, node, {}}); }

    void diode(const std::string& name, const std::string& anode, const std::string& cathode) {
        g_.circuit.add(name, IontronicDiode{anode, cathode, kModel, {}});
    }

    // Elements D<tag>_<k>, pull D<tag>_p or R<tag>_p.
    void gate(GateKind kind, const std::string& tag, const std::vector<std::string>& ins, const std::string& out) {
        for (std::size_t k = 0; k < ins.size(); ++k) {
            const std::string name = "D" + tag + "_" + std::to_string(k + 1);
            if (kind == GateKind::Or) diode(name, ins[k], out);
            else diode(name, out, ins[k]);
        }
        const std::string rail = kind == GateKind::Or ? low() : high();
        if (const auto* r = std::get_if<ExplicitResistor>(&t_.pull)) {
            g_.circuit.add("R" + tag + "_p", Resistor{out, rail, r->ohms});
        } else {
            const bool reverse = std::holds_alternative<ReverseBiasedLoad>(t_.pull);
            const bool rail_is_anode = (kind == GateKind::Or) == reverse;
            if (rail_is_anode) diode("D" + tag + "_p", rail, out);
            else diode("D" + tag + "_p", out, rail);
        }
        ++g_.ports.gates;
    }

    Generated take() { return std::move(g_); }
    Circuit& circuit() { return g_.circuit; }

private:
    std::string rail(const std::string& node, const std::string& src, double volts) {
        if (volts == 0.0) return kGround;
        g_.circuit.add(src, VoltageSource{node, kGround, DcStimulus{volts}});
        return node;
    }

    GateTopology t_;
    Generated g_;
};

Generated single_gate(const GateTopology& t) {
    Builder b(t);
    std::vector<std::string> ins;
    for (int k = 0; k < t.fan_in; ++k) {
        const std::string n = input_letter(k, t.fan_in);
        ins.push_back(b.input(n, n));
    }
    b.gate(t.kind, "", ins, "y");
    b.output("y", "y");
    return b.take();
}

struct Rail {
    std::string t;
    std::string f;
    [[nodiscard]] Rail negated() const { return {f, t}; }
};

void add_dual_rail_and(Builder& b, const std::string& tag, const Rail& x, const Rail& y, const Rail& out) {
    b.gate(GateKind::And, tag + "t", {x.t, y.t}, out.t);
    b.gate(GateKind::Or, tag + "f", {x.f, y.f}, out.f);
}

GateTopology dual_rail_topology(GateTopology t) {
    if (t.fan_in != 2) throw DomainError("dual-rail AND requires fan_in = 2");
    t.kind = GateKind::And;
    return t;
}

}  // namespace

void GateTopology::validate() const {
    if (fan_in < 2) throw DomainError("fan_in must be >= 2");
    if (!(supply_high > supply_low)) throw DomainError("supply_high must exceed supply_low");
    if (const auto* r = std::get_if<ExplicitResistor>(&pull); r && !(r->ohms > 0.0)) {
        throw DomainError("pull resistor must be positive");
    }
    ionspice::validate(params, false);
}

int GateTopology::diodes_per_gate() const {
    return fan_in + (std::holds_alternative<ExplicitResistor>(pull) ? 0 : 1);
}

const Port& PortMap::input(const std::string& name) const {
    for (const auto& p : inputs) {
        if (p.name == name) return p;
    }
    throw DomainError("no input port '" + name + "'");
}

const Port& PortMap::output(const std::string& name) const {
    for (const auto& p : outputs) {
        if (p.name == name) return p;
    }
    throw DomainError("no output port '" + name + "'");
}

SourceValues PortMap::drive(std::span<const double> volts) const {
    if (volts.size() != inputs.size()) {
        throw DomainError("expected " + std::to_string(inputs.size()) + " input values, got " +
                          std::to_string(volts.size()));
    }
    SourceValues v;
    for (std::size_t k = 0; k < inputs.size(); ++k) v[inputs[k].source] = volts[k];
    return v;
}

Generated or_gate(GateTopology t) {
    if (t.kind != GateKind::Or) throw DomainError("or_gate needs an OR topology");
    return single_gate(t);
}

Generated and_gate(GateTopology t) {
    if (t.kind != GateKind::And) throw DomainError("and_gate needs an AND topology");
    return single_gate(t);
}

Generated dual_rail_and(GateTopology t) {
    Builder b(dual_rail_topology(t));
    const Rail a{b.input("A.t", "a_t"), b.input("A.f", "a_f")};
    const Rail c{b.input("B.t", "b_t"), b.input("B.f", "b_f")};
    add_dual_rail_and(b, "", a, c, {"y_t", "y_f"});
    b.output("Y.t", "y_t");
    b.output("Y.f", "y_f");
    return b.take();
}

Generated chain(int n, GateTopology t, ChainDrive drive) {
    if (n < 1) throw DomainError("chain length must be >= 1");
    Builder b(t);
    std::string prev = b.input("in", "in");
    for (int k = 1; k <= n; ++k) {
        const std::string out = "y" + std::to_string(k);
        std::vector<std::string> ins{prev};
        for (int j = 1; j < t.fan_in; ++j) ins.push_back(drive == ChainDrive::TieSecondInputLow ? b.low() : b.high());
        b.gate(t.kind, std::to_string(k), ins, out);
        b.output(out, out);
        prev = out;
    }
    return b.take();
}

Generated decoder_3to8(GateTopology t) {
    Builder b(dual_rail_topology(t));
    std::vector<Rail> in;
    for (const char* bit : {"a", "b", "c"}) {
        const std::string up(1, static_cast<char>(bit[0] - 'a' + 'A'));
        in.push_back({b.input(up + ".t", std::string(bit) + "_t"), b.input(up + ".f", std::string(bit) + "_f")});
    }
    std::vector<Rail> level1;
    for (int ab = 0; ab < 4; ++ab) {
        const Rail a = (ab & 2) ? in[0] : in[0].negated();
        const Rail c = (ab & 1) ? in[1] : in[1].negated();
        const std::string tag = "p" + std::to_string(ab);
        const Rail out{tag + "_t", tag + "_f"};
        add_dual_rail_and(b, tag, a, c, out);
        level1.push_back(out);
    }
    for (int code = 0; code < 8; ++code) {
        const Rail c = (code & 1) ? in[2] : in[2].negated();
        const std::string tag = "d" + std::to_string(code);
        const Rail out{tag + "_t", tag + "_f"};
        add_dual_rail_and(b, tag, level1[static_cast<std::size_t>(code >> 1)], c, out);
        b.output("D" + std::to_string(code), out.t);
    }
    return b.take();
}

Generated diode_bridge(double load_ohms, std::optional<double> smoothing, const DiodeParams& params,
                       const Stimulus& input) {
    if (!(load_ohms > 0.0)) throw DomainError("load resistance must be positive");
    if (smoothing && !(*smoothing > 0.0)) throw DomainError("smoothing capacitance must be positive");
    const std::string problem = stimulus_problem(input);
    if (!problem.empty()) throw DomainError(problem);
    validate(params, false);

    Builder b(params);
    Circuit& c = b.circuit();
    c.add("Vac", VoltageSource{"ac_p", "ac_n", input});
    b.diode("D1", "ac_p", "dc_p");
    b.diode("D2", "ac_n", "dc_p");
    b.diode("D3", kGround, "ac_p");
    b.diode("D4", kGround, "ac_n");
    c.add("Rload", Resistor{"dc_p", kGround, load_ohms});
    if (smoothing) c.add("Csmooth", Capacitor{"dc_p", kGround, *smoothing});
    Generated g = b.take();
    g.ports.inputs.push_back({"ac", "ac_p", "Vac"});
    g.ports.outputs.push_back({"dc", "dc_p", {}});
    return g;
}

std::vector<double> dual_rail_levels(const std::vector<bool>& bits, double high, double low) {
    std::vector<double> v;
    for (bool b : bits) {
        v.push_back(b ? high : low);
        v.push_back(b ? low : high);
    }
    return v;
}

}  // namespace ionspice
