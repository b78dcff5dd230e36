#include "ionspice/engine.hpp"
#include "ionspice/error.hpp"
#include "ionspice/library.hpp"
#include "ionspice/metrics.hpp"
#include "ionspice/netlist.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ionspice;

namespace {

// Hand nodal analysis of a two-input gate with diode pull, each diode a
// linear resistor R_e + R_p(region) for a guessed region, iterated until the
// guesses agree with the resulting voltages.
double gate_oracle(GateKind kind, double a, double b) {
    const DiodeParams p;
    const double rf = p.r_e + p.r_p_fwd, rr = p.r_e + p.r_p_rev;
    const double rail = kind == GateKind::Or ? 0.0 : 1.0;
    double y = 0.5;
    for (int it = 0; it < 20; ++it) {
        // Conducting direction: OR inputs anode->y, AND inputs y->cathode.
        auto r_in = [&](double in) {
            const double vd = kind == GateKind::Or ? in - y : y - in;
            return vd >= 0 ? rf : rr;
        };
        // Pull diode (reverse-biased orientation).
        const double vd_pull = kind == GateKind::Or ? rail - y : y - rail;
        const double r_pull = vd_pull >= 0 ? rf : rr;
        const double ga = 1 / r_in(a), gb = 1 / r_in(b), gp = 1 / r_pull;
        y = (a * ga + b * gb + rail * gp) / (ga + gb + gp);
    }
    return y;
}

double solve_out(const Generated& g, std::vector<double> in, const std::string& out = "y") {
    return dc_operating_point(g.circuit, g.ports.drive(in)).signal("V(" + g.ports.output(out).node + ")");
}

}  // namespace

TEST(OrGate, StructureAndLevels) {
    const auto g = or_gate();
    EXPECT_EQ(g.circuit.diode_count(), 3u);
    EXPECT_EQ(g.ports.gates, 1u);
    EXPECT_TRUE(validate_circuit(g.circuit).empty());
    for (auto [a, b] : {std::pair{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}}) {
        const double y = solve_out(g, {a, b});
        EXPECT_NEAR(y, gate_oracle(GateKind::Or, a, b), 1e-9);
        EXPECT_EQ(y > 0.5, a > 0.5 || b > 0.5);
    }
    EXPECT_EQ(solve_out(g, {0, 0}), 0.0);
    // Ignoring the second input's leakage gives the plain divider.
    const DiodeParams p;
    const double divider = (p.r_e + p.r_p_rev) / (2 * p.r_e + p.r_p_rev + p.r_p_fwd);
    EXPECT_NEAR(divider, 0.983, 0.001);
    EXPECT_LT(solve_out(g, {1, 0}), divider);
}

TEST(AndGate, StructureAndLevels) {
    const auto g = and_gate();
    EXPECT_EQ(g.circuit.diode_count(), 3u);
    EXPECT_TRUE(validate_circuit(g.circuit).empty());
    for (auto [a, b] : {std::pair{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}}) {
        const double y = solve_out(g, {a, b});
        EXPECT_NEAR(y, gate_oracle(GateKind::And, a, b), 1e-9);
        EXPECT_EQ(y > 0.5, a > 0.5 && b > 0.5);
    }
    EXPECT_NEAR(solve_out(g, {1, 1}), 1.0, 1e-12);
}

TEST(Gates, FanInAndPullVariants) {
    GateTopology t;
    t.fan_in = 4;
    const auto g = or_gate(t);
    EXPECT_EQ(g.circuit.diode_count(), 5u);
    EXPECT_EQ(g.ports.inputs.size(), 4u);
    t.pull = ExplicitResistor{1e7};
    EXPECT_EQ(or_gate(t).circuit.diode_count(), 4u);
    t.pull = ForwardBiasedLoad{};
    t.fan_in = 2;
    EXPECT_NEAR(solve_out(or_gate(t), {1, 0}), 0.5, 0.05);
    t.fan_in = 1;
    EXPECT_THROW((void)or_gate(t), DomainError);
    GateTopology bad;
    bad.supply_high = 0.0;
    EXPECT_THROW((void)or_gate(bad), DomainError);
    EXPECT_THROW((void)and_gate(GateTopology{}), DomainError);
}

TEST(Gates, NonZeroSupplies) {
    GateTopology t;
    t.kind = GateKind::And;
    t.supply_high = 2.0;
    const auto g = and_gate(t);
    EXPECT_TRUE(validate_circuit(g.circuit).empty());
    EXPECT_EQ(g.ports.supply_high, "vdd");
    EXPECT_NEAR(solve_out(g, {2, 2}), 2.0, 1e-12);
    GateTopology o;
    o.supply_low = -1.0;
    const auto h = or_gate(o);
    EXPECT_EQ(h.ports.supply_low, "vss");
    EXPECT_NEAR(solve_out(h, {-1, -1}), -1.0, 1e-12);
}

TEST(Gates, Monotone) {
    for (auto kind : {GateKind::Or, GateKind::And}) {
        GateTopology t;
        t.kind = kind;
        const auto g = kind == GateKind::Or ? or_gate(t) : and_gate(t);
        for (double b : {0.0, 0.3, 1.0}) {
            double prev = -1.0;
            for (double a = 0.0; a <= 1.0001; a += 0.05) {
                const double y = solve_out(g, {a, b});
                EXPECT_GE(y, prev - 1e-12);
                prev = y;
            }
        }
    }
}

TEST(DualRailAnd, TruthTable) {
    const auto g = dual_rail_and();
    EXPECT_EQ(g.ports.gates, 2u);
    EXPECT_EQ(g.circuit.diode_count(), 6u);
    EXPECT_TRUE(validate_circuit(g.circuit).empty());
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const auto s = dc_operating_point(g.circuit, g.ports.drive(dual_rail_levels({a == 1, b == 1})));
            const double yt = s.signal("V(" + g.ports.output("Y.t").node + ")");
            const double yf = s.signal("V(" + g.ports.output("Y.f").node + ")");
            EXPECT_EQ(yt > 0.5, a && b);
            EXPECT_EQ(yf > 0.5, !(a && b));
        }
    }
}

TEST(Chain, CountsAndPorts) {
    for (int n : {1, 2, 5, 7}) {
        const auto g = chain(n);
        EXPECT_EQ(g.circuit.diode_count(), static_cast<std::size_t>(3 * n));
        EXPECT_EQ(g.ports.outputs.size(), static_cast<std::size_t>(n));
        EXPECT_TRUE(validate_circuit(g.circuit).empty());
    }
    GateTopology t;
    t.fan_in = 3;
    EXPECT_EQ(chain(4, t).circuit.diode_count(), 16u);
    EXPECT_THROW((void)chain(0), DomainError);
    const auto one = chain(1);
    const auto gate = or_gate();
    EXPECT_EQ(one.circuit.diode_count(), gate.circuit.diode_count());
    EXPECT_EQ(one.ports.inputs.size(), 1u);
    EXPECT_EQ(one.ports.outputs.size(), gate.ports.outputs.size());
}

TEST(Chain, FiveStagesStayHigh) {
    const auto g = chain(5);
    const auto s = dc_operating_point(g.circuit, g.ports.drive(std::vector{1.0}));
    double prev = 1.0;
    for (const auto& out : g.ports.outputs) {
        const double v = s.signal("V(" + out.node + ")");
        EXPECT_GT(v, 0.5) << out.name;
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Chain, TieHighAndAndChains) {
    GateTopology t;
    t.kind = GateKind::And;
    const auto g = chain(4, t, ChainDrive::TieSecondInputHigh);
    EXPECT_TRUE(validate_circuit(g.circuit).empty());
    const auto s = dc_operating_point(g.circuit, g.ports.drive(std::vector{0.0}));
    for (const auto& out : g.ports.outputs) EXPECT_LT(s.signal("V(" + out.node + ")"), 0.5);
}

TEST(Decoder, OneHotWithPositiveMargin) {
    const auto g = decoder_3to8();
    EXPECT_EQ(g.ports.gates, 24u);
    EXPECT_EQ(g.circuit.diode_count(), 72u);
    EXPECT_EQ(g.ports.inputs.size(), 6u);
    EXPECT_EQ(g.ports.outputs.size(), 8u);
    EXPECT_TRUE(validate_circuit(g.circuit).empty());
    for (int code = 0; code < 8; ++code) {
        const auto s = dc_operating_point(g.circuit,
                                          g.ports.drive(dual_rail_levels({(code & 4) != 0, (code & 2) != 0, (code & 1) != 0})));
        std::map<std::string, double> outs;
        for (const auto& o : g.ports.outputs) outs[o.name] = s.signal("V(" + o.node + ")");
        const std::string sel = "D" + std::to_string(code);
        EXPECT_GT(high_low_margin(outs, sel), 0.0) << code;
        EXPECT_GT(outs[sel], 0.5);
    }
}

TEST(Bridge, StructureAndSymmetry) {
    const auto g = diode_bridge(1e6, std::nullopt, {}, DcStimulus{0});
    EXPECT_EQ(g.circuit.diode_count(), 4u);
    EXPECT_TRUE(validate_circuit(g.circuit).empty());
    EXPECT_NE(diode_bridge(1e6, 1e-3).circuit.find("Csmooth"), nullptr);
    const double up = dc_operating_point(g.circuit, {{"Vac", 1.0}}).signal("V(dc_p)");
    const double down = dc_operating_point(g.circuit, {{"Vac", -1.0}}).signal("V(dc_p)");
    EXPECT_GT(up, 0.0);
    EXPECT_GT(down, 0.0);
    EXPECT_NEAR(up, down, 1e-12);
    EXPECT_THROW((void)diode_bridge(0.0), DomainError);
}

TEST(Bridge, FastDiodesRectify) {
    DiodeParams fast;
    fast.c_p_fwd *= 1e-6;
    fast.c_p_rev *= 1e-6;
    const auto g = diode_bridge(1e6, std::nullopt, fast, SineStimulus{0, 1, 0.1, 0});
    TransientOptions o;
    o.t_end = 30;
    o.dt = 0.01;
    o.force_dt = true;
    const auto tr = transient(g.circuit, o);
    for (double v : tr.signal("V(dc_p)")) EXPECT_GE(v, -1e-3);
    // Sign-flipped drive gives the same waveform half a period later.
    const auto h = diode_bridge(1e6, std::nullopt, fast, SineStimulus{0, -1, 0.1, 0});
    const auto tr2 = transient(h.circuit, o);
    const auto& a = tr.signal("V(dc_p)");
    const auto& b = tr2.signal("V(dc_p)");
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-6);
}
