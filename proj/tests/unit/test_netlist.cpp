#include "ionspice/library.hpp"
#include "ionspice/netlist.hpp"

#include <gtest/gtest.h>

using namespace ionspice;

namespace {

const char* kModel = ".model m iontronic\n";

bool mentions(const std::vector<Diagnostic>& d, const std::string& text) {
    for (const auto& x : d) {
        if (x.message.find(text) != std::string::npos) return true;
    }
    return false;
}

}  // namespace

TEST(Parse, SingleDiode) {
    const auto r = parse_netlist(std::string(kModel) + "V1 a 0 DC 1\nD1 a 0 m\n");
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.circuit->diode_count(), 1u);
    EXPECT_EQ(r.circuit->elements().size(), 2u);
    EXPECT_TRUE(r.circuit->has_node("a"));
    EXPECT_TRUE(r.circuit->has_node("0"));
    EXPECT_EQ(r.circuit->nodes().size(), 2u);
    EXPECT_EQ(r.circuit->models().at("m"), DiodeParams{});
}

TEST(Parse, ModelKeysAndOverrides) {
    const auto c = parse_netlist_or_throw(
        ".MODEL fast iontronic c_p_fwd=3.74e-10 c_p_rev=9.93e-13\n"
        "V1 a 0 dc 1\nD1 a 0 fast r_p_rev=1e8\n.end\n");
    const auto& d = *c.find("D1")->as<IontronicDiode>();
    EXPECT_EQ(c.diode_params(d).c_p_fwd, 3.74e-10);
    EXPECT_EQ(c.diode_params(d).r_p_rev, 1e8);
    EXPECT_EQ(c.diode_params(d).r_e, DiodeParams{}.r_e);
}

TEST(Parse, ModelDeclaredAfterUse) {
    EXPECT_TRUE(parse_netlist("V1 a 0 DC 1\nD1 a 0 m\n.model m iontronic\n").ok());
}

TEST(Parse, Stimuli) {
    const auto c = parse_netlist_or_throw(std::string(kModel) +
                                          "V1 a 0 PWL(0 0 1 1 2 -1)\nV2 b 0 SIN(0 1 0.1)\nV3 c 0 0.5\n"
                                          "D1 a b m\nD2 b c m\nR1 c 0 1e3\nC1 a 0 1e-6\n");
    const auto& pwl = std::get<PwlStimulus>(c.find("V1")->as<VoltageSource>()->stimulus);
    ASSERT_EQ(pwl.points.size(), 3u);
    EXPECT_EQ(stimulus_value(pwl, 0.5), 0.5);
    EXPECT_EQ(stimulus_value(pwl, 5.0), -1.0);
    EXPECT_EQ(stimulus_value(pwl, -5.0), 0.0);
    const auto& sin = std::get<SineStimulus>(c.find("V2")->as<VoltageSource>()->stimulus);
    EXPECT_EQ(sin.frequency, 0.1);
    EXPECT_EQ(sin.phase, 0.0);
    EXPECT_EQ(std::get<DcStimulus>(c.find("V3")->as<VoltageSource>()->stimulus).volts, 0.5);
}

TEST(Parse, UndefinedModelNamesModelAndLine) {
    const auto r = parse_netlist("V1 a 0 DC 1\n* comment\nD1 a 0 m9\n");
    ASSERT_FALSE(r.ok());
    ASSERT_EQ(r.diagnostics.size(), 1u);
    EXPECT_EQ(r.diagnostics[0].line, 3);
    EXPECT_GT(r.diagnostics[0].column, 0);
    EXPECT_NE(r.diagnostics[0].message.find("m9"), std::string::npos);
}

TEST(Parse, LexicalAndKindErrorsAreLocated) {
    const auto r = parse_netlist(std::string(kModel) + "V1 a 0 DC 1k\nQ1 a 0 m\nR1 a 0\n");
    ASSERT_FALSE(r.ok());
    ASSERT_GE(r.diagnostics.size(), 3u);
    for (const auto& d : r.diagnostics) EXPECT_GT(d.line, 0) << d.to_string();
    EXPECT_TRUE(mentions(r.diagnostics, "1k"));
    EXPECT_TRUE(mentions(r.diagnostics, "unknown element kind"));
}

TEST(Parse, DuplicateNames) {
    const auto r = parse_netlist(std::string(kModel) + "V1 a 0 DC 1\nD1 a 0 m\nD1 a 0 m\n");
    ASSERT_FALSE(r.ok());
    EXPECT_TRUE(mentions(r.diagnostics, "duplicate element name 'D1'"));
    EXPECT_EQ(r.diagnostics[0].line, 4);
}

TEST(Parse, DanglingNode) {
    const auto r = parse_netlist(std::string(kModel) + "V1 a 0 DC 1\nD1 a b m\n");
    ASSERT_FALSE(r.ok());
    EXPECT_TRUE(mentions(r.diagnostics, "dangling node 'b'"));
}

TEST(Parse, Deterministic) {
    const std::string text = std::string(kModel) + "V1 a 0 DC 1\nD1 a b m\nR1 b 0 1e6\n";
    EXPECT_EQ(*parse_netlist(text).circuit, *parse_netlist(text).circuit);
    const auto c = *parse_netlist(text).circuit;
    EXPECT_EQ(c.elements()[0].name, "V1");
    EXPECT_EQ(c.elements()[2].name, "R1");
}

TEST(Serialize, EmptyCircuitIsHeaderOnly) {
    const std::string text = serialize_netlist(Circuit{});
    EXPECT_EQ(text, "* ionspice netlist\n.end\n");
    const auto back = parse_netlist(text);
    ASSERT_TRUE(back.ok());
    EXPECT_EQ(*back.circuit, Circuit{});
}

TEST(Serialize, RoundTripSingleDiode) {
    const auto c = parse_netlist_or_throw(".model m iontronic r_e=1.5e5\nV1 a 0 SIN(0.1 1 2 0.5)\nD1 a 0 m c_p_rev=1e-9\n");
    EXPECT_EQ(parse_netlist_or_throw(serialize_netlist(c)), c);
}

TEST(Serialize, RoundTripGenerators) {
    for (const auto& g : {or_gate(), and_gate(), dual_rail_and(), chain(3), decoder_3to8(),
                          diode_bridge(1e6, 1e-6)}) {
        const auto text = serialize_netlist(g.circuit);
        const auto r = parse_netlist(text);
        ASSERT_TRUE(r.ok()) << text;
        EXPECT_EQ(*r.circuit, g.circuit);
        EXPECT_EQ(serialize_netlist(*r.circuit), text);
    }
}

TEST(Validate, ValidOrGate) { EXPECT_TRUE(validate_circuit(or_gate().circuit).empty()); }

TEST(Validate, FloatingSubgraph) {
    Circuit c;
    c.set_model("m", {});
    c.add("V1", VoltageSource{"a", "0", DcStimulus{1}});
    c.add("D1", IontronicDiode{"a", "0", "m", {}});
    c.add("R1", Resistor{"x", "y", 1e3});
    c.add("R2", Resistor{"x", "y", 1e3});
    const auto d = validate_circuit(c);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_NE(d[0].message.find("floating"), std::string::npos);
}

TEST(Validate, ZeroResistance) {
    Circuit c;
    c.add("V1", VoltageSource{"a", "0", DcStimulus{1}});
    c.add("R1", Resistor{"a", "0", 0.0});
    const auto d = validate_circuit(c);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_NE(d[0].message.find("positive resistance"), std::string::npos);
}

TEST(Validate, DiodeShortAndBadStimulus) {
    Circuit c;
    c.set_model("m", {});
    c.add("V1", VoltageSource{"a", "0", PwlStimulus{{{1, 0}, {1, 1}}}});
    c.add("D1", IontronicDiode{"a", "a", "m", {}});
    c.add("R1", Resistor{"a", "0", 1.0});
    const auto d = validate_circuit(c);
    EXPECT_TRUE(mentions(d, "anode equal to cathode"));
    EXPECT_TRUE(mentions(d, "PWL"));
}

TEST(Validate, NonRectifyingModel) {
    Circuit c;
    c.set_model("m", {5.5e5, 1e6, 1e5, 1e-4, 1e-6});
    c.add("V1", VoltageSource{"a", "0", DcStimulus{1}});
    c.add("D1", IontronicDiode{"a", "0", "m", {}});
    EXPECT_FALSE(validate_circuit(c).empty());
}
