#pragma once

// Circuit data model: named nodes ("0" is ground), an ordered element list
// and a table of named diode models.

#include "ionspice/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ionspice {

inline constexpr const char* kGround = "0";

struct DcStimulus {
    double volts = 0.0;
    friend bool operator==(const DcStimulus&, const DcStimulus&) = default;
};

/// Piecewise-linear source: linear between breakpoints, first value held
/// before the first breakpoint, last value held after the last.
struct PwlStimulus {
    std::vector<std::pair<double, double>> points;  // (time s, volts)
    friend bool operator==(const PwlStimulus&, const PwlStimulus&) = default;
};

/// offset + amplitude * sin(2*pi*frequency*t + phase)
struct SineStimulus {
    double offset = 0.0;
    double amplitude = 0.0;
    double frequency = 1.0;  // Hz
    double phase = 0.0;      // rad
    friend bool operator==(const SineStimulus&, const SineStimulus&) = default;
};

using Stimulus = std::variant<DcStimulus, PwlStimulus, SineStimulus>;

[[nodiscard]] double stimulus_value(const Stimulus& s, double t);

/// Empty string when valid, otherwise a description of the violation.
[[nodiscard]] std::string stimulus_problem(const Stimulus& s);

/// Per-instance parameter overrides on top of a named model.
struct DiodeOverrides {
    std::optional<double> r_e;
    std::optional<double> r_p_fwd;
    std::optional<double> r_p_rev;
    std::optional<double> c_p_fwd;
    std::optional<double> c_p_rev;

    [[nodiscard]] bool empty() const noexcept {
        return !r_e && !r_p_fwd && !r_p_rev && !c_p_fwd && !c_p_rev;
    }
    [[nodiscard]] DiodeParams apply(DiodeParams p) const;
    /// Sets every field from `p`.
    static DiodeOverrides from(const DiodeParams& p);

    friend bool operator==(const DiodeOverrides&, const DiodeOverrides&) = default;
};

struct IontronicDiode {
    std::string anode;
    std::string cathode;
    std::string model;
    DiodeOverrides overrides;
    friend bool operator==(const IontronicDiode&, const IontronicDiode&) = default;
};

struct Resistor {
    std::string n1;
    std::string n2;
    double ohms = 0.0;
    friend bool operator==(const Resistor&, const Resistor&) = default;
};

struct Capacitor {
    std::string n1;
    std::string n2;
    double farads = 0.0;
    friend bool operator==(const Capacitor&, const Capacitor&) = default;
};

struct VoltageSource {
    std::string plus;
    std::string minus;
    Stimulus stimulus;
    friend bool operator==(const VoltageSource&, const VoltageSource&) = default;
};

using ElementKind = std::variant<IontronicDiode, Resistor, Capacitor, VoltageSource>;

struct Element {
    std::string name;
    ElementKind kind;

    /// Source location when the element came from a netlist (1-based; 0 = unknown).
    int line = 0;

    [[nodiscard]] std::vector<std::string> terminals() const;

    template <typename T>
    [[nodiscard]] const T* as() const noexcept { return std::get_if<T>(&kind); }
    template <typename T>
    [[nodiscard]] T* as() noexcept { return std::get_if<T>(&kind); }

    // Structural equality ignores the source location.
    friend bool operator==(const Element& a, const Element& b) { return a.name == b.name && a.kind == b.kind; }
};

class Circuit {
public:
    Circuit();

    /// Adds or replaces a model.
    void set_model(const std::string& name, const DiodeParams& p);

    /// Appends an element and registers its terminal nodes. Duplicate names
    /// are accepted here; validate() reports them.
    Element& add(Element e);
    Element& add(std::string name, ElementKind kind);

    [[nodiscard]] const std::vector<std::string>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<Element>& elements() const noexcept { return elements_; }
    [[nodiscard]] std::vector<Element>& elements() noexcept { return elements_; }
    [[nodiscard]] const std::map<std::string, DiodeParams>& models() const noexcept { return models_; }

    [[nodiscard]] bool has_node(const std::string& n) const;
    [[nodiscard]] const Element* find(const std::string& name) const;
    [[nodiscard]] Element* find(const std::string& name);

    /// Model parameters with the instance overrides applied. Throws
    /// DomainError for an undefined model.
    [[nodiscard]] DiodeParams diode_params(const IontronicDiode& d) const;

    [[nodiscard]] std::size_t diode_count() const;

    friend bool operator==(const Circuit&, const Circuit&) = default;

private:
    void register_node(const std::string& n);

    std::vector<std::string> nodes_;
    std::vector<Element> elements_;
    std::map<std::string, DiodeParams> models_;
};

}  // namespace ionspice
