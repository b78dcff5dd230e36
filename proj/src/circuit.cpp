#include "ionspice/circuit.hpp"

#include "ionspice/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ionspice {

double stimulus_value(const Stimulus& s, double t) {
    return std::visit(
        [t](const auto& st) -> double {
            using T = std::decay_t<decltype(st)>;
            if constexpr (std::is_same_v<T, DcStimulus>) {
                return st.volts;
            } else if constexpr (std::is_same_v<T, PwlStimulus>) {
                const auto& pts = st.points;
                if (pts.empty()) return 0.0;
                if (t <= pts.front().first) return pts.front().second;
                if (t >= pts.back().first) return pts.back().second;
                const auto it = std::upper_bound(pts.begin(), pts.end(), t,
                                                 [](double x, const auto& p) { return x < p.first; });
                const auto& [t1, v1] = *it;
                const auto& [t0, v0] = *(it - 1);
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            } else {
                return st.offset + st.amplitude * std::sin(2.0 * std::numbers::pi * st.frequency * t + st.phase);
            }
        },
        s);
}

std::string stimulus_problem(const Stimulus& s) {
    if (const auto* pwl = std::get_if<PwlStimulus>(&s)) {
        if (pwl->points.empty()) return "PWL source needs at least one breakpoint";
        for (std::size_t i = 1; i < pwl->points.size(); ++i) {
            if (!(pwl->points[i].first > pwl->points[i - 1].first)) {
                return "PWL breakpoint times must be strictly increasing";
            }
        }
    } else if (const auto* sine = std::get_if<SineStimulus>(&s)) {
        if (!(sine->frequency > 0.0)) return "SIN frequency must be positive";
    }
    return {};
}

DiodeParams DiodeOverrides::apply(DiodeParams p) const {
    if (r_e) p.r_e = *r_e;
    if (r_p_fwd) p.r_p_fwd = *r_p_fwd;
    if (r_p_rev) p.r_p_rev = *r_p_rev;
    if (c_p_fwd) p.c_p_fwd = *c_p_fwd;
    if (c_p_rev) p.c_p_rev = *c_p_rev;
    return p;
}

DiodeOverrides DiodeOverrides::from(const DiodeParams& p) {
    return {p.r_e, p.r_p_fwd, p.r_p_rev, p.c_p_fwd, p.c_p_rev};
}

std::vector<std::string> Element::terminals() const {
    return std::visit(
        [](const auto& k) -> std::vector<std::string> {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, IontronicDiode>) return {k.anode, k.cathode};
            else if constexpr (std::is_same_v<T, VoltageSource>) return {k.plus, k.minus};
            else return {k.n1, k.n2};
        },
        kind);
}

Circuit::Circuit() : nodes_{kGround} {}

void Circuit::set_model(const std::string& name, const DiodeParams& p) {
    models_[name] = p;
}

void Circuit::register_node(const std::string& n) {
    if (!has_node(n)) nodes_.push_back(n);
}

Element& Circuit::add(Element e) {
    for (const auto& t : e.terminals()) register_node(t);
    elements_.push_back(std::move(e));
    return elements_.back();
}

Element& Circuit::add(std::string name, ElementKind kind) {
    return add(Element{std::move(name), std::move(kind)});
}

bool Circuit::has_node(const std::string& n) const {
    return std::find(nodes_.begin(), nodes_.end(), n) != nodes_.end();
}

const Element* Circuit::find(const std::string& name) const {
    const auto it = std::find_if(elements_.begin(), elements_.end(), [&](const Element& e) { return e.name == name; });
    return it == elements_.end() ? nullptr : &*it;
}

Element* Circuit::find(const std::string& name) {
    const auto it = std::find_if(elements_.begin(), elements_.end(), [&](const Element& e) { return e.name == name; });
    return it == elements_.end() ? nullptr : &*it;
}

DiodeParams Circuit::diode_params(const IontronicDiode& d) const {
    const auto it = models_.find(d.model);
    if (it == models_.end()) {
        throw DomainError("undefined diode model '" + d.model + "'");
    }
    return d.overrides.apply(it->second);
}

std::size_t Circuit::diode_count() const {
    return static_cast<std::size_t>(std::count_if(elements_.begin(), elements_.end(),
                                                  [](const Element& e) { return e.as<IontronicDiode>() != nullptr; }));
}

}  // namespace ionspice
