#include "ionspice/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace ionspice {

std::string Diagnostic::to_string() const {
    std::string s;
    if (line > 0) {
        s += "line " + std::to_string(line);
        if (column > 0) s += ", column " + std::to_string(column);
        s += ": ";
    }
    return s + message;
}

namespace {

std::string join_messages(const std::vector<Diagnostic>& d) {
    std::string s;
    for (const auto& x : d) {
        if (!s.empty()) s += "\n";
        s += x.to_string();
    }
    return s;
}

std::string lower(std::string_view s) {
    std::string r(s);
    std::transform(r.begin(), r.end(), r.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return r;
}

struct Token {
    std::string text;
    int column = 0;
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(' || c == ')' || c == '=') {
            out.push_back({std::string(1, c), static_cast<int>(i) + 1});
            ++i;
        } else {
            const std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '(' &&
                   line[i] != ')' && line[i] != '=') {
                ++i;
            }
            out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
        }
    }
    return out;
}

// Where each element's tokens sit in the source, for located diagnostics.
struct ElementSource {
    int line = 0;
    int name_column = 0;
    std::vector<int> terminal_columns;
    int model_column = 0;
    int value_column = 0;
};

// Validation shared by the parser (with source locations) and the public
// validator (element line only).
std::vector<Diagnostic> check_circuit(const Circuit& c, const std::vector<ElementSource>* src) {
    std::vector<Diagnostic> diags;
    const auto& els = c.elements();
    auto loc = [&](std::size_t idx, int column) {
        Diagnostic d;
        if (src && idx < src->size()) {
            d.line = (*src)[idx].line;
            d.column = column;
        } else if (idx < els.size()) {
            d.line = els[idx].line;
        }
        return d;
    };
    auto name_col = [&](std::size_t i) { return src && i < src->size() ? (*src)[i].name_column : 0; };
    auto term_col = [&](std::size_t i, std::size_t t) {
        return src && i < src->size() && t < (*src)[i].terminal_columns.size() ? (*src)[i].terminal_columns[t] : 0;
    };
    auto value_col = [&](std::size_t i) { return src && i < src->size() ? (*src)[i].value_column : 0; };

    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < els.size(); ++i) {
        const Element& e = els[i];
        if (auto [it, inserted] = seen.emplace(e.name, i); !inserted) {
            auto d = loc(i, name_col(i));
            d.message = "duplicate element name '" + e.name + "'";
            diags.push_back(d);
        }
        if (const auto* r = e.as<Resistor>()) {
            if (!(r->ohms > 0.0) || !std::isfinite(r->ohms)) {
                auto d = loc(i, value_col(i));
                d.message = "resistor '" + e.name + "' must have a positive resistance";
                diags.push_back(d);
            }
        } else if (const auto* cap = e.as<Capacitor>()) {
            if (!(cap->farads > 0.0) || !std::isfinite(cap->farads)) {
                auto d = loc(i, value_col(i));
                d.message = "capacitor '" + e.name + "' must have a positive capacitance";
                diags.push_back(d);
            }
        } else if (const auto* dio = e.as<IontronicDiode>()) {
            if (dio->anode == dio->cathode) {
                auto d = loc(i, term_col(i, 1));
                d.message = "diode '" + e.name + "' has anode equal to cathode";
                diags.push_back(d);
            }
            const auto it = c.models().find(dio->model);
            if (it == c.models().end()) {
                auto d = loc(i, src && i < src->size() ? (*src)[i].model_column : 0);
                d.message = "diode '" + e.name + "' references undefined model '" + dio->model + "'";
                diags.push_back(d);
            } else {
                try {
                    validate(dio->overrides.apply(it->second), false);
                } catch (const DomainError& ex) {
                    auto d = loc(i, name_col(i));
                    d.message = "diode '" + e.name + "': " + ex.what();
                    diags.push_back(d);
                }
            }
        } else if (const auto* v = e.as<VoltageSource>()) {
            if (v->plus == v->minus) {
                auto d = loc(i, term_col(i, 1));
                d.message = "voltage source '" + e.name + "' is shorted (both terminals on one node)";
                diags.push_back(d);
            }
            if (auto problem = stimulus_problem(v->stimulus); !problem.empty()) {
                auto d = loc(i, value_col(i));
                d.message = "voltage source '" + e.name + "': " + problem;
                diags.push_back(d);
            }
        }
    }

    for (const auto& [name, p] : c.models()) {
        try {
            validate(p, true);
        } catch (const DomainError& ex) {
            Diagnostic d;
            d.message = "model '" + name + "': " + ex.what();
            diags.push_back(d);
        }
    }

    if (els.empty()) return diags;

    // Connectivity over element terminals.
    const auto& nodes = c.nodes();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) index[nodes[i]] = i;
    std::vector<std::size_t> parent(nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<int> degree(nodes.size(), 0);
    // First (element, terminal) reference of each node, for locating diagnostics.
    std::vector<std::pair<std::size_t, std::size_t>> first_ref(nodes.size(), {els.size(), 0});
    for (std::size_t i = 0; i < els.size(); ++i) {
        const auto terms = els[i].terminals();
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto it = index.find(terms[t]);
            if (it == index.end()) {
                auto d = loc(i, term_col(i, t));
                d.message = "element '" + els[i].name + "' references unknown node '" + terms[t] + "'";
                diags.push_back(d);
                continue;
            }
            ++degree[it->second];
            if (first_ref[it->second].first == els.size()) first_ref[it->second] = {i, t};
        }
        if (terms.size() == 2 && index.count(terms[0]) && index.count(terms[1])) {
            parent[root(index[terms[0]])] = root(index[terms[1]]);
        }
    }
    const std::size_t g = index.at(kGround);
    if (degree[g] == 0) {
        Diagnostic d;
        d.message = "ground node '0' is not connected to any element";
        diags.push_back(d);
        return diags;
    }
    std::map<std::size_t, std::vector<std::size_t>> floating;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (root(n) != root(g)) floating[root(n)].push_back(n);
    }
    std::set<std::size_t> in_floating;
    for (const auto& [r, members] : floating) {
        std::string list;
        for (auto m : members) {
            in_floating.insert(m);
            list += (list.empty() ? "" : ", ") + nodes[m];
        }
        const auto [ei, ti] = first_ref[members.front()];
        auto d = loc(ei, term_col(ei, ti));
        d.message = "floating node(s) not connected to ground: " + list;
        diags.push_back(d);
    }
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        if (n == g || in_floating.count(n) || degree[n] >= 2) continue;
        const auto [ei, ti] = first_ref[n];
        auto d = loc(ei, term_col(ei, ti));
        d.message = "dangling node '" + nodes[n] + "' has only one connection";
        diags.push_back(d);
    }
    return diags;
}

class Parser {
public:
    ParseResult run(std::string_view text) {
        std::istringstream in{std::string(text)};
        std::string raw;
        int lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            line_ = lineno;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            const auto first = raw.find_first_not_of(" \t");
            if (first == std::string::npos || raw[first] == '*') continue;
            toks_ = tokenize(raw);
            pos_ = 0;
            if (toks_.front().text.front() == '.') {
                const std::string dir = lower(toks_.front().text);
                if (dir == ".end") break;
                if (dir == ".model") {
                    parse_model();
                } else {
                    error(toks_.front(), "unknown directive '" + toks_.front().text + "'");
                }
                continue;
            }
            parse_element();
        }
        // Model references resolve after the whole file is read.
        for (auto& [name, p] : pending_models_) circuit_.set_model(name, p);
        if (diags_.empty()) {
            auto more = check_circuit(circuit_, &sources_);
            diags_.insert(diags_.end(), more.begin(), more.end());
        }
        ParseResult r;
        r.diagnostics = std::move(diags_);
        if (r.diagnostics.empty()) r.circuit = std::move(circuit_);
        return r;
    }

private:
    void error(const Token& t, std::string msg) { diags_.push_back({line_, t.column, std::move(msg)}); }
    void error_eol(std::string msg) {
        const int col = toks_.empty() ? 1 : toks_.back().column + static_cast<int>(toks_.back().text.size());
        diags_.push_back({line_, col, std::move(msg)});
    }

    const Token* next() { return pos_ < toks_.size() ? &toks_[pos_++] : nullptr; }
    const Token* peek() const { return pos_ < toks_.size() ? &toks_[pos_] : nullptr; }

    std::optional<double> number(const char* what) {
        const Token* t = next();
        if (!t) {
            error_eol(std::string("expected ") + what);
            return std::nullopt;
        }
        auto v = parse_number(t->text);
        if (!v) {
            error(*t, "invalid number '" + t->text + "' for " + what + " (plain SI values only, no unit suffixes)");
        }
        return v;
    }

    std::optional<std::string> node(const char* what) {
        const Token* t = next();
        if (!t) {
            error_eol(std::string("expected ") + what);
            return std::nullopt;
        }
        if (t->text == "(" || t->text == ")" || t->text == "=") {
            error(*t, std::string("expected ") + what + ", found '" + t->text + "'");
            return std::nullopt;
        }
        return t->text;
    }

    bool expect(const char* s) {
        const Token* t = next();
        if (!t) {
            error_eol(std::string("expected '") + s + "'");
            return false;
        }
        if (t->text != s) {
            error(*t, std::string("expected '") + s + "', found '" + t->text + "'");
            return false;
        }
        return true;
    }

    bool at_end() {
        if (const Token* t = peek()) {
            error(*t, "unexpected token '" + t->text + "'");
            return false;
        }
        return true;
    }

    // key = number pairs until end of line
    bool key_values(const std::function<bool(const Token&, double)>& sink) {
        while (const Token* key = next()) {
            if (!expect("=")) return false;
            auto v = number(key->text.c_str());
            if (!v) return false;
            if (!sink(*key, *v)) return false;
        }
        return true;
    }

    void parse_model() {
        ++pos_;
        const Token* name = next();
        if (!name) {
            error_eol("expected model name");
            return;
        }
        const Token* type = next();
        if (!type) {
            error_eol("expected model type 'iontronic'");
            return;
        }
        if (lower(type->text) != "iontronic") {
            error(*type, "unsupported model type '" + type->text + "' (only 'iontronic')");
            return;
        }
        if (pending_models_.count(name->text)) {
            error(*name, "duplicate model '" + name->text + "'");
            return;
        }
        DiodeParams p;
        const bool ok = key_values([&](const Token& k, double v) {
            if (!set_param(p, k.text, v)) {
                error(k, "unknown model parameter '" + k.text + "'");
                return false;
            }
            return true;
        });
        if (ok) pending_models_[name->text] = p;
    }

    void parse_element() {
        const Token& name = toks_[pos_++];
        ElementSource src;
        src.line = line_;
        src.name_column = name.column;
        const char kind = static_cast<char>(std::toupper(static_cast<unsigned char>(name.text.front())));
        if (kind != 'D' && kind != 'R' && kind != 'C' && kind != 'V') {
            error(name, "unknown element kind '" + std::string(1, name.text.front()) + "' in '" + name.text + "'");
            return;
        }
        std::string terms[2];
        for (int i = 0; i < 2; ++i) {
            if (peek()) src.terminal_columns.push_back(peek()->column);
            auto n = node(i == 0 ? "first node" : "second node");
            if (!n) return;
            terms[i] = *n;
        }
        Element e;
        e.name = name.text;
        e.line = line_;
        if (kind == 'R' || kind == 'C') {
            if (peek()) src.value_column = peek()->column;
            auto v = number(kind == 'R' ? "resistance" : "capacitance");
            if (!v || !at_end()) return;
            if (kind == 'R') e.kind = Resistor{terms[0], terms[1], *v};
            else e.kind = Capacitor{terms[0], terms[1], *v};
        } else if (kind == 'D') {
            const Token* model = next();
            if (!model) {
                error_eol("expected model name");
                return;
            }
            src.model_column = model->column;
            IontronicDiode d{terms[0], terms[1], model->text, {}};
            const bool ok = key_values([&](const Token& k, double v) {
                std::optional<double>* slot = nullptr;
                if (k.text == "r_e") slot = &d.overrides.r_e;
                else if (k.text == "r_p_fwd") slot = &d.overrides.r_p_fwd;
                else if (k.text == "r_p_rev") slot = &d.overrides.r_p_rev;
                else if (k.text == "c_p_fwd") slot = &d.overrides.c_p_fwd;
                else if (k.text == "c_p_rev") slot = &d.overrides.c_p_rev;
                if (!slot) {
                    error(k, "unknown diode parameter '" + k.text + "'");
                    return false;
                }
                *slot = v;
                return true;
            });
            if (!ok) return;
            e.kind = std::move(d);
        } else {
            if (peek()) src.value_column = peek()->column;
            auto stim = stimulus();
            if (!stim || !at_end()) return;
            e.kind = VoltageSource{terms[0], terms[1], std::move(*stim)};
        }
        circuit_.add(std::move(e));
        sources_.push_back(std::move(src));
    }

    std::optional<Stimulus> stimulus() {
        const Token* t = next();
        if (!t) {
            error_eol("expected source value (DC, PWL or SIN)");
            return std::nullopt;
        }
        const std::string kw = lower(t->text);
        if (kw == "dc") {
            auto v = number("DC value");
            if (!v) return std::nullopt;
            return DcStimulus{*v};
        }
        if (kw == "pwl") {
            if (!expect("(")) return std::nullopt;
            PwlStimulus pwl;
            while (peek() && peek()->text != ")") {
                auto time = number("PWL time");
                if (!time) return std::nullopt;
                auto v = number("PWL value");
                if (!v) return std::nullopt;
                pwl.points.emplace_back(*time, *v);
            }
            if (!expect(")")) return std::nullopt;
            if (pwl.points.empty()) {
                error(*t, "PWL needs at least one (time value) pair");
                return std::nullopt;
            }
            return pwl;
        }
        if (kw == "sin") {
            if (!expect("(")) return std::nullopt;
            std::vector<double> args;
            while (peek() && peek()->text != ")") {
                auto v = number("SIN argument");
                if (!v) return std::nullopt;
                args.push_back(*v);
            }
            if (!expect(")")) return std::nullopt;
            if (args.size() < 3 || args.size() > 4) {
                error(*t, "SIN takes (offset amplitude frequency [phase])");
                return std::nullopt;
            }
            return SineStimulus{args[0], args[1], args[2], args.size() == 4 ? args[3] : 0.0};
        }
        if (auto v = parse_number(t->text)) return DcStimulus{*v};
        error(*t, "unknown source type '" + t->text + "'");
        return std::nullopt;
    }

    Circuit circuit_;
    std::map<std::string, DiodeParams> pending_models_;
    std::vector<ElementSource> sources_;
    std::vector<Diagnostic> diags_;
    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int line_ = 0;
};

}  // namespace

NetlistError::NetlistError(std::vector<Diagnostic> diags)
    : Error("netlist error:\n" + join_messages(diags)), diags_(std::move(diags)) {}

ParseResult parse_netlist(std::string_view text) {
    return Parser{}.run(text);
}

Circuit parse_netlist_or_throw(std::string_view text) {
    auto r = parse_netlist(text);
    if (!r.ok()) throw NetlistError(std::move(r.diagnostics));
    return std::move(*r.circuit);
}

std::vector<Diagnostic> validate_circuit(const Circuit& c) {
    return check_circuit(c, nullptr);
}

std::string serialize_netlist(const Circuit& c) {
    std::string out = "* ionspice netlist\n";
    for (const auto& [name, p] : c.models()) {
        out += ".model " + name + " iontronic r_e=" + format_number(p.r_e) + " r_p_fwd=" + format_number(p.r_p_fwd) +
               " r_p_rev=" + format_number(p.r_p_rev) + " c_p_fwd=" + format_number(p.c_p_fwd) +
               " c_p_rev=" + format_number(p.c_p_rev) + "\n";
    }
    for (const auto& e : c.elements()) {
        out += e.name;
        std::visit(
            [&](const auto& k) {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, IontronicDiode>) {
                    out += " " + k.anode + " " + k.cathode + " " + k.model;
                    const auto& o = k.overrides;
                    if (o.r_e) out += " r_e=" + format_number(*o.r_e);
                    if (o.r_p_fwd) out += " r_p_fwd=" + format_number(*o.r_p_fwd);
                    if (o.r_p_rev) out += " r_p_rev=" + format_number(*o.r_p_rev);
                    if (o.c_p_fwd) out += " c_p_fwd=" + format_number(*o.c_p_fwd);
                    if (o.c_p_rev) out += " c_p_rev=" + format_number(*o.c_p_rev);
                } else if constexpr (std::is_same_v<T, Resistor>) {
                    out += " " + k.n1 + " " + k.n2 + " " + format_number(k.ohms);
                } else if constexpr (std::is_same_v<T, Capacitor>) {
                    out += " " + k.n1 + " " + k.n2 + " " + format_number(k.farads);
                } else {
                    out += " " + k.plus + " " + k.minus + " ";
                    std::visit(
                        [&](const auto& s) {
                            using S = std::decay_t<decltype(s)>;
                            if constexpr (std::is_same_v<S, DcStimulus>) {
                                out += "DC " + format_number(s.volts);
                            } else if constexpr (std::is_same_v<S, PwlStimulus>) {
                                out += "PWL(";
                                for (std::size_t i = 0; i < s.points.size(); ++i) {
                                    if (i) out += " ";
                                    out += format_number(s.points[i].first) + " " + format_number(s.points[i].second);
                                }
                                out += ")";
                            } else {
                                out += "SIN(" + format_number(s.offset) + " " + format_number(s.amplitude) + " " +
                                       format_number(s.frequency) + " " + format_number(s.phase) + ")";
                            }
                        },
                        k.stimulus);
                }
            },
            e.kind);
        out += "\n";
    }
    out += ".end\n";
    return out;
}

}  // namespace ionspice
