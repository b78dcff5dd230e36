#include "ionspice/cli.hpp"

#include "ionspice/calibrate.hpp"
#include "ionspice/csv.hpp"
#include "ionspice/engine.hpp"
#include "ionspice/error.hpp"
#include "ionspice/library.hpp"
#include "ionspice/metrics.hpp"
#include "ionspice/netlist.hpp"
#include "ionspice/stochastic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace ionspice::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path, std::istream& in) {
    std::ostringstream ss;
    if (path == "-") {
        ss << in.rdbuf();
        return ss.str();
    }
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path);
    ss << f.rdbuf();
    return ss.str();
}

struct Loaded {
    Circuit circuit;
    std::string name;
};

Loaded load_netlist(const std::string& path, std::istream& in) {
    const std::string text = read_text(path, in);
    auto r = parse_netlist(text);
    if (!r.ok()) throw NetlistError(r.diagnostics);
    return {std::move(*r.circuit), path == "-" ? "<stdin>" : path};
}

/// Output sink: a file when a path is given, the command's stdout otherwise.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw Error("cannot write " + path);
        }
        stream_ = path.empty() ? &fallback : &file_;
    }
    std::ostream& operator*() { return *stream_; }
    [[nodiscard]] bool to_file() const { return !path_.empty(); }

private:
    std::string path_;
    std::ofstream file_;
    std::ostream* stream_;
};

std::string plot_path(const std::string& csv, const std::string& requested) {
    if (!requested.empty()) {
        if (csv.empty()) throw UsageError("--plot needs --output");
        return requested;
    }
    if (csv.empty()) return {};
    return std::filesystem::path(csv).replace_extension(".gp").string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << text;
}

std::string series_plot(const std::string& csv, const std::string& xlabel, std::size_t columns, bool logx = false) {
    std::ostringstream s;
    s << "# gnuplot script\n"
      << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << (logx ? "set logscale x\n" : "") << "set xlabel '" << xlabel << "'\n"
      << "plot for [i=2:" << columns << "] '" << std::filesystem::path(csv).filename().string()
      << "' using 1:i with lines\n";
    return s.str();
}

SourceValues parse_sets(const std::vector<std::string>& sets) {
    SourceValues v;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        const auto num = eq == std::string::npos ? std::nullopt : parse_number(s.substr(eq + 1));
        if (!num || eq == 0) throw UsageError("--set expects SOURCE=VOLTS, got '" + s + "'");
        v[s.substr(0, eq)] = *num;
    }
    return v;
}

void check_sources(const Circuit& c, const SourceValues& v) {
    for (const auto& [name, value] : v) {
        const Element* e = c.find(name);
        if (!e || !e->as<VoltageSource>()) throw UsageError("no voltage source named '" + name + "'");
    }
}

std::vector<std::string> dc_signal_names(const DcSolution& s) {
    std::vector<std::string> names;
    for (const auto& [n, v] : s.node_voltages) names.push_back("V(" + n + ")");
    for (const auto& [n, v] : s.branch_currents) names.push_back("I(" + n + ")");
    for (const auto& [n, v] : s.diode_states) names.push_back("VC(" + n + ")");
    return names;
}

void print_warnings(const std::vector<std::string>& w, std::ostream& err) {
    for (const auto& s : w) err << "warning: " << s << '\n';
}

Integrator parse_integrator(const std::string& s) {
    if (s == "be") return Integrator::BackwardEuler;
    if (s == "trap") return Integrator::Trapezoidal;
    throw UsageError("--integrator must be be or trap");
}

DiodeParams load_params(const std::string& path, std::istream& in) {
    if (path.empty()) return {};
    return parse_params(read_text(path, in));
}

template <typename T>
T json_get(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

VariedResistance parse_vary(const std::string& s) {
    if (s == "r_p_rev") return VariedResistance::RpRev;
    if (s == "r_p_fwd") return VariedResistance::RpFwd;
    if (s == "r_e") return VariedResistance::Re;
    throw UsageError("vary must be r_p_rev, r_p_fwd or r_e");
}

DiodeParams params_from_json(const json& j) {
    DiodeParams p;
    if (!j.contains("params")) return p;
    for (const auto& [k, v] : j.at("params").items()) {
        if (!set_param(p, k, v.get<double>())) throw UsageError("unknown parameter '" + k + "'");
    }
    validate(p, false);
    return p;
}

struct Options {
    // shared
    std::string netlist;
    std::string output;
    std::string plot;
    std::vector<std::string> sets;
    std::vector<std::string> signals;
    // sweep
    std::string source;
    double from = 0.0, to = 0.0;
    int points = 0;
    // tran
    double t_end = 0.0, t_start = 0.0, dt = 0.0;
    std::string integrator = "be";
    bool zero_initial = false, force_dt = false;
    std::size_t record_every = 1;
    std::string fit_signal;
    std::optional<double> fit_event;
    // mc
    std::size_t runs = 500;
    std::uint64_t seed = 0;
    std::optional<double> sigma, sigma_fwd, sigma_rev;
    std::string variation_data;
    double variation_volts = 1.0;
    std::string summary;
    std::optional<double> threshold;
    // gen
    std::string gen_kind;
    int fan_in = 2;
    std::string pull = "reverse";
    double pull_ohms = 1e6;
    double v_high = 1.0, v_low = 0.0;
    int n = 5;
    std::string drive = "low";
    std::string chain_kind = "or";
    double load = 1e6;
    std::optional<double> smoothing;
    double freq = 1e-4, amplitude = 1.0, offset = 0.0;
    std::vector<double> inputs;
    std::string params;
    // study
    std::string study_kind, spec_file;
    // calibrate
    std::string iv, step, events;
    // synth
    std::string synth_kind, out_dir = ".";
    double noise = 0.0;
    int repeats = 1, diodes = 15;
};

int cmd_check(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const std::string text = read_text(o.netlist, in);
    const auto r = parse_netlist(text);
    if (!r.ok()) {
        for (const auto& d : r.diagnostics) err << (o.netlist == "-" ? "<stdin>" : o.netlist) << ": " << d.to_string() << '\n';
        return kAnalysisError;
    }
    out << "ok: " << r.circuit->elements().size() << " elements, " << r.circuit->nodes().size() << " nodes, "
        << r.circuit->diode_count() << " diodes\n";
    return kOk;
}

int cmd_dc(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto c = load_netlist(o.netlist, in).circuit;
    const auto sets = parse_sets(o.sets);
    check_sources(c, sets);
    const auto sol = dc_operating_point(c, sets);
    print_warnings(sol.warnings, err);
    Sink sink(o.output, out);
    *sink << "signal,value\n";
    const auto names = o.signals.empty() ? dc_signal_names(sol) : o.signals;
    for (const auto& n : names) *sink << n << ',' << csv_number(sol.signal(n)) << '\n';
    return kOk;
}

int cmd_sweep(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto c = load_netlist(o.netlist, in).circuit;
    if (o.points < 1) throw UsageError("--points must be >= 1");
    const auto sets = parse_sets(o.sets);
    check_sources(c, sets);
    check_sources(c, {{o.source, 0.0}});
    std::vector<double> values;
    for (int k = 0; k < o.points; ++k) {
        values.push_back(o.points == 1 ? o.from : o.from + (o.to - o.from) * k / (o.points - 1));
    }
    Simulator sim(c);
    const auto sols = sim.dc_sweep(o.source, values, sets);
    for (const auto& s : sols) print_warnings(s.warnings, err);
    const auto names = o.signals.empty() ? (sols.empty() ? std::vector<std::string>{} : dc_signal_names(sols.front()))
                                         : o.signals;
    const std::string gp = plot_path(o.output, o.plot);
    Sink sink(o.output, out);
    write_sweep_csv(*sink, o.source, values, sols, names);
    if (!gp.empty()) write_file(gp, series_plot(o.output, o.source + " (V)", names.size() + 1));
    return kOk;
}

int cmd_tran(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto c = load_netlist(o.netlist, in).circuit;
    TransientOptions t;
    t.t_start = o.t_start;
    t.t_end = o.t_end;
    t.dt = o.dt;
    t.integrator = parse_integrator(o.integrator);
    t.zero_initial = o.zero_initial;
    t.force_dt = o.force_dt;
    if (o.record_every < 1) throw UsageError("--record-every must be >= 1");
    t.record_every = o.record_every;
    t.observe = o.signals;
    if (!o.fit_signal.empty() && !t.observe.empty() &&
        std::find(t.observe.begin(), t.observe.end(), o.fit_signal) == t.observe.end()) {
        t.observe.push_back(o.fit_signal);
    }
    const auto tr = transient(c, t);
    const std::string gp = plot_path(o.output, o.plot);
    Sink sink(o.output, out);
    write_transient_csv(*sink, tr);
    if (!gp.empty()) write_file(gp, series_plot(o.output, "time (s)", tr.names.size() + 1));
    if (!o.fit_signal.empty()) {
        const double tau = extract_time_constant(tr, o.fit_signal, o.fit_event.value_or(o.t_start));
        (sink.to_file() ? out : err) << "tau," << csv_number(tau) << '\n';
    }
    return kOk;
}

int cmd_mc(const Options& o, std::istream& in, std::ostream& out, std::ostream&) {
    const auto c = load_netlist(o.netlist, in).circuit;
    if (o.signals.empty()) throw UsageError("--observe is required");
    if (o.runs < 1) throw UsageError("--runs must be >= 1");
    VariationSpec v;
    if (!o.variation_data.empty()) {
        if (o.sigma || o.sigma_fwd || o.sigma_rev) throw UsageError("--variation-data excludes the sigma flags");
        const auto table = read_csv_file(o.variation_data);
        const double r_e = c.models().empty() ? DiodeParams{}.r_e : c.models().begin()->second.r_e;
        v = variation_from_currents(table.column_values("i_on"), table.column_values("i_off"), o.variation_volts, r_e,
                                    o.seed, o.runs);
    } else {
        const double base = o.sigma.value_or(0.0);
        v = VariationSpec::centered(o.sigma_fwd.value_or(base), o.sigma_rev.value_or(base), o.seed, o.runs);
    }
    const auto sets = parse_sets(o.sets);
    check_sources(c, sets);
    Analysis analysis = DcAnalysis{sets};
    if (o.t_end > 0.0) {
        if (!sets.empty()) throw UsageError("--set applies to DC ensembles only");
        TransientOptions t;
        t.t_end = o.t_end;
        t.dt = o.dt;
        t.integrator = parse_integrator(o.integrator);
        t.zero_initial = o.zero_initial;
        t.force_dt = o.force_dt;
        t.observe = o.signals;
        analysis = TransientAnalysis{t};
    }
    MonteCarloOptions mc;
    if (o.threshold) {
        const double th = *o.threshold;
        mc.success = [th](const std::vector<double>& r) { return r[0] > th; };
    }
    const auto result = monte_carlo(c, v, analysis, observe_signals(o.signals), mc);
    const std::string gp = plot_path(o.output, o.plot);
    Sink sink(o.output, out);
    write_runs_csv(*sink, result);
    if (!gp.empty()) {
        std::ostringstream s;
        const std::size_t first = 3 + 2 * result.runs.front().sampled.size();
        s << "# gnuplot script\nset datafile separator ','\nset key autotitle columnhead\nset xlabel 'run'\n"
          << "plot for [i=" << first << ":" << first + o.signals.size() - 1 << "] '"
          << std::filesystem::path(o.output).filename().string() << "' using 1:i with points\n";
        write_file(gp, s.str());
    }
    if (!o.summary.empty()) {
        std::ofstream f(o.summary, std::ios::binary);
        if (!f) throw Error("cannot write " + o.summary);
        write_summary_json(f, result);
    }
    return kOk;
}

PullOrientation parse_pull(const Options& o) {
    if (o.pull == "reverse") return ReverseBiasedLoad{};
    if (o.pull == "forward") return ForwardBiasedLoad{};
    if (o.pull == "resistor") return ExplicitResistor{o.pull_ohms};
    throw UsageError("--pull must be reverse, forward or resistor");
}

int cmd_gen(const Options& o, std::istream& in, std::ostream& out, std::ostream&) {
    GateTopology t;
    t.fan_in = o.fan_in;
    t.pull = parse_pull(o);
    t.supply_high = o.v_high;
    t.supply_low = o.v_low;
    t.params = load_params(o.params, in);
    Generated g;
    if (o.gen_kind == "or") {
        g = or_gate(t);
    } else if (o.gen_kind == "and") {
        t.kind = GateKind::And;
        g = and_gate(t);
    } else if (o.gen_kind == "chain") {
        if (o.chain_kind != "or" && o.chain_kind != "and") throw UsageError("--gate must be or or and");
        if (o.drive != "low" && o.drive != "high") throw UsageError("--drive must be low or high");
        t.kind = o.chain_kind == "or" ? GateKind::Or : GateKind::And;
        g = chain(o.n, t, o.drive == "low" ? ChainDrive::TieSecondInputLow : ChainDrive::TieSecondInputHigh);
    } else if (o.gen_kind == "dual-rail-and") {
        g = dual_rail_and(t);
    } else if (o.gen_kind == "decoder") {
        g = decoder_3to8(t);
    } else if (o.gen_kind == "bridge") {
        g = diode_bridge(o.load, o.smoothing, t.params, SineStimulus{o.offset, o.amplitude, o.freq, 0.0});
    } else {
        throw UsageError("unknown generator '" + o.gen_kind + "'");
    }
    if (!o.inputs.empty()) {
        if (o.gen_kind == "bridge") throw UsageError("--inputs does not apply to the bridge");
        const auto values = g.ports.drive(o.inputs);
        for (const auto& [src, volts] : values) g.circuit.find(src)->as<VoltageSource>()->stimulus = DcStimulus{volts};
    }
    Sink sink(o.output, out);
    *sink << serialize_netlist(g.circuit);
    return kOk;
}

int cmd_study(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    json j;
    try {
        j = json::parse(read_text(o.spec_file, in));
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid study spec: ") + e.what());
    }
    const std::string gp = plot_path(o.output, o.plot);
    const std::string csv_name = o.output.empty() ? "study.csv" : std::filesystem::path(o.output).filename().string();
    try {
        if (o.study_kind == "chain") {
            ChainStudySpec spec;
            spec.rr_values = j.at("rr_values").get<std::vector<double>>();
            spec.vary = parse_vary(json_get<std::string>(j, "vary", "r_p_rev"));
            spec.threshold = json_get(j, "threshold", 0.5);
            spec.confidence = json_get(j, "confidence", 0.99);
            spec.certification_level = json_get(j, "certification_level", 0.95);
            spec.max_n = json_get(j, "max_n", 34);
            spec.topology.supply_high = json_get(j, "supply_high", 1.0);
            spec.topology.supply_low = json_get(j, "supply_low", 0.0);
            const double sf = json_get(j, "sigma_log_fwd", 0.0);
            const double sr = json_get(j, "sigma_log_rev", 0.0);
            const auto scales = json_get<std::vector<double>>(j, "sigma_scales", {1.0});
            const auto seed = json_get<std::uint64_t>(j, "seed", 0);
            const auto runs = json_get<std::size_t>(j, "n_runs", 500);
            const DiodeParams base = params_from_json(j);
            std::vector<std::pair<std::string, std::vector<ChainStudyPoint>>> curves;
            std::vector<std::string> labels;
            for (double s : scales) {
                spec.variation = VariationSpec::centered(sf * s, sr * s, seed, runs);
                labels.push_back("sigma_x" + csv_number(s));
                curves.emplace_back(labels.back(), max_chain_length(spec, base));
            }
            Sink sink(o.output, out);
            write_chain_study_csv(*sink, curves);
            if (!gp.empty()) {
                std::ostringstream s;
                write_chain_plot(s, csv_name, labels);
                write_file(gp, s.str());
            }
        } else if (o.study_kind == "freq") {
            FrequencyStudySpec spec;
            spec.cp_multipliers = j.at("cp_multipliers").get<std::vector<double>>();
            spec.amplitude = json_get(j, "amplitude", spec.amplitude);
            spec.offset = json_get(j, "offset", spec.offset);
            spec.load_ohms = json_get(j, "load_ohms", spec.load_ohms);
            spec.efficiency = json_get(j, "efficiency", spec.efficiency);
            spec.steps_per_period = json_get(j, "steps_per_period", spec.steps_per_period);
            spec.periods = json_get(j, "periods", spec.periods);
            spec.measure_periods = json_get(j, "measure_periods", spec.measure_periods);
            spec.bisection_steps = json_get(j, "bisection_steps", spec.bisection_steps);
            const auto points = max_frequency(spec, params_from_json(j));
            Sink sink(o.output, out);
            write_frequency_study_csv(*sink, points);
            if (!gp.empty()) {
                std::ostringstream s;
                write_frequency_plot(s, csv_name);
                write_file(gp, s.str());
            }
        } else {
            throw UsageError("study kind must be chain or freq");
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("invalid study spec: ") + e.what());
    }
    (void)err;
    return kOk;
}

int cmd_calibrate(const Options& o, std::istream&, std::ostream& out, std::ostream&) {
    const auto iv = load_iv(o.iv);
    const auto step = load_step(o.step, o.events);
    const auto rep = calibrate_report(iv, step);
    Sink sink(o.output, out);
    *sink << "# rtss_fwd=" << format_number(rep.rtss.rtss_fwd) << " rtss_rev=" << format_number(rep.rtss.rtss_rev)
          << '\n'
          << "# r_e from " << rep.r_e.count << " event(s), spread " << format_number(rep.r_e.spread) << '\n'
          << "# tau_fwd=" << format_number(rep.tau_fwd.mean) << " from " << rep.tau_fwd.count << " event(s), spread "
          << format_number(rep.tau_fwd.spread) << '\n'
          << "# tau_rev=" << format_number(rep.tau_rev.mean) << " from " << rep.tau_rev.count << " event(s), spread "
          << format_number(rep.tau_rev.spread) << '\n'
          << format_params(rep.params);
    return kOk;
}

int cmd_synth(const Options& o, std::istream& in, std::ostream& out, std::ostream&) {
    const DiodeParams p = load_params(o.params, in);
    const SyntheticNoise noise{o.noise, o.seed};
    if (o.synth_kind == "calibration") {
        const std::filesystem::path dir(o.out_dir);
        std::filesystem::create_directories(dir);
        save_iv((dir / "iv.csv").string(), synthetic_iv(p, 41, 1.0, noise));
        StepSchedule sc;
        sc.repeats = o.repeats;
        SyntheticNoise step_noise = noise;
        step_noise.seed = noise.seed + 1;
        save_step((dir / "step.csv").string(), (dir / "events.csv").string(), synthetic_step(p, sc, step_noise));
        out << "wrote " << (dir / "iv.csv").string() << ", " << (dir / "step.csv").string() << ", "
            << (dir / "events.csv").string() << '\n';
    } else if (o.synth_kind == "variation") {
        if (o.diodes < 2) throw UsageError("--diodes must be >= 2");
        const auto v = VariationSpec::centered(o.sigma_fwd.value_or(o.sigma.value_or(0.0)),
                                               o.sigma_rev.value_or(o.sigma.value_or(0.0)), o.seed, 1);
        Sink sink(o.output, out);
        *sink << "diode,i_on,i_off\n";
        for (int k = 0; k < o.diodes; ++k) {
            Rng rng = run_stream(o.seed, static_cast<std::uint64_t>(k));
            const DiodeParams d = sample_diode(p, v, rng);
            *sink << k + 1 << ',' << csv_number(o.variation_volts / (d.r_e + d.r_p_fwd)) << ','
                  << csv_number(-o.variation_volts / (d.r_e + d.r_p_rev)) << '\n';
        }
    } else {
        throw UsageError("synth kind must be calibration or variation");
    }
    return kOk;
}

constexpr const char* kFormats = R"(
Netlist format (one element per line, '*' comments):
  .model NAME iontronic [r_e=N] [r_p_fwd=N] [r_p_rev=N] [c_p_fwd=N] [c_p_rev=N]
  DNAME ANODE CATHODE MODEL [param=N ...]
  RNAME N1 N2 OHMS      CNAME N1 N2 FARADS
  VNAME N+ N- DC V | PWL(t v ...) | SIN(offset amplitude hz [phase])
  .end
Node 0 is ground. Signals: V(node), I(element), VC(diode), P(source).
CSV output: header row, '.' decimal separator, LF line endings.
Exit codes: 0 success, 1 analysis error, 2 usage error.
IONSPICE_THREADS caps worker threads (0 = all cores).)";

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Circuit simulator for iontronic diode networks", "ionspice"};
    app.footer(kFormats);
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    auto add_output = [&](CLI::App* s, const char* what) {
        s->add_option("-o,--output", o.output, std::string("Write ") + what + " to FILE instead of stdout");
    };
    auto add_plot = [&](CLI::App* s) {
        s->add_option("--plot", o.plot, "gnuplot script path (default: output path with .gp extension)");
    };

    auto* check = app.add_subcommand("check", "Parse and validate a netlist ('-' reads stdin)");
    check->add_option("netlist", o.netlist, "Netlist file or -")->required();

    auto* dc = app.add_subcommand("dc", "DC operating point; CSV columns signal,value");
    dc->add_option("netlist", o.netlist, "Netlist file or -")->required();
    dc->add_option("--set", o.sets, "Override a source value, SRC=VOLTS (repeatable)");
    dc->add_option("--signals", o.signals, "Comma-separated signals (default: all)")->delimiter(',');
    add_output(dc, "the CSV");

    auto* sweep = app.add_subcommand("sweep", "DC sweep of one source; CSV first column is the source value");
    sweep->add_option("netlist", o.netlist, "Netlist file or -")->required();
    sweep->add_option("--source", o.source, "Swept voltage source")->required();
    sweep->add_option("--from", o.from, "First value (V)")->required();
    sweep->add_option("--to", o.to, "Last value (V)")->required();
    sweep->add_option("--points", o.points, "Number of points")->required();
    sweep->add_option("--set", o.sets, "Hold another source at SRC=VOLTS (repeatable)");
    sweep->add_option("--signals", o.signals, "Comma-separated signals (default: all)")->delimiter(',');
    add_output(sweep, "the CSV");
    add_plot(sweep);

    auto* tran = app.add_subcommand("tran", "Transient analysis; CSV first column is time (s)");
    tran->add_option("netlist", o.netlist, "Netlist file or -")->required();
    tran->add_option("--tend", o.t_end, "End time (s)")->required();
    tran->add_option("--dt", o.dt, "Time step (s); default tau_min/100");
    tran->add_option("--tstart", o.t_start, "Start time (s)");
    tran->add_option("--integrator", o.integrator, "be (backward Euler, default) or trap (trapezoidal)");
    tran->add_flag("--zero-initial", o.zero_initial, "Start from zero stored charge instead of the DC point");
    tran->add_flag("--force-dt", o.force_dt, "Accept dt larger than tau_min/5");
    tran->add_option("--record-every", o.record_every, "Store every n-th step");
    tran->add_option("--signals", o.signals, "Comma-separated signals (default: all)")->delimiter(',');
    tran->add_option("--fit-tau", o.fit_signal, "Fit an exponential decay to SIGNAL and print tau,<s>");
    tran->add_option("--event", o.fit_event, "Event time for --fit-tau (default: start time)");
    add_output(tran, "the CSV");
    add_plot(tran);

    auto* mc = app.add_subcommand("mc", "Monte Carlo over per-diode log-normal R_p variation");
    mc->add_option("netlist", o.netlist, "Netlist file or -")->required();
    mc->add_option("--runs", o.runs, "Number of runs (default 500)");
    mc->add_option("--seed", o.seed, "64-bit seed (default 0)");
    mc->add_option("--sigma-log", o.sigma, "Std of ln(R_p) for both regions");
    mc->add_option("--sigma-fwd", o.sigma_fwd, "Std of ln(r_p_fwd)");
    mc->add_option("--sigma-rev", o.sigma_rev, "Std of ln(r_p_rev)");
    mc->add_option("--variation-data", o.variation_data,
                   "CSV with columns i_on,i_off (steady currents at +/-V) to fit the distributions");
    mc->add_option("--variation-v", o.variation_volts, "Bias of the variation data (default 1 V)");
    mc->add_option("--observe", o.signals, "Comma-separated outcome signals")->delimiter(',')->required();
    mc->add_option("--set", o.sets, "DC source override SRC=VOLTS (repeatable)");
    mc->add_option("--tend", o.t_end, "Run a transient to this time and record final values");
    mc->add_option("--dt", o.dt, "Transient step (s)");
    mc->add_option("--integrator", o.integrator, "be or trap");
    mc->add_flag("--zero-initial", o.zero_initial, "Transient from zero stored charge");
    mc->add_flag("--force-dt", o.force_dt, "Accept dt larger than tau_min/5");
    mc->add_option("--threshold", o.threshold, "Count runs whose first outcome exceeds this value");
    mc->add_option("--summary", o.summary, "Write a JSON summary to FILE");
    add_output(mc, "per-run CSV (run, ok, sampled parameters, outcomes)");
    add_plot(mc);

    auto* gen = app.add_subcommand("gen", "Emit a generated circuit as a netlist");
    gen->add_option("kind", o.gen_kind, "or | and | dual-rail-and | chain | decoder | bridge")->required();
    gen->add_option("--fan-in", o.fan_in, "Gate inputs (default 2)");
    gen->add_option("--pull", o.pull, "reverse (default) | forward | resistor");
    gen->add_option("--pull-ohms", o.pull_ohms, "Pull resistor value with --pull resistor");
    gen->add_option("--vhigh", o.v_high, "supply_high (default 1 V)");
    gen->add_option("--vlow", o.v_low, "supply_low (default 0 V)");
    gen->add_option("--n", o.n, "Chain length (default 5)");
    gen->add_option("--gate", o.chain_kind, "Chain gate kind: or (default) | and");
    gen->add_option("--drive", o.drive, "Chain second inputs: low (default) | high");
    gen->add_option("--load", o.load, "Bridge load resistance (default 1e6)");
    gen->add_option("--smoothing", o.smoothing, "Bridge smoothing capacitance (F)");
    gen->add_option("--freq", o.freq, "Bridge sine frequency (Hz)");
    gen->add_option("--amplitude", o.amplitude, "Bridge sine amplitude (V)");
    gen->add_option("--offset", o.offset, "Bridge sine offset (V)");
    gen->add_option("--inputs", o.inputs, "Comma-separated DC input voltages in port order")->delimiter(',');
    gen->add_option("--params", o.params, "Model parameter file (key=value lines)");
    add_output(gen, "the netlist");

    auto* study = app.add_subcommand("study", "Chain-length or bridge-frequency study from a JSON spec");
    study->add_option("kind", o.study_kind, "chain | freq")->required();
    study->add_option("spec", o.spec_file, "JSON spec file or -")->required();
    add_output(study, "the tidy CSV");
    add_plot(study);
    study->footer(R"(
chain spec keys: rr_values (required), vary (r_p_rev|r_p_fwd|r_e), sigma_log_fwd, sigma_log_rev,
  sigma_scales (list, one curve each), seed, n_runs (500), threshold (0.5), confidence (0.99),
  certification_level (0.95), max_n (34), supply_high, supply_low, params {key: value}
  CSV: label,rr,statistic,value
freq spec keys: cp_multipliers (required), amplitude (1), offset (0), load_ohms (1e6),
  efficiency (0.5), steps_per_period (400), periods (8), measure_periods (2), bisection_steps, params
  CSV: multiplier,statistic,value)");

    auto* cal = app.add_subcommand("calibrate", "Extract model parameters from IV and step data");
    cal->add_option("--iv", o.iv, "IV CSV with columns v,i")->required();
    cal->add_option("--step", o.step, "Step CSV with columns t,i")->required();
    cal->add_option("--events", o.events, "Event CSV with columns t_event,v_before,v_after")->required();
    add_output(cal, "the parameter file");

    auto* synth = app.add_subcommand("synth", "Write synthetic measurement data from a parameter set");
    synth->add_option("kind", o.synth_kind, "calibration (iv.csv, step.csv, events.csv) | variation (i_on,i_off)")
        ->required();
    synth->add_option("--params", o.params, "Model parameter file (default: built-in defaults)");
    synth->add_option("--out-dir", o.out_dir, "Directory for calibration files");
    synth->add_option("--noise", o.noise, "Relative Gaussian noise per sample (calibration)");
    synth->add_option("--seed", o.seed, "Noise or sampling seed");
    synth->add_option("--repeats", o.repeats, "Step cycles (calibration)");
    synth->add_option("--diodes", o.diodes, "Number of diodes (variation, default 15)");
    synth->add_option("--sigma-log", o.sigma, "Std of ln(R_p) (variation)");
    synth->add_option("--sigma-fwd", o.sigma_fwd, "Std of ln(r_p_fwd) (variation)");
    synth->add_option("--sigma-rev", o.sigma_rev, "Std of ln(r_p_rev) (variation)");
    synth->add_option("--variation-v", o.variation_volts, "Bias for the currents (default 1 V)");
    add_output(synth, "variation CSV");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (check->parsed()) return cmd_check(o, in, out, err);
        if (dc->parsed()) return cmd_dc(o, in, out, err);
        if (sweep->parsed()) return cmd_sweep(o, in, out, err);
        if (tran->parsed()) return cmd_tran(o, in, out, err);
        if (mc->parsed()) return cmd_mc(o, in, out, err);
        if (gen->parsed()) return cmd_gen(o, in, out, err);
        if (study->parsed()) return cmd_study(o, in, out, err);
        if (cal->parsed()) return cmd_calibrate(o, in, out, err);
        if (synth->parsed()) return cmd_synth(o, in, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsageError;
    } catch (const NetlistError& e) {
        for (const auto& d : e.diagnostics()) err << o.netlist << ": " << d.to_string() << '\n';
        return kAnalysisError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kAnalysisError;
    }
    return kUsageError;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace ionspice::cli
