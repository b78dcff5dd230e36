#include "ionspice/calibrate.hpp"

#include "ionspice/circuit.hpp"
#include "ionspice/csv.hpp"
#include "ionspice/engine.hpp"
#include "ionspice/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace ionspice {

void IvDataset::validate() const {
    if (v.size() != i.size()) throw DomainError("IV columns differ in length");
    if (!std::is_sorted(v.begin(), v.end())) throw DomainError("IV voltages must be sorted");
}

void StepDataset::validate() const {
    if (t.size() != i.size()) throw DomainError("step columns differ in length");
    if (t.size() < 2) throw DomainError("step record needs at least two samples");
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(t[k] > t[k - 1])) throw DomainError("step times must be strictly increasing");
    }
    for (const auto& e : events) {
        if (!(e.time >= t.front() && e.time <= t.back())) {
            throw DomainError("event at t=" + format_number(e.time) + " lies outside the record");
        }
    }
}

std::vector<StepEvent> StepDataset::find(double v_before, double v_after) const {
    std::vector<StepEvent> out;
    for (const auto& e : events) {
        if (e.v_before == v_before && e.v_after == v_after) out.push_back(e);
    }
    std::sort(out.begin(), out.end(), [](const StepEvent& a, const StepEvent& b) { return a.time < b.time; });
    return out;
}

std::pair<std::size_t, std::size_t> StepDataset::window(const StepEvent& e) const {
    const auto begin = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), e.time) - t.begin());
    double next = std::numeric_limits<double>::infinity();
    for (const auto& o : events) {
        if (o.time > e.time) next = std::min(next, o.time);
    }
    const auto end = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), next) - t.begin());
    return {begin, end};
}

IvDataset load_iv(const std::string& path) {
    const CsvTable table = read_csv_file(path);
    IvDataset iv{table.column_values("v"), table.column_values("i")};
    iv.validate();
    return iv;
}

StepDataset load_step(const std::string& step_path, const std::string& events_path) {
    const CsvTable table = read_csv_file(step_path);
    StepDataset s{table.column_values("t"), table.column_values("i"), {}};
    const CsvTable ev = read_csv_file(events_path);
    const auto te = ev.column("t_event"), vb = ev.column("v_before"), va = ev.column("v_after");
    for (const auto& row : ev.rows) s.events.push_back({row[te], row[vb], row[va]});
    s.validate();
    return s;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    return out;
}

}  // namespace

void save_iv(const std::string& path, const IvDataset& iv) {
    auto out = open_out(path);
    out << "v,i\n";
    for (std::size_t k = 0; k < iv.v.size(); ++k) out << csv_number(iv.v[k]) << ',' << csv_number(iv.i[k]) << '\n';
}

void save_step(const std::string& step_path, const std::string& events_path, const StepDataset& s) {
    auto out = open_out(step_path);
    out << "t,i\n";
    for (std::size_t k = 0; k < s.t.size(); ++k) out << csv_number(s.t[k]) << ',' << csv_number(s.i[k]) << '\n';
    auto ev = open_out(events_path);
    ev << "t_event,v_before,v_after\n";
    for (const auto& e : s.events) {
        ev << csv_number(e.time) << ',' << csv_number(e.v_before) << ',' << csv_number(e.v_after) << '\n';
    }
}

namespace {

double region_resistance(const std::vector<double>& v, const std::vector<double>& i, const char* region) {
    if (v.size() < 3) {
        throw DomainError(std::string(region) + " region has " + std::to_string(v.size()) + " points (need >= 3)");
    }
    double sum = 0.0;
    std::size_t windows = 0;
    for (std::size_t k = 0; k + 3 <= v.size(); ++k) {
        const double vm = (v[k] + v[k + 1] + v[k + 2]) / 3.0;
        const double im = (i[k] + i[k + 1] + i[k + 2]) / 3.0;
        double svv = 0.0, svi = 0.0;
        for (std::size_t j = k; j < k + 3; ++j) {
            svv += (v[j] - vm) * (v[j] - vm);
            svi += (v[j] - vm) * (i[j] - im);
        }
        if (svv == 0.0 || svi == 0.0) throw DomainError(std::string(region) + " region has a degenerate window");
        sum += svv / svi;
        ++windows;
    }
    return sum / static_cast<double>(windows);
}

}  // namespace

RtssResult extract_rtss(const IvDataset& iv) {
    iv.validate();
    std::vector<double> vr, ir, vf, jf;
    for (std::size_t k = 0; k < iv.v.size(); ++k) {
        if (iv.v[k] < 0.0) {
            vr.push_back(iv.v[k]);
            ir.push_back(iv.i[k]);
        } else {
            vf.push_back(iv.v[k]);
            jf.push_back(iv.i[k]);
        }
    }
    RtssResult r;
    r.rtss_rev = region_resistance(vr, ir, "reverse");
    r.rtss_fwd = region_resistance(vf, jf, "forward");
    return r;
}

double extract_re(const StepDataset& step, const StepEvent& e) {
    step.validate();
    const double dv = e.v_after - e.v_before;
    if (dv == 0.0) throw DomainError("event has no voltage change");
    const auto [begin, end] = step.window(e);
    if (end - begin < 20) throw DomainError("too few samples after the event");
    const double i_before = begin > 0 ? step.i[begin - 1] : 0.0;

    std::size_t peak = begin;
    for (std::size_t k = begin; k < std::min(end, begin + 10); ++k) {
        if (std::abs(step.i[k] - i_before) > std::abs(step.i[peak] - i_before)) peak = k;
    }
    const double jump = std::abs(step.i[peak] - i_before);

    const std::size_t tail = std::max<std::size_t>(2, (end - begin) / 20);
    double mean = 0.0;
    for (std::size_t k = end - tail; k < end; ++k) mean += step.i[k];
    mean /= static_cast<double>(tail);
    double var = 0.0;
    for (std::size_t k = end - tail; k < end; ++k) var += (step.i[k] - mean) * (step.i[k] - mean);
    const double noise = std::max(3.0 * std::sqrt(var / static_cast<double>(tail - 1)), 1e-3 * jump);
    if (!(std::abs(step.i[peak] - mean) > noise)) {
        throw DomainError("no discernible current peak after the event at t=" + format_number(e.time));
    }
    return std::abs(dv) / jump;
}

double fit_tau(const StepDataset& step, const StepEvent& e) {
    step.validate();
    const auto [begin, end] = step.window(e);
    const std::span<const double> t(step.t.data() + begin, end - begin);
    const std::span<const double> y(step.i.data() + begin, end - begin);
    return fit_exponential_decay(t, y, e.time).tau;
}

RepeatedEstimate average_estimates(std::span<const double> values) {
    if (values.empty()) throw DomainError("no estimates to average");
    RepeatedEstimate r;
    r.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    r.mean = sum / static_cast<double>(values.size());
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    r.spread = *hi - *lo;
    return r;
}

std::pair<double, double> solve_capacitances(double r_e, double r_p_fwd, double r_p_rev, double tau_fwd,
                                             double tau_rev) {
    if (!(r_e > 0.0 && r_p_fwd > 0.0 && r_p_rev > 0.0)) throw DomainError("resistances must be positive");
    if (!(tau_fwd >= 0.0 && tau_rev >= 0.0)) throw DomainError("time constants must be non-negative");
    return {tau_fwd * (r_p_fwd + r_e) / (r_p_fwd * r_e), tau_rev * (r_p_rev + r_e) / (r_p_rev * r_e)};
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const CalibrationError&) {
        throw;
    } catch (const std::exception& e) {
        throw CalibrationError(name, e.what());
    }
}

std::vector<StepEvent> events_from_zero(const StepDataset& s, bool positive) {
    std::vector<StepEvent> out;
    for (const auto& e : s.events) {
        if (e.v_before == 0.0 && (positive ? e.v_after > 0.0 : e.v_after < 0.0)) out.push_back(e);
    }
    return out;
}

}  // namespace

CalibrationReport calibrate_report(const IvDataset& iv, const StepDataset& step) {
    CalibrationReport rep;
    rep.rtss = stage("extract_rtss", [&] { return extract_rtss(iv); });
    stage("step data", [&] {
        step.validate();
        return 0;
    });
    const auto fwd = events_from_zero(step, true);
    const auto rev = events_from_zero(step, false);
    rep.r_e = stage("extract_re", [&] {
        if (fwd.empty()) throw DomainError("no 0 -> +V event");
        std::vector<double> v;
        for (const auto& e : fwd) v.push_back(extract_re(step, e));
        return average_estimates(v);
    });
    DiodeParams p;
    p.r_e = rep.r_e.mean;
    p.r_p_fwd = rep.rtss.rtss_fwd - p.r_e;
    p.r_p_rev = rep.rtss.rtss_rev - p.r_e;
    stage("junction resistances", [&] {
        if (!(p.r_p_fwd > 0.0)) throw DomainError("forward total resistance does not exceed R_e");
        if (!(p.r_p_rev > 0.0)) throw DomainError("reverse total resistance does not exceed R_e");
        return 0;
    });
    rep.tau_fwd = stage("fit_tau forward", [&] {
        std::vector<double> v;
        for (const auto& e : fwd) v.push_back(fit_tau(step, e));
        return average_estimates(v);
    });
    rep.tau_rev = stage("fit_tau reverse", [&] {
        if (rev.empty()) throw DomainError("no 0 -> -V event");
        std::vector<double> v;
        for (const auto& e : rev) v.push_back(fit_tau(step, e));
        return average_estimates(v);
    });
    const auto [cf, cr] = stage("solve_capacitances", [&] {
        return solve_capacitances(p.r_e, p.r_p_fwd, p.r_p_rev, rep.tau_fwd.mean, rep.tau_rev.mean);
    });
    p.c_p_fwd = cf;
    p.c_p_rev = cr;
    stage("validate", [&] {
        validate(p, false);
        return 0;
    });
    rep.params = p;
    return rep;
}

DiodeParams calibrate_full(const IvDataset& iv, const StepDataset& step) {
    return calibrate_report(iv, step).params;
}

namespace {

Circuit single_diode(const DiodeParams& p, const Stimulus& s) {
    Circuit c;
    c.set_model("iontronic", p);
    c.add("V1", VoltageSource{"a", kGround, s});
    c.add("D1", IontronicDiode{"a", kGround, "iontronic", {}});
    return c;
}

void add_noise(std::vector<double>& y, const SyntheticNoise& noise) {
    if (noise.relative == 0.0) return;
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : y) v *= 1.0 + noise.relative * normal(rng);
}

}  // namespace

IvDataset synthetic_iv(const DiodeParams& p, int points, double v_max, const SyntheticNoise& noise) {
    if (points < 2) throw DomainError("need at least two IV points");
    IvDataset iv;
    for (int k = 0; k < points; ++k) iv.v.push_back(-v_max + 2.0 * v_max * k / (points - 1));
    const auto sols = dc_sweep(single_diode(p, DcStimulus{0.0}), "V1", iv.v);
    for (const auto& s : sols) iv.i.push_back(s.signal("I(D1)"));
    add_noise(iv.i, noise);
    return iv;
}

StepDataset synthetic_step(const DiodeParams& p, const StepSchedule& sc, const SyntheticNoise& noise) {
    validate(p, false);
    const double dt = sc.dt > 0.0 ? sc.dt : time_constant(p, Region::Reverse) / 200.0;
    const double v = sc.volts;

    StepDataset s;
    PwlStimulus pwl;
    double t = sc.t_first;
    pwl.points.emplace_back(0.0, 0.0);
    auto step_to = [&](double from, double to, double hold) {
        t = std::round(t / dt) * dt;
        pwl.points.emplace_back(t, from);
        pwl.points.emplace_back(t + dt, to);
        s.events.push_back({t + dt, from, to});
        t += hold;
    };
    for (int r = 0; r < sc.repeats; ++r) {
        step_to(0.0, -v, sc.hold_reverse);
        step_to(-v, 0.0, sc.hold_reverse);
        step_to(0.0, v, sc.hold_forward);
        if (r + 1 < sc.repeats) step_to(v, 0.0, sc.hold_forward);
    }

    TransientOptions o;
    o.t_end = t;
    o.dt = dt;
    o.force_dt = true;
    o.observe = {"I(D1)"};
    const auto tr = transient(single_diode(p, pwl), o);
    const auto& current = tr.signal("I(D1)");
    for (auto& e : s.events) {
        const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), e.time - 0.5 * dt);
        if (it != tr.times.end()) e.time = *it;
    }

    std::size_t since = 0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const double tk = tr.times[k];
        bool dense = k + 1 == tr.times.size();
        for (const auto& e : s.events) {
            if (tk >= e.time - 2.0 * dt && tk <= e.time + sc.dense_window) dense = true;
        }
        if (dense || ++since >= sc.sparse_every) {
            s.t.push_back(tk);
            s.i.push_back(current[k]);
            since = 0;
        }
    }
    add_noise(s.i, noise);
    return s;
}

}  // namespace ionspice
