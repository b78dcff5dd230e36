#include "ionspice/metrics.hpp"

#include "ionspice/csv.hpp"
#include "ionspice/error.hpp"
#include "ionspice/parallel.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace ionspice {

double high_low_margin(const std::map<std::string, double>& outputs, const std::string& selected) {
    if (outputs.size() < 2) throw DomainError("margin needs at least two outputs");
    const auto it = outputs.find(selected);
    if (it == outputs.end()) throw DomainError("selected output '" + selected + "' not present");
    double other = -std::numeric_limits<double>::infinity();
    for (const auto& [name, v] : outputs) {
        if (name != selected) other = std::max(other, v);
    }
    return it->second - other;
}

double settle_time(std::span<const double> t, std::span<const double> y, double t_event, double band) {
    if (t.size() != y.size()) throw DomainError("time and signal lengths differ");
    if (!(band > 0.0)) throw DomainError("band must be positive");
    const auto first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t_event) - t.begin());
    if (first >= t.size()) throw DomainError("event lies after the last sample");
    const double before = first > 0 ? y[first - 1] : y[first];

    const double t_tail = t.back() - 0.05 * (t.back() - t[first]);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = first; i < t.size(); ++i) {
        if (t[i] >= t_tail) {
            sum += y[i];
            ++count;
        }
    }
    const double final_value = sum / static_cast<double>(count);
    const double tol = band * std::abs(final_value - before);
    for (std::size_t i = first; i < t.size(); ++i) {
        if (t[i] >= t_tail && std::abs(y[i] - final_value) > tol) {
            throw DomainError("signal does not settle within the window");
        }
    }

    std::size_t last_out = t.size();
    for (std::size_t i = t.size(); i-- > first;) {
        if (std::abs(y[i] - final_value) > tol) {
            last_out = i;
            break;
        }
    }
    if (last_out == t.size()) return 0.0;
    const std::size_t in = last_out + 1;
    const double d0 = std::abs(y[last_out] - final_value) - tol;
    const double d1 = std::abs(y[in] - final_value) - tol;
    const double frac = d0 - d1 > 0.0 ? d0 / (d0 - d1) : 1.0;
    const double crossing = t[last_out] + frac * (t[in] - t[last_out]);
    return std::max(0.0, crossing - t_event);
}

double settle_time(const TransientResult& tr, std::string_view signal, double t_event, double band) {
    return settle_time(tr.times, tr.signal(signal), t_event, band);
}

namespace {

double time_average(std::span<const double> t, std::span<const double> y, double t0, double t1) {
    if (!(t1 > t0)) throw DomainError("empty averaging window");
    if (t.empty() || t0 < t.front() - 1e-12 * std::abs(t.front()) || t1 > t.back() * (1 + 1e-12) + 1e-300) {
        throw DomainError("averaging window outside the recorded range");
    }
    auto value_at = [&](double x) {
        const auto hi = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), x) - t.begin());
        if (hi == 0) return y.front();
        if (hi >= t.size()) return y.back();
        const double w = (x - t[hi - 1]) / (t[hi] - t[hi - 1]);
        return y[hi - 1] + w * (y[hi] - y[hi - 1]);
    };
    double area = 0.0;
    double tp = t0;
    double yp = value_at(t0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] <= t0) continue;
        if (t[i] >= t1) break;
        area += 0.5 * (yp + y[i]) * (t[i] - tp);
        tp = t[i];
        yp = y[i];
    }
    area += 0.5 * (yp + value_at(t1)) * (t1 - tp);
    return area / (t1 - t0);
}

}  // namespace

double average_power(const TransientResult& tr, double t0, double t1) {
    std::vector<double> total(tr.times.size(), 0.0);
    for (std::size_t k = 0; k < tr.names.size(); ++k) {
        if (!tr.names[k].starts_with("P(")) continue;
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += tr.series[k][i];
    }
    return time_average(tr.times, total, t0, t1);
}

double clopper_pearson_lower(std::size_t successes, std::size_t trials, double level) {
    if (trials == 0) throw DomainError("no trials");
    if (successes > trials) throw DomainError("successes exceed trials");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    if (successes == 0) return 0.0;
    using boost::math::binomial_distribution;
    return binomial_distribution<>::find_lower_bound_on_p(static_cast<double>(trials), static_cast<double>(successes),
                                                          1.0 - level);
}

std::string_view to_string(VariedResistance v) noexcept {
    switch (v) {
        case VariedResistance::RpRev: return "r_p_rev";
        case VariedResistance::RpFwd: return "r_p_fwd";
        case VariedResistance::Re: return "r_e";
    }
    return "?";
}

DiodeParams scale_to_rr(const DiodeParams& base, double rr, VariedResistance vary) {
    if (!(rr > 1.0)) throw DomainError("rectification ratio must exceed 1");
    DiodeParams p = base;
    switch (vary) {
        case VariedResistance::RpRev: p.r_p_rev = rr * (p.r_e + p.r_p_fwd) - p.r_e; break;
        case VariedResistance::RpFwd: p.r_p_fwd = (p.r_e + p.r_p_rev) / rr - p.r_e; break;
        case VariedResistance::Re: p.r_e = (p.r_p_rev - rr * p.r_p_fwd) / (rr - 1.0); break;
    }
    if (!(p.r_e > 0.0 && p.r_p_fwd > 0.0 && p.r_p_rev > 0.0)) {
        throw DomainError("rectification ratio " + format_number(rr) + " is unreachable by varying " +
                          std::string(to_string(vary)));
    }
    return p;
}

void ChainStudySpec::validate() const {
    variation.validate();
    topology.validate();
    if (rr_values.empty()) throw DomainError("chain study needs at least one RR value");
    if (!(threshold > topology.supply_low && threshold < topology.supply_high)) {
        throw DomainError("threshold must lie between the supply rails");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) throw DomainError("confidence must lie in (0, 1)");
    if (!(certification_level > 0.0 && certification_level < 1.0)) {
        throw DomainError("certification level must lie in (0, 1)");
    }
    if (max_n < 1) throw DomainError("max_n must be >= 1");
    if (variation.n_runs == 0) throw DomainError("n_runs must be >= 1");
}

std::vector<ChainStudyPoint> max_chain_length(const ChainStudySpec& spec, const DiodeParams& base,
                                              const SolverOptions& solver) {
    spec.validate();
    std::vector<ChainStudyPoint> out;
    for (double rr : spec.rr_values) {
        ChainStudyPoint point;
        point.rr = rr;
        GateTopology t = spec.topology;
        t.params = scale_to_rr(base, rr, spec.vary);
        for (int n = 1; n <= spec.max_n; ++n) {
            const Generated g = chain(n, t, spec.drive);
            const std::string last = "V(" + g.ports.outputs.back().node + ")";
            const double threshold = spec.threshold;
            MonteCarloOptions mc;
            mc.solver = solver;
            mc.success = [threshold](const std::vector<double>& o) { return o[0] > threshold; };
            const double high = t.supply_high;
            const auto ens = monte_carlo(g.circuit, spec.variation, DcAnalysis{g.ports.drive(std::vector{high})},
                                         observe_signals({last}), mc);
            ChainTrial trial;
            trial.n = n;
            trial.runs = ens.runs.size();
            trial.successes = *ens.successes;
            trial.lower_bound = clopper_pearson_lower(trial.successes, trial.runs, spec.certification_level);
            trial.pass = trial.lower_bound >= spec.confidence;
            point.trials.push_back(trial);
            if (!trial.pass) break;
            point.max_length = n;
        }
        out.push_back(std::move(point));
    }
    return out;
}

int deterministic_chain_length(const DiodeParams& p, const GateTopology& topology, ChainDrive drive, double threshold,
                               int max_n, const SolverOptions& solver) {
    GateTopology t = topology;
    t.params = p;
    int length = 0;
    for (int n = 1; n <= max_n; ++n) {
        const Generated g = chain(n, t, drive);
        const auto sol = dc_operating_point(g.circuit, g.ports.drive(std::vector{t.supply_high}), solver);
        if (!(sol.signal("V(" + g.ports.outputs.back().node + ")") > threshold)) break;
        length = n;
    }
    return length;
}

void FrequencyStudySpec::validate() const {
    if (cp_multipliers.empty()) throw DomainError("frequency study needs at least one multiplier");
    for (double m : cp_multipliers) {
        if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("capacitance multipliers must be positive");
    }
    if (!(amplitude > 0.0)) throw DomainError("amplitude must be positive");
    if (!(load_ohms > 0.0)) throw DomainError("load resistance must be positive");
    if (!(efficiency > 0.0 && efficiency <= 1.0)) throw DomainError("efficiency criterion must lie in (0, 1]");
    if (steps_per_period < 8) throw DomainError("steps_per_period must be >= 8");
    if (measure_periods < 1 || periods <= measure_periods) {
        throw DomainError("need periods > measure_periods >= 1");
    }
    if (quasi_static_points < 4) throw DomainError("quasi_static_points must be >= 4");
    if (bisection_steps < 0 || max_decades < 1) throw DomainError("invalid search limits");
}

double quasi_static_mean(const DiodeParams& p, const FrequencyStudySpec& spec) {
    const Generated g = diode_bridge(spec.load_ohms, std::nullopt, p);
    std::vector<double> values;
    for (int k = 0; k < spec.quasi_static_points; ++k) {
        values.push_back(spec.offset + spec.amplitude * std::sin(2.0 * std::numbers::pi * k / spec.quasi_static_points));
    }
    Simulator sim(g.circuit);
    const auto sols = sim.dc_sweep("Vac", values);
    double sum = 0.0;
    for (const auto& s : sols) sum += s.signal("V(dc_p)");
    return sum / static_cast<double>(sols.size());
}

double rectification_efficiency(const DiodeParams& p, const FrequencyStudySpec& spec, double f, double quasi_static) {
    const Generated g = diode_bridge(spec.load_ohms, std::nullopt, p, SineStimulus{spec.offset, spec.amplitude, f, 0.0});
    TransientOptions o;
    o.t_end = spec.periods / f;
    o.dt = 1.0 / (f * spec.steps_per_period);
    o.force_dt = true;
    o.observe = {"V(dc_p)"};
    const auto tr = transient(g.circuit, o);
    const double t1 = tr.times.back();
    const double mean = time_average(tr.times, tr.signal("V(dc_p)"), t1 - spec.measure_periods / f, t1);
    return mean / quasi_static;
}

std::vector<FrequencyPoint> max_frequency(const FrequencyStudySpec& spec, const DiodeParams& base) {
    spec.validate();
    std::vector<FrequencyPoint> out(spec.cp_multipliers.size());
    parallel_for(out.size(), [&](std::size_t idx) {
        const double m = spec.cp_multipliers[idx];
        DiodeParams p = base;
        p.c_p_fwd *= m;
        p.c_p_rev *= m;
        const double qs = quasi_static_mean(p, spec);
        if (!(qs > 0.0)) throw DomainError("bridge produces no rectified output");
        FrequencyPoint& pt = out[idx];
        pt.multiplier = m;
        auto eta = [&](double f) {
            ++pt.evaluations;
            return rectification_efficiency(p, spec, f, qs);
        };
        const double tau = std::max(time_constant(p, Region::Forward), time_constant(p, Region::Reverse));
        double lo = 0.01 / tau;
        int decades = 0;
        double eta_lo = eta(lo);
        while (eta_lo < spec.efficiency) {
            if (++decades > spec.max_decades) {
                throw DomainError("efficiency criterion never met at the lowest tested frequency");
            }
            lo /= 10.0;
            eta_lo = eta(lo);
        }
        double hi = lo * 10.0;
        decades = 0;
        double eta_hi = eta(hi);
        while (eta_hi >= spec.efficiency) {
            if (++decades > spec.max_decades) throw DomainError("efficiency criterion never fails in the search range");
            lo = hi;
            eta_lo = eta_hi;
            hi *= 10.0;
            eta_hi = eta(hi);
        }
        for (int k = 0; k < spec.bisection_steps; ++k) {
            const double mid = std::sqrt(lo * hi);
            const double e = eta(mid);
            if (e >= spec.efficiency) {
                lo = mid;
                eta_lo = e;
            } else {
                hi = mid;
            }
        }
        pt.f_max = lo;
        pt.efficiency = eta_lo;
    });
    return out;
}

void write_chain_study_csv(std::ostream& out,
                           const std::vector<std::pair<std::string, std::vector<ChainStudyPoint>>>& curves,
                           bool header) {
    if (header) out << "label,rr,statistic,value\n";
    for (const auto& [label, points] : curves) {
        for (const auto& p : points) {
            const std::string prefix = label + ',' + csv_number(p.rr) + ',';
            out << prefix << "max_length," << p.max_length << '\n';
            for (const auto& t : p.trials) {
                out << prefix << "success_rate_n" << t.n << ','
                    << csv_number(static_cast<double>(t.successes) / static_cast<double>(t.runs)) << '\n';
                out << prefix << "lower_bound_n" << t.n << ',' << csv_number(t.lower_bound) << '\n';
            }
        }
    }
}

void write_frequency_study_csv(std::ostream& out, const std::vector<FrequencyPoint>& points) {
    out << "multiplier,statistic,value\n";
    for (const auto& p : points) {
        out << csv_number(p.multiplier) << ",f_max," << csv_number(p.f_max) << '\n';
        out << csv_number(p.multiplier) << ",efficiency," << csv_number(p.efficiency) << '\n';
    }
}

void write_chain_plot(std::ostream& out, const std::string& csv_file, const std::vector<std::string>& labels) {
    out << "# gnuplot script\n"
        << "set datafile separator ','\n"
        << "set logscale x\n"
        << "set xlabel 'Rectification ratio'\n"
        << "set ylabel 'Maximum chain length'\n"
        << "set key top left\n"
        << "plot ";
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (k) out << ", \\\n     ";
        out << "'" << csv_file << "' skip 1 using 2:((strcol(1) eq '" << labels[k]
            << "' && strcol(3) eq 'max_length') ? $4 : 1/0) with linespoints title '" << labels[k] << "'";
    }
    out << '\n';
}

void write_frequency_plot(std::ostream& out, const std::string& csv_file) {
    out << "# gnuplot script\n"
        << "set datafile separator ','\n"
        << "set logscale xy\n"
        << "set xlabel 'C_p multiplication factor'\n"
        << "set ylabel 'Maximum operating frequency (Hz)'\n"
        << "plot '" << csv_file << "' skip 1 using 1:(strcol(2) eq 'f_max' ? $3 : 1/0) with linespoints title 'f_max'\n";
}

}  // namespace ionspice
