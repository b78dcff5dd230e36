#include "ionspice/stochastic.hpp"

#include "ionspice/csv.hpp"
#include "ionspice/error.hpp"
#include "ionspice/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace ionspice {

std::string_view to_string(VariedParameter p) noexcept {
    return p == VariedParameter::RpFwd ? "r_p_fwd" : "r_p_rev";
}

void VariationSpec::validate() const {
    for (const auto& e : entries) {
        if (!(e.sigma_log >= 0.0) || !std::isfinite(e.sigma_log)) throw DomainError("sigma_log must be >= 0");
        if (e.mu_log && !std::isfinite(*e.mu_log)) throw DomainError("mu_log must be finite");
    }
}

VariationSpec VariationSpec::centered(double sigma_fwd, double sigma_rev, std::uint64_t seed, std::size_t n_runs) {
    VariationSpec v;
    v.entries = {{VariedParameter::RpFwd, std::nullopt, sigma_fwd}, {VariedParameter::RpRev, std::nullopt, sigma_rev}};
    v.seed = seed;
    v.n_runs = n_runs;
    return v;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng run_stream(std::uint64_t seed, std::uint64_t run) {
    return Rng(splitmix64(seed + (run + 1) * 0x9E3779B97F4A7C15ULL));
}

namespace {

double draw(double nominal, const VariationEntry& e, std::normal_distribution<double>& normal, Rng& rng) {
    const double z = normal(rng);
    if (e.mu_log) return std::exp(*e.mu_log + e.sigma_log * z);
    return nominal * std::exp(e.sigma_log * z);
}

}  // namespace

DiodeParams sample_diode(const DiodeParams& nominal, const VariationSpec& v, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    DiodeParams p = nominal;
    for (const auto& e : v.entries) {
        if (e.parameter == VariedParameter::RpFwd) p.r_p_fwd = draw(nominal.r_p_fwd, e, normal, rng);
        else p.r_p_rev = draw(nominal.r_p_rev, e, normal, rng);
    }
    return p;
}

Circuit sample_circuit(const Circuit& tmpl, const VariationSpec& v, Rng& rng, std::vector<SampledDiode>* sampled) {
    Circuit c = tmpl;
    for (auto& e : c.elements()) {
        auto* d = e.as<IontronicDiode>();
        if (!d) continue;
        const DiodeParams p = sample_diode(c.diode_params(*d), v, rng);
        for (const auto& entry : v.entries) {
            if (entry.parameter == VariedParameter::RpFwd) d->overrides.r_p_fwd = p.r_p_fwd;
            else d->overrides.r_p_rev = p.r_p_rev;
        }
        if (sampled) sampled->push_back({e.name, p});
    }
    return c;
}

LognormalFit fit_lognormal(std::span<const double> samples) {
    if (samples.size() < 2) throw DomainError("log-normal fit needs at least two samples");
    double sum = 0.0;
    for (double s : samples) {
        if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("log-normal fit needs positive samples");
        sum += std::log(s);
    }
    const double mu = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (double s : samples) ss += (std::log(s) - mu) * (std::log(s) - mu);
    return {mu, std::sqrt(ss / static_cast<double>(samples.size() - 1))};
}

double junction_resistance_from_current(double v, double i_ss, double r_e) {
    if (i_ss == 0.0) throw DomainError("steady current must be non-zero");
    return v / i_ss - r_e;
}

VariationSpec variation_from_currents(std::span<const double> i_on, std::span<const double> i_off, double v,
                                      double r_e, std::uint64_t seed, std::size_t n_runs) {
    std::vector<double> rf, rr;
    for (double i : i_on) rf.push_back(junction_resistance_from_current(v, i, r_e));
    for (double i : i_off) rr.push_back(junction_resistance_from_current(-v, i, r_e));
    const auto ff = fit_lognormal(rf);
    const auto fr = fit_lognormal(rr);
    VariationSpec spec;
    spec.entries = {{VariedParameter::RpFwd, ff.mu_log, ff.sigma_log}, {VariedParameter::RpRev, fr.mu_log, fr.sigma_log}};
    spec.seed = seed;
    spec.n_runs = n_runs;
    return spec;
}

OutcomeExtractor observe_signals(std::vector<std::string> signals) {
    OutcomeExtractor ex;
    ex.names = signals;
    ex.extract = [signals](const AnalysisResult& r) {
        std::vector<double> out;
        out.reserve(signals.size());
        if (const auto* dc = std::get_if<DcSolution>(&r)) {
            for (const auto& s : signals) out.push_back(dc->signal(s));
        } else {
            const auto& tr = std::get<TransientResult>(r);
            for (const auto& s : signals) out.push_back(tr.signal(s).back());
        }
        return out;
    };
    return ex;
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sorted.front() == sorted.back() ? sorted.front() : sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    s.min = sorted.front();
    s.max = sorted.back();
    for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        const double pos = p * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        s.quantiles.emplace_back(p, sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]));
    }
    return s;
}

std::vector<double> EnsembleResult::outcome_values(std::size_t outcome) const {
    std::vector<double> out;
    for (const auto& r : runs) {
        if (r.ok) out.push_back(r.outcomes.at(outcome));
    }
    return out;
}

EnsembleResult monte_carlo(const Circuit& tmpl, const VariationSpec& v, const Analysis& analysis,
                           const OutcomeExtractor& extractor, const MonteCarloOptions& opts) {
    v.validate();
    if (v.n_runs == 0) throw DomainError("Monte Carlo needs at least one run");
    EnsembleResult result;
    result.outcome_names = extractor.names;
    result.runs.resize(v.n_runs);

    parallel_for(v.n_runs, [&](std::size_t i) {
        RunRecord& rec = result.runs[i];
        rec.index = i;
        Rng rng = run_stream(v.seed, i);
        const Circuit c = sample_circuit(tmpl, v, rng, &rec.sampled);
        for (const auto& s : rec.sampled) {
            if (!(s.params.r_p_rev > s.params.r_p_fwd)) {
                rec.warnings.push_back("diode " + s.name + ": sampled r_p_rev <= r_p_fwd");
            }
        }
        try {
            Simulator sim(c, opts.solver);
            if (const auto* dc = std::get_if<DcAnalysis>(&analysis)) {
                AnalysisResult r = sim.dc_operating_point(dc->sources);
                const auto& sol = std::get<DcSolution>(r);
                rec.warnings.insert(rec.warnings.end(), sol.warnings.begin(), sol.warnings.end());
                rec.outcomes = extractor.extract(r);
            } else {
                AnalysisResult r = sim.transient(std::get<TransientAnalysis>(analysis).options);
                rec.outcomes = extractor.extract(r);
            }
            rec.ok = true;
        } catch (const Error& e) {
            rec.ok = false;
            rec.error = e.what();
        }
    });

    for (const auto& r : result.runs) result.failed_runs += r.ok ? 0 : 1;
    if (result.failed_runs == v.n_runs) {
        throw SolverError("every Monte Carlo run failed; first error: " + result.runs.front().error);
    }
    for (std::size_t k = 0; k < result.outcome_names.size(); ++k) {
        const auto vals = result.outcome_values(k);
        result.summary.push_back(summarize(vals));
    }
    if (opts.success) {
        std::size_t n = 0;
        for (const auto& r : result.runs) n += (r.ok && opts.success(r.outcomes)) ? 1 : 0;
        result.successes = n;
    }
    return result;
}

void write_runs_csv(std::ostream& out, const EnsembleResult& r) {
    const auto& first = r.runs.front();
    out << "run,ok";
    for (const auto& s : first.sampled) out << ',' << s.name << ".r_p_fwd," << s.name << ".r_p_rev";
    for (const auto& n : r.outcome_names) out << ',' << n;
    out << '\n';
    for (const auto& run : r.runs) {
        out << run.index << ',' << (run.ok ? 1 : 0);
        for (const auto& s : run.sampled) out << ',' << csv_number(s.params.r_p_fwd) << ',' << csv_number(s.params.r_p_rev);
        for (std::size_t k = 0; k < r.outcome_names.size(); ++k) {
            out << ',' << (run.ok ? csv_number(run.outcomes[k]) : std::string("nan"));
        }
        out << '\n';
    }
}

void write_summary_json(std::ostream& out, const EnsembleResult& r) {
    nlohmann::ordered_json j;
    j["runs"] = r.runs.size();
    j["failed_runs"] = r.failed_runs;
    if (r.successes) {
        j["successes"] = *r.successes;
        j["success_rate"] = static_cast<double>(*r.successes) / static_cast<double>(r.runs.size());
    }
    nlohmann::ordered_json outcomes = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < r.outcome_names.size(); ++k) {
        const auto& s = r.summary[k];
        nlohmann::ordered_json o;
        o["count"] = s.count;
        o["mean"] = s.mean;
        o["std"] = s.stddev;
        o["min"] = s.min;
        o["max"] = s.max;
        nlohmann::ordered_json q = nlohmann::ordered_json::object();
        for (const auto& [p, v] : s.quantiles) q[csv_number(p)] = v;
        o["quantiles"] = q;
        outcomes[r.outcome_names[k]] = o;
    }
    j["outcomes"] = outcomes;
    out << j.dump(2) << '\n';
}

}  // namespace ionspice
