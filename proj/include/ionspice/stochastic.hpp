#pragma once

// Intra-chip process variation: per-diode log-normal sampling of the junction
// resistances and Monte Carlo ensembles over a circuit template.
//
// Random streams: each run r draws from std::mt19937_64 seeded with
// splitmix64(seed + (r + 1) * 0x9E3779B97F4A7C15), so a run's samples depend
// only on (seed, r) and never on scheduling or on which other runs execute.

#include "ionspice/circuit.hpp"
#include "ionspice/engine.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ionspice {

enum class VariedParameter { RpFwd, RpRev };

[[nodiscard]] std::string_view to_string(VariedParameter p) noexcept;

struct VariationEntry {
    VariedParameter parameter = VariedParameter::RpFwd;
    /// Mean of ln(value). Unset centres the distribution on each diode's
    /// nominal value (median = nominal), which keeps sigma_log = 0 draws
    /// bit-identical to the nominal parameter.
    std::optional<double> mu_log;
    double sigma_log = 0.0;
};

struct VariationSpec {
    std::vector<VariationEntry> entries;
    std::uint64_t seed = 0;
    std::size_t n_runs = 1;

    /// Throws DomainError on negative sigma or non-finite mu.
    void validate() const;

    /// Both junction resistances centred on nominal.
    [[nodiscard]] static VariationSpec centered(double sigma_fwd, double sigma_rev, std::uint64_t seed,
                                                std::size_t n_runs);
};

using Rng = std::mt19937_64;

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Independent generator for run `run` of an ensemble seeded with `seed`.
[[nodiscard]] Rng run_stream(std::uint64_t seed, std::uint64_t run);

/// Draws the listed parameters; all others keep their nominal value.
[[nodiscard]] DiodeParams sample_diode(const DiodeParams& nominal, const VariationSpec& v, Rng& rng);

struct SampledDiode {
    std::string name;
    DiodeParams params;
};

/// Copy of `tmpl` with freshly sampled per-diode overrides (element order).
[[nodiscard]] Circuit sample_circuit(const Circuit& tmpl, const VariationSpec& v, Rng& rng,
                                     std::vector<SampledDiode>* sampled = nullptr);

struct LognormalFit {
    double mu_log = 0.0;
    double sigma_log = 0.0;  ///< sample (n - 1) standard deviation of ln(x)
};

/// Throws DomainError for fewer than two samples or a non-positive sample.
[[nodiscard]] LognormalFit fit_lognormal(std::span<const double> samples);

/// Junction resistance implied by a steady current at bias v: v / i - r_e.
[[nodiscard]] double junction_resistance_from_current(double v, double i_ss, double r_e);

/// Variation entries fitted to measured steady currents at +v (i_on) and
/// -v (i_off) with a shared series resistance.
[[nodiscard]] VariationSpec variation_from_currents(std::span<const double> i_on, std::span<const double> i_off,
                                                    double v, double r_e, std::uint64_t seed, std::size_t n_runs);

struct DcAnalysis {
    SourceValues sources;
};

struct TransientAnalysis {
    TransientOptions options;
};

using Analysis = std::variant<DcAnalysis, TransientAnalysis>;

using AnalysisResult = std::variant<DcSolution, TransientResult>;

struct OutcomeExtractor {
    std::vector<std::string> names;
    std::function<std::vector<double>(const AnalysisResult&)> extract;
};

/// DC: the signal values. Transient: the final value of each signal.
[[nodiscard]] OutcomeExtractor observe_signals(std::vector<std::string> signals);

struct RunRecord {
    std::size_t index = 0;
    bool ok = false;
    std::string error;
    std::vector<double> outcomes;
    std::vector<SampledDiode> sampled;
    std::vector<std::string> warnings;
};

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;  ///< sample (n - 1) convention; 0 for one value
    double min = 0.0;
    double max = 0.0;
    std::vector<std::pair<double, double>> quantiles;  ///< (probability, value)
};

/// Linear-interpolation quantiles at 5/25/50/75/95 %.
[[nodiscard]] Summary summarize(std::span<const double> values);

using SuccessPredicate = std::function<bool(const std::vector<double>&)>;

struct EnsembleResult {
    std::vector<std::string> outcome_names;
    std::vector<RunRecord> runs;
    std::vector<Summary> summary;  ///< per outcome, over successful runs
    std::size_t failed_runs = 0;
    std::optional<std::size_t> successes;  ///< runs meeting the predicate, when one was given

    [[nodiscard]] std::vector<double> outcome_values(std::size_t outcome) const;
};

struct MonteCarloOptions {
    SolverOptions solver;
    SuccessPredicate success;
};

/// Runs v.n_runs independent solves. A failing run is recorded and skipped;
/// throws SolverError only when every run fails.
[[nodiscard]] EnsembleResult monte_carlo(const Circuit& tmpl, const VariationSpec& v, const Analysis& analysis,
                                         const OutcomeExtractor& extractor, const MonteCarloOptions& opts = {});

/// run, ok, <diode>.r_p_fwd, <diode>.r_p_rev, ..., <outcomes>
void write_runs_csv(std::ostream& out, const EnsembleResult& r);

/// JSON summary: per-outcome mean/std/min/max/quantiles, failures, successes.
void write_summary_json(std::ostream& out, const EnsembleResult& r);

}  // namespace ionspice
