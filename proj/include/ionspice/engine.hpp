#pragma once

// Circuit solver.
//
// Modified nodal analysis with one unknown per non-ground node, one internal
// node per diode (between R_e and the R_p/C_p pair) and one current unknown
// per voltage source. The diode model is piecewise linear, so Newton's method
// reduces to region-assignment iteration: solve under assumed regions,
// re-derive regions from the solved junction voltages, repeat.
//
// Signal names used by results and CSV export:
//   V(node)   node voltage
//   I(elem)   element current (diode: anode->cathode; source: delivered out of '+')
//   VC(diode) junction voltage
//   P(source) power delivered by a source

#include "ionspice/circuit.hpp"

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ionspice {

struct SolverOptions {
    double i_tol = 1e-12;   ///< KCL residual floor per node (A); larger residuals raise a warning
    int max_iterations = 100;
    int flip_budget = -1;   ///< total region flips allowed; <0 means 4*diodes+10
};

/// Voltage-source values that replace the netlist stimulus (by source name).
using SourceValues = std::map<std::string, double>;

struct DcSolution {
    std::map<std::string, double> node_voltages;
    std::map<std::string, double> branch_currents;
    std::map<std::string, DiodeState> diode_states;
    int iterations = 0;
    int region_flips = 0;
    double kcl_residual = 0.0;     ///< max |sum of currents| over nodes (A)
    double current_scale = 0.0;    ///< max |branch current| (A)
    std::vector<std::string> warnings;

    /// Looks up V(node), I(elem) or VC(diode). Throws DomainError if unknown.
    [[nodiscard]] double signal(std::string_view name) const;
};

enum class Integrator { BackwardEuler, Trapezoidal };

struct TransientOptions {
    double t_start = 0.0;
    double t_end = 0.0;
    double dt = 0.0;                 ///< <= 0 selects tau_min / 100
    Integrator integrator = Integrator::BackwardEuler;
    bool zero_initial = false;       ///< start from zero stored charge instead of the DC point
    bool force_dt = false;           ///< accept dt > tau_min / 5
    std::size_t record_every = 1;    ///< store every n-th step (first and last always stored)
    std::vector<std::string> observe;  ///< signals to store; empty stores all
    SolverOptions solver;
};

struct RegionEvent {
    double time = 0.0;
    std::string diode;
    Region from = Region::Forward;
    Region to = Region::Forward;
};

struct TransientResult {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> series;  ///< series[k] belongs to names[k]
    std::vector<RegionEvent> events;
    double max_kcl_residual = 0.0;
    double dt = 0.0;

    [[nodiscard]] bool has_signal(std::string_view name) const;
    /// Throws DomainError if the signal was not recorded.
    [[nodiscard]] const std::vector<double>& signal(std::string_view name) const;
};

class Simulator {
public:
    explicit Simulator(const Circuit& c, SolverOptions opts = {});
    ~Simulator();
    Simulator(Simulator&&) noexcept;
    Simulator& operator=(Simulator&&) noexcept;

    /// Sources are evaluated at t = 0 unless overridden.
    [[nodiscard]] DcSolution dc_operating_point(const SourceValues& overrides = {});

    /// One solution per value, each warm-started from the previous one.
    [[nodiscard]] std::vector<DcSolution> dc_sweep(const std::string& source, std::span<const double> values,
                                                   const SourceValues& overrides = {});

    [[nodiscard]] TransientResult transient(const TransientOptions& opts);

    /// Smallest reverse-region time constant over all diodes (infinity without diodes).
    [[nodiscard]] double min_reverse_time_constant() const;

    /// Names of every signal a transient run can record.
    [[nodiscard]] std::vector<std::string> signal_names() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

[[nodiscard]] DcSolution dc_operating_point(const Circuit& c, const SourceValues& overrides = {},
                                            const SolverOptions& opts = {});
[[nodiscard]] std::vector<DcSolution> dc_sweep(const Circuit& c, const std::string& source,
                                               std::span<const double> values, const SolverOptions& opts = {});
[[nodiscard]] TransientResult transient(const Circuit& c, const TransientOptions& opts);

struct DecayFit {
    double tau = 0.0;
    double initial = 0.0;   ///< signal value used as the normalization origin
    double steady = 0.0;    ///< settled value
    std::size_t points = 0; ///< samples inside the fit window
};

struct DecayFitOptions {
    double tail_fraction = 0.05;  ///< trailing part of the window used to estimate the settled value
    double settle_tolerance = 0.01;
    double window_low = 0.05;     ///< normalized-signal fit window
    double window_high = 0.9;
    double monotone_tolerance = 0.02;
    std::size_t peak_search = 10; ///< samples after the event searched for the initial value
};

/// Normalizes (y - y_ss) / (y_0 - y_ss) over samples with t >= t_event and
/// fits log(normalized) = -t / tau by least squares inside the window.
/// Throws DomainError when the signal has not settled or is not a decay.
[[nodiscard]] DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> y, double t_event,
                                             const DecayFitOptions& opts = {});

/// Time constant of a recorded signal after an event.
[[nodiscard]] double extract_time_constant(const TransientResult& tr, std::string_view signal, double t_event);

}  // namespace ionspice
