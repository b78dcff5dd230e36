#pragma once

// Iontronic bipolar diode compact model.
//
//   anode --[ R_e ]--+--[ R_p(vc) ]--+-- cathode
//                    |               |
//                    +--[ C_p(vc) ]--+
//
// R_p and C_p are piecewise constant in the junction voltage vc: one value
// for vc >= 0 (forward) and one for vc < 0 (reverse). Charge q(vc) is the
// continuous piecewise-linear integral of C_p, so a region switch never
// creates or destroys charge.

#include <complex>
#include <optional>
#include <string>
#include <string_view>

namespace ionspice {

enum class Region { Forward, Reverse };

[[nodiscard]] std::string_view to_string(Region r) noexcept;

struct DiodeParams {
    double r_e = 5.5e5;       ///< series parasitic resistance (ohm)
    double r_p_fwd = 2.9e5;   ///< junction resistance, vc >= 0 (ohm)
    double r_p_rev = 4.84e7;  ///< junction resistance, vc < 0 (ohm)
    double c_p_fwd = 3.74e-4; ///< junction capacitance, vc >= 0 (F)
    double c_p_rev = 9.93e-7; ///< junction capacitance, vc < 0 (F)

    [[nodiscard]] double r_p(Region r) const noexcept { return r == Region::Forward ? r_p_fwd : r_p_rev; }
    [[nodiscard]] double c_p(Region r) const noexcept { return r == Region::Forward ? c_p_fwd : c_p_rev; }

    friend bool operator==(const DiodeParams&, const DiodeParams&) = default;
};

/// Throws DomainError unless every value is finite and positive. When
/// `require_rectifying` is set, also requires r_p_rev > r_p_fwd.
void validate(const DiodeParams& p, bool require_rectifying = true);

/// Constant-phase element (fractional capacitor).
struct CpeParams {
    double y0 = 1.0;     ///< S*s^alpha
    double alpha = 1.0;  ///< 0 < alpha <= 1
};

/// Junction state of one diode. `q` is the primary variable.
struct DiodeState {
    double vc = 0.0;
    double q = 0.0;
};

/// Forward iff vc >= 0. Throws DomainError for non-finite vc.
[[nodiscard]] Region region(double vc);

/// Current through the junction resistance.
[[nodiscard]] double branch_current(const DiodeParams& p, double vc);

/// Charge stored on the junction capacitance; continuous with q(0) = 0.
[[nodiscard]] double charge(const DiodeParams& p, double vc);

/// Inverse of charge(): the junction voltage holding charge q.
[[nodiscard]] double junction_voltage(const DiodeParams& p, double q);

struct SmallSignal {
    double conductance = 0.0;
    double capacitance = 0.0;
};

/// Region-local linearization; at vc == 0 the forward pair is returned.
[[nodiscard]] SmallSignal small_signal(const DiodeParams& p, double vc);

/// Single time constant of a diode driven by an ideal source in one region:
/// C_p * R_p * R_e / (R_p + R_e).
[[nodiscard]] double time_constant(const DiodeParams& p, Region r) noexcept;

/// Closed-form response of a single diode driven by a constant voltage
/// `v_in`, starting from junction charge `q0`, valid while the junction
/// stays in one region.
class StepSolution {
public:
    /// Empty when the trajectory from q0 toward the steady state would cross
    /// vc = 0, in which case numeric integration is required.
    [[nodiscard]] static std::optional<StepSolution> solve(const DiodeParams& p, double v_in, double q0);

    [[nodiscard]] double current(double t) const;
    [[nodiscard]] double charge(double t) const;
    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] Region region() const noexcept { return region_; }
    [[nodiscard]] double steady_current() const noexcept { return i_ss_; }

private:
    StepSolution() = default;

    Region region_ = Region::Forward;
    double r_e_ = 0.0;
    double c_ = 0.0;
    double tau_ = 0.0;
    double i_ss_ = 0.0;
    double q_ss_ = 0.0;
    double amplitude_ = 0.0;  // q(t) = q_ss + amplitude * exp(-t / tau)
};

/// Diode current at time t >= 0 after a step to `v_in` from charge `q0`;
/// empty when the single-region precondition fails.
[[nodiscard]] std::optional<double> analytic_step_response(const DiodeParams& p, double v_in, double q0, double t);

/// 1 / (y0 * (j*omega)^alpha), principal branch. omega must be positive.
[[nodiscard]] std::complex<double> cpe_impedance(const CpeParams& c, double omega);

/// (r_e + r_p_rev) / (r_e + r_p_fwd)
[[nodiscard]] double rectification_ratio(const DiodeParams& p) noexcept;

/// Flat key=value document with keys r_e, r_p_fwd, r_p_rev, c_p_fwd, c_p_rev.
/// Missing keys keep their default; '#' starts a comment.
[[nodiscard]] DiodeParams parse_params(std::string_view text);
[[nodiscard]] std::string format_params(const DiodeParams& p);

/// Sets one parameter by key name. Returns false for an unknown key.
bool set_param(DiodeParams& p, std::string_view key, double value);

/// Shortest decimal form that parses back to exactly `v`.
[[nodiscard]] std::string format_number(double v);

/// Strict SI number: decimal or scientific notation, no unit suffixes.
[[nodiscard]] std::optional<double> parse_number(std::string_view s);

}  // namespace ionspice
