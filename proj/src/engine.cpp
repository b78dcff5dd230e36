#include "ionspice/engine.hpp"

#include "ionspice/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace ionspice {

namespace {

constexpr int kGroundIndex = -1;

struct DiodeInst {
    std::string name;
    int anode = kGroundIndex;
    int cathode = kGroundIndex;
    int internal = kGroundIndex;
    DiodeParams p;
    double g_e = 0.0;
};

struct ResistorInst {
    std::string name;
    int a = kGroundIndex;
    int b = kGroundIndex;
    double g = 0.0;
};

struct CapacitorInst {
    std::string name;
    int a = kGroundIndex;
    int b = kGroundIndex;
    double c = 0.0;
};

struct SourceInst {
    std::string name;
    int plus = kGroundIndex;
    int minus = kGroundIndex;
    Stimulus stimulus;
    int row = 0;
};

enum class Mode { Dc, Step, FixedCharge };

// Per-step integration data for every capacitive branch. Diode junctions come
// first, then capacitor elements.
struct CompanionState {
    std::vector<double> q;  // stored charge
    std::vector<double> i;  // branch current (x -> y)
};

struct PwlSolve {
    Eigen::VectorXd x;
    int iterations = 0;
    int flips = 0;
    bool fallback = false;
};

std::string encode(const std::vector<Region>& r) {
    std::string s(r.size(), 'f');
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] == Region::Reverse) s[i] = 'r';
    }
    return s;
}

void stamp_conductance(Eigen::MatrixXd& A, int a, int b, double g) {
    if (a >= 0) A(a, a) += g;
    if (b >= 0) A(b, b) += g;
    if (a >= 0 && b >= 0) {
        A(a, b) -= g;
        A(b, a) -= g;
    }
}

// Branch current i = G*v_ab + h leaving a; the constant part goes to the rhs.
void stamp_offset(Eigen::VectorXd& b, int a, int bn, double h) {
    if (a >= 0) b(a) -= h;
    if (bn >= 0) b(bn) += h;
}

}  // namespace

struct Simulator::Impl {
    SolverOptions opts;
    std::vector<std::string> node_names;
    std::map<std::string, int> node_index;
    std::vector<DiodeInst> diodes;
    std::vector<ResistorInst> resistors;
    std::vector<CapacitorInst> capacitors;
    std::vector<SourceInst> sources;
    int n_nodes = 0;  // external + internal
    int base_dim = 0; // nodes + source currents

    std::vector<Region> regions;

    Eigen::MatrixXd A;
    Eigen::VectorXd rhs;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    bool lu_valid = false;
    Mode lu_mode = Mode::Dc;
    double lu_dt = 0.0;
    Integrator lu_integrator = Integrator::BackwardEuler;
    std::vector<Region> lu_regions;

    explicit Impl(const Circuit& c, SolverOptions o) : opts(o) {
        for (const auto& n : c.nodes()) {
            if (n == kGround) continue;
            node_index[n] = static_cast<int>(node_names.size());
            node_names.push_back(n);
        }
        auto idx = [&](const std::string& n) -> int {
            if (n == kGround) return kGroundIndex;
            const auto it = node_index.find(n);
            if (it == node_index.end()) throw DomainError("unknown node '" + n + "'");
            return it->second;
        };
        int next = static_cast<int>(node_names.size());
        for (const auto& e : c.elements()) {
            if (const auto* d = e.as<IontronicDiode>()) {
                DiodeInst di;
                di.name = e.name;
                di.anode = idx(d->anode);
                di.cathode = idx(d->cathode);
                di.internal = next++;
                di.p = c.diode_params(*d);
                validate(di.p, false);
                di.g_e = 1.0 / di.p.r_e;
                diodes.push_back(std::move(di));
            } else if (const auto* r = e.as<Resistor>()) {
                if (!(r->ohms > 0.0)) throw DomainError("resistor '" + e.name + "' must be positive");
                resistors.push_back({e.name, idx(r->n1), idx(r->n2), 1.0 / r->ohms});
            } else if (const auto* cap = e.as<Capacitor>()) {
                if (!(cap->farads > 0.0)) throw DomainError("capacitor '" + e.name + "' must be positive");
                capacitors.push_back({e.name, idx(cap->n1), idx(cap->n2), cap->farads});
            } else if (const auto* v = e.as<VoltageSource>()) {
                sources.push_back({e.name, idx(v->plus), idx(v->minus), v->stimulus, 0});
            }
        }
        n_nodes = next;
        for (auto& s : sources) s.row = next++;
        base_dim = next;
        regions.assign(diodes.size(), Region::Forward);
    }

    [[nodiscard]] std::size_t n_caps() const { return diodes.size() + capacitors.size(); }

    static double volt(const Eigen::VectorXd& x, int i) { return i < 0 ? 0.0 : x(i); }

    [[nodiscard]] double vc(const Eigen::VectorXd& x, const DiodeInst& d) const {
        return volt(x, d.internal) - volt(x, d.cathode);
    }

    [[nodiscard]] std::string unknown_name(int i) const {
        if (i < static_cast<int>(node_names.size())) return "node '" + node_names[static_cast<std::size_t>(i)] + "'";
        if (i < n_nodes) {
            return "internal node of diode '" + diodes[static_cast<std::size_t>(i) - node_names.size()].name + "'";
        }
        if (i < base_dim) return "current of source '" + sources[static_cast<std::size_t>(i - n_nodes)].name + "'";
        const std::size_t k = static_cast<std::size_t>(i - base_dim);
        return k < diodes.size() ? "junction of diode '" + diodes[k].name + "'"
                                 : "capacitor '" + capacitors[k - diodes.size()].name + "'";
    }

    [[nodiscard]] int dim(Mode m) const {
        return base_dim + (m == Mode::FixedCharge ? static_cast<int>(n_caps()) : 0);
    }

    [[nodiscard]] double cap_gain(Mode m, double dt, Integrator integ) const {
        if (m != Mode::Step) return 0.0;
        return integ == Integrator::Trapezoidal ? 2.0 / dt : 1.0 / dt;
    }

    void factor(const std::vector<Region>& reg, Mode m, double dt, Integrator integ) {
        if (lu_valid && lu_mode == m && lu_regions == reg && (m != Mode::Step || (lu_dt == dt && lu_integrator == integ))) {
            return;
        }
        const int n = dim(m);
        A.setZero(n, n);
        for (const auto& r : resistors) stamp_conductance(A, r.a, r.b, r.g);
        const double k = cap_gain(m, dt, integ);
        for (std::size_t i = 0; i < diodes.size(); ++i) {
            const auto& d = diodes[i];
            stamp_conductance(A, d.anode, d.internal, d.g_e);
            double g = 1.0 / d.p.r_p(reg[i]);
            if (m == Mode::Step) g += k * d.p.c_p(reg[i]);
            stamp_conductance(A, d.internal, d.cathode, g);
        }
        for (const auto& c : capacitors) {
            if (m == Mode::Step) stamp_conductance(A, c.a, c.b, k * c.c);
        }
        for (const auto& s : sources) {
            if (s.plus >= 0) {
                A(s.plus, s.row) += 1.0;
                A(s.row, s.plus) += 1.0;
            }
            if (s.minus >= 0) {
                A(s.minus, s.row) -= 1.0;
                A(s.row, s.minus) -= 1.0;
            }
        }
        if (m == Mode::FixedCharge) {
            int row = base_dim;
            auto constrain = [&](int a, int b) {
                if (a >= 0) {
                    A(a, row) += 1.0;
                    A(row, a) += 1.0;
                }
                if (b >= 0) {
                    A(b, row) -= 1.0;
                    A(row, b) -= 1.0;
                }
                ++row;
            };
            for (const auto& d : diodes) constrain(d.internal, d.cathode);
            for (const auto& c : capacitors) constrain(c.a, c.b);
        }
        lu.compute(A);
        const auto diag = lu.matrixLU().diagonal().cwiseAbs();
        const double scale = A.cwiseAbs().maxCoeff();
        if (n > 0 && (!std::isfinite(diag.minCoeff()) || diag.minCoeff() <= 1e-14 * scale)) {
            lu_valid = false;
            Eigen::FullPivLU<Eigen::MatrixXd> full(A);
            full.setThreshold(1e-12);
            std::string where = "unknown location";
            if (full.dimensionOfKernel() > 0) {
                Eigen::Index worst = 0;
                full.kernel().col(0).cwiseAbs().maxCoeff(&worst);
                where = unknown_name(static_cast<int>(worst));
            }
            throw SolverError("singular circuit matrix at " + where +
                              " (no DC path to ground or a voltage-source loop)");
        }
        lu_valid = true;
        lu_mode = m;
        lu_dt = dt;
        lu_integrator = integ;
        lu_regions = reg;
    }

    void build_rhs(Mode m, const std::vector<double>& src_values, double dt, Integrator integ,
                   const CompanionState* state, const std::vector<double>* fixed_vc) {
        rhs.setZero(dim(m));
        for (std::size_t i = 0; i < sources.size(); ++i) rhs(sources[i].row) = src_values[i];
        if (m == Mode::Step) {
            auto h_of = [&](std::size_t k) {
                return integ == Integrator::Trapezoidal ? -(2.0 / dt) * state->q[k] - state->i[k] : -state->q[k] / dt;
            };
            for (std::size_t i = 0; i < diodes.size(); ++i) {
                stamp_offset(rhs, diodes[i].internal, diodes[i].cathode, h_of(i));
            }
            for (std::size_t j = 0; j < capacitors.size(); ++j) {
                stamp_offset(rhs, capacitors[j].a, capacitors[j].b, h_of(diodes.size() + j));
            }
        } else if (m == Mode::FixedCharge) {
            for (std::size_t k = 0; k < n_caps(); ++k) rhs(base_dim + static_cast<int>(k)) = (*fixed_vc)[k];
        }
    }

    // Current leaving `a` through capacitive branch k at the solution x.
    [[nodiscard]] double cap_current(Mode m, const Eigen::VectorXd& x, std::size_t k, double dt, Integrator integ,
                                     const CompanionState* state) const {
        if (m == Mode::Dc) return 0.0;
        if (m == Mode::FixedCharge) return x(base_dim + static_cast<int>(k));
        double q = 0.0;
        if (k < diodes.size()) {
            q = charge(diodes[k].p, vc(x, diodes[k]));
        } else {
            const auto& c = capacitors[k - diodes.size()];
            q = c.c * (volt(x, c.a) - volt(x, c.b));
        }
        const double dq = q - state->q[k];
        return integ == Integrator::Trapezoidal ? 2.0 * dq / dt - state->i[k] : dq / dt;
    }

    // Max KCL imbalance with every diode evaluated in the region its own
    // junction voltage implies. Second value is the largest branch current.
    [[nodiscard]] std::pair<double, double> residual(Mode m, const Eigen::VectorXd& x, double dt, Integrator integ,
                                                     const CompanionState* state) const {
        std::vector<double> sum(static_cast<std::size_t>(n_nodes), 0.0);
        double scale = 0.0;
        auto flow = [&](int a, int b, double i) {
            if (a >= 0) sum[static_cast<std::size_t>(a)] += i;
            if (b >= 0) sum[static_cast<std::size_t>(b)] -= i;
            scale = std::max(scale, std::abs(i));
        };
        for (const auto& r : resistors) flow(r.a, r.b, r.g * (volt(x, r.a) - volt(x, r.b)));
        for (std::size_t i = 0; i < diodes.size(); ++i) {
            const auto& d = diodes[i];
            flow(d.anode, d.internal, d.g_e * (volt(x, d.anode) - volt(x, d.internal)));
            flow(d.internal, d.cathode, branch_current(d.p, vc(x, d)));
            flow(d.internal, d.cathode, cap_current(m, x, i, dt, integ, state));
        }
        for (std::size_t j = 0; j < capacitors.size(); ++j) {
            flow(capacitors[j].a, capacitors[j].b, cap_current(m, x, diodes.size() + j, dt, integ, state));
        }
        for (const auto& s : sources) flow(s.plus, s.minus, x(s.row));
        double worst = 0.0;
        for (double v : sum) worst = std::max(worst, std::abs(v));
        return {worst, scale};
    }

    std::vector<double> source_values(double t, const SourceValues& overrides) const {
        for (const auto& [name, v] : overrides) {
            const bool found = std::any_of(sources.begin(), sources.end(), [&](const SourceInst& s) { return s.name == name; });
            if (!found) throw DomainError("no voltage source named '" + name + "'");
        }
        std::vector<double> out;
        out.reserve(sources.size());
        for (const auto& s : sources) {
            const auto it = overrides.find(s.name);
            out.push_back(it != overrides.end() ? it->second : stimulus_value(s.stimulus, t));
        }
        return out;
    }

    // Region-assignment iteration. `regions` is the warm start and receives
    // the accepted assignment.
    PwlSolve solve_pwl(Mode m, const std::vector<double>& src_values, double dt, Integrator integ,
                       const CompanionState* state, std::vector<std::string>* warnings) {
        PwlSolve out;
        const int budget = opts.flip_budget < 0 ? 4 * static_cast<int>(diodes.size()) + 10 : opts.flip_budget;
        std::set<std::string> seen;
        bool one_at_a_time = false;
        double best_res = std::numeric_limits<double>::infinity();
        Eigen::VectorXd best_x;
        std::vector<Region> best_regions;
        for (int iter = 1; iter <= opts.max_iterations; ++iter) {
            factor(regions, m, dt, integ);
            build_rhs(m, src_values, dt, integ, state, nullptr);
            Eigen::VectorXd x = lu.solve(rhs);
            if (!x.allFinite()) throw SolverError("linear solve produced non-finite values");
            out.iterations = iter;

            std::vector<Region> next = regions;
            std::size_t worst_idx = diodes.size();
            double worst_violation = -1.0;
            for (std::size_t i = 0; i < diodes.size(); ++i) {
                const double v = vc(x, diodes[i]);
                next[i] = region(v);
                if (next[i] != regions[i] && std::abs(v) > worst_violation) {
                    worst_violation = std::abs(v);
                    worst_idx = i;
                }
            }
            if (worst_idx == diodes.size()) {
                // Consistent regions: x solves the piecewise-linear system exactly.
                out.x = std::move(x);
                return out;
            }
            const double res = residual(m, x, dt, integ, state).first;
            if (res < best_res) {
                best_res = res;
                best_x = x;
                best_regions = regions;
            }
            seen.insert(encode(regions));
            if (!one_at_a_time && seen.count(encode(next))) one_at_a_time = true;
            if (one_at_a_time) {
                next = regions;
                next[worst_idx] = next[worst_idx] == Region::Forward ? Region::Reverse : Region::Forward;
            }
            int flips = 0;
            for (std::size_t i = 0; i < diodes.size(); ++i) flips += next[i] != regions[i];
            out.flips += flips;
            if (out.flips > budget) {
                std::string cycling;
                for (std::size_t i = 0; i < diodes.size(); ++i) {
                    if (next[i] != regions[i]) cycling += (cycling.empty() ? "" : ", ") + diodes[i].name;
                }
                if (warnings) {
                    warnings->push_back("region flip budget exhausted; kept the assignment with the smallest KCL "
                                        "residual (oscillating diodes: " + cycling + ")");
                }
                regions = best_regions;
                out.x = best_x;
                out.fallback = true;
                return out;
            }
            regions = std::move(next);
        }
        throw SolverError("region iteration did not converge within " + std::to_string(opts.max_iterations) +
                          " iterations");
    }

    DcSolution make_dc_solution(const Eigen::VectorXd& x, const PwlSolve& s, const std::vector<double>& src_values) const {
        DcSolution sol;
        sol.iterations = s.iterations;
        sol.region_flips = s.flips;
        for (std::size_t i = 0; i < node_names.size(); ++i) sol.node_voltages[node_names[i]] = x(static_cast<int>(i));
        sol.node_voltages[kGround] = 0.0;
        for (const auto& r : resistors) sol.branch_currents[r.name] = r.g * (volt(x, r.a) - volt(x, r.b));
        for (const auto& d : diodes) {
            sol.branch_currents[d.name] = d.g_e * (volt(x, d.anode) - volt(x, d.internal));
            const double v = vc(x, d);
            sol.diode_states[d.name] = DiodeState{v, charge(d.p, v)};
        }
        for (const auto& c : capacitors) sol.branch_currents[c.name] = 0.0;
        for (std::size_t i = 0; i < sources.size(); ++i) sol.branch_currents[sources[i].name] = -x(sources[i].row);
        (void)src_values;
        const auto [res, scale] = residual(Mode::Dc, x, 0.0, Integrator::BackwardEuler, nullptr);
        sol.kcl_residual = res;
        sol.current_scale = scale;
        return sol;
    }

    DcSolution dc(const std::vector<double>& src_values) {
        std::vector<std::string> warnings;
        PwlSolve s = solve_pwl(Mode::Dc, src_values, 0.0, Integrator::BackwardEuler, nullptr, &warnings);
        DcSolution sol = make_dc_solution(s.x, s, src_values);
        if (sol.kcl_residual > std::max(opts.i_tol, 1e-9 * sol.current_scale)) {
            warnings.push_back("KCL residual " + format_number(sol.kcl_residual) + " A exceeds tolerance");
        }
        sol.warnings = std::move(warnings);
        return sol;
    }

    [[nodiscard]] std::vector<std::string> all_signal_names() const {
        std::vector<std::string> names;
        for (const auto& n : node_names) names.push_back("V(" + n + ")");
        for (const auto& d : diodes) {
            names.push_back("I(" + d.name + ")");
            names.push_back("VC(" + d.name + ")");
        }
        for (const auto& r : resistors) names.push_back("I(" + r.name + ")");
        for (const auto& c : capacitors) names.push_back("I(" + c.name + ")");
        for (const auto& s : sources) {
            names.push_back("I(" + s.name + ")");
            names.push_back("P(" + s.name + ")");
        }
        return names;
    }

    // Values in all_signal_names() order.
    void signal_values(const Eigen::VectorXd& x, const CompanionState& st, std::vector<double>& out) const {
        out.clear();
        for (std::size_t i = 0; i < node_names.size(); ++i) out.push_back(x(static_cast<int>(i)));
        for (const auto& d : diodes) {
            out.push_back(d.g_e * (volt(x, d.anode) - volt(x, d.internal)));
            out.push_back(vc(x, d));
        }
        for (const auto& r : resistors) out.push_back(r.g * (volt(x, r.a) - volt(x, r.b)));
        for (std::size_t j = 0; j < capacitors.size(); ++j) out.push_back(st.i[diodes.size() + j]);
        for (const auto& s : sources) {
            const double delivered = -x(s.row);
            out.push_back(delivered);
            out.push_back((volt(x, s.plus) - volt(x, s.minus)) * delivered);
        }
    }

    TransientResult transient(const TransientOptions& o) {
        const double tau_min = min_reverse_tau();
        double dt = o.dt;
        if (!(dt > 0.0)) {
            if (!std::isfinite(tau_min)) throw DomainError("transient needs an explicit dt for a circuit without diodes");
            dt = tau_min / 100.0;
        }
        if (!o.force_dt && std::isfinite(tau_min) && dt > tau_min / 5.0) {
            throw DomainError("dt = " + format_number(dt) + " s exceeds tau_min/5 = " + format_number(tau_min / 5.0) +
                              " s; reduce dt or force it");
        }
        const double span = o.t_end - o.t_start;
        if (!(span >= dt * (1.0 - 1e-12))) throw DomainError("transient window must be at least one time step");
        const Integrator integ = o.integrator;

        TransientResult tr;
        tr.dt = dt;
        const auto names = all_signal_names();
        std::vector<std::size_t> keep;
        if (o.observe.empty()) {
            keep.resize(names.size());
            std::iota(keep.begin(), keep.end(), 0);
        } else {
            for (const auto& want : o.observe) {
                const auto it = std::find(names.begin(), names.end(), want);
                if (it == names.end()) throw DomainError("unknown signal '" + want + "'");
                keep.push_back(static_cast<std::size_t>(it - names.begin()));
            }
        }
        for (auto k : keep) tr.names.push_back(names[k]);
        tr.series.resize(keep.size());

        CompanionState st;
        st.q.assign(n_caps(), 0.0);
        st.i.assign(n_caps(), 0.0);
        std::vector<double> buf;
        auto record = [&](double t, const Eigen::VectorXd& x) {
            signal_values(x, st, buf);
            tr.times.push_back(t);
            for (std::size_t k = 0; k < keep.size(); ++k) tr.series[k].push_back(buf[keep[k]]);
        };

        Eigen::VectorXd x;
        const auto src0 = source_values(o.t_start, {});
        if (o.zero_initial) {
            std::vector<double> fixed(n_caps(), 0.0);
            for (std::size_t i = 0; i < diodes.size(); ++i) regions[i] = region(0.0);
            factor(regions, Mode::FixedCharge, 0.0, integ);
            build_rhs(Mode::FixedCharge, src0, 0.0, integ, nullptr, &fixed);
            x = lu.solve(rhs);
            if (!x.allFinite()) throw SolverError("initial-condition solve produced non-finite values");
            for (std::size_t k = 0; k < n_caps(); ++k) st.i[k] = x(base_dim + static_cast<int>(k));
            tr.max_kcl_residual = residual(Mode::FixedCharge, x, 0.0, integ, nullptr).first;
            x.conservativeResize(base_dim);
        } else {
            PwlSolve s = solve_pwl(Mode::Dc, src0, 0.0, integ, nullptr, nullptr);
            x = s.x;
            for (std::size_t i = 0; i < diodes.size(); ++i) st.q[i] = charge(diodes[i].p, vc(x, diodes[i]));
            for (std::size_t j = 0; j < capacitors.size(); ++j) {
                st.q[diodes.size() + j] = capacitors[j].c * (volt(x, capacitors[j].a) - volt(x, capacitors[j].b));
            }
            tr.max_kcl_residual = residual(Mode::Dc, x, 0.0, integ, nullptr).first;
        }
        record(o.t_start, x);

        const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
        const std::size_t every = std::max<std::size_t>(1, o.record_every);
        double t_prev = o.t_start;
        std::vector<Region> before;
        for (std::size_t k = 1; k <= steps; ++k) {
            const double t = k == steps ? o.t_end : o.t_start + static_cast<double>(k) * dt;
            const double h = t - t_prev;
            const auto src = source_values(t, {});
            before = regions;
            PwlSolve s;
            try {
                s = solve_pwl(Mode::Step, src, h, integ, &st, nullptr);
            } catch (const SolverError& e) {
                throw SolverError(std::string(e.what()) + " at t = " + format_number(t) + " s");
            }
            x = std::move(s.x);
            tr.max_kcl_residual = std::max(tr.max_kcl_residual, residual(Mode::Step, x, h, integ, &st).first);
            for (std::size_t c = 0; c < n_caps(); ++c) {
                const double i_new = cap_current(Mode::Step, x, c, h, integ, &st);
                double q_new = 0.0;
                if (c < diodes.size()) {
                    q_new = charge(diodes[c].p, vc(x, diodes[c]));
                } else {
                    const auto& cap = capacitors[c - diodes.size()];
                    q_new = cap.c * (volt(x, cap.a) - volt(x, cap.b));
                }
                st.q[c] = q_new;
                st.i[c] = i_new;
            }
            for (std::size_t i = 0; i < diodes.size(); ++i) {
                if (regions[i] != before[i]) tr.events.push_back({t, diodes[i].name, before[i], regions[i]});
            }
            if (k % every == 0 || k == steps) record(t, x);
            t_prev = t;
        }
        return tr;
    }

    [[nodiscard]] double min_reverse_tau() const {
        double t = std::numeric_limits<double>::infinity();
        for (const auto& d : diodes) t = std::min(t, time_constant(d.p, Region::Reverse));
        return t;
    }
};

Simulator::Simulator(const Circuit& c, SolverOptions opts) : impl_(std::make_unique<Impl>(c, opts)) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

DcSolution Simulator::dc_operating_point(const SourceValues& overrides) {
    return impl_->dc(impl_->source_values(0.0, overrides));
}

std::vector<DcSolution> Simulator::dc_sweep(const std::string& source, std::span<const double> values,
                                            const SourceValues& overrides) {
    const bool found = std::any_of(impl_->sources.begin(), impl_->sources.end(),
                                   [&](const SourceInst& s) { return s.name == source; });
    if (!found) throw DomainError("no voltage source named '" + source + "'");
    std::vector<DcSolution> out;
    out.reserve(values.size());
    SourceValues ov = overrides;
    for (double v : values) {
        ov[source] = v;
        try {
            out.push_back(impl_->dc(impl_->source_values(0.0, ov)));
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " (sweep value " + source + " = " + format_number(v) + ")");
        }
    }
    return out;
}

TransientResult Simulator::transient(const TransientOptions& opts) {
    return impl_->transient(opts);
}

double Simulator::min_reverse_time_constant() const {
    return impl_->min_reverse_tau();
}

std::vector<std::string> Simulator::signal_names() const {
    return impl_->all_signal_names();
}

DcSolution dc_operating_point(const Circuit& c, const SourceValues& overrides, const SolverOptions& opts) {
    return Simulator(c, opts).dc_operating_point(overrides);
}

std::vector<DcSolution> dc_sweep(const Circuit& c, const std::string& source, std::span<const double> values,
                                 const SolverOptions& opts) {
    return Simulator(c, opts).dc_sweep(source, values);
}

TransientResult transient(const Circuit& c, const TransientOptions& opts) {
    return Simulator(c, opts.solver).transient(opts);
}

double DcSolution::signal(std::string_view name) const {
    auto inner = [&](std::string_view prefix) -> std::optional<std::string> {
        if (name.size() > prefix.size() + 2 && name.substr(0, prefix.size()) == prefix && name[prefix.size()] == '(' &&
            name.back() == ')') {
            return std::string(name.substr(prefix.size() + 1, name.size() - prefix.size() - 2));
        }
        return std::nullopt;
    };
    if (auto n = inner("V")) {
        if (auto it = node_voltages.find(*n); it != node_voltages.end()) return it->second;
    } else if (auto e = inner("I")) {
        if (auto it = branch_currents.find(*e); it != branch_currents.end()) return it->second;
    } else if (auto d = inner("VC")) {
        if (auto it = diode_states.find(*d); it != diode_states.end()) return it->second.vc;
    }
    throw DomainError("unknown signal '" + std::string(name) + "'");
}

bool TransientResult::has_signal(std::string_view name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

const std::vector<double>& TransientResult::signal(std::string_view name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw DomainError("signal '" + std::string(name) + "' was not recorded");
    return series[static_cast<std::size_t>(it - names.begin())];
}

DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> y, double t_event,
                               const DecayFitOptions& o) {
    if (t.size() != y.size()) throw DomainError("time and value series differ in length");
    const auto first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t_event) - t.begin());
    const std::size_t n = t.size() - first;
    if (n < 5) throw DomainError("too few samples after the event to fit a decay");

    const std::size_t tail_len = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(o.tail_fraction * static_cast<double>(n))));
    const std::size_t tail_begin = t.size() - tail_len;
    double steady = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t k = tail_begin; k < t.size(); ++k) {
        steady += y[k];
        lo = std::min(lo, y[k]);
        hi = std::max(hi, y[k]);
    }
    steady /= static_cast<double>(tail_len);

    std::size_t start = first;
    for (std::size_t k = first; k < std::min(t.size(), first + o.peak_search + 1); ++k) {
        if (std::abs(y[k] - steady) > std::abs(y[start] - steady)) start = k;
    }
    const double amp = y[start] - steady;
    if (amp == 0.0) throw DomainError("signal shows no transient after the event");
    if (hi - lo > o.settle_tolerance * std::abs(amp)) {
        throw DomainError("signal has not settled: final window varies by more than " +
                          format_number(100.0 * o.settle_tolerance) + "% of the step");
    }

    std::size_t k1 = t.size();
    for (std::size_t k = start; k < t.size(); ++k) {
        if ((y[k] - steady) / amp <= o.window_high) {
            k1 = k;
            break;
        }
    }
    if (k1 == t.size()) throw DomainError("normalized signal never enters the fit window");
    std::size_t k2 = k1;
    while (k2 < t.size() && (y[k2] - steady) / amp >= o.window_low) ++k2;

    double prev = std::numeric_limits<double>::infinity();
    double st = 0.0, sz = 0.0, stt = 0.0, stz = 0.0;
    for (std::size_t k = k1; k < k2; ++k) {
        const double z = (y[k] - steady) / amp;
        if (!(z > 0.0)) throw DomainError("normalized signal is non-positive inside the fit window");
        if (z > prev + o.monotone_tolerance) throw DomainError("normalized signal is not monotone inside the fit window");
        prev = z;
        const double lz = std::log(z);
        const double tk = t[k] - t[start];
        st += tk;
        sz += lz;
        stt += tk * tk;
        stz += tk * lz;
    }
    const auto m = static_cast<double>(k2 - k1);
    if (k2 - k1 < 3) throw DomainError("too few samples inside the fit window");
    const double slope = (m * stz - st * sz) / (m * stt - st * st);
    if (!(slope < 0.0)) throw DomainError("signal does not decay toward its settled value");
    return {-1.0 / slope, y[start], steady, k2 - k1};
}

double extract_time_constant(const TransientResult& tr, std::string_view signal, double t_event) {
    return fit_exponential_decay(tr.times, tr.signal(signal), t_event).tau;
}

}  // namespace ionspice
