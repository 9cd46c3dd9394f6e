#include "crane/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

namespace crane::sim {

using model::CraneParams;
using model::State4;
using model::State6;
using synthesis::Gain;

void Scenario::validate() const {
    params.validate();
    const int n = dim();
    if (static_cast<int>(start.size()) != n)
        throw Error("Scenario: start state must have " + std::to_string(n) + " components");
    if (static_cast<int>(target.size()) != n)
        throw Error("Scenario: target state must have " + std::to_string(n) + " components");
    poles.validate(n);
    if (model == CraneModelKind::varying6) {
        if (std::fabs(target[2]) > 0.0 || std::fabs(target[3]) > 0.0 ||
            std::fabs(target[4]) > 0.0 || std::fabs(target[5]) > 0.0)
            throw Error("Scenario: target must be an equilibrium (zero sway and velocities)");
        if (assignment && !assignment->covers(poles))
            throw Error("Scenario: channel assignment does not partition the pole set");
    } else {
        if (std::fabs(target[1]) > 0.0 || std::fabs(target[2]) > 0.0 || std::fabs(target[3]) > 0.0)
            throw Error("Scenario: target must be an equilibrium (zero sway and velocities)");
    }
    if (!(horizon > 0.0)) throw Error("Scenario: horizon must be positive");
    if (!(step > 0.0)) throw Error("Scenario: step must be positive");
    if (!(settle_fraction > 0.0 && settle_fraction < 1.0))
        throw Error("Scenario: settle_fraction must lie in (0,1)");
}

synthesis::ChannelAssignment effective_assignment(const Scenario& sc) {
    if (sc.assignment) return *sc.assignment;
    return synthesis::ChannelAssignment::consecutive(sc.poles);
}

Gain synthesize_gain(const Scenario& sc) {
    sc.validate();
    numkit::Mat a, b;
    if (sc.model == CraneModelKind::varying6) {
        model::linearize6(sc.params, a, b);
        return synthesis::place_decoupled(a, b, effective_assignment(sc));
    }
    model::linearize4(sc.params, a, b);
    return synthesis::ackermann(a, b, sc.poles);
}

namespace {

State6 state6_of(std::span<const double> y) {
    return State6{y[0], y[1], y[2], y[3], y[4], y[5]};
}

State4 state4_of(std::span<const double> y) {
    return State4{y[0], y[1], y[2], y[3]};
}

// Feedback in physical coordinates for the varying-rope loop:
// u = -Ktilde * Phi^-1(x~).
model::ControlU feedback6(const numkit::Mat& kt, std::span<const double> y, const State6& target) {
    const State6 x = model::transform_phi_inverse(state6_of(y), target);
    const auto xa = x.to_array();
    model::ControlU u;
    double* uc[3] = {&u.u1, &u.u2, &u.u3};
    for (int i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 6; ++j) acc += kt(i, j) * xa[j];
        *uc[i] = -acc;
    }
    return u;
}

double feedback4(const numkit::Mat& k, std::span<const double> y,
                 const std::vector<double>& target) {
    double acc = 0.0;
    for (int j = 0; j < 4; ++j) acc += k(0, j) * (y[j] - target[j]);
    return -acc; // u1 is the trolley force here
}

// d(x~)/dt = J * G(Phi^-1(x~), u), J = diag(1,-1,1,1,-1,1).
void deriv6_shifted(const State6& target, const CraneParams& p, std::span<const double> y,
                    const model::ControlU& u, std::span<double> dy) {
    const State6 x = model::transform_phi_inverse(state6_of(y), target);
    const auto d = model::deriv6(x, u, p);
    const auto signs = model::phi_sign();
    for (int i = 0; i < 6; ++i) dy[i] = signs[i] * d[i];
}

struct Recorder {
    Trajectory* tr;
    const Scenario* sc;
    std::function<void(double, const std::vector<double>&, std::vector<double>&,
                       std::vector<double>&)>
        controls_and_forces;
    bool rope_warned = false;

    void operator()(double t, const std::vector<double>& y) {
        tr->times.push_back(t);
        tr->states.push_back(y);
        std::vector<double> u, f;
        controls_and_forces(t, y, u, f);
        tr->controls.push_back(std::move(u));
        tr->forces.push_back(std::move(f));
        if (sc->model == CraneModelKind::varying6 && y[1] < 0.0 && !rope_warned) {
            rope_warned = true;
            char buf[96];
            std::snprintf(buf, sizeof buf, "rope length went negative at t=%.6g s", t);
            tr->warnings.emplace_back(buf);
        }
    }
};

Trajectory run(const Scenario& sc, const ode::Rhs& rhs, Recorder& rec) {
    Trajectory& tr = *rec.tr;
    tr.state_dim = sc.dim();
    auto emit = [&rec](double t, const std::vector<double>& y) { rec(t, y); };
    if (sc.adaptive) {
        ode::AdaptiveOptions opt;
        opt.abs_tol = sc.abs_tol;
        opt.rel_tol = sc.rel_tol;
        opt.h_init = sc.step;
        ode::integrate_rkf45(rhs, sc.start, 0.0, sc.horizon, opt, emit);
    } else {
        ode::integrate_rk4(rhs, sc.start, 0.0, sc.horizon, sc.step, emit);
    }
    return std::move(tr);
}

} // namespace

stability::ClosedLoopRhs shifted_closed_loop(const Scenario& sc, const Gain& k) {
    sc.validate();
    if (sc.model == CraneModelKind::varying6) {
        const State6 target = State6::from_array(
            {sc.target[0], sc.target[1], sc.target[2], sc.target[3], sc.target[4], sc.target[5]});
        const numkit::Mat kt = synthesis::gain_transform(k).k;
        const CraneParams p = sc.params;
        return [target, kt, p](std::span<const double> e, std::span<double> de) {
            std::vector<double> y(6);
            const auto ta = target.to_array();
            for (int i = 0; i < 6; ++i) y[i] = ta[i] + e[i];
            const model::ControlU u = feedback6(kt, y, target);
            deriv6_shifted(target, p, y, u, de);
        };
    }
    const numkit::Mat km = k.k;
    const CraneParams p = sc.params;
    return [km, p](std::span<const double> e, std::span<double> de) {
        double u1 = 0.0;
        for (int j = 0; j < 4; ++j) u1 -= km(0, j) * e[j];
        const auto d = model::deriv4(State4{e[0], e[1], e[2], e[3]}, u1, p);
        for (int i = 0; i < 4; ++i) de[i] = d[i];
    };
}

Trajectory integrate_closed_loop(const Scenario& sc, const Gain& k) {
    sc.validate();
    Trajectory tr;
    Recorder rec;
    rec.tr = &tr;
    rec.sc = &sc;

    if (sc.model == CraneModelKind::varying6) {
        const State6 target = State6::from_array(
            {sc.target[0], sc.target[1], sc.target[2], sc.target[3], sc.target[4], sc.target[5]});
        const numkit::Mat kt = synthesis::gain_transform(k).k;
        const CraneParams p = sc.params;

        ode::Rhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
            deriv6_shifted(target, p, y, feedback6(kt, y, target), dy);
        };
        rec.controls_and_forces = [&](double, const std::vector<double>& y, std::vector<double>& u,
                                      std::vector<double>& f) {
            const model::ControlU uu = feedback6(kt, y, target);
            const model::Forces ff = model::forces_from_u(state6_of(y), uu, p);
            u = {uu.u1, uu.u2, uu.u3};
            f = {ff.Fz, ff.Fl, ff.Ftheta};
        };
        return run(sc, rhs, rec);
    }

    const numkit::Mat km = k.k;
    const CraneParams p = sc.params;
    const std::vector<double> target = sc.target;

    ode::Rhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
        const auto d = model::deriv4(state4_of(y), feedback4(km, y, target), p);
        for (int i = 0; i < 4; ++i) dy[i] = d[i];
    };
    rec.controls_and_forces = [&](double, const std::vector<double>& y, std::vector<double>& u,
                                  std::vector<double>& f) {
        const double u1 = feedback4(km, y, target);
        u = {u1};
        f = {u1}; // u1 is the trolley force in this model
    };
    return run(sc, rhs, rec);
}

ForceProfile ForceProfile::from_trajectory(const Trajectory& tr) {
    ForceProfile p;
    p.force_dim = tr.forces.empty() ? 0 : static_cast<int>(tr.forces.front().size());
    p.times = tr.times;
    p.forces = tr.forces;
    return p;
}

std::vector<double> ForceProfile::at(double t) const {
    if (times.empty()) throw Error("ForceProfile: empty profile");
    if (t <= times.front()) return forces.front();
    if (t >= times.back()) return forces.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    std::vector<double> out(forces[lo].size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (1.0 - w) * forces[lo][i] + w * forces[hi][i];
    return out;
}

Trajectory integrate_open_loop(const Scenario& sc, const ForceProfile& profile) {
    sc.validate();
    if (profile.times.empty() || profile.times.front() > 0.0 ||
        profile.times.back() < sc.horizon - 1e-9)
        throw Error("integrate_open_loop: profile does not cover the horizon");
    if (profile.force_dim != sc.input_dim())
        throw Error("integrate_open_loop: profile force dimension mismatch");

    Trajectory tr;
    Recorder rec;
    rec.tr = &tr;
    rec.sc = &sc;
    const CraneParams p = sc.params;

    if (sc.model == CraneModelKind::varying6) {
        const State6 target = State6::from_array(
            {sc.target[0], sc.target[1], sc.target[2], sc.target[3], sc.target[4], sc.target[5]});
        ode::Rhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
            const auto fv = profile.at(t);
            const model::Forces f{fv[0], fv[1], fv[2]};
            const State6 x = model::transform_phi_inverse(state6_of(y), target);
            const auto d = model::deriv_mass_matrix(x, f, p);
            const auto signs = model::phi_sign();
            for (int i = 0; i < 6; ++i) dy[i] = signs[i] * d[i];
        };
        rec.controls_and_forces = [&](double t, const std::vector<double>& y,
                                      std::vector<double>& u, std::vector<double>& f) {
            f = profile.at(t);
            u = {f[0] / (p.M + p.m), (f[1] + p.g * p.m * std::cos(y[2])) / p.m, f[2] / p.I};
        };
        return run(sc, rhs, rec);
    }

    ode::Rhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
        const auto fv = profile.at(t);
        const auto d = model::deriv4_forces(state4_of(y), fv[0], p);
        for (int i = 0; i < 4; ++i) dy[i] = d[i];
    };
    rec.controls_and_forces = [&](double t, const std::vector<double>&, std::vector<double>& u,
                                  std::vector<double>& f) {
        f = profile.at(t);
        u = {f[0]};
    };
    return run(sc, rhs, rec);
}

double max_state_deviation(const Trajectory& a, const Trajectory& b) {
    if (a.times.size() != b.times.size() || a.state_dim != b.state_dim)
        throw Error("max_state_deviation: trajectories not on a shared grid");
    double worst = 0.0;
    for (std::size_t s = 0; s < a.times.size(); ++s)
        for (int i = 0; i < a.state_dim; ++i)
            worst = std::max(worst, std::fabs(a.states[s][i] - b.states[s][i]));
    return worst;
}

std::optional<double> settle_time(const Trajectory& tr, const std::vector<double>& target,
                                  double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("settle_time: fraction must be in (0,1)");
    if (tr.states.empty()) return std::nullopt;
    const int n = tr.state_dim;
    if (static_cast<int>(target.size()) != n) throw Error("settle_time: target size mismatch");

    static const double floors6[6] = {0.1, 0.1, 0.01, 0.05, 0.05, 0.01};
    static const double floors4[4] = {0.1, 0.01, 0.05, 0.01};
    const double* floors = (n == 6) ? floors6 : floors4;

    std::vector<double> band(n);
    for (int i = 0; i < n; ++i)
        band[i] = fraction * std::max(std::fabs(tr.states.front()[i] - target[i]), floors[i]);

    // Walk backwards to the last out-of-band sample.
    std::ptrdiff_t last_bad = -1;
    for (std::ptrdiff_t s = static_cast<std::ptrdiff_t>(tr.states.size()) - 1; s >= 0; --s) {
        bool ok = true;
        for (int i = 0; i < n; ++i)
            if (std::fabs(tr.states[s][i] - target[i]) > band[i]) {
                ok = false;
                break;
            }
        if (!ok) {
            last_bad = s;
            break;
        }
    }
    if (last_bad < 0) return tr.times.front();
    if (last_bad + 1 >= static_cast<std::ptrdiff_t>(tr.times.size())) return std::nullopt;
    return tr.times[last_bad + 1];
}

std::optional<double> transport_time(const Trajectory& tr, const std::vector<double>& target,
                                     double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw Error("transport_time: fraction must be in (0,1)");
    if (tr.states.empty()) return std::nullopt;
    const double band =
        fraction * std::max(std::fabs(tr.states.front()[0] - target[0]), 0.1);
    std::ptrdiff_t last_bad = -1;
    for (std::ptrdiff_t s = static_cast<std::ptrdiff_t>(tr.states.size()) - 1; s >= 0; --s)
        if (std::fabs(tr.states[s][0] - target[0]) > band) {
            last_bad = s;
            break;
        }
    if (last_bad < 0) return tr.times.front();
    if (last_bad + 1 >= static_cast<std::ptrdiff_t>(tr.times.size())) return std::nullopt;
    return tr.times[last_bad + 1];
}

double peak_sway(const Trajectory& tr) {
    const int idx = (tr.state_dim == 6) ? 2 : 1;
    double best = 0.0;
    for (const auto& s : tr.states) best = std::max(best, std::fabs(s[idx]));
    return best;
}

ComparisonReport compare_scenarios(const Scenario& a, const Scenario& b) {
    a.validate();
    b.validate();
    const double disp_a = a.target[0] - a.start[0];
    const double disp_b = b.target[0] - b.start[0];
    if (std::fabs(disp_a - disp_b) > 1e-9)
        throw IncompatibleScenarios("compare_scenarios: trolley displacements differ");

    Trajectory ta, tb;
    std::exception_ptr ea, eb;
#pragma omp parallel sections
    {
#pragma omp section
        {
            try {
                ta = integrate_closed_loop(a, synthesize_gain(a));
            } catch (...) {
                ea = std::current_exception();
            }
        }
#pragma omp section
        {
            try {
                tb = integrate_closed_loop(b, synthesize_gain(b));
            } catch (...) {
                eb = std::current_exception();
            }
        }
    }
    if (ea) std::rethrow_exception(ea);
    if (eb) std::rethrow_exception(eb);

    ComparisonReport rep;
    rep.settle_a = settle_time(ta, a.target, a.settle_fraction);
    rep.settle_b = settle_time(tb, b.target, b.settle_fraction);
    rep.transport_a = transport_time(ta, a.target, a.settle_fraction);
    rep.transport_b = transport_time(tb, b.target, b.settle_fraction);
    rep.peak_sway_a = peak_sway(ta);
    rep.peak_sway_b = peak_sway(tb);
    if (rep.transport_a && rep.transport_b && *rep.transport_b > 0.0)
        rep.ratio = *rep.transport_a / *rep.transport_b;
    else if (rep.transport_a && rep.transport_b)
        rep.ratio = 1.0; // both arrived instantly
    else
        rep.ratio = std::numeric_limits<double>::quiet_NaN();
    return rep;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void append_row(std::string& out, const std::vector<const std::vector<double>*>& parts,
                std::size_t row_time_idx, const std::vector<double>& times) {
    out += format_double(times[row_time_idx]);
    for (const auto* p : parts)
        for (double v : *p) {
            out += ',';
            out += format_double(v);
        }
    out += '\n';
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            return out;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

} // namespace

std::string trajectory_csv(const Trajectory& tr) {
    std::string out = (tr.state_dim == 6) ? "t,x1,x2,x3,x4,x5,x6,u1,u2,u3,Fz,Fl,Ftheta\n"
                                          : "t,x1,x3,x4,x6,u1,Fz\n";
    for (std::size_t s = 0; s < tr.times.size(); ++s)
        append_row(out, {&tr.states[s], &tr.controls[s], &tr.forces[s]}, s, tr.times);
    return out;
}

std::string forces_csv(const Trajectory& tr) {
    std::string out = (tr.state_dim == 6) ? "t,Fz,Fl,Ftheta\n" : "t,Fz\n";
    for (std::size_t s = 0; s < tr.times.size(); ++s)
        append_row(out, {&tr.forces[s]}, s, tr.times);
    return out;
}

Trajectory parse_trajectory_csv(const std::string& text) {
    auto lines = split(text, '\n');
    if (lines.empty()) throw Error("parse_trajectory_csv: empty input");
    const auto header = lines.front();
    Trajectory tr;
    int nu = 0;
    if (header == "t,x1,x2,x3,x4,x5,x6,u1,u2,u3,Fz,Fl,Ftheta") {
        tr.state_dim = 6;
        nu = 3;
    } else if (header == "t,x1,x3,x4,x6,u1,Fz") {
        tr.state_dim = 4;
        nu = 1;
    } else {
        throw Error("parse_trajectory_csv: unrecognized header");
    }
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto cells = split(lines[li], ',');
        if (static_cast<int>(cells.size()) != 1 + tr.state_dim + 2 * nu)
            throw Error("parse_trajectory_csv: wrong column count on data row");
        std::size_t c = 0;
        tr.times.push_back(std::stod(cells[c++]));
        std::vector<double> st(tr.state_dim), u(nu), f(nu);
        for (auto& v : st) v = std::stod(cells[c++]);
        for (auto& v : u) v = std::stod(cells[c++]);
        for (auto& v : f) v = std::stod(cells[c++]);
        tr.states.push_back(std::move(st));
        tr.controls.push_back(std::move(u));
        tr.forces.push_back(std::move(f));
    }
    return tr;
}

ForceProfile parse_forces_csv(const std::string& text) {
    auto lines = split(text, '\n');
    if (lines.empty()) throw Error("parse_forces_csv: empty input");
    ForceProfile p;
    if (lines.front() == "t,Fz,Fl,Ftheta")
        p.force_dim = 3;
    else if (lines.front() == "t,Fz")
        p.force_dim = 1;
    else
        throw Error("parse_forces_csv: unrecognized header");
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) continue;
        auto cells = split(lines[li], ',');
        if (static_cast<int>(cells.size()) != 1 + p.force_dim)
            throw Error("parse_forces_csv: wrong column count on data row");
        p.times.push_back(std::stod(cells[0]));
        std::vector<double> f(p.force_dim);
        for (int i = 0; i < p.force_dim; ++i) f[i] = std::stod(cells[1 + i]);
        p.forces.push_back(std::move(f));
    }
    return p;
}

} // namespace crane::sim
