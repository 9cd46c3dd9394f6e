#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crane/model.hpp"
#include "crane/ode.hpp"
#include "crane/stability.hpp"
#include "crane/synthesis.hpp"

namespace crane::sim {

enum class CraneModelKind { varying6, constant4 };

/// Everything needed to run one transport experiment: plant, start and
/// end states in physical coordinates, desired closed-loop poles and
/// integrator settings.
struct Scenario {
    CraneModelKind model = CraneModelKind::varying6;
    model::CraneParams params;
    std::vector<double> start;  // physical state, size 6 or 4
    std::vector<double> target; // equilibrium to stabilize at
    synthesis::PoleSet poles;
    std::optional<synthesis::ChannelAssignment> assignment; // varying-rope only
    double horizon = 100.0;
    double step = 0.01;
    bool adaptive = false;
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double settle_fraction = 0.02;

    int dim() const { return model == CraneModelKind::varying6 ? 6 : 4; }
    int input_dim() const { return model == CraneModelKind::varying6 ? 3 : 1; }
    void validate() const;
};

/// Time-stamped run record in physical coordinates, with the controls
/// and forces applied at each sample.
struct Trajectory {
    int state_dim = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> controls;
    std::vector<std::vector<double>> forces;
    std::vector<std::string> warnings;
};

/// Recorded force time series for sensorless (clock-only) replay.
/// Linear interpolation between samples.
struct ForceProfile {
    int force_dim = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> forces;

    static ForceProfile from_trajectory(const Trajectory& tr);
    std::vector<double> at(double t) const;
};

/// Gain synthesis for the scenario's model: closed-form decoupled
/// placement for the varying-rope structure, Ackermann for the
/// single-input fixed-rope system. When no channel assignment is given,
/// the poles are paired in listed order.
synthesis::Gain synthesize_gain(const Scenario& sc);

/// The channel assignment a scenario will actually use.
synthesis::ChannelAssignment effective_assignment(const Scenario& sc);

/// Closed-loop dynamics in displacement coordinates e = x - target
/// (physical); the coordinates the Lyapunov certificate applies in.
/// Its Jacobian at e = 0 is A - B K.
stability::ClosedLoopRhs shifted_closed_loop(const Scenario& sc, const synthesis::Gain& k);

/// Simulate the state feedback loop from sc.start over the horizon.
Trajectory integrate_closed_loop(const Scenario& sc, const synthesis::Gain& k);

/// Drive the plant with recorded forces only (no state measurement).
Trajectory integrate_open_loop(const Scenario& sc, const ForceProfile& profile);

/// Largest deviation between two runs on the same time grid.
double max_state_deviation(const Trajectory& a, const Trajectory& b);

/// First sample time after which every channel stays within
/// fraction*scale of the target, where scale is the initial offset
/// floored per channel (position 0.1 m, angle 0.01 rad, velocities
/// 0.05 m/s, angular rate 0.01 rad/s). Empty when the run never settles.
std::optional<double> settle_time(const Trajectory& tr, const std::vector<double>& target,
                                  double fraction);

/// Transportation time: settle restricted to the trolley position
/// channel, the quantity the two experiments share. The full-state
/// settle_time is dominated by each model's slowest pole through the
/// per-channel floor bands and therefore does not measure transport.
std::optional<double> transport_time(const Trajectory& tr, const std::vector<double>& target,
                                     double fraction);

double peak_sway(const Trajectory& tr);

struct ComparisonReport {
    std::optional<double> settle_a;
    std::optional<double> settle_b;
    std::optional<double> transport_a;
    std::optional<double> transport_b;
    double ratio = 0.0; // transport_a / transport_b when both settled
    double peak_sway_a = 0.0;
    double peak_sway_b = 0.0;
};

/// Run two scenarios (independent simulations, may execute in parallel)
/// and compare transport times and sway. Throws IncompatibleScenarios
/// when the trolley displacements differ.
ComparisonReport compare_scenarios(const Scenario& a, const Scenario& b);

// --- CSV schema -----------------------------------------------------
// Trajectory (varying rope): t,x1,x2,x3,x4,x5,x6,u1,u2,u3,Fz,Fl,Ftheta
// Trajectory (fixed rope):   t,x1,x3,x4,x6,u1,Fz
// Forces:                    t,Fz,Fl,Ftheta   /   t,Fz
// Values with 17 significant digits, '.' decimal point, ',' separator,
// '\n' line endings.

std::string trajectory_csv(const Trajectory& tr);
std::string forces_csv(const Trajectory& tr);
Trajectory parse_trajectory_csv(const std::string& text);
ForceProfile parse_forces_csv(const std::string& text);

/// %.17g with the C locale regardless of the process locale.
std::string format_double(double v);

} // namespace crane::sim
