#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ilcmbk/admittance.hpp"
#include "ilcmbk/mat.hpp"

namespace ilcmbk {

class ConfigTree;

/// Piecewise-linear contact force law F(x). Breakpoints are strictly
/// increasing in position and anchored at (0, 0); beyond the ends the first
/// and last segment slopes extrapolate.
struct EnvironmentModel {
    std::string name;
    std::vector<std::pair<double, double>> breakpoints;

    static EnvironmentModel linear(double stiffness, std::string name = "linear");
};

/// Validates the breakpoint invariants (throws) and returns the model.
EnvironmentModel make_environment(std::string name,
                                  std::vector<std::pair<double, double>> breakpoints);

double force_at(const EnvironmentModel& env, double x);

/// F(x)/x, or the first-segment slope within 1e-9 of the origin.
double secant_stiffness(const EnvironmentModel& env, double x);

struct ReferenceTrajectory {
    double dt = 0.0;
    std::vector<Vec3> samples;  ///< [v_r, x_r, f_r] per control period
    bool consistent = false;    ///< f_r(t) == F(x_r(t)) everywhere

    std::size_t horizon() const { return samples.empty() ? 0 : samples.size() - 1; }
};

/// Minimum-jerk position profile 0 -> depth over [0, t_end] with analytic
/// velocity and a force reference read off the environment (consistent).
ReferenceTrajectory make_reference(const EnvironmentModel& env, double depth, double t_end,
                                   double dt);

/// Adds seeded smoothed noise to the force channel (amplitude as a fraction
/// of the peak |f_r|) and clears the consistent flag.
ReferenceTrajectory perturb_force_reference(ReferenceTrajectory ref, double amplitude,
                                            std::uint64_t seed);

struct Preset {
    std::string name;
    EnvironmentModel env;
    AdmittanceParams params;
    double depth = 0.0;
    double t_end = 0.0;
    std::string channel;  ///< "force" or "torque"
};

const std::vector<std::string>& preset_names();

/// Built-in task presets; throws on unknown names. The same definitions ship
/// as plant config files under configs/plants/.
Preset preset(const std::string& name);

/// Loads a plant definition with the plant.* config schema.
Preset plant_from_config(const ConfigTree& cfg);
Preset load_plant(const std::string& path);

}  // namespace ilcmbk
