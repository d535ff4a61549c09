#pragma once

#include <cstddef>
#include <vector>

#include "ilcmbk/mat.hpp"

namespace ilcmbk {

struct EnvironmentModel;
struct ReferenceTrajectory;

/// Physical admittance triple. Units are N, m, s for translational tasks and
/// N·m, rad, s for rotary ones; the library never mixes the two.
struct AdmittanceParams {
    double m = 1.0;  ///< inertia, > 0
    double b = 0.0;  ///< damping, >= 0
    double k = 0.0;  ///< stiffness, >= 0
};

/// Parameter input vector [b/m, k/m, 1/m].
using ParamVector = std::array<double, 3>;

/// Throws unless m > 0, b >= 0, k >= 0.
ParamVector param_vector(const AdmittanceParams& p);

/// Constants of the gain construction U = beta * u^T * A + E for one control
/// period: beta = [dt, dt^2], A = diag(-1,-1,1), E = [[1,0,0],[dt,1,0]].
struct GainConstants {
    double dt = 0.0;
    std::array<double, 2> beta{};
    Mat A;  // 3x3
    Mat E;  // 2x3
};

GainConstants gain_constants(double dt);

/// The 2x3 gain mapping the 3-channel tracking error to the next state error.
/// Rows built from a ParamVector satisfy row2 = dt*row1 + [0,1,0]; gains that
/// have been through ILC updates generally do not.
Mat build_gain(const ParamVector& u, const GainConstants& g);

/// Constant 2x3 transform with D = C * T_DC.
Mat t_dc();

struct OutputMap {
    Mat C;  // 3x2
    Mat D;  // 3x3
};

/// C = -[[1,0],[0,1],[0,k_env]] and its induced D.
OutputMap output_map(double k_env);

/// State error [dv, dx].
using StateError = Vec2;

/// One step of the discrete plant: s(t+dt) = U(t) * (r(t) - y(t)).
StateError plant_step(const Mat& U, const Vec3& r, const Vec3& y);

struct Observation {
    Vec3 y;        ///< measured [v, x, f], force from the true force law
    double k_env;  ///< secant stiffness at the measured position
};

/// Measured output for a given state error and reference sample. The force
/// comes from the environment's force law; the returned secant stiffness
/// reproduces it exactly through y = C(k_env)s + D(k_env)r.
Observation observe(const StateError& s, const Vec3& r, const EnvironmentModel& env);

/// Per-time-step gains for one iteration; gains.size() equals the horizon n
/// (time indices 0..n-1).
struct GainSchedule {
    double dt = 0.0;
    std::vector<Mat> gains;
};

/// Time series of one iteration. All vectors hold n+1 samples (t = 0..n*dt).
/// e_inf is taken over t >= dt, matching the cross-iteration error stack that
/// discards the (iteration-invariant) initial error.
struct IterationRecord {
    std::vector<Vec3> errors;
    std::vector<Vec3> outputs;
    std::vector<StateError> states;
    std::vector<double> k_env;
    double rmse_position = 0.0;
    double rmse_force = 0.0;
    double e_inf = 0.0;
};

/// Runs the full-horizon recursion from the fixed initial state s0.
/// Throws if gains.size() != ref.samples.size() - 1.
IterationRecord simulate_iteration(const GainSchedule& gains, const EnvironmentModel& env,
                                   const ReferenceTrajectory& ref, const StateError& s0);

/// (m, b, k) read back from row 1 of a gain matrix, with the row-2 manifold
/// drift as a diagnostic. Gains more than 1e-6 (relative) off the manifold
/// are flagged; their recovered parameters are indicative only.
struct RecoveredParams {
    AdmittanceParams params;
    double manifold_drift = 0.0;
    bool off_manifold = false;
};

RecoveredParams recover_params(const Mat& U, double dt);

}  // namespace ilcmbk
