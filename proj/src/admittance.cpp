#include "ilcmbk/admittance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ilcmbk/plant.hpp"

namespace ilcmbk {

ParamVector param_vector(const AdmittanceParams& p) {
    if (!(p.m > 0.0)) throw std::invalid_argument("admittance params: inertia m must be positive");
    if (p.b < 0.0 || p.k < 0.0) {
        throw std::invalid_argument("admittance params: damping and stiffness must be non-negative");
    }
    return {p.b / p.m, p.k / p.m, 1.0 / p.m};
}

GainConstants gain_constants(double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("gain constants: dt must be positive");
    GainConstants g;
    g.dt = dt;
    g.beta = {dt, dt * dt};
    g.A = Mat(3, 3, {-1, 0, 0, 0, -1, 0, 0, 0, 1});
    g.E = Mat(2, 3, {1, 0, 0, dt, 1, 0});
    return g;
}

Mat build_gain(const ParamVector& u, const GainConstants& g) {
    Mat U = g.E;
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
            // beta * u^T * A with diagonal A.
            U(r, c) += g.beta[r] * u[c] * g.A(c, c);
        }
    }
    if (!all_finite(U)) throw std::invalid_argument("build_gain: non-finite gain");
    return U;
}

Mat t_dc() { return Mat(2, 3, {-1, 0, 0, 0, -1, 0}); }

OutputMap output_map(double k_env) {
    if (!std::isfinite(k_env)) throw std::invalid_argument("output_map: k_env must be finite");
    OutputMap om;
    om.C = Mat(3, 2, {-1, 0, 0, -1, 0, -k_env});
    om.D = om.C * t_dc();
    return om;
}

StateError plant_step(const Mat& U, const Vec3& r, const Vec3& y) {
    if (U.rows() != 2 || U.cols() != 3) throw std::invalid_argument("plant_step: gain must be 2x3");
    StateError s{};
    for (std::size_t i = 0; i < 2; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 3; ++j) acc += U(i, j) * (r[j] - y[j]);
        s[i] = acc;
    }
    return s;
}

Observation observe(const StateError& s, const Vec3& r, const EnvironmentModel& env) {
    const double v = r[0] - s[0];
    const double x = r[1] - s[1];
    const double f = force_at(env, x);
    return {{v, x, f}, secant_stiffness(env, x)};
}

IterationRecord simulate_iteration(const GainSchedule& gains, const EnvironmentModel& env,
                                   const ReferenceTrajectory& ref, const StateError& s0) {
    const std::size_t n = ref.horizon();
    if (ref.samples.size() < 2) {
        throw std::invalid_argument("simulate_iteration: reference needs at least two samples");
    }
    if (gains.gains.size() != n) {
        throw std::invalid_argument("simulate_iteration: gain schedule length does not match horizon");
    }

    IterationRecord rec;
    rec.errors.resize(n + 1);
    rec.outputs.resize(n + 1);
    rec.states.resize(n + 1);
    rec.k_env.resize(n + 1);

    StateError s = s0;
    for (std::size_t t = 0; t <= n; ++t) {
        rec.states[t] = s;
        const Observation obs = observe(s, ref.samples[t], env);
        rec.outputs[t] = obs.y;
        rec.k_env[t] = obs.k_env;
        for (std::size_t j = 0; j < 3; ++j) rec.errors[t][j] = ref.samples[t][j] - obs.y[j];
        if (t < n) s = plant_step(gains.gains[t], ref.samples[t], obs.y);
    }

    double sq_pos = 0.0, sq_force = 0.0, worst = 0.0;
    for (std::size_t t = 0; t <= n; ++t) {
        sq_pos += rec.errors[t][1] * rec.errors[t][1];
        sq_force += rec.errors[t][2] * rec.errors[t][2];
        if (t >= 1) {
            for (double c : rec.errors[t]) worst = std::max(worst, std::abs(c));
        }
    }
    rec.rmse_position = std::sqrt(sq_pos / static_cast<double>(n + 1));
    rec.rmse_force = std::sqrt(sq_force / static_cast<double>(n + 1));
    rec.e_inf = worst;
    return rec;
}

RecoveredParams recover_params(const Mat& U, double dt) {
    if (U.rows() != 2 || U.cols() != 3) throw std::invalid_argument("recover_params: gain must be 2x3");
    if (!(dt > 0.0)) throw std::invalid_argument("recover_params: dt must be positive");

    RecoveredParams out;
    const double inv_m = U(0, 2) / dt;
    out.params.m = inv_m != 0.0 ? 1.0 / inv_m : std::numeric_limits<double>::infinity();
    out.params.b = out.params.m * (1.0 - U(0, 0)) / dt;
    out.params.k = out.params.m * (-U(0, 1)) / dt;

    // Row-2 manifold residual, relative to the row magnitudes.
    double resid = 0.0, scale = 0.0;
    const double expect[3] = {dt * U(0, 0), dt * U(0, 1) + 1.0, dt * U(0, 2)};
    for (std::size_t c = 0; c < 3; ++c) {
        resid = std::max(resid, std::abs(U(1, c) - expect[c]));
        scale = std::max({scale, std::abs(U(1, c)), std::abs(expect[c])});
    }
    out.manifold_drift = scale > 0.0 ? resid / scale : 0.0;
    out.off_manifold = out.manifold_drift > 1e-6;
    return out;
}

}  // namespace ilcmbk
