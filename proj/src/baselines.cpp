#include "ilcmbk/baselines.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ilcmbk/plant.hpp"

namespace ilcmbk {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

IterationMetrics metrics_of(const IterationRecord& rec) {
    return {rec.rmse_position, rec.rmse_force, rec.e_inf, kNan};
}

double frobenius2(const Mat& m) {
    double acc = 0.0;
    for (double x : m.data()) acc += x * x;
    return acc;
}

void validate(const MfacConfig& cfg) {
    if (!(cfg.rho > 0.0 && cfg.rho <= 1.0)) throw std::invalid_argument("mfac: rho must be in (0, 1]");
    if (!(cfg.lambda > 0.0)) throw std::invalid_argument("mfac: lambda must be positive");
    if (!(cfg.eta_phi > 0.0 && cfg.eta_phi <= 2.0)) {
        throw std::invalid_argument("mfac: eta_phi must be in (0, 2]");
    }
    if (!(cfg.mu_phi > 0.0)) throw std::invalid_argument("mfac: mu_phi must be positive");
    if (!(cfg.reset_threshold >= 0.0)) throw std::invalid_argument("mfac: reset_threshold must be >= 0");
    if (!(cfg.u3_floor > 0.0)) throw std::invalid_argument("mfac: u3_floor must be positive");
    if (!cfg.phi0.empty() && (cfg.phi0.rows() != 3 || cfg.phi0.cols() != 3)) {
        throw std::invalid_argument("mfac: phi0 must be 3x3");
    }
}

}  // namespace

LearningCurve run_pure_admittance(const AdmittanceParams& init, const EnvironmentModel& env,
                                  const ReferenceTrajectory& ref, std::size_t iterations,
                                  const StateError& s0) {
    if (iterations < 1) throw std::invalid_argument("run_pure_admittance: need at least one iteration");
    GainSchedule gains;
    gains.dt = ref.dt;
    gains.gains.assign(ref.horizon(), build_gain(param_vector(init), gain_constants(ref.dt)));

    // The plant and gains are iteration-invariant, so one simulation serves
    // every iteration bit-exactly.
    const IterationMetrics m = metrics_of(simulate_iteration(gains, env, ref, s0));
    LearningCurve curve;
    curve.iterations.assign(iterations, m);
    return curve;
}

MfacResult run_mfac_ilc(const MfacConfig& cfg, const EnvironmentModel& env,
                        const ReferenceTrajectory& ref, std::size_t iterations,
                        const AdmittanceParams& init, const StateError& s0) {
    validate(cfg);
    if (iterations < 1) throw std::invalid_argument("run_mfac_ilc: need at least one iteration");

    const std::size_t n = ref.horizon();
    const GainConstants constants = gain_constants(ref.dt);
    const Mat phi_init = cfg.phi0.empty() ? cfg.phi0_scale * Mat::identity(3) : cfg.phi0;

    std::vector<ParamVector> u(n, param_vector(init));
    std::vector<Mat> phi(n, phi_init);

    MfacResult result;
    GainSchedule gains;
    gains.dt = ref.dt;
    gains.gains.resize(n);

    double initial_e_inf = 0.0;
    std::vector<ParamVector> prev_u;
    std::vector<Vec3> prev_y;

    for (std::size_t k = 0; k < iterations; ++k) {
        for (std::size_t t = 0; t < n; ++t) gains.gains[t] = build_gain(u[t], constants);
        IterationRecord rec = simulate_iteration(gains, env, ref, s0);
        result.curve.iterations.push_back(metrics_of(rec));
        if (k == 0) initial_e_inf = rec.e_inf;
        if (rec.e_inf > 1e6 * std::max(initial_e_inf, 1e-12)) {
            std::ostringstream os;
            os << "mfac diverged at iteration " << k << ": e_inf " << rec.e_inf
               << " exceeds 1e6 x initial " << initial_e_inf;
            throw DivergenceError(os.str());
        }

        // PPD projection update from (u_k - u_{k-1}, y_k - y_{k-1}); the
        // first iteration has no difference data and keeps the initial PPD.
        if (!prev_u.empty()) {
            for (std::size_t t = 0; t < n; ++t) {
                Vec3 du{}, dy{};
                for (std::size_t j = 0; j < 3; ++j) {
                    du[j] = u[t][j] - prev_u[t][j];
                    dy[j] = rec.outputs[t + 1][j] - prev_y[t + 1][j];
                }
                const double denom = cfg.mu_phi + du[0] * du[0] + du[1] * du[1] + du[2] * du[2];
                Mat& p = phi[t];
                double resid[3];
                for (std::size_t i = 0; i < 3; ++i) {
                    resid[i] = dy[i] - (p(i, 0) * du[0] + p(i, 1) * du[1] + p(i, 2) * du[2]);
                }
                const double gain = cfg.eta_phi / denom;
                for (std::size_t i = 0; i < 3; ++i) {
                    for (std::size_t j = 0; j < 3; ++j) p(i, j) += gain * resid[i] * du[j];
                }
                if (std::sqrt(frobenius2(p)) <= cfg.reset_threshold) p = phi_init;
            }
        }

        prev_u = u;
        prev_y = rec.outputs;

        // Input update from this iteration's successor errors.
        for (std::size_t t = 0; t < n; ++t) {
            const Mat& p = phi[t];
            const Vec3& e_next = rec.errors[t + 1];
            const double denom = cfg.lambda + frobenius2(p);
            for (std::size_t j = 0; j < 3; ++j) {
                double grad = 0.0;
                for (std::size_t i = 0; i < 3; ++i) grad += p(i, j) * e_next[i];
                u[t][j] += cfg.rho * grad / denom;
            }
            u[t][2] = std::max(u[t][2], cfg.u3_floor);
        }
    }
    result.inputs = std::move(u);
    return result;
}

}  // namespace ilcmbk
