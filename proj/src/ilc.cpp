#include "ilcmbk/ilc.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "ilcmbk/plant.hpp"

namespace ilcmbk {

namespace {

Vec2 regressor(const StateError& s, const Vec3& r) {
    // phi = s + T_DC r = [dv - v_r, dx - x_r]
    return {s[0] - r[0], s[1] - r[1]};
}

}  // namespace

EstimatorState make_estimator(std::size_t samples, const Mat& c0, double mu, double eta) {
    if (!(mu > 0.0)) throw std::invalid_argument("estimator: mu must be positive");
    if (!(eta > 0.0 && eta <= 2.0)) throw std::invalid_argument("estimator: eta must be in (0, 2]");
    if (c0.rows() != 3 || c0.cols() != 2) throw std::invalid_argument("estimator: C0 must be 3x2");
    if (samples == 0) throw std::invalid_argument("estimator: need at least one sample");
    EstimatorState est;
    est.mu = mu;
    est.eta = eta;
    est.c_hat.assign(samples, c0);
    return est;
}

EstimatorState estimate_output_map(EstimatorState est, const IterationRecord& prev,
                                   const ReferenceTrajectory& ref) {
    if (est.c_hat.size() != prev.states.size() || prev.states.size() != ref.samples.size()) {
        throw std::invalid_argument("estimate_output_map: sample counts do not match");
    }
    for (std::size_t t = 0; t < est.c_hat.size(); ++t) {
        const Vec2 phi = regressor(prev.states[t], ref.samples[t]);
        const double denom = est.mu + phi[0] * phi[0] + phi[1] * phi[1];
        Mat& c = est.c_hat[t];
        double resid[3];
        for (std::size_t i = 0; i < 3; ++i) {
            resid[i] = prev.outputs[t][i] - (c(i, 0) * phi[0] + c(i, 1) * phi[1]);
        }
        const double gain = est.eta / denom;
        for (std::size_t i = 0; i < 3; ++i) {
            c(i, 0) += gain * resid[i] * phi[0];
            c(i, 1) += gain * resid[i] * phi[1];
        }
    }
    return est;
}

GainUpdateResult update_gain(const GainSchedule& gains, const EstimatorState& est,
                             const IterationRecord& rec, double alpha, double clamp_limit) {
    const std::size_t n = gains.gains.size();
    if (rec.errors.size() != n + 1 || est.c_hat.size() != n + 1) {
        throw std::invalid_argument("update_gain: horizon mismatch");
    }
    if (!(clamp_limit > 0.0)) throw std::invalid_argument("update_gain: clamp_limit must be positive");

    GainUpdateResult out;
    out.gains = gains;
    for (std::size_t t = 0; t < n; ++t) {
        const Vec3& e_now = rec.errors[t];
        const double norm_now = std::sqrt(e_now[0] * e_now[0] + e_now[1] * e_now[1] +
                                          e_now[2] * e_now[2]);
        if (norm_now <= kZeroErrorEps) continue;  // frozen step

        const Mat e_plus = vec_pinv(e_now);  // 1x3
        Mat e_next(3, 1, {rec.errors[t + 1][0], rec.errors[t + 1][1], rec.errors[t + 1][2]});
        Mat correction = alpha * (pinv(est.c_hat[t + 1]) * e_next * e_plus);  // 2x3, rank <= 1

        const double norm = inf_norm(correction);
        if (norm > clamp_limit) {
            correction = (clamp_limit / norm) * correction;
            out.clamped.push_back({t, norm});
        }
        out.gains.gains[t] = out.gains.gains[t] + correction;
    }
    return out;
}

LearnResult run_learning(const LearnConfig& cfg, const EnvironmentModel& env,
                         const ReferenceTrajectory& ref, const AdmittanceParams& init,
                         const LearnOptions& opts) {
    if (cfg.iterations < 1) throw std::invalid_argument("run_learning: need at least one iteration");
    if (!(cfg.alpha > 0.0)) throw std::invalid_argument("run_learning: alpha must be positive");

    const std::size_t n = ref.horizon();
    const GainConstants constants = gain_constants(ref.dt);
    const Mat u0 = build_gain(param_vector(init), constants);

    LearnResult result;
    result.gains.dt = ref.dt;
    result.gains.gains.assign(n, u0);
    result.estimator =
        make_estimator(n + 1, output_map(secant_stiffness(env, 0.0)).C, cfg.mu, cfg.eta);

    double initial_e_inf = 0.0;
    std::optional<IterationRecord> previous;

    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        IterationRecord rec = simulate_iteration(result.gains, env, ref, opts.s0);
        if (k == 0) initial_e_inf = rec.e_inf;
        if (rec.e_inf > 1e6 * std::max(initial_e_inf, 1e-12)) {
            std::ostringstream os;
            os << "learning diverged at iteration " << k << ": e_inf " << rec.e_inf
               << " exceeds 1e6 x initial " << initial_e_inf;
            throw DivergenceError(os.str());
        }

        // Eq.-(15) data comes from iteration k-1; the first iteration keeps C0.
        if (previous) {
            result.estimator = estimate_output_map(std::move(result.estimator), *previous, ref);
        }

        GainUpdateResult update =
            update_gain(result.gains, result.estimator, rec, cfg.alpha, cfg.clamp_limit);
        result.clamp_events += update.clamped.size();

        IterationMetrics m{rec.rmse_position, rec.rmse_force, rec.e_inf,
                           std::numeric_limits<double>::quiet_NaN()};
        if (opts.per_iteration_certificates && n >= 1) {
            const Certificate cert =
                certify(operands_from_run(result.gains, update.gains, result.estimator.c_hat, rec,
                                          cfg.alpha, opts.use_true_c));
            m.cert_norm_gm = cert.norm_Gm;
            result.final_certificate = cert;
        }
        result.curve.iterations.push_back(m);

        result.gains = std::move(update.gains);
        previous = std::move(rec);
    }
    result.last_record = std::move(*previous);
    return result;
}

}  // namespace ilcmbk
