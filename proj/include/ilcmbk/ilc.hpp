#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ilcmbk/admittance.hpp"
#include "ilcmbk/convergence.hpp"
#include "ilcmbk/mat.hpp"

namespace ilcmbk {

/// Per-time-index output-map estimates Chat(t), t = 0..n, with the
/// projection-law constants. Constructor-validated: mu > 0, 0 < eta <= 2.
struct EstimatorState {
    std::vector<Mat> c_hat;  // each 3x2
    double mu = 1.0;
    double eta = 1.0;
};

EstimatorState make_estimator(std::size_t samples, const Mat& c0, double mu, double eta);

/// One projection update per time index, driven by the previous iteration's
/// record: Chat(t) += eta * (y(t) - Chat(t) phi(t)) phi(t)^T / (mu + |phi|^2)
/// with regressor phi(t) = s(t) + T_DC r(t).
EstimatorState estimate_output_map(EstimatorState est, const IterationRecord& prev,
                                   const ReferenceTrajectory& ref);

struct ClampEvent {
    std::size_t index;
    double norm_before;
};

struct GainUpdateResult {
    GainSchedule gains;
    std::vector<ClampEvent> clamped;
};

/// Gain update U(t) += alpha * pinv(Chat(t+dt)) e(t+dt) e(t)^+ for every step
/// with |e(t)| above the zero-error guard; corrections whose infinity norm
/// exceeds clamp_limit are scaled down onto the limit and reported. The last
/// time index has no successor error and is never updated.
GainUpdateResult update_gain(const GainSchedule& gains, const EstimatorState& est,
                             const IterationRecord& rec, double alpha, double clamp_limit);

struct LearnConfig {
    double alpha = 0.3;
    std::size_t iterations = 750;
    double clamp_limit = 10.0;
    double mu = 1.0;
    double eta = 1.0;
    std::uint64_t seed = 1;
};

struct IterationMetrics {
    double rmse_position = 0.0;
    double rmse_force = 0.0;
    double e_inf = 0.0;
    /// norm_Gm of the per-iteration certificate; NaN for methods without one.
    double cert_norm_gm = 0.0;
};

struct LearningCurve {
    std::vector<IterationMetrics> iterations;
};

/// Raised when an iteration's e_inf exceeds 1e6 times the initial one.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LearnOptions {
    StateError s0{0.0, 0.0};
    bool per_iteration_certificates = true;
    bool use_true_c = false;
};

struct LearnResult {
    LearningCurve curve;
    GainSchedule gains;
    EstimatorState estimator;
    IterationRecord last_record;
    std::optional<Certificate> final_certificate;
    std::size_t clamp_events = 0;
};

/// The cross-iteration loop: simulate from the fixed initial state, update
/// the estimator from the previous iteration's data, update the gains, and
/// certify the update. The initial schedule replicates the gain built from
/// `init` over the horizon; Chat starts from the environment's tangent
/// stiffness at the origin.
LearnResult run_learning(const LearnConfig& cfg, const EnvironmentModel& env,
                         const ReferenceTrajectory& ref, const AdmittanceParams& init,
                         const LearnOptions& opts = {});

}  // namespace ilcmbk
