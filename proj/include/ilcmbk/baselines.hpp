#pragma once

#include <cstddef>
#include <vector>

#include "ilcmbk/ilc.hpp"

namespace ilcmbk {

/// Compact-form dynamic-linearization MFAC in the iteration domain, tuning
/// the admittance parameter input u(t). Constants validated on use;
/// defaults were tuned once across the shipped presets and frozen.
struct MfacConfig {
    double rho = 0.5;              ///< step size, (0, 1]
    double lambda = 0.3;           ///< input-regularization weight, > 0
    double eta_phi = 1.0;          ///< PPD-estimator step, (0, 2]
    double mu_phi = 1e-6;          ///< PPD-estimator regularization, > 0
    double phi0_scale = 0.1;       ///< initial PPD = phi0_scale * I (when phi0 empty)
    Mat phi0;                      ///< explicit 3x3 initial PPD, optional
    double reset_threshold = 1e-8; ///< PPD reset when its Frobenius norm drops below
    double u3_floor = 1e-4;        ///< lower bound kept on u[2] = 1/m
};

/// Fixed gains every iteration; the curve is flat by construction.
LearningCurve run_pure_admittance(const AdmittanceParams& init, const EnvironmentModel& env,
                                  const ReferenceTrajectory& ref, std::size_t iterations,
                                  const StateError& s0 = {0.0, 0.0});

struct MfacResult {
    LearningCurve curve;
    std::vector<ParamVector> inputs;  ///< final u(t) per time index
};

/// PPD estimate from iteration-difference data, then
/// u_k(t) = u_{k-1}(t) + rho * Phi^T e_{k-1}(t+dt) / (lambda + |Phi|_F^2).
MfacResult run_mfac_ilc(const MfacConfig& cfg, const EnvironmentModel& env,
                        const ReferenceTrajectory& ref, std::size_t iterations,
                        const AdmittanceParams& init, const StateError& s0 = {0.0, 0.0});

}  // namespace ilcmbk
