#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ilcmbk/admittance.hpp"
#include "ilcmbk/mat.hpp"

namespace ilcmbk {

/// Blocks of the cross-iteration error-transfer matrix. All blocks share the
/// square size of alpha0 (3x3 in the learning pipeline, 1x1 in scalar
/// analyses). c[idx] and d[idx] hold the blocks for time subscript idx+1,
/// i.e. subscripts 1..n-1; the assembly uses c_1..c_{n-1} and d_2..d_{n-1}.
struct TransferOperands {
    Mat alpha0;
    std::vector<Mat> c;
    std::vector<Mat> d;
    std::size_t n = 0;
};

/// a_i = sum_{l=0..i} (-alpha0)^l  (identity for l = 0).
Mat block_a(const Mat& alpha0, std::size_t i);

/// b_i = sum_{l=1..i} -(-alpha0)^l = I - a_i.
Mat block_b(const Mat& alpha0, std::size_t i);

/// Block-upper-triangular transfer matrix mapping the stacked previous-
/// iteration errors [e(n dt) ... e(dt)] to the next iteration's stack.
/// Diagonal blocks a_n..a_1; the block at (row j, column i < j in time
/// subscripts) is b_i c_i prod_{l=i+1..j-1} d_l.
Mat assemble_G(const TransferOperands& ops);

/// n x n nonnegative majorant holding the infinity norm of each block of G.
Mat assemble_Gm(const TransferOperands& ops);

/// Closed-form norm bound (1 + n_alpha*n_cu/(1 - n_cu)) / (1 + n_alpha);
/// strictly below 1 exactly when n_cu < 1/2. Throws for n_cu >= 1 (the
/// underlying geometric series diverges) or non-positive arguments.
double bound_eq33(double n_alpha, double n_cu);

struct Certificate {
    double norm_G = 0.0;
    double norm_Gm = 0.0;
    double bound_eq33 = 0.0;  ///< +inf when n_cu >= 1 (serialized as null)
    double n_alpha = 0.0;
    double n_cu = 0.0;
    bool passes = false;  ///< decided by norm_Gm < 1 alone
    std::size_t horizon = 0;
};

Certificate certify(const TransferOperands& ops);

/// JSON document with fields norm_G, norm_Gm, bound_eq33, n_alpha, n_cu,
/// passes, horizon.
std::string certificate_json(const Certificate& cert);

/// Operands for one gain update, built from the recorded secant stiffness
/// (rows of C) and either the estimated output maps (default) or, with
/// use_true_c, the secant-stiffness C itself in place of the estimate.
/// alpha0 is the largest-norm alpha*C(t+dt)*Chat^+(t+dt) over update steps.
TransferOperands operands_from_run(const GainSchedule& current, const GainSchedule& updated,
                                   std::span<const Mat> c_hat, const IterationRecord& rec,
                                   double alpha, bool use_true_c = false);

struct LyapunovSeq {
    std::vector<double> v;           ///< V_k = e_inf_k^2
    std::size_t monotone_from = 0;   ///< first index after which V never increases
};

LyapunovSeq lyapunov(std::span<const double> e_inf_per_iteration);

}  // namespace ilcmbk
