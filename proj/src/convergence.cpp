#include "ilcmbk/convergence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace ilcmbk {

namespace {

void check_square(const Mat& alpha0) {
    if (alpha0.empty() || alpha0.rows() != alpha0.cols()) {
        throw std::invalid_argument("transfer blocks: alpha0 must be square");
    }
}

void check_operands(const TransferOperands& ops) {
    check_square(ops.alpha0);
    if (ops.n == 0) throw std::invalid_argument("transfer operands: horizon must be at least 1");
    const std::size_t need = ops.n - 1;
    if (ops.c.size() < need || ops.d.size() < need) {
        throw std::invalid_argument("transfer operands: need n-1 c and d blocks");
    }
    const std::size_t r = ops.alpha0.rows();
    for (std::size_t i = 0; i < need; ++i) {
        if (ops.c[i].rows() != r || ops.c[i].cols() != r || ops.d[i].rows() != r ||
            ops.d[i].cols() != r) {
            throw std::invalid_argument("transfer operands: block sizes must match alpha0");
        }
    }
}

}  // namespace

Mat block_a(const Mat& alpha0, std::size_t i) {
    check_square(alpha0);
    const Mat neg = -1.0 * alpha0;
    Mat acc = Mat::identity(alpha0.rows());
    Mat term = Mat::identity(alpha0.rows());
    for (std::size_t l = 1; l <= i; ++l) {
        term = term * neg;
        acc = acc + term;
    }
    return acc;
}

Mat block_b(const Mat& alpha0, std::size_t i) {
    return Mat::identity(alpha0.rows()) - block_a(alpha0, i);
}

Mat assemble_G(const TransferOperands& ops) {
    check_operands(ops);
    const std::size_t r = ops.alpha0.rows();
    const std::size_t n = ops.n;
    Mat G(r * n, r * n);

    auto put = [&](std::size_t br, std::size_t bc, const Mat& blk) {
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) G(br * r + i, bc * r + j) = blk(i, j);
        }
    };

    for (std::size_t row = 0; row < n; ++row) {
        const std::size_t j = n - row;  // time subscript of this block row
        put(row, row, block_a(ops.alpha0, j));
        // Column col holds time subscript i = n - col (j-1 down to 1 across
        // the row); its entry is b_i c_i d_{i+1}..d_{j-1}. The running tail
        // picks up one d factor per column, prepended to keep ascending order.
        Mat tail = Mat::identity(r);
        for (std::size_t col = row + 1; col < n; ++col) {
            const std::size_t i = n - col;
            if (col > row + 1) tail = ops.d[i] * tail;  // d[i] holds subscript i+1
            put(row, col, block_b(ops.alpha0, i) * ops.c[i - 1] * tail);
        }
    }
    return G;
}

Mat assemble_Gm(const TransferOperands& ops) {
    check_operands(ops);
    const std::size_t r = ops.alpha0.rows();
    const std::size_t n = ops.n;
    const Mat G = assemble_G(ops);
    Mat Gm(n, n);
    for (std::size_t br = 0; br < n; ++br) {
        for (std::size_t bc = br; bc < n; ++bc) {
            double worst = 0.0;
            for (std::size_t i = 0; i < r; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < r; ++j) row += std::abs(G(br * r + i, bc * r + j));
                worst = std::max(worst, row);
            }
            Gm(br, bc) = worst;
        }
    }
    return Gm;
}

double bound_eq33(double n_alpha, double n_cu) {
    if (!(n_alpha > 0.0)) throw std::invalid_argument("bound_eq33: n_alpha must be positive");
    if (!(n_cu > 0.0)) throw std::invalid_argument("bound_eq33: n_cu must be positive");
    if (n_cu >= 1.0) {
        throw std::invalid_argument("bound_eq33: n_cu must be below 1 (geometric series)");
    }
    return (1.0 + n_alpha * n_cu / (1.0 - n_cu)) / (1.0 + n_alpha);
}

Certificate certify(const TransferOperands& ops) {
    check_operands(ops);
    Certificate cert;
    cert.horizon = ops.n;
    cert.norm_G = inf_norm(assemble_G(ops));
    cert.norm_Gm = inf_norm(assemble_Gm(ops));
    cert.passes = cert.norm_Gm < 1.0;
    cert.n_alpha = inf_norm(ops.alpha0);
    cert.n_cu = 0.0;
    for (std::size_t i = 0; i + 1 < ops.n; ++i) cert.n_cu = std::max(cert.n_cu, inf_norm(ops.c[i]));
    if (cert.n_alpha > 0.0 && cert.n_cu > 0.0 && cert.n_cu < 1.0) {
        cert.bound_eq33 = bound_eq33(cert.n_alpha, cert.n_cu);
    } else {
        cert.bound_eq33 = std::numeric_limits<double>::infinity();
    }
    return cert;
}

std::string certificate_json(const Certificate& cert) {
    nlohmann::json j;
    j["norm_G"] = cert.norm_G;
    j["norm_Gm"] = cert.norm_Gm;
    j["bound_eq33"] = cert.bound_eq33;  // inf serializes as null
    j["n_alpha"] = cert.n_alpha;
    j["n_cu"] = cert.n_cu;
    j["passes"] = cert.passes;
    j["horizon"] = cert.horizon;
    return j.dump(2) + "\n";
}

TransferOperands operands_from_run(const GainSchedule& current, const GainSchedule& updated,
                                   std::span<const Mat> c_hat, const IterationRecord& rec,
                                   double alpha, bool use_true_c) {
    const std::size_t n = current.gains.size();
    if (n == 0 || updated.gains.size() != n) {
        throw std::invalid_argument("operands_from_run: gain schedules must share a nonzero horizon");
    }
    if (rec.k_env.size() != n + 1 || c_hat.size() != n + 1) {
        throw std::invalid_argument("operands_from_run: record/estimator length must be horizon+1");
    }

    TransferOperands ops;
    ops.n = n;
    // alpha0 at (t+dt, t+dt) for each update step; keep the worst-norm one.
    double worst = -1.0;
    for (std::size_t t = 0; t < n; ++t) {
        const Mat c_true = output_map(rec.k_env[t + 1]).C;
        const Mat inverse_side = use_true_c ? pinv(c_true) : pinv(c_hat[t + 1]);
        const Mat a0 = alpha * (c_true * inverse_side);
        const double norm = inf_norm(a0);
        if (norm > worst) {
            worst = norm;
            ops.alpha0 = a0;
        }
    }
    ops.c.reserve(n - 1);
    ops.d.reserve(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        const Mat c_true = output_map(rec.k_env[i + 1]).C;
        ops.c.push_back(c_true * current.gains[i]);
        ops.d.push_back(-1.0 * (c_true * updated.gains[i]));
    }
    return ops;
}

LyapunovSeq lyapunov(std::span<const double> e_inf_per_iteration) {
    if (e_inf_per_iteration.empty()) throw std::invalid_argument("lyapunov: empty curve");
    LyapunovSeq seq;
    seq.v.reserve(e_inf_per_iteration.size());
    for (double e : e_inf_per_iteration) seq.v.push_back(e * e);
    seq.monotone_from = 0;
    for (std::size_t k = 0; k + 1 < seq.v.size(); ++k) {
        if (seq.v[k + 1] > seq.v[k]) seq.monotone_from = k + 1;
    }
    return seq;
}

}  // namespace ilcmbk
