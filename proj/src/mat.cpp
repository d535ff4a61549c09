#include "ilcmbk/mat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ilcmbk {

Mat::Mat(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("Mat: dimensions must be at least 1x1");
    }
}

Mat::Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> entries)
    : Mat(rows, cols) {
    if (entries.size() != rows * cols) {
        throw std::invalid_argument("Mat: entry count does not match dimensions");
    }
    std::copy(entries.begin(), entries.end(), data_.begin());
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat operator*(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("mat mul: inner dimensions do not match");
    }
    Mat out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Mat operator+(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("mat add: dimensions do not match");
    }
    Mat out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

Mat operator-(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("mat sub: dimensions do not match");
    }
    Mat out = a;
    for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

Mat operator*(double s, const Mat& m) {
    Mat out = m;
    for (double& x : out.data()) x *= s;
    return out;
}

Mat transpose(const Mat& m) {
    Mat out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    }
    return out;
}

bool all_finite(const Mat& m) {
    for (double x : m.data()) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double inf_norm(const Mat& m) {
    if (m.empty()) throw std::invalid_argument("inf_norm: empty matrix");
    double worst = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
        worst = std::max(worst, row);
    }
    return worst;
}

namespace {

// Eigenpairs of a symmetric PSD matrix of order 1 or 2, descending.
struct EigenPair {
    double lambda;
    std::array<double, 2> v;
};

std::vector<EigenPair> sym_eigen(const Mat& g) {
    if (g.rows() == 1) {
        return {{g(0, 0), {1.0, 0.0}}};
    }
    const double g11 = g(0, 0), g12 = g(0, 1), g22 = g(1, 1);
    const double mean = 0.5 * (g11 + g22);
    const double disc = std::hypot(0.5 * (g11 - g22), g12);
    const double l1 = mean + disc;
    const double l2 = std::max(mean - disc, 0.0);

    auto eigvec = [&](double lambda) -> std::array<double, 2> {
        // Pick the better-conditioned of the two analytic eigenvector forms.
        const std::array<double, 2> a{g12, lambda - g11};
        const std::array<double, 2> b{lambda - g22, g12};
        const double na = std::hypot(a[0], a[1]);
        const double nb = std::hypot(b[0], b[1]);
        if (na == 0.0 && nb == 0.0) {
            return lambda == l1 ? std::array<double, 2>{1.0, 0.0}
                                : std::array<double, 2>{0.0, 1.0};
        }
        if (na >= nb) return {a[0] / na, a[1] / na};
        return {b[0] / nb, b[1] / nb};
    };

    std::array<double, 2> v1 = eigvec(l1);
    // Second eigenvector taken orthogonal to the first; avoids breakdown when
    // l2 is a cancellation-level artifact of a rank-1 input.
    std::array<double, 2> v2{-v1[1], v1[0]};
    return {{l1, v1}, {l2, v2}};
}

}  // namespace

Mat pinv(const Mat& m, double tol) {
    if (!all_finite(m)) {
        throw std::invalid_argument("pinv: input has non-finite entries");
    }
    if (m.rows() < m.cols()) {
        return transpose(pinv(transpose(m), tol));
    }
    const std::size_t c = m.cols();
    if (c > 2) {
        throw std::invalid_argument("pinv: only shapes with min dimension <= 2 are supported");
    }

    const Mat gram = transpose(m) * m;
    const auto eig = sym_eigen(gram);
    const double sigma_max = std::sqrt(eig.front().lambda);
    Mat out(c, m.rows());
    if (sigma_max == 0.0) return out;

    const double cut = tol < 0.0 ? kPinvTolRel * sigma_max : tol;
    for (const auto& [lambda, v] : eig) {
        const double sigma = std::sqrt(lambda);
        if (sigma <= cut) continue;
        // pinv += v (M v)^T / lambda
        for (std::size_t j = 0; j < m.rows(); ++j) {
            double mv = m(j, 0) * v[0];
            if (c == 2) mv += m(j, 1) * v[1];
            for (std::size_t i = 0; i < c; ++i) out(i, j) += v[i] * mv / lambda;
        }
    }
    return out;
}

Mat vec_pinv(std::span<const double> e, double eps) {
    if (e.empty()) throw std::invalid_argument("vec_pinv: empty vector");
    double n2 = 0.0;
    for (double x : e) n2 += x * x;
    Mat out(1, e.size());
    if (std::sqrt(n2) <= eps) return out;
    for (std::size_t i = 0; i < e.size(); ++i) out(0, i) = e[i] / n2;
    return out;
}

}  // namespace ilcmbk
