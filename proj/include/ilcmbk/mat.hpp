#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ilcmbk {

/// Velocity/position state-error pair [dv, dx].
using Vec2 = std::array<double, 2>;
/// Output or reference sample [v, x, f].
using Vec3 = std::array<double, 3>;

/// Error vectors with Euclidean norm at or below this are treated as zero
/// by vec_pinv (and hence freeze the gain update at that step).
inline constexpr double kZeroErrorEps = 1e-12;

/// Default relative singular-value cutoff for pinv. The pseudoinverse is
/// computed through the Gram matrix, which squares the condition number, so
/// the cut sits near sqrt(machine epsilon) rather than at it.
inline constexpr double kPinvTolRel = 1e-7;

/// Small dense row-major matrix. Sized at construction; entries are plain
/// doubles with no unit bookkeeping.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols);
    Mat(std::size_t rows, std::size_t cols, std::initializer_list<double> entries);

    static Mat identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat operator*(const Mat& a, const Mat& b);
Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& m);

Mat transpose(const Mat& m);
bool all_finite(const Mat& m);

/// Maximum absolute row sum. Zero only for the all-zero matrix.
double inf_norm(const Mat& m);

/// Moore-Penrose pseudoinverse via eigendecomposition of the Gram matrix of
/// the thin side (closed-form for the 1x1/2x2 cases this library needs).
/// Singular values at or below tol are treated as zero; tol < 0 selects the
/// default kPinvTolRel relative to the largest singular value. Only shapes
/// with min(rows, cols) <= 2 are supported.
Mat pinv(const Mat& m, double tol = -1.0);

/// Pseudoinverse of a column vector, returned as a 1xn row: e^T/|e|^2, or the
/// zero row when |e| <= eps.
Mat vec_pinv(std::span<const double> e, double eps = kZeroErrorEps);

}  // namespace ilcmbk
