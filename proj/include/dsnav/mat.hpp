#pragma once

#include <cstddef>
#include <vector>

namespace dsnav {

/// Small dense row-major matrix. Everything in this project is tiny
/// (state covariances up to ~(6+n) square, stacked Jacobians 3n x (3+n)),
/// so storage is a flat vector and all arithmetic funnels through the
/// kernels layer, giving the scalar and SIMD backends a single code path.
class Mat {
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return a_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    bool operator==(const Mat&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat operator*(const Mat& a, const Mat& b);
Mat operator*(double s, const Mat& a);
Mat& operator+=(Mat& a, const Mat& b);

/// A * B^T
Mat mul_bt(const Mat& a, const Mat& b);
/// A^T * B
Mat mul_at(const Mat& a, const Mat& b);
/// y = A * x
std::vector<double> mul_vec(const Mat& a, const std::vector<double>& x);
/// y = A^T * x
std::vector<double> mul_tvec(const Mat& a, const std::vector<double>& x);

Mat transpose(const Mat& a);
/// a <- (a + a^T) / 2
void symmetrize(Mat& a);
double trace(const Mat& a);
double max_abs(const Mat& a);
double max_abs_diff(const Mat& a, const Mat& b);

/// Lower-triangular Cholesky factor of a symmetric matrix.
/// Returns false (leaving `lower` unspecified) if not positive definite.
bool cholesky(const Mat& a, Mat& lower);
/// Solve A x = b given the Cholesky factor of A.
std::vector<double> cholesky_solve(const Mat& lower, std::vector<double> b);
/// Solve A X = B column-wise given the Cholesky factor of A.
Mat cholesky_solve_mat(const Mat& lower, const Mat& b);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
std::vector<double> symmetric_eigenvalues(Mat a);

double vec_norm(const std::vector<double>& v);

}  // namespace dsnav
