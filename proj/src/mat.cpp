#include "dsnav/mat.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dsnav/errors.hpp"
#include "dsnav/kernels.hpp"

namespace dsnav {

namespace {
void require(bool ok, const char* what) {
    if (!ok) throw Error(std::string("mat: dimension mismatch in ") + what);
}
}  // namespace

Mat operator+(const Mat& a, const Mat& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "operator+");
    Mat c(a.rows(), a.cols());
    kernels::ops().add(a.data(), b.data(), c.data(), a.size());
    return c;
}

Mat operator-(const Mat& a, const Mat& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "operator-");
    Mat c(a.rows(), a.cols());
    kernels::ops().sub(a.data(), b.data(), c.data(), a.size());
    return c;
}

Mat operator*(const Mat& a, const Mat& b) {
    require(a.cols() == b.rows(), "operator*");
    Mat c(a.rows(), b.cols());
    kernels::ops().matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

Mat operator*(double s, const Mat& a) {
    Mat c = a;
    kernels::ops().scal(s, c.data(), c.size());
    return c;
}

Mat& operator+=(Mat& a, const Mat& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "operator+=");
    kernels::ops().axpy(1.0, b.data(), a.data(), a.size());
    return a;
}

Mat mul_bt(const Mat& a, const Mat& b) {
    require(a.cols() == b.cols(), "mul_bt");
    Mat c(a.rows(), b.rows());
    kernels::ops().matmul_bt(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.rows());
    return c;
}

Mat mul_at(const Mat& a, const Mat& b) {
    require(a.rows() == b.rows(), "mul_at");
    Mat c(a.cols(), b.cols());
    kernels::ops().matmul_at(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

std::vector<double> mul_vec(const Mat& a, const std::vector<double>& x) {
    require(a.cols() == x.size(), "mul_vec");
    std::vector<double> y(a.rows());
    kernels::ops().matmul(a.data(), x.data(), y.data(), a.rows(), a.cols(), 1);
    return y;
}

std::vector<double> mul_tvec(const Mat& a, const std::vector<double>& x) {
    require(a.rows() == x.size(), "mul_tvec");
    std::vector<double> y(a.cols());
    kernels::ops().matmul_at(a.data(), x.data(), y.data(), a.rows(), a.cols(), 1);
    return y;
}

Mat transpose(const Mat& a) {
    Mat t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

void symmetrize(Mat& a) {
    require(a.rows() == a.cols(), "symmetrize");
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            const double m = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = m;
            a(j, i) = m;
        }
    }
}

double trace(const Mat& a) {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
    return t;
}

double max_abs(const Mat& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

bool cholesky(const Mat& a, Mat& lower) {
    require(a.rows() == a.cols(), "cholesky");
    const std::size_t n = a.rows();
    lower = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j) - kernels::ops().dot(&lower(j, 0), &lower(j, 0), j);
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        lower(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            lower(i, j) = (a(i, j) - kernels::ops().dot(&lower(i, 0), &lower(j, 0), j)) / ljj;
        }
    }
    return true;
}

std::vector<double> cholesky_solve(const Mat& lower, std::vector<double> b) {
    const std::size_t n = lower.rows();
    require(b.size() == n, "cholesky_solve");
    for (std::size_t i = 0; i < n; ++i) {
        b[i] = (b[i] - kernels::ops().dot(lower.data() + i * n, b.data(), i)) / lower(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= lower(j, ii) * b[j];
        b[ii] = s / lower(ii, ii);
    }
    return b;
}

Mat cholesky_solve_mat(const Mat& lower, const Mat& b) {
    require(lower.rows() == b.rows(), "cholesky_solve_mat");
    Mat x(b.rows(), b.cols());
    std::vector<double> col(b.rows());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        for (std::size_t i = 0; i < b.rows(); ++i) col[i] = b(i, j);
        col = cholesky_solve(lower, std::move(col));
        for (std::size_t i = 0; i < b.rows(); ++i) x(i, j) = col[i];
    }
    return x;
}

std::vector<double> symmetric_eigenvalues(Mat a) {
    require(a.rows() == a.cols(), "symmetric_eigenvalues");
    const std::size_t n = a.rows();
    // Cyclic Jacobi; plenty for the <= ~12x12 symmetric matrices used here.
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off <= 1e-30 * std::max(1.0, trace(a) * trace(a))) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double vec_norm(const std::vector<double>& v) {
    return std::sqrt(kernels::ops().dot(v.data(), v.data(), v.size()));
}

}  // namespace dsnav
