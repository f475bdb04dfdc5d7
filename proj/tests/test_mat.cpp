#include <cmath>

#include "doctest.h"
#include "dsnav/mat.hpp"
#include "dsnav/rng.hpp"

using namespace dsnav;

namespace {

Mat random_spd(Rng& rng, std::size_t n, double scale) {
    Mat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = scale * (2.0 * rng.uniform() - 1.0);
    Mat spd = mul_at(a, a);
    for (std::size_t i = 0; i < n; ++i) spd(i, i) += 0.1 * scale * scale;
    return spd;
}

}  // namespace

TEST_CASE("cholesky factorization solves SPD systems to machine accuracy") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 11);
        const Mat a = random_spd(rng, n, 3.0);
        Mat lower;
        REQUIRE(cholesky(a, lower));
        std::vector<double> x_true(n);
        for (auto& v : x_true) v = 2.0 * rng.uniform() - 1.0;
        const std::vector<double> b = mul_vec(a, x_true);
        const std::vector<double> x = cholesky_solve(lower, b);
        for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-9));
    }
}

TEST_CASE("cholesky rejects indefinite matrices") {
    Mat a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;
    Mat lower;
    CHECK_FALSE(cholesky(a, lower));
}

TEST_CASE("jacobi eigenvalues match known spectra") {
    Mat a(3, 3);
    a(0, 0) = 2.0;
    a(1, 1) = 2.0;
    a(0, 1) = a(1, 0) = 1.0;
    a(2, 2) = 5.0;
    const std::vector<double> ev = symmetric_eigenvalues(a);
    CHECK(ev[0] == doctest::Approx(1.0));
    CHECK(ev[1] == doctest::Approx(3.0));
    CHECK(ev[2] == doctest::Approx(5.0));

    // eigenvalue sum equals trace on random symmetric matrices
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Mat s = random_spd(rng, 6, 2.0);
        const std::vector<double> evs = symmetric_eigenvalues(s);
        double sum = 0.0;
        for (const double v : evs) sum += v;
        CHECK(sum == doctest::Approx(trace(s)).epsilon(1e-10));
        CHECK(evs.front() > 0.0);  // SPD
    }
}

TEST_CASE("transpose and symmetrize behave") {
    Rng rng(3);
    Mat a(4, 3);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform();
    const Mat t = transpose(a);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(a(i, j) == t(j, i));

    Mat s(3, 3);
    for (std::size_t i = 0; i < s.size(); ++i) s.data()[i] = rng.uniform();
    symmetrize(s);
    CHECK(max_abs_diff(s, transpose(s)) == 0.0);
}
