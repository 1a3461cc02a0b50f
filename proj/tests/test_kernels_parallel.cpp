#include <doctest.h>

#include <cstring>

#include "scscl/kernels.hpp"
#include "scscl/rng.hpp"

using namespace scscl;
using kernels::Exec;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, SeededRng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.same_shape(b) &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("matmul serial and parallel agree bitwise; both match naive") {
    SeededRng rng(17);
    const std::size_t shapes[][3] = {{7, 11, 5}, {33, 64, 17}, {128, 31, 90}};
    for (const auto& shape : shapes) {
        const std::size_t m = shape[0], k = shape[1], n = shape[2];
        Matrix a = random_matrix(m, k, rng);
        Matrix b = random_matrix(k, n, rng);
        Matrix out_s(m, n), out_p(m, n);
        kernels::matmul_into(a, b, out_s, Exec::Serial);
        kernels::matmul_into(a, b, out_p, Exec::Parallel);
        CHECK(bitwise_equal(out_s, out_p));
        Matrix naive(m, n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t t = 0; t < k; ++t) acc += a(i, t) * b(t, j);
                naive(i, j) = acc;
            }
        CHECK(bitwise_equal(out_s, naive));
    }
}

TEST_CASE("gram serial vs parallel") {
    SeededRng rng(23);
    Matrix c = random_matrix(61, 19, rng);
    Matrix out_s(61, 61), out_p(61, 61);
    kernels::gram_into(c, out_s, Exec::Serial);
    kernels::gram_into(c, out_p, Exec::Parallel);
    CHECK(bitwise_equal(out_s, out_p));
    for (std::size_t u = 0; u < 61; ++u)
        for (std::size_t v = 0; v < 61; ++v) {
            double acc = 0.0;
            for (std::size_t j = 0; j < 19; ++j) acc += c(u, j) * c(v, j);
            CHECK(out_s(u, v) == acc);
        }
}

TEST_CASE("transposed products serial vs parallel") {
    SeededRng rng(29);
    Matrix a = random_matrix(40, 13, rng);
    Matrix b = random_matrix(40, 21, rng);
    Matrix atb_s(13, 21), atb_p(13, 21);
    kernels::matmul_at_b_into(a, b, atb_s, Exec::Serial);
    kernels::matmul_at_b_into(a, b, atb_p, Exec::Parallel);
    CHECK(bitwise_equal(atb_s, atb_p));

    Matrix c = random_matrix(25, 13, rng);
    Matrix abt_s(40, 25), abt_p(40, 25);
    kernels::matmul_a_bt_into(a, c, abt_s, Exec::Serial);
    kernels::matmul_a_bt_into(a, c, abt_p, Exec::Parallel);
    CHECK(bitwise_equal(abt_s, abt_p));
}

TEST_CASE("sigmoid pair terms serial vs parallel, with and without diagonal") {
    SeededRng rng(31);
    const std::size_t b = 48;
    Matrix r = random_matrix(b, b, rng);
    Matrix zmat(b, b);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j) zmat(i, j) = (i / 4 == j / 4) ? 1.0 : -1.0;
    for (bool diag : {true, false}) {
        Matrix loss_s(b, b), sig_s(b, b), loss_p(b, b), sig_p(b, b);
        kernels::sigmoid_pair_terms_into(r, zmat, 3.0, 0.2, diag, loss_s, sig_s, Exec::Serial);
        kernels::sigmoid_pair_terms_into(r, zmat, 3.0, 0.2, diag, loss_p, sig_p, Exec::Parallel);
        CHECK(bitwise_equal(loss_s, loss_p));
        CHECK(bitwise_equal(sig_s, sig_p));
        if (!diag)
            for (std::size_t i = 0; i < b; ++i) {
                CHECK(loss_s(i, i) == 0.0);
                CHECK(sig_s(i, i) == 0.0);
            }
    }
}
