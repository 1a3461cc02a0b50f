// Times the serial reference kernels against their OpenMP variants and checks
// that both paths produce bitwise-identical output.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include "scscl/kernels.hpp"
#include "scscl/losses.hpp"
#include "scscl/rng.hpp"

using namespace scscl;
using kernels::Exec;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

Matrix random_matrix(std::size_t r, std::size_t c, SeededRng& rng) {
    Matrix m(r, c);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

}  // namespace

int main() {
    SeededRng rng(42);
    const int reps = 5;
    std::printf("%-24s %10s %10s %8s  %s\n", "kernel", "serial ms", "omp ms", "speedup",
                "bitwise");

    auto report = [&](const char* name, const std::function<void(Exec)>& run,
                      const Matrix& serial_out, const Matrix& parallel_out) {
        double ts = time_ms([&] { run(Exec::Serial); }, reps);
        double tp = time_ms([&] { run(Exec::Parallel); }, reps);
        std::printf("%-24s %10.3f %10.3f %8.2fx  %s\n", name, ts, tp, ts / tp,
                    bitwise_equal(serial_out, parallel_out) ? "yes" : "NO");
    };

    {
        Matrix a = random_matrix(256, 256, rng);
        Matrix b = random_matrix(256, 256, rng);
        Matrix out_s(256, 256), out_p(256, 256);
        report("matmul 256x256x256",
               [&](Exec e) {
                   kernels::matmul_into(a, b, e == Exec::Serial ? out_s : out_p, e);
               },
               out_s, out_p);
    }
    {
        Matrix c = random_matrix(512, 256, rng);
        Matrix out_s(512, 512), out_p(512, 512);
        report("gram 512x256",
               [&](Exec e) { kernels::gram_into(c, e == Exec::Serial ? out_s : out_p, e); },
               out_s, out_p);
    }
    {
        Matrix a = random_matrix(512, 128, rng);
        Matrix b = random_matrix(512, 128, rng);
        Matrix out_s(128, 128), out_p(128, 128);
        report("matmul_at_b 512x128",
               [&](Exec e) {
                   kernels::matmul_at_b_into(a, b, e == Exec::Serial ? out_s : out_p, e);
               },
               out_s, out_p);
    }
    {
        Matrix a = random_matrix(256, 128, rng);
        Matrix b = random_matrix(256, 128, rng);
        Matrix out_s(256, 256), out_p(256, 256);
        report("matmul_a_bt 256x128",
               [&](Exec e) {
                   kernels::matmul_a_bt_into(a, b, e == Exec::Serial ? out_s : out_p, e);
               },
               out_s, out_p);
    }
    {
        const std::size_t n = 512;
        Matrix r = random_matrix(n, n, rng);
        Matrix zmat(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                zmat(i, j) = ((i / 8) == (j / 8)) ? 1.0 : -1.0;
        Matrix loss_s(n, n), sig_s(n, n), loss_p(n, n), sig_p(n, n);
        report("sigmoid_pairs 512x512",
               [&](Exec e) {
                   bool serial = e == Exec::Serial;
                   kernels::sigmoid_pair_terms_into(r, zmat, 10.0, 0.5, true,
                                                    serial ? loss_s : loss_p,
                                                    serial ? sig_s : sig_p, e);
               },
               loss_s, loss_p);
    }
    return 0;
}
