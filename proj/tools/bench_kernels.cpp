// Times the serial reference kernels against the OpenMP versions and checks
// that both produce identical bits while doing so.

#include "pfdet/kernels.hpp"
#include "pfdet/matrix.hpp"
#include "pfdet/rng.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

using pfdet::Matrix;

namespace {

double seconds_per_call(const std::function<void()>& fn, int reps) {
    using clock = std::chrono::steady_clock;
    fn(); // warm up
    const auto start = clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const std::chrono::duration<double> elapsed = clock::now() - start;
    return elapsed.count() / reps;
}

Matrix random_matrix(int rows, int cols, pfdet::Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

} // namespace

int main(int argc, char** argv) {
    int num_users = 16;
    int block = 2048;
    int reps = 200;
    for (int a = 1; a + 1 < argc; a += 2) {
        const std::string flag = argv[a];
        const int value = std::atoi(argv[a + 1]);
        if (flag == "--K") num_users = value;
        else if (flag == "--T") block = value;
        else if (flag == "--reps") reps = value;
        else {
            std::fprintf(stderr, "usage: kernel_bench [--K n] [--T n] [--reps n]\n");
            return 1;
        }
    }

#ifdef _OPENMP
    std::printf("K=%d T=%d reps=%d threads=%d\n", num_users, block, reps, omp_get_max_threads());
#else
    std::printf("K=%d T=%d reps=%d (built without OpenMP)\n", num_users, block, reps);
#endif

    pfdet::Rng rng(42);
    const Matrix b = random_matrix(num_users, num_users, rng);
    const Matrix y = random_matrix(num_users, block, rng);

    Matrix s_ref(num_users, block), s_par(num_users, block);
    Matrix g_ref(num_users, num_users), g_par(num_users, num_users);

    pfdet::kernels::serial::unmix(b, y, s_ref);
    pfdet::kernels::parallel::unmix(b, y, s_par);
    pfdet::kernels::serial::sign_cross(s_ref, y, g_ref);
    pfdet::kernels::parallel::sign_cross(s_par, y, g_par);
    const double l1_ref = pfdet::kernels::serial::l1_sum(s_ref);
    const double l1_par = pfdet::kernels::parallel::l1_sum(s_par);
    if (!(s_ref == s_par) || !(g_ref == g_par) || l1_ref != l1_par) {
        std::fprintf(stderr, "FAIL: serial and parallel kernels disagree\n");
        return 1;
    }

    struct Row {
        const char* name;
        double serial_s;
        double parallel_s;
    };
    const Row rows[] = {
        {"unmix",
         seconds_per_call([&] { pfdet::kernels::serial::unmix(b, y, s_ref); }, reps),
         seconds_per_call([&] { pfdet::kernels::parallel::unmix(b, y, s_par); }, reps)},
        {"l1_sum",
         seconds_per_call([&] { (void)pfdet::kernels::serial::l1_sum(s_ref); }, reps),
         seconds_per_call([&] { (void)pfdet::kernels::parallel::l1_sum(s_par); }, reps)},
        {"sign_cross",
         seconds_per_call([&] { pfdet::kernels::serial::sign_cross(s_ref, y, g_ref); }, reps),
         seconds_per_call([&] { pfdet::kernels::parallel::sign_cross(s_par, y, g_par); }, reps)},
    };

    std::printf("%-12s %12s %12s %9s\n", "kernel", "serial (us)", "openmp (us)", "speedup");
    for (const Row& r : rows)
        std::printf("%-12s %12.2f %12.2f %8.2fx\n", r.name, r.serial_s * 1e6, r.parallel_s * 1e6,
                    r.serial_s / r.parallel_s);
    std::printf("results identical across backends\n");
    return 0;
}
