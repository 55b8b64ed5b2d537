#include <benchmark/benchmark.h>

#include <omp.h>

#include "loewner_lab/cg.hpp"
#include "loewner_lab/conditions.hpp"
#include "loewner_lab/ensemble.hpp"
#include "loewner_lab/rng.hpp"

using namespace ll;

namespace {

LaplaceSystem grid_system(int n) {
    LaplaceSystem A;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            std::vector<std::pair<int, double>> row;
            if (x > 0) row.emplace_back(y * n + x - 1, 1.0);
            if (x + 1 < n) row.emplace_back(y * n + x + 1, 1.0);
            if (y > 0) row.emplace_back((y - 1) * n + x, 1.0);
            if (y + 1 < n) row.emplace_back((y + 1) * n + x, 1.0);
            A.add_row(row, 4.0);
        }
    return A;
}

std::vector<double> rhs(int n) {
    Rng rng(1);
    std::vector<double> b(n);
    for (auto& v : b) v = rng.uniform();
    return b;
}

void BM_cg_serial(benchmark::State& st) {
    LaplaceSystem A = grid_system(int(st.range(0)));
    auto b = rhs(A.n);
    for (auto _ : st) {
        std::vector<double> x(A.n, 0.0);
        benchmark::DoNotOptimize(cg_solve_serial(A, b, x, 1e-8, 100000));
    }
}

void BM_cg_parallel(benchmark::State& st) {
    LaplaceSystem A = grid_system(int(st.range(0)));
    auto b = rhs(A.n);
    omp_set_num_threads(int(st.range(1)));
    for (auto _ : st) {
        std::vector<double> x(A.n, 0.0);
        benchmark::DoNotOptimize(cg_solve(A, b, x, 1e-8, 100000));
    }
}

void BM_g2_serial(benchmark::State& st) {
    ModelSpec s;
    s.model = Model::Percolation;
    s.domain = make_triangular_rhombus(32);
    G2Options o;
    o.C = 4.0;
    o.inner_radii = {1.5};
    o.samples = 40;
    for (auto _ : st) benchmark::DoNotOptimize(test_condition_G2_serial(s, o));
}

void BM_g2_parallel(benchmark::State& st) {
    ModelSpec s;
    s.model = Model::Percolation;
    s.domain = make_triangular_rhombus(32);
    G2Options o;
    o.C = 4.0;
    o.inner_radii = {1.5};
    o.samples = 40;
    o.workers = int(st.range(0));
    for (auto _ : st) benchmark::DoNotOptimize(test_condition_G2(s, o));
}

}  // namespace

BENCHMARK(BM_cg_serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_cg_parallel)->Args({64, 1})->Args({64, 4})->Args({128, 1})->Args({128, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_g2_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_g2_parallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
