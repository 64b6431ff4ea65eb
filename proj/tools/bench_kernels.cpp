// Benchmark of the parallel raster kernels against the single-threaded
// per-pixel reference, plus the scoring-pass scaling (contribution vs oracle).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include <CLI11.hpp>

#include "alv/adapt.hpp"
#include "alv/raster.hpp"
#include "alv/synthetic.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

double time_median(const std::function<void()>& fn, int reps) {
    std::vector<double> times;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        times.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

double max_abs_diff(const alv::RenderOutput& a, const alv::RenderOutput& b) {
    double m = 0.0;
    for (size_t k = 0; k < a.alpha.data.size(); ++k)
        m = std::max(m, std::abs(a.alpha.data[k] - b.alpha.data[k]));
    for (size_t k = 0; k < a.rgb.data.size(); ++k)
        m = std::max(m, std::abs(a.rgb.data[k] - b.rgb.data[k]));
    return m;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"alv kernel benchmark: serial reference vs parallel kernels"};
    std::vector<int> sizes = {32, 64, 128};
    int canvas = 96;
    int reps = 3;
    int threads = 0;
    bool scaling = false;
    app.add_option("--sizes", sizes, "primitive counts to benchmark");
    app.add_option("--canvas", canvas, "canvas edge length");
    app.add_option("--reps", reps, "repetitions per measurement (median)");
    app.add_option("--threads", threads, "OpenMP thread count (0 = default)");
    app.add_flag("--scaling", scaling, "also run the scoring-pass scaling sweep");
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
    std::printf("OpenMP threads: %d\n", threads > 0 ? threads : omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif

    const alv::RenderConfig rc(canvas, canvas, 1.0);
    std::printf("%-6s %-22s %-12s %-12s %-9s %-10s\n", "N", "kernel", "serial_s", "parallel_s",
                "speedup", "max_diff");
    for (int n : sizes) {
        const alv::LayerVector scene = alv::synthetic::bench_scene(7u * n + 1, n, canvas, canvas,
                                                                   8.0);
        alv::RenderOutput out_serial, out_parallel;
        const double ts = time_median([&] { out_serial = alv::serial_ref::composite(scene, rc); },
                                      reps);
        const double tp = time_median([&] { out_parallel = alv::composite(scene, rc); }, reps);
        std::printf("%-6d %-22s %-12.5f %-12.5f %-9.2f %-10.2e\n", n, "composite", ts, tp,
                    ts / tp, max_abs_diff(out_serial, out_parallel));

        std::vector<double> s_serial, s_parallel;
        const double ts2 = time_median(
            [&] { s_serial = alv::serial_ref::contribution_scores(scene, rc); }, reps);
        const double tp2 =
            time_median([&] { s_parallel = alv::contribution_scores(scene, rc); }, reps);
        double sd = 0.0;
        for (size_t i = 0; i < s_serial.size(); ++i)
            sd = std::max(sd, std::abs(s_serial[i] - s_parallel[i]));
        std::printf("%-6d %-22s %-12.5f %-12.5f %-9.2f %-10.2e\n", n, "contribution_scores",
                    ts2, tp2, ts2 / tp2, sd);
    }

#ifdef _OPENMP
    // Same kernel, one thread vs the full team.
    std::printf("\nthread scaling of the parallel kernels:\n");
    std::printf("%-6s %-22s %-12s %-12s %-9s\n", "N", "kernel", "1_thread_s", "team_s",
                "speedup");
    const int team = threads > 0 ? threads : omp_get_max_threads();
    for (int n : sizes) {
        const alv::LayerVector scene = alv::synthetic::bench_scene(7u * n + 1, n, canvas, canvas,
                                                                   8.0);
        omp_set_num_threads(1);
        const double t1 = time_median([&] { alv::composite(scene, rc); }, reps);
        const double t1s = time_median([&] { alv::contribution_scores(scene, rc); }, reps);
        omp_set_num_threads(team);
        const double tn = time_median([&] { alv::composite(scene, rc); }, reps);
        const double tns = time_median([&] { alv::contribution_scores(scene, rc); }, reps);
        std::printf("%-6d %-22s %-12.5f %-12.5f %-9.2f\n", n, "composite", t1, tn, t1 / tn);
        std::printf("%-6d %-22s %-12.5f %-12.5f %-9.2f\n", n, "contribution_scores", t1s, tns,
                    t1s / tns);
    }
#endif

    if (scaling) {
        std::printf("\nscoring-pass scaling (canvas %dx%d):\n", canvas, canvas);
        std::printf("%-6s %-22s %-12s\n", "N", "pass", "seconds");
        for (int n : {64, 128, 256, 512}) {
            const alv::LayerVector scene =
                alv::synthetic::bench_scene(11u * n + 3, n, canvas, canvas, 12.0);
            const double tc = time_median([&] { alv::contribution_scores(scene, rc); }, reps);
            const double to = time_median([&] { alv::oracle_scores(scene, rc); }, reps);
            std::printf("%-6d %-22s %-12.5f\n", n, "contribution (O(N))", tc);
            std::printf("%-6d %-22s %-12.5f\n", n, "oracle sweep (O(N^2))", to);
        }
    }
    return 0;
}
