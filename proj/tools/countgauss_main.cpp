// Experiment harness: sketch verification, NMF anchor extraction, SRHT
// counterexample, SVM margin preservation, and the sparse-apply benchmark.
//
// Exit codes: 0 success / all asserted bounds pass, 1 a bound or recovery
// assertion failed, 2 usage or parse error. All non-timing output is a pure
// function of (subcommand, config, seed); timing fields live under "timings"
// keys (JSON) or "t_"-prefixed columns (CSV) and are the only bytes allowed to
// differ between runs.

#include "CLI11.hpp"
#include "json.hpp"

#include "countgauss/distcheck.hpp"
#include "countgauss/geometry.hpp"
#include "countgauss/io.hpp"
#include "countgauss/linalg.hpp"
#include "countgauss/nmf.hpp"
#include "countgauss/reference.hpp"
#include "countgauss/sketch.hpp"
#include "countgauss/svm.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;
using namespace cg;

namespace {

struct Common {
    std::uint64_t seed = 12345;
    std::string output;
    int threads = 0;
    bool as_json = false;
    bool as_csv = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "master random seed (recorded in output)");
    cmd->add_option("--output", c.output, "write results to this file instead of stdout");
    cmd->add_option("--threads", c.threads, "worker threads (0 = library default, env COUNTGAUSS_THREADS as fallback)");
    cmd->add_flag("--json", c.as_json, "emit JSON");
    cmd->add_flag("--csv", c.as_csv, "emit CSV");
}

// Record-style subcommands emit JSON only; --csv on them is a usage error.
bool reject_csv(const Common& c, const char* name) {
    if (c.as_csv) {
        std::cerr << name << ": --csv is not supported (JSON record output)\n";
        return true;
    }
    return false;
}

void apply_threads(const Common& c) {
    int t = c.threads;
    if (t <= 0) {
        if (const char* env = std::getenv("COUNTGAUSS_THREADS")) t = std::atoi(env);
    }
#ifdef _OPENMP
    if (t > 0) omp_set_num_threads(t);
#else
    (void)t;
#endif
}

int active_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

// Median of `reps` timed runs after one warmup.
template <typename F>
double timed_median_ms(int reps, F&& fn) {
    fn();
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(reps));
    for (int i = 0; i < reps; ++i) {
        const double t0 = now_ms();
        fn();
        times.push_back(now_ms() - t0);
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

void emit(const Common& c, const std::string& text) {
    if (c.output.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << "\n";
    } else {
        std::ofstream out(c.output);
        if (!out) throw std::runtime_error("cannot open output file '" + c.output + "'");
        out << text;
        if (text.empty() || text.back() != '\n') out << "\n";
    }
}

std::vector<index_t> parse_index_list(const std::string& csv) {
    std::vector<index_t> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(static_cast<index_t>(std::stoll(tok)));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------- verify ----

struct VerifyOpts {
    Common common;
    index_t n = 64, d = 4, buckets = -1, m = 1, trials = 2000, samples = 1000;
    int permutations = 200;
    bool injective = false;
};

int cmd_verify(const VerifyOpts& o) {
    if (reject_csv(o.common, "verify")) return 2;
    apply_threads(o.common);
    if (o.n < 1 || o.d < 1 || o.trials < 100 || o.samples < 1000) {
        std::cerr << "verify: need n >= 1, d >= 1, trials >= 100, samples >= 1000\n";
        return 2;
    }
    index_t buckets = o.buckets;
    if (buckets < 0) buckets = 5 * o.m;
    if (buckets < 1) {
        std::cerr << "verify: buckets must be >= 1\n";
        return 2;
    }

    const double t0 = now_ms();
    SeededRng rng(o.common.seed);
    SeededRng basis_rng = rng.split();
    DenseMatrix u = orthonormal_basis(gaussian_matrix(o.n, o.d, basis_rng));

    SeededRng moment_rng = rng.split();
    MomentReport mom = moment_suite(u, std::nullopt, buckets, o.trials, moment_rng);
    const double t1 = now_ms();

    SeededRng cmp_rng = rng.split();
    RowDistributionReport cmp = row_distribution_compare(
        u, o.m, buckets, o.samples, cmp_rng,
        o.injective ? SketchSampler::Injective : SketchSampler::Standard, o.permutations);
    const double t2 = now_ms();

    const bool trace_zero = std::abs(mom.trace_mean) <= 4.0 * mom.trace_se;
    bool all = mom.pass1 && mom.pass5 && trace_zero && cmp.means_ok && cmp.cov_ok;
    if (o.injective) all = all && cmp.energy_below_null;

    json rec;
    rec["op"] = "verify";
    rec["params"] = {{"n", o.n},         {"d", o.d},           {"B", buckets},
                     {"m", o.m},         {"trials", o.trials}, {"samples", o.samples},
                     {"permutations", o.permutations},         {"injective", o.injective},
                     {"seed", o.common.seed}};
    rec["estimates"] = {{"est1", mom.est1},
                        {"est5", mom.est5},
                        {"trace_mean", mom.trace_mean},
                        {"mean_norm_true", cmp.mean_norm_true},
                        {"mean_norm_cg", cmp.mean_norm_cg},
                        {"max_cov_dev_true", cmp.max_cov_dev_true},
                        {"max_cov_dev_cg", cmp.max_cov_dev_cg},
                        {"energy_distance", cmp.energy_distance},
                        {"energy_null_q99", cmp.energy_null_q99}};
    rec["stderr"] = {{"est1", mom.se1}, {"est5", mom.se5}, {"trace_mean", mom.trace_se}};
    rec["bounds"] = {{"bound1", mom.bound1},
                     {"bound5", mom.bound5},
                     {"mean_limit", cmp.mean_limit},
                     {"cov_dev_limit", cmp.cov_dev_limit}};
    rec["pass"] = {{"moment1", mom.pass1},      {"moment5", mom.pass5},
                   {"trace_zero", trace_zero},  {"means", cmp.means_ok},
                   {"cov", cmp.cov_ok},         {"energy_below_null", cmp.energy_below_null},
                   {"all", all}};
    rec["timings"] = {{"threads", active_threads()},
                      {"moment_ms", t1 - t0},
                      {"compare_ms", t2 - t1}};
    emit(o.common, rec.dump(2));
    return all ? 0 : 1;
}

// --------------------------------------------------------- nmf-synthetic ----

struct NmfSynthOpts {
    Common common;
    index_t d = 200, n = 100;
    std::string k_list = "4,8";
    std::string m_list;
    std::string sigma_list;
    index_t buckets = -1;
    index_t trials = 100;
    std::string algos = "cg,gp,spa";
};

index_t default_m_for(index_t k) {
    return static_cast<index_t>(std::ceil(static_cast<double>(k) *
                                          std::log(std::max<double>(2.0, static_cast<double>(k))))) + 1;
}

int cmd_nmf_synthetic(const NmfSynthOpts& o) {
    apply_threads(o.common);
    auto ks = parse_index_list(o.k_list);
    if (ks.empty() || o.trials < 1) {
        std::cerr << "nmf-synthetic: need a k list and trials >= 1\n";
        return 2;
    }
    std::vector<index_t> ms;
    if (!o.m_list.empty()) {
        ms = parse_index_list(o.m_list);
        if (ms.size() != ks.size()) {
            std::cerr << "nmf-synthetic: m list must match k list length\n";
            return 2;
        }
    } else {
        for (index_t k : ks) ms.push_back(default_m_for(k));
    }

    std::stringstream algos_ss(o.algos);
    std::vector<std::string> algos;
    std::string tok;
    while (std::getline(algos_ss, tok, ',')) algos.push_back(tok);
    std::sort(algos.begin(), algos.end());

    SeededRng rng(o.common.seed);
    const std::uint64_t master = rng.next_u64();

    // Scree mode: selection frequency per column over noise levels.
    if (!o.sigma_list.empty()) {
        auto sigmas = parse_double_list(o.sigma_list);
        const index_t k = ks.front();
        const index_t m = ms.front();
        std::vector<std::string> lines;
        std::string header = "sigma,algo,col_index,freq";
        for (std::size_t si = 0; si < sigmas.size(); ++si) {
            const double sigma = sigmas[si];
            const index_t n_cols = k + k * (k - 1) / 2;
            for (const std::string& algo : algos) {
                if (algo != "cg" && algo != "gp") continue;
                std::vector<index_t> counts(static_cast<std::size_t>(n_cols), 0);
#pragma omp parallel for schedule(static)
                for (index_t t = 0; t < o.trials; ++t) {
                    SeededRng inst_rng(mix64(master, 1000003ULL * si + static_cast<std::uint64_t>(t)));
                    auto inst = generate_noisy_polytope(o.d, k, sigma, inst_rng);
                    SeededRng algo_rng(mix64(master ^ 0xA160ULL,
                                             1000003ULL * si + static_cast<std::uint64_t>(t)));
                    AnchorSet got = algo == "cg" ? cg_nmf(inst.x, m, o.buckets < 0 ? 5 * m : o.buckets, algo_rng)
                                                 : gp_nmf(inst.x, m, algo_rng);
                    for (index_t idx : got.unioned)
#pragma omp atomic
                        ++counts[static_cast<std::size_t>(idx)];
                }
                for (index_t cidx = 0; cidx < n_cols; ++cidx) {
                    const double freq = static_cast<double>(counts[static_cast<std::size_t>(cidx)]) /
                                        static_cast<double>(o.trials);
                    lines.push_back(fmt(sigma) + "," + algo + "," + std::to_string(cidx) + "," + fmt(freq));
                }
            }
        }
        std::string out = header + "\n";
        for (const auto& l : lines) out += l + "\n";
        emit(o.common, out);
        return 0;
    }

    struct Row {
        index_t k, m;
        std::string algo;
        bool skipped = false;
        double success = 0.0;
        index_t violations = 0;
        index_t tie_rows = 0;
        double mean_ms = 0.0;
    };
    std::vector<Row> rows;

    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const index_t k = ks[ki], m = ms[ki];
        const index_t buckets = o.buckets < 0 ? 5 * m : o.buckets;
        for (const std::string& algo : algos) {
            Row row{k, m, algo};
            if (k > std::min(o.d, o.n)) {
                row.skipped = true;
                rows.push_back(row);
                continue;
            }
            index_t successes = 0, violations = 0, ties = 0;
            double total_ms = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : successes, violations, ties, total_ms)
            for (index_t t = 0; t < o.trials; ++t) {
                SeededRng inst_rng(mix64(master, 7919ULL * ki + static_cast<std::uint64_t>(t)));
                auto inst = generate_separable(o.d, o.n, k, inst_rng);
                SeededRng algo_rng(mix64(master ^ 0xA160ULL,
                                         1000003ULL * ki + static_cast<std::uint64_t>(t)));
                const double t0 = now_ms();
                bool ok = false, subset = true;
                if (algo == "cg") {
                    AnchorSet got = cg_nmf(inst.x, m, buckets, algo_rng);
                    ok = got.contains_all(inst.anchors);
                    subset = got.subset_of(inst.anchors);
                    ties += got.tie_rows;
                } else if (algo == "gp") {
                    AnchorSet got = gp_nmf(inst.x, m, algo_rng);
                    ok = got.contains_all(inst.anchors);
                    subset = got.subset_of(inst.anchors);
                    ties += got.tie_rows;
                } else if (algo == "spa") {
                    auto got = spa(inst.x, k);
                    std::sort(got.begin(), got.end());
                    ok = got == inst.anchors;
                } else if (algo == "xray") {
                    auto got = xray(inst.x, k);
                    std::sort(got.indices.begin(), got.indices.end());
                    ok = !got.truncated && got.indices == inst.anchors;
                }
                total_ms += now_ms() - t0;
                if (ok) ++successes;
                if (!subset) ++violations;
            }
            row.success = static_cast<double>(successes) / static_cast<double>(o.trials);
            row.violations = violations;
            row.tie_rows = ties;
            row.mean_ms = total_ms / static_cast<double>(o.trials);
            rows.push_back(row);
        }
    }

    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.k, a.m, a.algo) < std::tie(b.k, b.m, b.algo);
    });

    if (o.common.as_json) {
        json arr = json::array();
        for (const Row& r : rows) {
            json jr;
            jr["k"] = r.k;
            jr["m"] = r.m;
            jr["algo"] = r.algo;
            jr["status"] = r.skipped ? "skipped_infeasible" : "ok";
            if (!r.skipped) {
                jr["success_rate"] = r.success;
                jr["subset_violations"] = r.violations;
                jr["tie_rows"] = r.tie_rows;
                jr["timings"] = {{"mean_ms", r.mean_ms}};
            }
            arr.push_back(jr);
        }
        json rec;
        rec["op"] = "nmf-synthetic";
        rec["params"] = {{"d", o.d}, {"n", o.n}, {"trials", o.trials}, {"seed", o.common.seed}};
        rec["rows"] = arr;
        emit(o.common, rec.dump(2));
        return 0;
    }

    std::string out = "k,m,algo,trials,success_rate,subset_violations,tie_rows,status,t_mean_ms\n";
    for (const Row& r : rows) {
        out += std::to_string(r.k) + "," + std::to_string(r.m) + "," + r.algo + "," +
               std::to_string(o.trials) + ",";
        if (r.skipped)
            out += ",,,skipped_infeasible,\n";
        else
            out += fmt(r.success) + "," + std::to_string(r.violations) + "," + std::to_string(r.tie_rows) +
                   ",ok," + fmt(r.mean_ms) + "\n";
    }
    emit(o.common, out);
    return 0;
}

// ---------------------------------------------------------------- nmf-run ----

struct NmfRunOpts {
    Common common;
    std::string input;
    std::string format = "auto";
    bool demo = false;
    std::string algo = "cg";
    index_t k = 5;
    index_t m = -1;
    index_t buckets = -1;
};

int cmd_nmf_run(const NmfRunOpts& o) {
    if (reject_csv(o.common, "nmf-run")) return 2;
    apply_threads(o.common);
    if (o.input.empty() && !o.demo) {
        std::cerr << "nmf-run: need --input FILE or --demo\n";
        return 2;
    }
    if (o.algo != "cg" && o.algo != "gp" && o.algo != "spa" && o.algo != "xray") {
        std::cerr << "nmf-run: unknown algorithm '" << o.algo << "'\n";
        return 2;
    }

    DenseMatrix x;
    if (o.demo) {
        SeededRng rng(o.common.seed);
        x = generate_separable(50, 30, 5, rng).x;
    } else {
        x = load_matrix(o.input, o.format);
        if (!x.all_finite()) {
            std::cerr << "nmf-run: input has non-finite entries\n";
            return 2;
        }
    }

    const index_t k = std::min(o.k, std::min(x.rows(), x.cols()));
    const index_t m = o.m > 0 ? o.m : default_m_for(k);
    const index_t buckets = o.buckets < 0 ? 5 * m : o.buckets;

    SeededRng rng(mix64(o.common.seed, 0xA160ULL));
    const double t0 = now_ms();
    std::vector<index_t> anchors;
    index_t tie_rows = 0;
    if (o.algo == "cg") {
        AnchorSet got = cg_nmf(x, m, buckets, rng);
        anchors = got.unioned;
        tie_rows = got.tie_rows;
    } else if (o.algo == "gp") {
        AnchorSet got = gp_nmf(x, m, rng);
        anchors = got.unioned;
        tie_rows = got.tie_rows;
    } else if (o.algo == "spa") {
        anchors = spa(x, k);
    } else {
        anchors = xray(x, k).indices;
    }
    const double t_select = now_ms() - t0;

    // Relative reconstruction error as anchors accumulate (selection order for
    // spa/xray, sorted union order for the projection algorithms).
    const double t1 = now_ms();
    json curve = json::array();
    std::vector<index_t> prefix;
    for (index_t idx : anchors) {
        prefix.push_back(idx);
        DenseMatrix basis = take_columns(x, prefix);
        DenseMatrix h = nnls_solve(basis, x, 1e-8, 20000);
        curve.push_back({{"anchors", prefix.size()}, {"rel_error", relative_error(x, prefix, h)}});
    }
    const double t_fit = now_ms() - t1;

    json rec;
    rec["op"] = "nmf-run";
    rec["params"] = {{"algo", o.algo},   {"k", k},
                     {"m", m},           {"B", buckets},
                     {"input", o.demo ? "demo" : o.input}, {"seed", o.common.seed}};
    rec["anchors"] = anchors;
    rec["tie_rows"] = tie_rows;
    rec["rel_error_curve"] = curve;
    rec["timings"] = {{"threads", active_threads()}, {"select_ms", t_select}, {"fit_ms", t_fit}};
    emit(o.common, rec.dump(2));
    return 0;
}

// ------------------------------------------------------------------ bench ----

struct BenchOpts {
    Common common;
    index_t m = 16, buckets = -1, d = 16, row_nnz = 8;
    std::string nnz_list = "250000,500000,1000000,2000000";
    int reps = 5;
};

int cmd_bench(const BenchOpts& o) {
    apply_threads(o.common);
    auto nnz_grid = parse_index_list(o.nnz_list);
    if (nnz_grid.empty() || o.m < 1 || o.d < 1 || o.row_nnz < 1 || o.row_nnz > o.d) {
        std::cerr << "bench: bad size grid\n";
        return 2;
    }
    const index_t buckets = o.buckets < 0 ? 5 * o.m : o.buckets;
    SeededRng rng(o.common.seed);

    struct Row {
        index_t nnz, rows;
        double stage1_ms, stage1_serial_ms, stage2_ms, dense_ms;
    };
    std::vector<Row> rows;
    for (index_t nnz : nnz_grid) {
        const index_t n = std::max<index_t>(1, nnz / o.row_nnz);
        SeededRng data_rng(mix64(o.common.seed, static_cast<std::uint64_t>(nnz)));
        SparseMatrix x = random_sparse(n, o.d, o.row_nnz, data_rng);
        SeededRng t_rng(mix64(o.common.seed, 0xBE00ULL + static_cast<std::uint64_t>(nnz)));
        CountGaussTransform t = countgauss_new(o.m, buckets, n, t_rng);

        DenseMatrix y = countsketch_apply(t.cs, x);
        Row row;
        row.nnz = x.nnz();
        row.rows = n;
        row.stage1_ms = timed_median_ms(o.reps, [&] { y = countsketch_apply(t.cs, x); });
        row.stage1_serial_ms = timed_median_ms(o.reps, [&] { y = reference::countsketch_apply(t.cs, x); });
        row.stage2_ms = timed_median_ms(o.reps, [&] { auto z = gemm(t.g, y); (void)z; });

        // Naive dense-Gaussian baseline, O(nnz * m): Z(:, j) += v * G(:, i).
        SeededRng g_rng(mix64(o.common.seed, 0xDE00 + static_cast<std::uint64_t>(nnz)));
        DenseMatrix gfull = gaussian_matrix(o.m, n, g_rng);
        row.dense_ms = timed_median_ms(std::max(1, o.reps / 2), [&] {
            DenseMatrix z(o.m, o.d);
            for (index_t i = 0; i < x.rows; ++i)
                for (index_t p = x.row_offsets[i]; p < x.row_offsets[i + 1]; ++p) {
                    const double v = x.values[p];
                    const index_t j = x.col_indices[p];
                    const double* gi = gfull.col(i);
                    for (index_t r = 0; r < o.m; ++r) z(r, j) += v * gi[r];
                }
        });
        rows.push_back(row);
    }

    // Stage-1 cost is Theta(nnz): each doubling may grow the time at most
    // 2x plus 50% slack.
    bool growth_ok = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double size_ratio = static_cast<double>(rows[i].nnz) / static_cast<double>(rows[i - 1].nnz);
        const double time_ratio = rows[i].stage1_ms / std::max(1e-9, rows[i - 1].stage1_ms);
        if (time_ratio > 1.25 * size_ratio) growth_ok = false;
    }

    if (o.common.as_json) {
        json arr = json::array();
        for (const Row& r : rows) {
            const double sketch_total = r.stage1_ms + r.stage2_ms;
            json jr;
            jr["nnz"] = r.nnz;
            jr["rows"] = r.rows;
            jr["cols"] = o.d;
            jr["m"] = o.m;
            jr["B"] = buckets;
            jr["timings"] = {{"stage1_ms", r.stage1_ms},
                             {"stage1_serial_ms", r.stage1_serial_ms},
                             {"stage2_ms", r.stage2_ms},
                             {"dense_ms", r.dense_ms},
                             {"speedup_vs_dense", r.dense_ms / std::max(1e-9, sketch_total)},
                             {"growth_ok", growth_ok}};
            arr.push_back(jr);
        }
        json rec;
        rec["op"] = "bench";
        rec["params"] = {{"m", o.m}, {"B", buckets}, {"d", o.d}, {"row_nnz", o.row_nnz},
                         {"reps", o.reps}, {"seed", o.common.seed}};
        rec["rows"] = arr;
        emit(o.common, rec.dump(2));
        return growth_ok ? 0 : 1;
    }

    std::string out = "nnz,rows,cols,m,B,t_stage1_ms,t_stage1_serial_ms,t_stage2_ms,t_dense_ms,t_speedup_vs_dense,t_growth_ok\n";
    for (const Row& r : rows) {
        const double sketch_total = r.stage1_ms + r.stage2_ms;
        out += std::to_string(r.nnz) + "," + std::to_string(r.rows) + "," + std::to_string(o.d) + "," +
               std::to_string(o.m) + "," + std::to_string(buckets) + "," + fmt(r.stage1_ms) + "," +
               fmt(r.stage1_serial_ms) + "," + fmt(r.stage2_ms) + "," + fmt(r.dense_ms) + "," +
               fmt(r.dense_ms / std::max(1e-9, sketch_total)) + "," + (growth_ok ? "1" : "0") + "\n";
    }
    emit(o.common, out);
    return growth_ok ? 0 : 1;
}

// --------------------------------------------------------- counterexample ----

struct CounterOpts {
    Common common;
    index_t d = 8;
    index_t samples = 200000;
};

int cmd_counterexample(const CounterOpts& o) {
    if (reject_csv(o.common, "counterexample")) return 2;
    apply_threads(o.common);
    if (o.d < 2 || (o.d & (o.d - 1)) != 0) {
        std::cerr << "counterexample: --d must be a power of two, >= 2\n";
        return 2;
    }
    SeededRng rng(o.common.seed);
    SrhtConeReport rep = srht_counterexample_check(o.d, o.samples, rng);

    json rec;
    rec["op"] = "counterexample";
    rec["params"] = {{"d", o.d}, {"samples", o.samples}, {"seed", o.common.seed}};
    rec["metrics"] = {{"vectors_checked", rep.vectors_checked},
                      {"vectors_in_cone", rep.vectors_in_cone},
                      {"exhaustive", rep.exhaustive},
                      {"omega_mc", rep.omega_mc},
                      {"omega_stderr", rep.omega_stderr},
                      {"omega_one_sigma_tail", 0.15865525393145707},
                      {"sin_3pi_10", rep.sin_3pi_10},
                      {"max_coordinate", rep.coordinate},
                      {"sin_exceeds_inv_sqrt2", rep.sin_3pi_10 > 1.0 / std::numbers::sqrt2}};
    rec["pass"] = {{"no_sign_vector_in_cone", rep.vectors_in_cone == 0}};
    emit(o.common, rec.dump(2));
    return rep.vectors_in_cone == 0 ? 0 : 1;
}

// -------------------------------------------------------------- svm-check ----

struct SvmCheckOpts {
    Common common;
    std::string input;
    std::string test_input;
    index_t n = 200, d = 2000, rank = 3;
    double separation = 4.0, noise = 1.0;
    std::string r_list = "128,256,512";
    double svm_c = 500.0;
    double tol = 1e-10;
    int max_passes = 200000;
};

DenseMatrix projection_matrix(const std::string& kind, index_t d, index_t r, SeededRng& rng) {
    if (kind == "gaussian") {
        DenseMatrix g = gaussian_matrix(d, r, rng);
        const double s = 1.0 / std::sqrt(static_cast<double>(r));
        for (index_t i = 0; i < g.size(); ++i) g.data()[i] *= s;
        return g;
    }
    if (kind == "countsketch") {
        CountSketchMap map = countsketch_new(r, d, rng);
        DenseMatrix rm(d, r);
        for (index_t i = 0; i < d; ++i)
            rm(i, map.hash[static_cast<std::size_t>(i)]) = map.sign[static_cast<std::size_t>(i)];
        return rm;
    }
    if (kind == "countgauss") {
        CountGaussTransform t = countgauss_new(r, d, rng); // buckets = 5r
        DenseMatrix s = reference::materialize(t.cs);      // r x d after composition
        DenseMatrix ts = gemm(t.g, s);                     // r x d
        DenseMatrix rm = transpose(ts);                    // d x r
        const double scale = 1.0 / std::sqrt(static_cast<double>(r));
        for (index_t i = 0; i < rm.size(); ++i) rm.data()[i] *= scale;
        return rm;
    }
    throw std::invalid_argument("unknown projection kind '" + kind + "'");
}

int cmd_svm_check(const SvmCheckOpts& o) {
    if (reject_csv(o.common, "svm-check")) return 2;
    apply_threads(o.common);
    auto r_values = parse_index_list(o.r_list);
    if (r_values.empty() || o.svm_c <= 0) {
        std::cerr << "svm-check: need an r list and positive C\n";
        return 2;
    }

    SeededRng rng(o.common.seed);
    SvmProblem prob;
    if (!o.input.empty()) {
        std::ifstream in(o.input);
        if (!in) {
            std::cerr << "svm-check: cannot open '" << o.input << "'\n";
            return 2;
        }
        try {
            prob = read_libsvm(in, o.svm_c);
        } catch (const ParseError& e) {
            std::cerr << "svm-check: " << e.what() << "\n";
            return 2;
        }
    } else {
        prob = make_blobs(o.n, o.d, o.rank, o.separation, o.noise, o.svm_c, rng);
    }

    std::optional<SvmProblem> test;
    if (!o.test_input.empty()) {
        std::ifstream in(o.test_input);
        if (!in) {
            std::cerr << "svm-check: cannot open '" << o.test_input << "'\n";
            return 2;
        }
        try {
            test = read_libsvm(in, o.svm_c, prob.x.cols());
        } catch (const ParseError& e) {
            std::cerr << "svm-check: " << e.what() << "\n";
            return 2;
        }
    }

    const std::vector<std::string> kinds = {"countgauss", "countsketch", "gaussian"};
    json rows = json::array();
    bool all_pass = true;
    for (index_t r : r_values) {
        for (const std::string& kind : kinds) {
            SeededRng proj_rng(mix64(o.common.seed, mix64(static_cast<std::uint64_t>(r),
                                                          std::hash<std::string>{}(kind))));
            const double t0 = now_ms();
            DenseMatrix rm = projection_matrix(kind, prob.x.cols(), r, proj_rng);
            DenseMatrix xr = gemm(prob.x, rm);
            const double proj_ms = now_ms() - t0;

            json row;
            row["r"] = r;
            row["projection"] = kind;
            try {
                const double t1 = now_ms();
                MarginReport rep = margin_preservation_check(prob, rm, o.tol, o.max_passes);
                const double solve_ms = now_ms() - t1;
                row["e"] = rep.e;
                row["gamma_orig"] = rep.gamma_orig;
                row["gamma_proj"] = rep.gamma_proj;
                row["lower"] = rep.lower;
                row["upper"] = rep.upper;
                row["pass"] = rep.pass;
                row["precondition_failed"] = false;
                if (!rep.pass) all_pass = false;
                if (test) {
                    SvmProblem pproj{xr, prob.y, prob.c};
                    SvmSolution sol = svm_dual_solve(pproj, o.tol, o.max_passes);
                    DenseMatrix xtest = gemm(test->x, rm);
                    index_t errors = 0;
                    for (index_t i = 0; i < xtest.rows(); ++i) {
                        double score = 0.0;
                        for (index_t j = 0; j < xtest.cols(); ++j)
                            score += sol.w[static_cast<std::size_t>(j)] * xtest(i, j);
                        if ((score >= 0 ? 1.0 : -1.0) != test->y[static_cast<std::size_t>(i)]) ++errors;
                    }
                    row["test_error"] = static_cast<double>(errors) / static_cast<double>(xtest.rows());
                }
                row["timings"] = {{"proj_ms", proj_ms}, {"solve_ms", solve_ms}};
            } catch (const EmbeddingTooLossy& e) {
                row["e"] = e.error;
                row["precondition_failed"] = true;
                row["timings"] = {{"proj_ms", proj_ms}};
            }
            rows.push_back(row);
        }
    }

    json rec;
    rec["op"] = "svm-check";
    rec["params"] = {{"input", o.input.empty() ? "blobs" : o.input},
                     {"N", prob.x.rows()},
                     {"d", prob.x.cols()},
                     {"rank", o.rank},
                     {"C", o.svm_c},
                     {"r_list", o.r_list},
                     {"seed", o.common.seed}};
    rec["rows"] = rows;
    rec["pass"] = {{"all", all_pass}};
    emit(o.common, rec.dump(2));
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CountGauss sketching library: experiments and verification harness"};
    app.require_subcommand(1);

    VerifyOpts vo;
    auto* verify = app.add_subcommand("verify", "moment bounds and row-distribution comparison");
    add_common(verify, vo.common);
    verify->add_option("--n", vo.n, "ambient dimension of U");
    verify->add_option("--d", vo.d, "columns of U");
    verify->add_option("--B", vo.buckets, "sketch buckets (default 5*m)");
    verify->add_option("--m", vo.m, "projection rows (used for the default B)");
    verify->add_option("--trials", vo.trials, "Monte-Carlo trials for the moment suite");
    verify->add_option("--samples", vo.samples, "rows per population for the comparison");
    verify->add_option("--permutations", vo.permutations, "permutation-null resamples");
    verify->add_flag("--injective", vo.injective, "draw sketches conditioned on distinct buckets");

    NmfSynthOpts no;
    auto* nmfsyn = app.add_subcommand("nmf-synthetic", "synthetic recovery grid / noise scree");
    add_common(nmfsyn, no.common);
    nmfsyn->add_option("--d", no.d, "feature dimension");
    nmfsyn->add_option("--n", no.n, "columns");
    nmfsyn->add_option("--k-list", no.k_list, "comma-separated anchor counts");
    nmfsyn->add_option("--m-list", no.m_list, "comma-separated m per k (default ceil(k ln k)+1)");
    nmfsyn->add_option("--sigma-list", no.sigma_list, "noise levels: switch to scree mode");
    nmfsyn->add_option("--B", no.buckets, "sketch buckets (default 5*m)");
    nmfsyn->add_option("--trials", no.trials, "instances per cell");
    nmfsyn->add_option("--algos", no.algos, "subset of cg,gp,spa,xray");

    NmfRunOpts ro;
    auto* nmfrun = app.add_subcommand("nmf-run", "anchor extraction on a matrix file");
    add_common(nmfrun, ro.common);
    nmfrun->add_option("--input", ro.input, "matrix file (Matrix Market or CSV)");
    nmfrun->add_option("--format", ro.format, "auto|mtx|csv");
    nmfrun->add_flag("--demo", ro.demo, "run on a generated 50x30 rank-5 demo instance");
    nmfrun->add_option("--algo", ro.algo, "cg|gp|spa|xray");
    nmfrun->add_option("--k", ro.k, "anchors to select (spa/xray) and curve length");
    nmfrun->add_option("--m", ro.m, "projection rows for cg/gp");
    nmfrun->add_option("--B", ro.buckets, "sketch buckets (default 5*m)");

    BenchOpts bo;
    auto* bench = app.add_subcommand("bench", "nnz-scaling benchmark of the two-stage apply");
    add_common(bench, bo.common);
    bench->add_option("--m", bo.m, "projection rows");
    bench->add_option("--B", bo.buckets, "sketch buckets (default 5*m)");
    bench->add_option("--d", bo.d, "data columns");
    bench->add_option("--row-nnz", bo.row_nnz, "nonzeros per data row");
    bench->add_option("--nnz-list", bo.nnz_list, "comma-separated nnz grid");
    bench->add_option("--reps", bo.reps, "timed repetitions (median reported)");

    CounterOpts co;
    auto* counter = app.add_subcommand("counterexample", "SRHT pentagon cone check");
    add_common(counter, co.common);
    counter->add_option("--d", co.d, "embedding dimension (power of two)");
    counter->add_option("--samples", co.samples, "Monte-Carlo directions for the solid angle");

    SvmCheckOpts so;
    auto* svmchk = app.add_subcommand("svm-check", "margin preservation under projections");
    add_common(svmchk, so.common);
    svmchk->add_option("--input", so.input, "LIBSVM training file");
    svmchk->add_option("--test-input", so.test_input, "LIBSVM test file");
    svmchk->add_option("--N", so.n, "generated samples (no --input)");
    svmchk->add_option("--d", so.d, "generated dimension");
    svmchk->add_option("--rank", so.rank, "generated signal-subspace rank");
    svmchk->add_option("--separation", so.separation, "generated class separation");
    svmchk->add_option("--noise", so.noise, "generated within-class noise");
    svmchk->add_option("--r-list", so.r_list, "projection dimensions");
    svmchk->add_option("--svm-C", so.svm_c, "soft-margin box");
    svmchk->add_option("--tol", so.tol, "dual KKT tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(vo);
        if (nmfsyn->parsed()) return cmd_nmf_synthetic(no);
        if (nmfrun->parsed()) return cmd_nmf_run(ro);
        if (bench->parsed()) return cmd_bench(bo);
        if (counter->parsed()) return cmd_counterexample(co);
        if (svmchk->parsed()) return cmd_svm_check(so);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
