#include "countgauss/distcheck.hpp"

#include "countgauss/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cg {

namespace {

void require_orthonormal(const DenseMatrix& u, double tol) {
    DenseMatrix g = gram(u);
    double dev = 0.0;
    for (index_t i = 0; i < g.rows(); ++i)
        for (index_t j = 0; j < g.cols(); ++j) {
            double e = g(i, j) - (i == j ? 1.0 : 0.0);
            dev += e * e;
        }
    dev = std::sqrt(dev);
    if (dev > tol)
        throw std::invalid_argument("U is not orthonormal: ||U^T U - I||_F = " + std::to_string(dev) +
                                    " exceeds tolerance " + std::to_string(tol));
}

struct MeanSe {
    double mean = 0, se = 0;
};

MeanSe mean_and_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

bool below_with_slack(double est, double bound, double se) {
    if (est <= bound) return true;
    double rel = est > 0 ? se / est : 0.0;
    return est <= bound * (1.0 + 3.0 * rel);
}

} // namespace

GramDeviation gram_deviation(const CountSketchMap& s, const DenseMatrix& u) {
    if (u.rows() != s.input_dim)
        throw std::invalid_argument("gram_deviation: U has " + std::to_string(u.rows()) +
                                    " rows, sketch expects " + std::to_string(s.input_dim));
    const index_t d = u.cols();
    require_orthonormal(u, 1e-8 * std::max<double>(1.0, static_cast<double>(d)));

    GramDeviation out;
    DenseMatrix su = countsketch_apply(s, u);
    out.m = gram(su);
    DenseMatrix dev(d, d);
    for (index_t i = 0; i < d; ++i)
        for (index_t j = 0; j < d; ++j) dev(i, j) = (i == j ? 1.0 : 0.0) - out.m(i, j);
    for (index_t i = 0; i < d; ++i) out.trace_dev += dev(i, i);
    const double fro = frobenius_norm(dev);
    out.fro_sq = fro * fro;
    out.op_norm = fro > 0 ? spectral_norm(dev) : 0.0;
    return out;
}

MomentReport moment_suite(const DenseMatrix& u, const std::optional<std::vector<double>>& x,
                          index_t buckets, index_t trials, SeededRng& rng, double c_probe) {
    const index_t n = u.rows(), d = u.cols();
    if (trials < 100)
        throw std::invalid_argument("moment_suite: needs trials >= 100 for standard errors");
    if (buckets < 1)
        throw std::invalid_argument("moment_suite: buckets must be >= 1");
    require_orthonormal(u, 1e-8 * std::max<double>(1.0, static_cast<double>(d)));

    if (x) {
        if (static_cast<index_t>(x->size()) != d)
            throw std::invalid_argument("moment_suite: probe vector has wrong dimension");
        const double cap = c_probe * std::sqrt(std::log(std::max<double>(2.0, static_cast<double>(n))));
        for (double xi : *x)
            if (std::abs(xi) > cap)
                throw std::invalid_argument("moment_suite: probe violates ||x||_inf <= c*sqrt(ln n)");
        for (index_t a = 0; a < n; ++a) {
            double ux = 0.0, rn = 0.0;
            for (index_t j = 0; j < d; ++j) {
                ux += u(a, j) * (*x)[static_cast<std::size_t>(j)];
                rn += u(a, j) * u(a, j);
            }
            if (std::abs(ux) > cap * std::sqrt(rn) + 1e-12)
                throw std::invalid_argument("moment_suite: probe violates |(Ux)_a| <= c*sqrt(ln n)*||U_a||");
        }
    }

    const std::uint64_t master = rng.next_u64();
    std::vector<double> v1(static_cast<std::size_t>(trials)), v2, v3, v4,
        v5(static_cast<std::size_t>(trials)), vt(static_cast<std::size_t>(trials));
    if (x) {
        v2.resize(static_cast<std::size_t>(trials));
        v3.resize(static_cast<std::size_t>(trials));
        v4.resize(static_cast<std::size_t>(trials));
    }

#pragma omp parallel for schedule(static)
    for (index_t t = 0; t < trials; ++t) {
        SeededRng trial_rng(mix64(master, static_cast<std::uint64_t>(t)));
        CountSketchMap s = countsketch_new(buckets, n, trial_rng);
        DenseMatrix su = countsketch_apply(s, u);
        DenseMatrix m = gram(su);

        double fro_sq = 0.0, trace = 0.0;
        for (index_t i = 0; i < d; ++i) {
            for (index_t j = 0; j < d; ++j) {
                double e = (i == j ? 1.0 : 0.0) - m(i, j);
                fro_sq += e * e;
            }
            trace += 1.0 - m(i, i);
        }
        v1[static_cast<std::size_t>(t)] = fro_sq;
        v5[static_cast<std::size_t>(t)] = trace * trace;
        vt[static_cast<std::size_t>(t)] = trace;

        if (x) {
            // w = (I - M) x, quad = x^T (I-M) x.
            std::vector<double> w(static_cast<std::size_t>(d), 0.0);
            double quad = 0.0;
            for (index_t i = 0; i < d; ++i) {
                double acc = 0.0;
                for (index_t j = 0; j < d; ++j)
                    acc += ((i == j ? 1.0 : 0.0) - m(i, j)) * (*x)[static_cast<std::size_t>(j)];
                w[static_cast<std::size_t>(i)] = acc;
                quad += (*x)[static_cast<std::size_t>(i)] * acc;
            }
            double wsq = 0.0;
            for (double wi : w) wsq += wi * wi;
            v2[static_cast<std::size_t>(t)] = wsq;
            v3[static_cast<std::size_t>(t)] = quad * quad;
            v4[static_cast<std::size_t>(t)] = quad * trace;
        }
    }

    MomentReport rep;
    rep.trials = trials;
    rep.n = n;
    rep.d = d;
    rep.buckets = buckets;
    auto [m1, s1] = mean_and_se(v1);
    auto [m5, s5] = mean_and_se(v5);
    auto [mt, st] = mean_and_se(vt);
    rep.est1 = m1;
    rep.se1 = s1;
    rep.est5 = m5;
    rep.se5 = s5;
    rep.trace_mean = mt;
    rep.trace_se = st;
    rep.bound1 = 2.0 * static_cast<double>(d) * static_cast<double>(d) / static_cast<double>(buckets);
    rep.bound5 = static_cast<double>(d) * static_cast<double>(d) / static_cast<double>(buckets);
    rep.pass1 = below_with_slack(rep.est1, rep.bound1, rep.se1);
    rep.pass5 = below_with_slack(rep.est5, rep.bound5, rep.se5);
    if (x) {
        rep.has_x = true;
        auto [m2, s2] = mean_and_se(v2);
        auto [m3, s3] = mean_and_se(v3);
        auto [m4, s4] = mean_and_se(v4);
        rep.est2 = m2;
        rep.se2 = s2;
        rep.est3 = m3;
        rep.se3 = s3;
        rep.est4 = m4;
        rep.se4 = s4;
        const double dn = static_cast<double>(d), bn = static_cast<double>(buckets);
        const double ln_n = std::log(std::max<double>(2.0, static_cast<double>(n)));
        rep.implied2 = rep.est2 * bn / (dn * dn * ln_n * ln_n);
        rep.implied3 = rep.est3 * bn / (dn * dn * ln_n * ln_n);
        rep.implied4 = rep.est4 * bn / (dn * dn * ln_n);
    }
    return rep;
}

double kl_gaussian_vs_identity(const DenseMatrix& sigma) {
    const index_t d = sigma.rows();
    if (sigma.cols() != d || d < 1)
        throw std::invalid_argument("kl_gaussian_vs_identity: sigma must be square and nonempty");
    DenseMatrix lower;
    if (!cholesky(sigma, lower))
        throw std::invalid_argument("kl_gaussian_vs_identity: sigma is not symmetric positive definite");

    // ln det Sigma from the Cholesky diagonal; Tr(Sigma^{-1}) = ||L^{-1}||_F^2
    // by forward-solving L W = I.
    double logdet = 0.0;
    for (index_t i = 0; i < d; ++i) logdet += 2.0 * std::log(lower(i, i));

    double trace_inv = 0.0;
    std::vector<double> w(static_cast<std::size_t>(d));
    for (index_t c = 0; c < d; ++c) {
        for (index_t i = 0; i < d; ++i) {
            double s = (i == c ? 1.0 : 0.0);
            for (index_t k = 0; k < i; ++k) s -= lower(i, k) * w[static_cast<std::size_t>(k)];
            w[static_cast<std::size_t>(i)] = i >= c ? s / lower(i, i) : 0.0;
        }
        for (index_t i = c; i < d; ++i) trace_inv += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    }

    double kl = 0.5 * (trace_inv - static_cast<double>(d)) + 0.5 * logdet;
    if (kl < 0.0 && kl > -1e-10) kl = 0.0; // roundoff clamp: the divergence is nonnegative
    return kl;
}

double pinsker_tv_bound(double kl) {
    if (kl < 0.0)
        throw std::invalid_argument("pinsker_tv_bound: kl must be nonnegative");
    return std::sqrt(0.5 * kl);
}

double bound_B_simple_value(index_t d, index_t m, double delta, double c) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("bound_B_simple: delta must lie in (0,1]");
    if (c <= 0.0) throw std::invalid_argument("bound_B_simple: c must be positive");
    if (d < 1 || m < 1) throw std::invalid_argument("bound_B_simple: d and m must be >= 1");
    return (c / (delta * delta)) * static_cast<double>(d) * static_cast<double>(d) *
           static_cast<double>(m);
}

index_t bound_B_simple(index_t d, index_t m, double delta, double c) {
    return static_cast<index_t>(std::ceil(bound_B_simple_value(d, m, delta, c)));
}

double bound_B_main_value(index_t n, index_t d, index_t m, double delta, double c) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("bound_B_main: delta must lie in (0,1]");
    if (c <= 0.0) throw std::invalid_argument("bound_B_main: c must be positive");
    if (n < 1 || d < 1 || m < 1) throw std::invalid_argument("bound_B_main: n, d, m must be >= 1");
    const double n4 = std::pow(static_cast<double>(n), 4.0);
    if (static_cast<double>(m) > n4)
        throw std::invalid_argument("bound_B_main: m must lie in [1, n^4]; beyond that the sketch "
                                    "is already an isometry with high probability");
    const double ln_n = std::log(static_cast<double>(n));
    return (c / delta) * std::pow(ln_n, 4.0) * static_cast<double>(d) * static_cast<double>(d) *
           std::sqrt(static_cast<double>(m));
}

index_t bound_B_main(index_t n, index_t d, index_t m, double delta, double c) {
    return static_cast<index_t>(std::ceil(bound_B_main_value(n, d, m, delta, c)));
}

RowDistributionReport row_distribution_compare(const DenseMatrix& u, index_t m, index_t buckets,
                                               index_t samples, SeededRng& rng,
                                               SketchSampler sampler, int permutations) {
    const index_t n = u.rows(), d = u.cols();
    if (d < 1) throw std::invalid_argument("row_distribution_compare: degenerate d = 0");
    if (samples < 1000)
        throw std::invalid_argument("row_distribution_compare: needs samples >= 1000");
    if (buckets < 1) {
        if (m < 1) throw std::invalid_argument("row_distribution_compare: need buckets or m");
        buckets = 5 * m;
    }
    if (sampler == SketchSampler::Injective && buckets < n)
        throw std::invalid_argument("row_distribution_compare: injective sampling needs buckets >= n");

    const std::uint64_t master = rng.next_u64();

    // Row-major sample stores: sample s occupies [s*d, (s+1)*d).
    std::vector<double> rows_true(static_cast<std::size_t>(samples * d));
    std::vector<double> rows_cg(static_cast<std::size_t>(samples * d));

#pragma omp parallel for schedule(static)
    for (index_t s = 0; s < samples; ++s) {
        SeededRng r_true(mix64(master, static_cast<std::uint64_t>(2 * s)));
        double* row = rows_true.data() + static_cast<std::size_t>(s * d);
        std::vector<double> g(static_cast<std::size_t>(n));
        for (auto& gi : g) gi = r_true.next_normal();
        for (index_t j = 0; j < d; ++j) {
            const double* uj = u.col(j);
            double acc = 0.0;
            for (index_t i = 0; i < n; ++i) acc += g[static_cast<std::size_t>(i)] * uj[i];
            row[j] = acc;
        }

        SeededRng r_cg(mix64(master, static_cast<std::uint64_t>(2 * s + 1)));
        CountSketchMap map = sampler == SketchSampler::Injective
                                 ? countsketch_injective(buckets, n, r_cg)
                                 : countsketch_new(buckets, n, r_cg);
        DenseMatrix su = countsketch_apply(map, u);
        std::vector<double> gb(static_cast<std::size_t>(buckets));
        for (auto& gi : gb) gi = r_cg.next_normal();
        double* row2 = rows_cg.data() + static_cast<std::size_t>(s * d);
        for (index_t j = 0; j < d; ++j) {
            const double* sj = su.col(j);
            double acc = 0.0;
            for (index_t b = 0; b < buckets; ++b) acc += gb[static_cast<std::size_t>(b)] * sj[b];
            row2[j] = acc;
        }
    }

    RowDistributionReport rep;
    rep.samples = samples;
    rep.permutations = permutations;
    rep.mean_true.assign(static_cast<std::size_t>(d), 0.0);
    rep.mean_cg.assign(static_cast<std::size_t>(d), 0.0);
    rep.cov_true = DenseMatrix(d, d);
    rep.cov_cg = DenseMatrix(d, d);

    auto accumulate = [&](const std::vector<double>& rows, std::vector<double>& mean, DenseMatrix& cov) {
        for (index_t s = 0; s < samples; ++s) {
            const double* row = rows.data() + static_cast<std::size_t>(s * d);
            for (index_t i = 0; i < d; ++i) {
                mean[static_cast<std::size_t>(i)] += row[i];
                for (index_t j = 0; j < d; ++j) cov(i, j) += row[i] * row[j];
            }
        }
        for (auto& v : mean) v /= static_cast<double>(samples);
        for (index_t i = 0; i < d; ++i)
            for (index_t j = 0; j < d; ++j) cov(i, j) /= static_cast<double>(samples);
    };
    accumulate(rows_true, rep.mean_true, rep.cov_true);
    accumulate(rows_cg, rep.mean_cg, rep.cov_cg);

    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    rep.mean_norm_true = norm2(rep.mean_true);
    rep.mean_norm_cg = norm2(rep.mean_cg);
    auto max_dev = [d](const DenseMatrix& cov) {
        double dev = 0.0;
        for (index_t i = 0; i < d; ++i)
            for (index_t j = 0; j < d; ++j)
                dev = std::max(dev, std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)));
        return dev;
    };
    rep.max_cov_dev_true = max_dev(rep.cov_true);
    rep.max_cov_dev_cg = max_dev(rep.cov_cg);

    // Energy distance over the pooled sample with a label-permutation null.
    const index_t total = 2 * samples;
    std::vector<float> dist(static_cast<std::size_t>(total) * static_cast<std::size_t>(total), 0.0f);
    auto point = [&](index_t idx) -> const double* {
        return idx < samples ? rows_true.data() + static_cast<std::size_t>(idx * d)
                             : rows_cg.data() + static_cast<std::size_t>((idx - samples) * d);
    };
#pragma omp parallel for schedule(static)
    for (index_t a = 0; a < total; ++a) {
        const double* pa = point(a);
        for (index_t b = a + 1; b < total; ++b) {
            const double* pb = point(b);
            double s = 0.0;
            for (index_t j = 0; j < d; ++j) {
                const double diff = pa[j] - pb[j];
                s += diff * diff;
            }
            const float v = static_cast<float>(std::sqrt(s));
            dist[static_cast<std::size_t>(a) * static_cast<std::size_t>(total) + static_cast<std::size_t>(b)] = v;
            dist[static_cast<std::size_t>(b) * static_cast<std::size_t>(total) + static_cast<std::size_t>(a)] = v;
        }
    }

    auto energy_for = [&](const std::vector<index_t>& label_of) {
        // label 0 = first population, 1 = second; equal sizes by construction.
        double within0 = 0.0, within1 = 0.0, between = 0.0;
        for (index_t a = 0; a < total; ++a) {
            const float* row = dist.data() + static_cast<std::size_t>(a) * static_cast<std::size_t>(total);
            const index_t la = label_of[static_cast<std::size_t>(a)];
            for (index_t b = a + 1; b < total; ++b) {
                const double v = row[b];
                const index_t lb = label_of[static_cast<std::size_t>(b)];
                if (la == lb) {
                    if (la == 0) within0 += v; else within1 += v;
                } else {
                    between += v;
                }
            }
        }
        const double nn = static_cast<double>(samples);
        return 2.0 * between / (nn * nn) - 2.0 * within0 / (nn * nn) - 2.0 * within1 / (nn * nn);
    };

    std::vector<index_t> labels(static_cast<std::size_t>(total));
    for (index_t i = 0; i < total; ++i) labels[static_cast<std::size_t>(i)] = i < samples ? 0 : 1;
    rep.energy_distance = energy_for(labels);

    std::vector<double> null_stats(static_cast<std::size_t>(permutations));
#pragma omp parallel for schedule(static)
    for (int p = 0; p < permutations; ++p) {
        SeededRng perm_rng(mix64(master, 0xE4E61ULL + static_cast<std::uint64_t>(p)));
        std::vector<index_t> perm_labels(static_cast<std::size_t>(total));
        for (index_t i = 0; i < total; ++i) perm_labels[static_cast<std::size_t>(i)] = i < samples ? 0 : 1;
        for (index_t i = total - 1; i > 0; --i) {
            index_t j = static_cast<index_t>(perm_rng.next_below(static_cast<std::uint64_t>(i + 1)));
            std::swap(perm_labels[static_cast<std::size_t>(i)], perm_labels[static_cast<std::size_t>(j)]);
        }
        null_stats[static_cast<std::size_t>(p)] = energy_for(perm_labels);
    }
    std::sort(null_stats.begin(), null_stats.end());
    const auto q_idx = static_cast<std::size_t>(std::ceil(0.99 * permutations)) - 1;
    rep.energy_null_q99 = null_stats[std::min(q_idx, null_stats.size() - 1)];
    rep.energy_below_null = rep.energy_distance <= rep.energy_null_q99;

    rep.mean_limit = 4.0 * std::sqrt(static_cast<double>(d) / static_cast<double>(samples));
    rep.cov_dev_limit = 3.0 / std::sqrt(static_cast<double>(samples)) +
                        std::sqrt(2.0 / static_cast<double>(buckets)) * static_cast<double>(d);
    rep.means_ok = rep.mean_norm_true <= rep.mean_limit && rep.mean_norm_cg <= rep.mean_limit;
    rep.cov_ok = rep.max_cov_dev_cg <= rep.cov_dev_limit;
    return rep;
}

} // namespace cg
