#ifndef COUNTGAUSS_DISTCHECK_HPP
#define COUNTGAUSS_DISTCHECK_HPP

#include <optional>
#include <vector>

#include "countgauss/matrix.hpp"
#include "countgauss/rng.hpp"
#include "countgauss/sketch.hpp"

namespace cg {

// Deviation of M = U^T S^T S U from the identity for one sketch realization.
struct GramDeviation {
    DenseMatrix m;
    double fro_sq = 0.0;    // ||I - M||_F^2
    double trace_dev = 0.0; // Tr(I - M)
    double op_norm = 0.0;   // ||I - M||_2
};

// Requires U with orthonormal columns (checked to 1e-8).
GramDeviation gram_deviation(const CountSketchMap& s, const DenseMatrix& u);

// Monte-Carlo estimates of the five sketch-deviation moments, with the two
// closed-form bounds 2d^2/B and d^2/B asserted and the remaining items reported
// through their implied constants. est2..est4 need a probe vector x.
struct MomentReport {
    index_t trials = 0;
    index_t n = 0, d = 0, buckets = 0;
    double est1 = 0, est2 = 0, est3 = 0, est4 = 0, est5 = 0;
    double se1 = 0, se2 = 0, se3 = 0, se4 = 0, se5 = 0;
    double trace_mean = 0, trace_se = 0;
    double bound1 = 0; // 2 d^2 / B
    double bound5 = 0; // d^2 / B
    bool pass1 = false, pass5 = false;
    bool has_x = false;
    double implied2 = 0, implied3 = 0, implied4 = 0;
};

// trials >= 100 required (standard errors are part of the contract). If x is
// given it must satisfy the probe conditions ||x||_inf <= c_probe*sqrt(ln n)
// and |(Ux)_a| <= c_probe*sqrt(ln n)*||U_a|| for every row a.
MomentReport moment_suite(const DenseMatrix& u, const std::optional<std::vector<double>>& x,
                          index_t buckets, index_t trials, SeededRng& rng,
                          double c_probe = 4.0);

// D( N(0,I) || N(0,Sigma) ) = 1/2 Tr(Sigma^{-1} - I) + 1/2 ln det Sigma,
// computed through a Cholesky factorization. Sigma must be SPD.
double kl_gaussian_vs_identity(const DenseMatrix& sigma);

// Total-variation bound sqrt(kl/2); kl must be nonnegative.
double pinsker_tv_bound(double kl);

// Bucket thresholds. The simple rate is (c/delta^2) d^2 m; the main rate is
// (c/delta) (ln n)^4 d^2 sqrt(m) with m restricted to [1, n^4]. The *_value
// forms return the raw formula; the count forms take the ceiling. Logs are
// natural.
double bound_B_simple_value(index_t d, index_t m, double delta, double c);
index_t bound_B_simple(index_t d, index_t m, double delta, double c);
double bound_B_main_value(index_t n, index_t d, index_t m, double delta, double c);
index_t bound_B_main(index_t n, index_t d, index_t m, double delta, double c);

enum class SketchSampler { Standard, Injective };

// Two-sample comparison between rows of G~*U (exact Gaussian) and rows of
// G*S*U (one fresh sketch per row). Reports means, raw second-moment matrices,
// their max deviation from I, and an energy-distance statistic against a
// permutation null.
struct RowDistributionReport {
    index_t samples = 0;
    std::vector<double> mean_true, mean_cg;
    DenseMatrix cov_true, cov_cg;
    double mean_norm_true = 0, mean_norm_cg = 0;
    double max_cov_dev_true = 0, max_cov_dev_cg = 0;
    double energy_distance = 0;
    double energy_null_q99 = 0;
    int permutations = 0;
    double mean_limit = 0;    // 4 sqrt(d/samples)
    double cov_dev_limit = 0; // 3/sqrt(samples) + sqrt(2/B) d
    bool means_ok = false;
    bool cov_ok = false;
    bool energy_below_null = false;
};

RowDistributionReport row_distribution_compare(const DenseMatrix& u, index_t m, index_t buckets,
                                               index_t samples, SeededRng& rng,
                                               SketchSampler sampler = SketchSampler::Standard,
                                               int permutations = 200);

} // namespace cg

#endif
