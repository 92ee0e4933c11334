#include "countgauss/nmf.hpp"

#include "countgauss/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cg {

SeparableInstance generate_separable(index_t d, index_t n, index_t k, SeededRng& rng) {
    if (k < 1 || k > std::min(d, n))
        throw std::invalid_argument("generate_separable: need 1 <= k <= min(d, n)");
    SeparableInstance inst;
    inst.seed = rng.seed();
    inst.noise_sigma = 0.0;

    DenseMatrix w(d, k);
    for (index_t j = 0; j < k; ++j)
        for (index_t i = 0; i < d; ++i) w(i, j) = rng.next_uniform();

    // Mixing weights: row j of the n x k weight matrix becomes column j of H.
    DenseMatrix h(k, n);
    for (index_t j = 0; j < n; ++j) {
        if (j < k) {
            h(j, j) = 1.0;
            continue;
        }
        double sum = 0.0;
        for (index_t i = 0; i < k; ++i) {
            double v = rng.next_uniform();
            h(i, j) = v;
            sum += v;
        }
        for (index_t i = 0; i < k; ++i) h(i, j) /= sum; // convex weights
    }

    inst.x = gemm(w, h);
    inst.h_true = std::move(h);
    inst.anchors.resize(static_cast<std::size_t>(k));
    for (index_t i = 0; i < k; ++i) inst.anchors[static_cast<std::size_t>(i)] = i;
    return inst;
}

SeparableInstance generate_noisy_polytope(index_t d, index_t k, double sigma, SeededRng& rng) {
    if (k < 1 || d < k)
        throw std::invalid_argument("generate_noisy_polytope: need 1 <= k <= d");
    if (sigma < 0.0)
        throw std::invalid_argument("generate_noisy_polytope: sigma must be nonnegative");
    const index_t n = k + k * (k - 1) / 2;
    SeparableInstance inst;
    inst.seed = rng.seed();
    inst.noise_sigma = sigma;

    DenseMatrix x(d, n);
    for (index_t j = 0; j < k; ++j)
        for (index_t i = 0; i < d; ++i) x(i, j) = rng.next_uniform();

    DenseMatrix h(k, n);
    for (index_t j = 0; j < k; ++j) h(j, j) = 1.0;
    index_t col = k;
    for (index_t a = 0; a < k; ++a) {
        for (index_t b = a + 1; b < k; ++b) {
            for (index_t i = 0; i < d; ++i) x(i, col) = 0.5 * (x(i, a) + x(i, b));
            h(a, col) = 0.5;
            h(b, col) = 0.5;
            ++col;
        }
    }

    if (sigma > 0.0) {
        for (index_t j = 0; j < n; ++j)
            for (index_t i = 0; i < d; ++i) x(i, j) += sigma * rng.next_normal();
        inst.h_true.reset();
    } else {
        inst.h_true = std::move(h);
    }
    inst.x = std::move(x);
    inst.anchors.resize(static_cast<std::size_t>(k));
    for (index_t i = 0; i < k; ++i) inst.anchors[static_cast<std::size_t>(i)] = i;
    return inst;
}

bool AnchorSet::contains_all(const std::vector<index_t>& wanted) const {
    for (index_t w : wanted)
        if (!std::binary_search(unioned.begin(), unioned.end(), w)) return false;
    return true;
}

bool AnchorSet::subset_of(const std::vector<index_t>& allowed) const {
    for (index_t u : unioned)
        if (std::find(allowed.begin(), allowed.end(), u) == allowed.end()) return false;
    return true;
}

namespace {

AnchorSet select_extremes(const DenseMatrix& z) {
    const index_t m = z.rows(), n = z.cols();
    std::vector<index_t> maxes(static_cast<std::size_t>(m)), mins(static_cast<std::size_t>(m));
    index_t tie_rows = 0;
#pragma omp parallel for schedule(static) reduction(+ : tie_rows)
    for (index_t r = 0; r < m; ++r) {
        index_t amax = 0, amin = 0;
        index_t max_hits = 1, min_hits = 1;
        double vmax = z(r, 0), vmin = z(r, 0);
        for (index_t j = 1; j < n; ++j) {
            const double v = z(r, j);
            if (v > vmax) { vmax = v; amax = j; max_hits = 1; }
            else if (v == vmax) ++max_hits;
            if (v < vmin) { vmin = v; amin = j; min_hits = 1; }
            else if (v == vmin) ++min_hits;
        }
        if (max_hits > 1 || min_hits > 1) ++tie_rows;
        maxes[static_cast<std::size_t>(r)] = amax;
        mins[static_cast<std::size_t>(r)] = amin;
    }
    auto uniq = [](std::vector<index_t> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    AnchorSet out;
    out.tie_rows = tie_rows;
    out.i_max = uniq(maxes);
    out.i_min = uniq(mins);
    out.unioned = out.i_max;
    out.unioned.insert(out.unioned.end(), out.i_min.begin(), out.i_min.end());
    out.unioned = uniq(std::move(out.unioned));
    return out;
}

void check_projection_args(index_t n, index_t m) {
    if (m < 1) throw std::invalid_argument("anchor extraction: m must be >= 1");
    if (n < 1) throw std::invalid_argument("anchor extraction: X must have at least one column");
}

} // namespace

AnchorSet cg_nmf(const DenseMatrix& x, index_t m, index_t buckets, SeededRng& rng) {
    check_projection_args(x.cols(), m);
    if (buckets < 1) buckets = 5 * m;
    CountGaussTransform t = countgauss_new(m, buckets, x.rows(), rng);
    return select_extremes(countgauss_apply(t, x));
}

AnchorSet cg_nmf(const SparseMatrix& x, index_t m, index_t buckets, SeededRng& rng) {
    check_projection_args(x.cols, m);
    if (buckets < 1) buckets = 5 * m;
    CountGaussTransform t = countgauss_new(m, buckets, x.rows, rng);
    return select_extremes(countgauss_apply(t, x));
}

AnchorSet gp_nmf(const DenseMatrix& x, index_t m, SeededRng& rng) {
    check_projection_args(x.cols(), m);
    DenseMatrix g = gaussian_matrix(m, x.rows(), rng);
    return select_extremes(gemm(g, x));
}

SpaRankDeficiency::SpaRankDeficiency(std::vector<index_t> found, std::string msg)
    : std::runtime_error(std::move(msg)), selected(std::move(found)) {}

std::vector<index_t> spa(const DenseMatrix& x, index_t k) {
    const index_t d = x.rows(), n = x.cols();
    if (k < 1 || k > std::min(d, n))
        throw std::invalid_argument("spa: need 1 <= k <= min(d, n)");

    DenseMatrix r = x;
    std::vector<index_t> picked;
    double scale = 0.0;
    for (index_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < d; ++i) s += r(i, j) * r(i, j);
        scale = std::max(scale, s);
    }
    const double floor_norm2 = scale * 1e-24;

    for (index_t step = 0; step < k; ++step) {
        index_t best = -1;
        double best_norm2 = floor_norm2;
        for (index_t j = 0; j < n; ++j) {
            double s = 0.0;
            const double* rj = r.col(j);
            for (index_t i = 0; i < d; ++i) s += rj[i] * rj[i];
            if (s > best_norm2) { best_norm2 = s; best = j; }
        }
        if (best < 0) {
            std::string msg = "spa: residual numerically zero after " +
                              std::to_string(picked.size()) + " selections; found indices";
            for (index_t p : picked) msg += " " + std::to_string(p);
            throw SpaRankDeficiency(picked, msg);
        }
        picked.push_back(best);

        // Project every column onto the orthogonal complement of the pick.
        std::vector<double> u(static_cast<std::size_t>(d));
        const double inv = 1.0 / std::sqrt(best_norm2);
        for (index_t i = 0; i < d; ++i) u[static_cast<std::size_t>(i)] = r(i, best) * inv;
#pragma omp parallel for schedule(static)
        for (index_t j = 0; j < n; ++j) {
            double* rj = r.col(j);
            double dot = 0.0;
            for (index_t i = 0; i < d; ++i) dot += u[static_cast<std::size_t>(i)] * rj[i];
            for (index_t i = 0; i < d; ++i) rj[i] -= dot * u[static_cast<std::size_t>(i)];
        }
    }
    return picked;
}

XrayResult xray(const DenseMatrix& x, index_t k) {
    const index_t d = x.rows(), n = x.cols();
    if (k < 1 || k > n)
        throw std::invalid_argument("xray: need 1 <= k <= n");
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < d; ++i)
            if (x(i, j) < 0.0)
                throw std::invalid_argument("xray: X must be entrywise nonnegative");

    std::vector<double> col_sum(static_cast<std::size_t>(n), 0.0);
    for (index_t j = 0; j < n; ++j)
        for (index_t i = 0; i < d; ++i) col_sum[static_cast<std::size_t>(j)] += x(i, j);

    const double xnorm = frobenius_norm(x);
    XrayResult out;
    DenseMatrix residual = x;
    for (index_t step = 0; step < k; ++step) {
        // Largest-norm residual column drives the selection.
        index_t lead = 0;
        double lead_norm2 = -1.0;
        for (index_t j = 0; j < n; ++j) {
            double s = 0.0;
            const double* rj = residual.col(j);
            for (index_t i = 0; i < d; ++i) s += rj[i] * rj[i];
            if (s > lead_norm2) { lead_norm2 = s; lead = j; }
        }
        if (std::sqrt(lead_norm2) <= 1e-10 * xnorm) {
            out.truncated = true;
            return out;
        }

        const double* q = residual.col(lead);
        index_t best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (index_t j = 0; j < n; ++j) {
            if (col_sum[static_cast<std::size_t>(j)] <= 0.0) continue;
            if (std::find(out.indices.begin(), out.indices.end(), j) != out.indices.end()) continue;
            double dot = 0.0;
            const double* xj = x.col(j);
            for (index_t i = 0; i < d; ++i) dot += q[i] * xj[i];
            const double score = dot / col_sum[static_cast<std::size_t>(j)];
            if (score > best_score) { best_score = score; best = j; }
        }
        if (best < 0) {
            out.truncated = true;
            return out;
        }
        out.indices.push_back(best);

        DenseMatrix anchors_mat = take_columns(x, out.indices);
        DenseMatrix h = nnls_solve(anchors_mat, x);
        DenseMatrix fit = gemm(anchors_mat, h);
        for (index_t j = 0; j < n; ++j)
            for (index_t i = 0; i < d; ++i) residual(i, j) = x(i, j) - fit(i, j);
    }
    return out;
}

NnlsFailure::NnlsFailure(double residual, std::string msg)
    : std::runtime_error(std::move(msg)), kkt_residual(residual) {}

DenseMatrix nnls_solve(const DenseMatrix& a, const DenseMatrix& y, double tol, int max_iters) {
    const index_t d = a.rows(), k = a.cols(), n = y.cols();
    if (y.rows() != d)
        throw std::invalid_argument("nnls_solve: A and Y row counts differ");
    for (index_t j = 0; j < k; ++j) {
        double s = 0.0;
        for (index_t i = 0; i < d; ++i) s += a(i, j) * a(i, j);
        if (s == 0.0)
            throw std::invalid_argument("nnls_solve: column " + std::to_string(j) + " of A is zero");
    }

    const DenseMatrix g = gram(a);            // k x k
    const DenseMatrix aty = gemm(transpose(a), y); // k x n
    double diag_max = 0.0;
    for (index_t i = 0; i < k; ++i) diag_max = std::max(diag_max, g(i, i));

    DenseMatrix h(k, n);
    double worst_residual = 0.0;
    bool failed = false;

#pragma omp parallel for schedule(static)
    for (index_t c = 0; c < n; ++c) {
        std::vector<double> hv(static_cast<std::size_t>(k), 0.0);
        std::vector<double> grad(static_cast<std::size_t>(k));
        std::vector<double> g_prev(static_cast<std::size_t>(k));
        std::vector<double> delta(static_cast<std::size_t>(k));
        std::vector<double> gdelta(static_cast<std::size_t>(k));

        const double* b = aty.col(c);
        double b_scale = 0.0;
        for (index_t i = 0; i < k; ++i) b_scale = std::max(b_scale, std::abs(b[i]));
        const double stop = tol * std::max(1.0, b_scale);

        auto eval_grad = [&](const std::vector<double>& hh, std::vector<double>& out_grad) {
            for (index_t i = 0; i < k; ++i) {
                double s = -b[i];
                for (index_t l = 0; l < k; ++l) s += g(i, l) * hh[static_cast<std::size_t>(l)];
                out_grad[static_cast<std::size_t>(i)] = s;
            }
        };
        auto kkt_residual = [&](const std::vector<double>& hh, const std::vector<double>& gg) {
            double r = 0.0;
            for (index_t i = 0; i < k; ++i) {
                const double gi = gg[static_cast<std::size_t>(i)];
                const double ri = hh[static_cast<std::size_t>(i)] > 0.0 ? std::abs(gi) : std::max(-gi, 0.0);
                r = std::max(r, ri);
            }
            return r;
        };

        eval_grad(hv, grad);
        double step = diag_max > 0 ? 1.0 / diag_max : 1.0;
        bool converged = false;
        for (int it = 0; it < max_iters; ++it) {
            if (kkt_residual(hv, grad) <= stop) { converged = true; break; }

            // Backtrack on the projected step until the analytic decrease
            // g^T delta + 1/2 delta^T G delta is nonpositive; computing the
            // decrease directly sidesteps cancellation between near-equal
            // objective values, so the objective is nonincreasing by
            // construction.
            double alpha = step;
            bool moved = false;
            for (int half = 0; half < 60; ++half) {
                double dec = 0.0, dnorm = 0.0;
                for (index_t i = 0; i < k; ++i) {
                    const double t = std::max(0.0, hv[static_cast<std::size_t>(i)] -
                                                       alpha * grad[static_cast<std::size_t>(i)]);
                    delta[static_cast<std::size_t>(i)] = t - hv[static_cast<std::size_t>(i)];
                    dnorm += delta[static_cast<std::size_t>(i)] * delta[static_cast<std::size_t>(i)];
                }
                if (dnorm == 0.0) break;
                for (index_t i = 0; i < k; ++i) {
                    double s = 0.0;
                    for (index_t l = 0; l < k; ++l) s += g(i, l) * delta[static_cast<std::size_t>(l)];
                    gdelta[static_cast<std::size_t>(i)] = s;
                    dec += delta[static_cast<std::size_t>(i)] *
                           (grad[static_cast<std::size_t>(i)] + 0.5 * s);
                }
                if (dec <= 0.0) { moved = true; break; }
                alpha *= 0.5;
            }
            if (!moved) break;

            g_prev = grad;
            double sts = 0.0, sty = 0.0;
            for (index_t i = 0; i < k; ++i) {
                hv[static_cast<std::size_t>(i)] += delta[static_cast<std::size_t>(i)];
                grad[static_cast<std::size_t>(i)] += gdelta[static_cast<std::size_t>(i)];
                sts += delta[static_cast<std::size_t>(i)] * delta[static_cast<std::size_t>(i)];
                sty += delta[static_cast<std::size_t>(i)] * gdelta[static_cast<std::size_t>(i)];
            }
            // Barzilai-Borwein step for the next iteration.
            step = (sty > 1e-300) ? sts / sty : (diag_max > 0 ? 1.0 / diag_max : 1.0);
            // Periodic fresh gradient to flush accumulated update error.
            if ((it & 63) == 63) eval_grad(hv, grad);
        }
        if (!converged) {
            eval_grad(hv, grad);
            const double res = kkt_residual(hv, grad);
            if (res > stop) {
#pragma omp critical
                {
                    failed = true;
                    worst_residual = std::max(worst_residual, res);
                }
            }
        }
        for (index_t i = 0; i < k; ++i) h(i, c) = hv[static_cast<std::size_t>(i)];
    }

    if (failed)
        throw NnlsFailure(worst_residual, "nnls_solve: projected gradient did not reach tolerance; "
                                          "final KKT residual " + std::to_string(worst_residual));
    return h;
}

double relative_error(const DenseMatrix& x, const std::vector<index_t>& anchors,
                      const DenseMatrix& h) {
    const double xnorm = frobenius_norm(x);
    if (xnorm == 0.0)
        throw std::invalid_argument("relative_error: ||X||_F is zero");
    DenseMatrix xa = take_columns(x, anchors);
    if (xa.cols() != h.rows() || h.cols() != x.cols())
        throw std::invalid_argument("relative_error: inconsistent shapes");
    DenseMatrix fit = gemm(xa, h);
    double err = 0.0;
    for (index_t j = 0; j < x.cols(); ++j)
        for (index_t i = 0; i < x.rows(); ++i) {
            const double e = x(i, j) - fit(i, j);
            err += e * e;
        }
    return std::sqrt(err) / xnorm;
}

} // namespace cg
