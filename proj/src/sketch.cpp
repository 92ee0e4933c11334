#include "countgauss/sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace cg {

CountSketchMap countsketch_new(index_t buckets, index_t input_dim, SeededRng& rng) {
    if (buckets < 1 || input_dim < 1)
        throw std::invalid_argument("countsketch_new: buckets and input_dim must be >= 1");
    CountSketchMap map;
    map.buckets = buckets;
    map.input_dim = input_dim;
    map.seed = rng.next_u64();
    SeededRng gen(map.seed);
    map.hash.resize(static_cast<std::size_t>(input_dim));
    map.sign.resize(static_cast<std::size_t>(input_dim));
    for (index_t i = 0; i < input_dim; ++i) {
        map.hash[static_cast<std::size_t>(i)] =
            static_cast<index_t>(gen.next_below(static_cast<std::uint64_t>(buckets)));
        map.sign[static_cast<std::size_t>(i)] = (gen.next_u64() & 1ULL) ? 1.0 : -1.0;
    }
    return map;
}

CountSketchMap countsketch_injective(index_t buckets, index_t input_dim, SeededRng& rng) {
    if (buckets < input_dim)
        throw std::invalid_argument("countsketch_injective: needs buckets >= input_dim");
    CountSketchMap map;
    map.buckets = buckets;
    map.input_dim = input_dim;
    map.seed = rng.next_u64();
    SeededRng gen(map.seed);
    // Partial Fisher-Yates over [0, buckets) gives distinct buckets.
    std::vector<index_t> pool(static_cast<std::size_t>(buckets));
    std::iota(pool.begin(), pool.end(), index_t{0});
    map.hash.resize(static_cast<std::size_t>(input_dim));
    map.sign.resize(static_cast<std::size_t>(input_dim));
    for (index_t i = 0; i < input_dim; ++i) {
        index_t j = i + static_cast<index_t>(gen.next_below(static_cast<std::uint64_t>(buckets - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        map.hash[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
        map.sign[static_cast<std::size_t>(i)] = (gen.next_u64() & 1ULL) ? 1.0 : -1.0;
    }
    return map;
}

DenseMatrix countsketch_apply(const CountSketchMap& map, const DenseMatrix& x) {
    if (x.rows() != map.input_dim)
        throw std::invalid_argument("countsketch_apply: X has " + std::to_string(x.rows()) +
                                    " rows, sketch expects " + std::to_string(map.input_dim));
    DenseMatrix out(map.buckets, x.cols());
    const index_t n = x.rows(), d = x.cols();
#pragma omp parallel for schedule(static)
    for (index_t j = 0; j < d; ++j) {
        const double* xj = x.col(j);
        double* oj = out.col(j);
        for (index_t i = 0; i < n; ++i)
            oj[map.hash[static_cast<std::size_t>(i)]] += map.sign[static_cast<std::size_t>(i)] * xj[i];
    }
    return out;
}

DenseMatrix countsketch_apply(const CountSketchMap& map, const SparseMatrix& x) {
    if (x.rows != map.input_dim)
        throw std::invalid_argument("countsketch_apply: X has " + std::to_string(x.rows) +
                                    " rows, sketch expects " + std::to_string(map.input_dim));
    DenseMatrix out(map.buckets, x.cols);

    // Input rows stream in fixed-size chunks into per-chunk output buffers,
    // which are then reduced in ascending chunk order. Chunk boundaries depend
    // only on the input shape, so the accumulation order (and hence every bit
    // of the result) is independent of the thread count.
    const index_t chunk_rows = 8192;
    const index_t n_chunks = (x.rows + chunk_rows - 1) / chunk_rows;
    const index_t out_size = map.buckets * x.cols;
    const bool chunked = n_chunks > 1 && out_size <= (index_t{1} << 16) &&
                         n_chunks * out_size <= (index_t{1} << 25);

    if (!chunked) {
        for (index_t i = 0; i < x.rows; ++i) {
            const index_t b = map.hash[static_cast<std::size_t>(i)];
            const double s = map.sign[static_cast<std::size_t>(i)];
            for (index_t q = x.row_offsets[i]; q < x.row_offsets[i + 1]; ++q)
                out(b, x.col_indices[q]) += s * x.values[q];
        }
        return out;
    }

    std::vector<double> partial(static_cast<std::size_t>(n_chunks * out_size), 0.0);
#pragma omp parallel for schedule(static)
    for (index_t c = 0; c < n_chunks; ++c) {
        double* buf = partial.data() + static_cast<std::size_t>(c * out_size);
        const index_t lo = c * chunk_rows;
        const index_t hi = std::min(x.rows, lo + chunk_rows);
        for (index_t i = lo; i < hi; ++i) {
            const index_t b = map.hash[static_cast<std::size_t>(i)];
            const double s = map.sign[static_cast<std::size_t>(i)];
            for (index_t q = x.row_offsets[i]; q < x.row_offsets[i + 1]; ++q)
                buf[x.col_indices[q] * map.buckets + b] += s * x.values[q];
        }
    }
    double* o = out.data();
    for (index_t c = 0; c < n_chunks; ++c) {
        const double* buf = partial.data() + static_cast<std::size_t>(c * out_size);
        for (index_t e = 0; e < out_size; ++e) o[e] += buf[e];
    }
    return out;
}

CountGaussTransform countgauss_new(index_t m, index_t buckets, index_t input_dim, SeededRng& rng) {
    if (m < 1 || buckets < 1 || input_dim < 1)
        throw std::invalid_argument("countgauss_new: m, buckets and input_dim must be >= 1");
    CountGaussTransform t;
    t.m = m;
    t.seed = rng.next_u64();
    SeededRng cs_rng(mix64(t.seed, 1));
    SeededRng g_rng(mix64(t.seed, 2));
    t.cs = countsketch_new(buckets, input_dim, cs_rng);
    t.g = gaussian_matrix(m, buckets, g_rng);
    return t;
}

CountGaussTransform countgauss_new(index_t m, index_t input_dim, SeededRng& rng) {
    return countgauss_new(m, 5 * m, input_dim, rng);
}

DenseMatrix countgauss_apply(const CountGaussTransform& t, const DenseMatrix& x) {
    return gemm(t.g, countsketch_apply(t.cs, x));
}

DenseMatrix countgauss_apply(const CountGaussTransform& t, const SparseMatrix& x) {
    return gemm(t.g, countsketch_apply(t.cs, x));
}

SrhtSpec srht_new(index_t m, index_t dim, SeededRng& rng) {
    if (dim < 1 || !std::has_single_bit(static_cast<std::uint64_t>(dim)))
        throw std::invalid_argument("srht_new: dim must be a power of two");
    if (m < 1 || m > dim)
        throw std::invalid_argument("srht_new: need 1 <= m <= dim");
    SrhtSpec spec;
    spec.m = m;
    spec.dim = dim;
    spec.seed = rng.next_u64();
    SeededRng gen(spec.seed);
    std::vector<index_t> pool(static_cast<std::size_t>(dim));
    std::iota(pool.begin(), pool.end(), index_t{0});
    for (index_t i = 0; i < m; ++i) {
        index_t j = i + static_cast<index_t>(gen.next_below(static_cast<std::uint64_t>(dim - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        spec.selected_rows.push_back(pool[static_cast<std::size_t>(i)]);
    }
    spec.signs.resize(static_cast<std::size_t>(dim));
    for (index_t c = 0; c < dim; ++c)
        spec.signs[static_cast<std::size_t>(c)] = (gen.next_u64() & 1ULL) ? 1.0 : -1.0;
    return spec;
}

DenseMatrix srht_rows(const SrhtSpec& spec) {
    if (spec.dim < 1 || !std::has_single_bit(static_cast<std::uint64_t>(spec.dim)))
        throw std::invalid_argument("srht_rows: dim must be a power of two");
    DenseMatrix rows(spec.m, spec.dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(spec.dim));
    for (index_t r = 0; r < spec.m; ++r) {
        const std::uint64_t h = static_cast<std::uint64_t>(spec.selected_rows[static_cast<std::size_t>(r)]);
        for (index_t c = 0; c < spec.dim; ++c) {
            // Sylvester ordering: H[h][c] = (-1)^popcount(h & c).
            const int bit = std::popcount(h & static_cast<std::uint64_t>(c)) & 1;
            const double hval = bit ? -1.0 : 1.0;
            rows(r, c) = scale * hval * spec.signs[static_cast<std::size_t>(c)];
        }
    }
    return rows;
}

} // namespace cg
