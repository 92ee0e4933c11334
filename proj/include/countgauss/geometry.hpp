#ifndef COUNTGAUSS_GEOMETRY_HPP
#define COUNTGAUSS_GEOMETRY_HPP

#include <span>
#include <vector>

#include "countgauss/matrix.hpp"
#include "countgauss/rng.hpp"

namespace cg {

// Column j of `vertices` is the j-th vertex. The listed points are expected to
// be in convex position (validated by tests through the brute-force oracle).
struct PolytopeSpec {
    DenseMatrix vertices; // ambient_dim x count
    index_t ambient_dim() const { return vertices.rows(); }
    index_t count() const { return vertices.cols(); }
};

// Regular polygon inscribed in the unit circle, embedded in the first two
// coordinates of R^ambient_dim, with vertex 0 at (0, 1, 0, ...).
PolytopeSpec regular_polygon(index_t sides, index_t ambient_dim);

// True iff w^T (v_j - v_idx) <= eps for every vertex j, with eps relative to
// ||w|| ||v_j - v_idx|| (scale invariant; w = 0 is in every cone).
bool normal_cone_member(const PolytopeSpec& poly, index_t vertex_idx, std::span<const double> w);

struct SolidAngleEstimate {
    double omega = 0.0;
    double stderr_ = 0.0;
    index_t samples = 0;
};

// Fraction of uniformly random directions landing in the vertex's normal cone.
SolidAngleEstimate solid_angle_mc(const PolytopeSpec& poly, index_t vertex_idx, index_t samples,
                                  SeededRng& rng);

enum class KappaVariant { Log, Linear };

// Polytope condition number from the per-vertex solid angles:
//   Log:    1 / (k * ln(1 / max_i(1 - 2 w_i)))
//   Linear: 1 / (k * max_i(1 - 2 w_i))
// The log variant requires every omega in (0, 1/2).
double condition_number(std::span<const double> omegas, index_t k, KappaVariant variant);

// Index j is returned iff column j is not a convex combination of the other
// columns (feasibility solved as NNLS with an appended sum-to-one penalty row).
// Oracle scale: n <= 200.
std::vector<index_t> extreme_points_bruteforce(const DenseMatrix& x);

struct SrhtConeReport {
    index_t dim = 0;
    index_t vectors_checked = 0;
    index_t vectors_in_cone = 0;
    bool exhaustive = false;
    double omega_mc = 0.0;
    double omega_stderr = 0.0;
    double sin_3pi_10 = 0.0;   // cone-membership threshold for the pentagon
    double coordinate = 0.0;   // attainable coordinate magnitude 1/sqrt(dim)
};

// The pentagon counterexample: no vector of {±1/sqrt(d)}^d lies in the normal
// cone at the embedded vertex (0,1,0,...). Sign patterns are enumerated
// exhaustively for dim <= 16 and sampled (1e5 draws) beyond that; the vertex's
// solid angle is estimated by Monte Carlo and reported.
SrhtConeReport srht_counterexample_check(index_t dim, index_t mc_samples, SeededRng& rng);

} // namespace cg

#endif
