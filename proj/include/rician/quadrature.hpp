#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rician {

struct QuadratureConfig {
    double r_tail_mass_tol = 1e-16;  // kernel mass allowed beyond the truncation point
    double panel_rel_tol = 1e-10;    // relative to the L1 norm of each integrand component
    int max_panels = 4096;

    void validate() const;
};

/// Quadrature nodes and weights of a converged panel set. Related integrands
/// evaluated on the same nodes give consistent (noise-free) differences.
struct NodeSet {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Fills out[c * nodes.size() + i] with component c at nodes[i].
using BatchIntegrand = std::function<void(std::span<const double> nodes, std::span<double> out)>;

struct QuadratureResult {
    std::vector<double> values;
    std::vector<double> abs_errors;
    std::size_t panels = 0;
    NodeSet node_set;
};

/// Adaptive Gauss-Kronrod (7/15) panel quadrature of a vector-valued
/// integrand over [breakpoints.front(), breakpoints.back()]. Panels are
/// bisected until, for every component, the summed |K15 - G7| estimate is
/// below max(abs_floor, panel_rel_tol * integral of |component|).
/// Throws NumericalFailure when max_panels is exhausted.
QuadratureResult integrate_panels(const BatchIntegrand& integrand, std::size_t components,
                                  std::span<const double> breakpoints,
                                  const QuadratureConfig& config, double abs_floor = 1e-15);

/// Applies the 15-point Kronrod rule of every panel in `nodes` to a
/// precomputed integrand sample.
double integrate_on(const NodeSet& nodes, std::span<const double> values);

/// Upper integration limit in R beyond which the kernel g(., s) carries less
/// than tail_tol of its mass, for every input power up to s_max.
double truncation_point(double s_max, double K, double tail_tol);

/// Initial panel boundaries on [0, upper] resolving the scale and the
/// noncentral peak of each kernel g(., s_j).
std::vector<double> kernel_breakpoints(std::span<const double> powers, double K, double upper);

namespace gk15 {
inline constexpr std::size_t kNodes = 15;
/// Abscissae on [-1, 1] in ascending order; odd indices are the 7 Gauss nodes.
const double* abscissae();
const double* kronrod_weights();
const double* gauss_weights();  // indexed like abscissae, zero at Kronrod-only nodes
}  // namespace gk15

}  // namespace rician
