#include "rician/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rician/error.hpp"

namespace rician {

namespace gk15 {

namespace {

// QUADPACK qk15 rule, mirrored onto [-1, 1].
constexpr double kHalfNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr double kHalfKronrod[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
constexpr double kHalfGauss[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct Tables {
    double x[kNodes];
    double wk[kNodes];
    double wg[kNodes];
};

const Tables& tables() {
    static const Tables t = [] {
        Tables out{};
        for (std::size_t i = 0; i < 8; ++i) {
            const std::size_t lo = i;
            const std::size_t hi = kNodes - 1 - i;
            out.x[lo] = -kHalfNodes[i];
            out.x[hi] = kHalfNodes[i];
            out.wk[lo] = out.wk[hi] = kHalfKronrod[i];
            const double wg = (i % 2 == 1) ? kHalfGauss[i / 2] : 0.0;
            out.wg[lo] = out.wg[hi] = wg;
        }
        return out;
    }();
    return t;
}

}  // namespace

const double* abscissae() { return tables().x; }
const double* kronrod_weights() { return tables().wk; }
const double* gauss_weights() { return tables().wg; }

}  // namespace gk15

void QuadratureConfig::validate() const {
    if (!(r_tail_mass_tol > 0.0) || !(r_tail_mass_tol < 1.0))
        throw DomainError("r_tail_mass_tol must lie in (0, 1)");
    if (!(panel_rel_tol > 0.0))
        throw DomainError("panel_rel_tol must be positive");
    if (max_panels < 16)
        throw DomainError("max_panels must be at least 16");
}

namespace {

struct Panel {
    double a;
    double b;
    std::size_t slot;  // index into the per-panel result arrays
};

}  // namespace

QuadratureResult integrate_panels(const BatchIntegrand& integrand, std::size_t components,
                                  std::span<const double> breakpoints,
                                  const QuadratureConfig& config, double abs_floor) {
    if (breakpoints.size() < 2)
        throw DomainError("integrate_panels needs at least two breakpoints");
    const double* x = gk15::abscissae();
    const double* wk = gk15::kronrod_weights();
    const double* wg = gk15::gauss_weights();
    const std::size_t m = components;

    std::vector<Panel> panels;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (breakpoints[i + 1] > breakpoints[i])
            panels.push_back({breakpoints[i], breakpoints[i + 1], 0});
    if (panels.empty())
        throw DomainError("integration interval is empty");

    // per-slot results: value, error and |value| for each component
    std::vector<double> value, error, absval;
    std::vector<double> nodes, samples;

    const auto evaluate = [&](std::span<Panel> batch) {
        nodes.resize(batch.size() * gk15::kNodes);
        for (std::size_t p = 0; p < batch.size(); ++p) {
            const double c = 0.5 * (batch[p].a + batch[p].b);
            const double h = 0.5 * (batch[p].b - batch[p].a);
            for (std::size_t k = 0; k < gk15::kNodes; ++k)
                nodes[p * gk15::kNodes + k] = c + h * x[k];
        }
        const std::size_t nn = nodes.size();
        samples.assign(nn * m, 0.0);
        integrand(nodes, samples);
        for (std::size_t p = 0; p < batch.size(); ++p) {
            const double h = 0.5 * (batch[p].b - batch[p].a);
            batch[p].slot = value.size() / m;
            for (std::size_t c = 0; c < m; ++c) {
                const double* f = samples.data() + c * nn + p * gk15::kNodes;
                double k15 = 0.0, g7 = 0.0, l1 = 0.0;
                for (std::size_t k = 0; k < gk15::kNodes; ++k) {
                    k15 += wk[k] * f[k];
                    g7 += wg[k] * f[k];
                    l1 += wk[k] * std::abs(f[k]);
                }
                value.push_back(h * k15);
                error.push_back(h * std::abs(k15 - g7));
                absval.push_back(h * l1);
            }
        }
    };

    evaluate(panels);

    std::vector<double> tol(m), err_sum(m), l1_sum(m), score;
    std::vector<Panel> fresh;
    for (;;) {
        std::fill(err_sum.begin(), err_sum.end(), 0.0);
        std::fill(l1_sum.begin(), l1_sum.end(), 0.0);
        for (const Panel& p : panels)
            for (std::size_t c = 0; c < m; ++c) {
                err_sum[c] += error[p.slot * m + c];
                l1_sum[c] += absval[p.slot * m + c];
            }
        bool done = true;
        double worst_ratio = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            tol[c] = std::max(abs_floor, config.panel_rel_tol * l1_sum[c]);
            worst_ratio = std::max(worst_ratio, err_sum[c] / tol[c]);
            if (err_sum[c] > tol[c])
                done = false;
        }
        if (done)
            break;
        if (panels.size() >= static_cast<std::size_t>(config.max_panels)) {
            double worst = 0.0;
            for (std::size_t c = 0; c < m; ++c)
                worst = std::max(worst, err_sum[c]);
            throw NumericalFailure("quadrature did not converge within " +
                                       std::to_string(config.max_panels) +
                                       " panels (error estimate " + std::to_string(worst) + ")",
                                   worst);
        }

        score.assign(panels.size(), 0.0);
        double best = 0.0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            for (std::size_t c = 0; c < m; ++c)
                score[i] = std::max(score[i], error[panels[i].slot * m + c] / tol[c]);
            best = std::max(best, score[i]);
        }
        const std::size_t room = static_cast<std::size_t>(config.max_panels) - panels.size();
        fresh.clear();
        std::vector<Panel> kept;
        kept.reserve(panels.size() + room);
        for (std::size_t i = 0; i < panels.size(); ++i) {
            if (score[i] >= 0.25 * best && fresh.size() / 2 < room) {
                const double mid = 0.5 * (panels[i].a + panels[i].b);
                if (mid <= panels[i].a || mid >= panels[i].b) {
                    kept.push_back(panels[i]);
                    continue;
                }
                fresh.push_back({panels[i].a, mid, 0});
                fresh.push_back({mid, panels[i].b, 0});
            } else {
                kept.push_back(panels[i]);
            }
        }
        if (fresh.empty()) {
            double worst = 0.0;
            for (std::size_t c = 0; c < m; ++c)
                worst = std::max(worst, err_sum[c]);
            throw NumericalFailure("quadrature panels cannot be subdivided further", worst);
        }
        evaluate(fresh);
        kept.insert(kept.end(), fresh.begin(), fresh.end());
        panels = std::move(kept);
    }

    std::sort(panels.begin(), panels.end(), [](const Panel& l, const Panel& r) { return l.a < r.a; });

    QuadratureResult result;
    result.values.assign(m, 0.0);
    result.abs_errors.assign(m, 0.0);
    result.panels = panels.size();
    for (const Panel& p : panels)
        for (std::size_t c = 0; c < m; ++c) {
            result.values[c] += value[p.slot * m + c];
            result.abs_errors[c] += error[p.slot * m + c];
        }
    result.node_set.nodes.reserve(panels.size() * gk15::kNodes);
    result.node_set.weights.reserve(panels.size() * gk15::kNodes);
    for (const Panel& p : panels) {
        const double c = 0.5 * (p.a + p.b);
        const double h = 0.5 * (p.b - p.a);
        for (std::size_t k = 0; k < gk15::kNodes; ++k) {
            result.node_set.nodes.push_back(c + h * x[k]);
            result.node_set.weights.push_back(h * wk[k]);
        }
    }
    return result;
}

double integrate_on(const NodeSet& nodes, std::span<const double> values) {
    // panel-wise partial sums keep the summation order identical to
    // integrate_panels
    double total = 0.0;
    for (std::size_t p = 0; p < nodes.size(); p += gk15::kNodes) {
        double panel = 0.0;
        for (std::size_t k = 0; k < gk15::kNodes; ++k)
            panel += nodes.weights[p + k] * values[p + k];
        total += panel;
    }
    return total;
}

double truncation_point(double s_max, double K, double tail_tol) {
    const double a = 1.0 + s_max;
    const double t = -std::log(tail_tol);
    return a * (t + K * s_max / a + 2.0 * std::sqrt(K * t));
}

std::vector<double> kernel_breakpoints(std::span<const double> powers, double K, double upper) {
    std::vector<double> pts{0.0, upper};
    const auto add = [&](double v) {
        if (v > 0.0 && v < upper)
            pts.push_back(v);
    };
    for (double s : powers) {
        const double a = 1.0 + s;
        for (double f : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0})
            add(a * f);
        // noncentral peak of R / a: mean 1 + nu, spread ~ sqrt(1 + 2 nu)
        const double nu = K * s / a;
        const double sd = std::sqrt(1.0 + 2.0 * nu);
        for (double k : {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0})
            add(a * (1.0 + nu + k * sd));
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [upper](double l, double r) { return r - l <= 1e-12 * upper; }),
              pts.end());
    if (pts.back() != upper)
        pts.push_back(upper);
    return pts;
}

}  // namespace rician
