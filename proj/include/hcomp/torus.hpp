#pragma once

// Minimization of J(theta) = Re P(e^{i theta}) - offset over the torus T^d.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "hcomp/bohr.hpp"
#include "hcomp/error.hpp"

namespace hcomp {

inline constexpr std::size_t kMaxTorusDim = 6;

inline int default_resolution(std::size_t d) {
    if (d <= 2) return 256;
    if (d == 3) return 64;
    return 24;
}

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double t) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(t, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

inline double torus_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t l = 0; l < a.size(); ++l) {
        const double d = wrap_angle(a[l] - b[l]);
        s += d * d;
    }
    return std::sqrt(s);
}

struct TorusPoint {
    double value = 0.0;
    std::vector<double> theta;
};

class TorusObjective {
public:
    TorusObjective(MultivariatePolynomial P, double offset) : P_(std::move(P)), offset_(offset) {}

    std::size_t dim() const { return P_.dim(); }
    const MultivariatePolynomial& polynomial() const { return P_; }
    double offset() const { return offset_; }

    double operator()(const std::vector<double>& theta) const { return eval_torus(P_, theta).real() - offset_; }

    Eigen::VectorXd gradient(const std::vector<double>& theta) const {
        const std::size_t d = dim();
        Eigen::VectorXd g(static_cast<Eigen::Index>(d));
        for (std::size_t l = 0; l < d; ++l) {
            MultiIndex b(d, 0);
            b[l] = 1;
            g(static_cast<Eigen::Index>(l)) = torus_derivative(P_, theta, b).real();
        }
        return g;
    }

    Eigen::MatrixXd hessian(const std::vector<double>& theta) const {
        const std::size_t d = dim();
        Eigen::MatrixXd H(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t l = 0; l < d; ++l)
            for (std::size_t m = l; m < d; ++m) {
                MultiIndex b(d, 0);
                ++b[l];
                ++b[m];
                const double v = torus_derivative(P_, theta, b).real();
                H(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m)) = v;
                H(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l)) = v;
            }
        return H;
    }

    // Values on the uniform grid theta_k = 2 pi k / res, flattened with the first angle most significant.
    std::vector<double> grid(int res) const {
        const std::size_t d = dim();
        std::size_t total = 1;
        for (std::size_t l = 0; l < d; ++l) total *= static_cast<std::size_t>(res);
        // phase tables: table[l][g * (maxexp+1) + e] = e^{i e theta_g}
        std::vector<int> maxexp(d, 0);
        for (const auto& [a, c] : P_.terms())
            for (std::size_t l = 0; l < d; ++l) maxexp[l] = std::max(maxexp[l], a[l]);
        std::vector<std::vector<cplx>> table(d);
        for (std::size_t l = 0; l < d; ++l) {
            const auto width = static_cast<std::size_t>(maxexp[l] + 1);
            table[l].resize(static_cast<std::size_t>(res) * width);
            for (int g = 0; g < res; ++g) {
                const double t = 2.0 * std::numbers::pi * g / res;
                for (int e = 0; e <= maxexp[l]; ++e)
                    table[l][static_cast<std::size_t>(g) * width + static_cast<std::size_t>(e)] = std::polar(1.0, e * t);
            }
        }
        std::vector<std::pair<std::vector<int>, cplx>> terms(P_.terms().begin(), P_.terms().end());
        std::vector<double> out(total);
        std::vector<int> idx(d, 0);
        for (std::size_t flat = 0; flat < total; ++flat) {
            double v = 0.0;
            for (const auto& [a, c] : terms) {
                cplx prod = c;
                for (std::size_t l = 0; l < d; ++l)
                    if (a[l] != 0)
                        prod *= table[l][static_cast<std::size_t>(idx[l]) * static_cast<std::size_t>(maxexp[l] + 1) +
                                         static_cast<std::size_t>(a[l])];
                v += prod.real();
            }
            out[flat] = v - offset_;
            for (std::size_t l = d; l-- > 0;) {
                if (++idx[l] < res) break;
                idx[l] = 0;
            }
        }
        return out;
    }

private:
    MultivariatePolynomial P_;
    double offset_;
};

inline std::vector<double> grid_angles(std::size_t flat, std::size_t d, int res) {
    std::vector<double> theta(d);
    for (std::size_t l = d; l-- > 0;) {
        theta[l] = 2.0 * std::numbers::pi * static_cast<double>(flat % static_cast<std::size_t>(res)) / res;
        flat /= static_cast<std::size_t>(res);
    }
    return theta;
}

// Flat indices of discrete local minima (periodic neighbours), ties broken by lower index.
inline std::vector<std::size_t> grid_local_minima(const std::vector<double>& values, std::size_t d, int res) {
    std::vector<std::size_t> stride(d, 1);
    for (std::size_t l = d - 1; l-- > 0;) stride[l] = stride[l + 1] * static_cast<std::size_t>(res);
    std::vector<std::size_t> out;
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        bool is_min = true;
        for (std::size_t l = 0; l < d && is_min; ++l) {
            const std::size_t coord = (flat / stride[l]) % static_cast<std::size_t>(res);
            for (int dir : {-1, 1}) {
                const std::size_t nc = (coord + static_cast<std::size_t>(res + dir)) % static_cast<std::size_t>(res);
                const std::size_t nb = flat - coord * stride[l] + nc * stride[l];
                if (values[nb] < values[flat] || (values[nb] == values[flat] && nb < flat)) {
                    is_min = false;
                    break;
                }
            }
        }
        if (is_min) out.push_back(flat);
    }
    return out;
}

// Coordinate descent (Brent line searches) followed by damped Newton polishing.
inline TorusPoint refine_minimum(const TorusObjective& J, std::vector<double> theta, double bracket, double refine_tol) {
    const std::size_t d = J.dim();
    double value = J(theta);
    for (int cycle = 0; cycle < 200; ++cycle) {
        double max_move = 0.0;
        const double before = value;
        for (std::size_t l = 0; l < d; ++l) {
            const double center = theta[l];
            auto line = [&](double t) {
                auto trial = theta;
                trial[l] = t;
                return J(trial);
            };
            std::uintmax_t iters = 100;
            auto [t_best, v_best] = boost::math::tools::brent_find_minima(
                line, center - bracket, center + bracket, std::numeric_limits<double>::digits / 2, iters);
            if (v_best < value) {
                max_move = std::max(max_move, std::abs(t_best - center));
                theta[l] = t_best;
                value = v_best;
            }
        }
        if (max_move < refine_tol || before - value <= 1e-16 * (1.0 + std::abs(value))) break;
    }
    for (int it = 0; it < 60; ++it) {
        Eigen::MatrixXd H = J.hessian(theta);
        Eigen::VectorXd g = J.gradient(theta);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        if (es.eigenvalues().minCoeff() <= 1e-14 * (1.0 + H.norm())) break;
        Eigen::VectorXd step = -H.ldlt().solve(g);
        if (!step.allFinite() || step.norm() > bracket) break;
        auto trial = theta;
        for (std::size_t l = 0; l < d; ++l) trial[l] += step(static_cast<Eigen::Index>(l));
        // Near the minimum J is flat to rounding, so the gradient decides acceptance.
        const double tv = J(trial);
        if (!(tv <= value + 1e-15 * (1.0 + std::abs(value)))) break;
        if (!(J.gradient(trial).norm() < g.norm())) break;
        const bool done = step.norm() < refine_tol * 1e-3;
        theta = trial;
        value = tv;
        if (done) break;
    }
    for (double& t : theta) t = wrap_angle(t);
    return {J(theta), theta};
}

inline bool torus_point_less(const TorusPoint& a, const TorusPoint& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.theta < b.theta;
}

struct TorusSearchResult {
    TorusPoint best;
    std::vector<TorusPoint> minima;  // refined local minima, best first
    int resolution = 0;
};

// Grid search followed by refinement of the most promising discrete local minima.
inline TorusSearchResult torus_search(const TorusObjective& J, int resolution, double refine_tol,
                                      std::size_t max_starts = 16) {
    const std::size_t d = J.dim();
    if (d == 0) {
        TorusPoint p{J({}), {}};
        return {p, {p}, 0};
    }
    if (d > kMaxTorusDim)
        throw GuardError("torus dimension " + std::to_string(d) + " exceeds the supported maximum of 6");
    const int res = resolution > 0 ? resolution : default_resolution(d);
    const auto values = J.grid(res);
    auto mins = grid_local_minima(values, d, res);
    std::stable_sort(mins.begin(), mins.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    if (mins.size() > max_starts) mins.resize(max_starts);
    const double bracket = 2.0 * std::numbers::pi / res;
    TorusSearchResult out;
    out.resolution = res;
    for (std::size_t flat : mins) out.minima.push_back(refine_minimum(J, grid_angles(flat, d, res), bracket, refine_tol));
    std::sort(out.minima.begin(), out.minima.end(), torus_point_less);
    out.best = out.minima.front();
    return out;
}

}  // namespace hcomp
