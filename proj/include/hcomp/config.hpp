#pragma once

#include <cstdint>

#include "json.hpp"

namespace hcomp {

struct Tolerances {
    double membership = 1e-7;  // accept infimum >= threshold - membership
    double refine = 1e-9;      // torus descent step tolerance
    double gamma = 1e-8;       // J(theta) below this counts as a boundary point
    double eq = 1e-9;          // relative tolerance for boundary-data equality
    double o = 1e-2;           // little-o ratio must fall below this at the finest level
    double nt = 1e-8;          // Re phi(i alpha) - threshold below this counts as boundary contact
};

struct AnalysisConfig {
    Tolerances tol;
    int resolution = 0;  // 0 selects the per-dimension default
    std::uint64_t seed = 20240917;
};

inline void to_json(nlohmann::json& j, const Tolerances& t) {
    j = {{"membership_tol", t.membership}, {"refine_tol", t.refine}, {"gamma_tol", t.gamma},
         {"eq_tol", t.eq},                 {"o_tol", t.o},             {"nt_tol", t.nt}};
}

inline void to_json(nlohmann::json& j, const AnalysisConfig& c) {
    j = {{"tolerances", c.tol}, {"grid", c.resolution}, {"seed", c.seed}};
}

}  // namespace hcomp
