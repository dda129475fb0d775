#pragma once

#include <cmath>

#include "levyml/error.hpp"

namespace levyml {

struct State {
  double v = 0.0;  // membrane potential (mV)
  double w = 0.0;  // recovery variable

  bool operator==(const State&) const = default;
};

/// Rectangle (a,b)x(c,d) in the (v,w) plane on which densities are computed.
struct Domain {
  double a = -60.0;
  double b = 40.0;
  double c = 0.0;
  double d = 0.6;

  void validate() const {
    if (!(a < b) || !(c < d)) throw Error(ErrorCode::ValidationError, "domain requires a < b and c < d");
  }
  bool contains(State s) const { return s.v > a && s.v < b && s.w > c && s.w < d; }
  bool operator==(const Domain&) const = default;
};

/// Point in the rescaled square (-1,1)^2.
struct Rescaled {
  double x = 0.0;
  double y = 0.0;
};

/// Affine change of variables between (v,w) and the rescaled square.
class AffineMap {
 public:
  explicit AffineMap(const Domain& domain) : dom_(domain) { dom_.validate(); }

  Rescaled to_rescaled(State s) const {
    return {2.0 * (s.v - dom_.a) / (dom_.b - dom_.a) - 1.0, 2.0 * (s.w - dom_.c) / (dom_.d - dom_.c) - 1.0};
  }
  State to_state(Rescaled r) const {
    return {0.5 * (dom_.b - dom_.a) * (r.x + 1.0) + dom_.a, 0.5 * (dom_.d - dom_.c) * (r.y + 1.0) + dom_.c};
  }

  // d/dv = vx_scale * d/dx, d/dw = wy_scale * d/dy
  double vx_scale() const { return 2.0 / (dom_.b - dom_.a); }
  double wy_scale() const { return 2.0 / (dom_.d - dom_.c); }

  const Domain& domain() const { return dom_; }

 private:
  Domain dom_;
};

/// Euclidean distance measured in rescaled units, so one FP grid cell is h = 1/J.
inline double rescaled_distance(const Domain& dom, State p, State q) {
  const double dx = 2.0 * (p.v - q.v) / (dom.b - dom.a);
  const double dy = 2.0 * (p.w - q.w) / (dom.d - dom.c);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace levyml
