#include "roc/energymodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace roc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
const double kSqrtEps = std::sqrt(kEps);
const double kCbrtEps = std::cbrt(kEps);
constexpr double kMinStep = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// One axis of a finite-difference stencil: sample offsets along the
// axis with weights that already include the step denominators.
struct AxisStencil {
  double h = 0.0;
  int npts = 0;
  std::array<double, 4> offset{};
  std::array<double, 4> weight{};
};

struct Room {
  double up;    // distance to the neighbour above (or +inf)
  double down;  // distance to the neighbour below / the positivity wall
};

Room room_at(const OrderedTuple& s, int i, double gap_scale_up, double gap_scale_dn) {
  const int n = s.dim();
  Room r{};
  r.up = (i == 0) ? kInf : (s[i - 1] - s[i]) * gap_scale_up;
  r.down = (i == n - 1) ? s[i] * 0.99 : (s[i] - s[i + 1]) * gap_scale_dn;
  return r;
}

AxisStencil first_derivative_stencil(const OrderedTuple& s, int i, Room room,
                                     double step_factor) {
  AxisStencil st;
  double h = step_factor * std::max(1.0, s[i]);
  if (room.up >= 2.0 * h && room.down >= 2.0 * h) {
    st.h = h;
    st.npts = 2;
    st.offset = {-h, h, 0, 0};
    st.weight = {-0.5 / h, 0.5 / h, 0, 0};
    return st;
  }
  const double dir = (room.up >= room.down) ? 1.0 : -1.0;
  const double avail = std::max(room.up, room.down);
  if (avail < 2.0 * h) h = 0.45 * avail;
  if (!(h >= kMinStep))
    throw EvalError("finite-difference step underflow near the cone boundary");
  st.h = h;
  st.npts = 3;
  st.offset = {0.0, dir * h, 2.0 * dir * h, 0};
  st.weight = {dir * -1.5 / h, dir * 2.0 / h, dir * -0.5 / h, 0};
  return st;
}

AxisStencil second_derivative_stencil(const OrderedTuple& s, int i, Room room) {
  AxisStencil st;
  double h = kCbrtEps * std::max(1.0, s[i]);
  if (room.up >= 2.0 * h && room.down >= 2.0 * h) {
    st.h = h;
    st.npts = 3;
    st.offset = {-h, 0.0, h, 0};
    const double w = 1.0 / (h * h);
    st.weight = {w, -2.0 * w, w, 0};
    return st;
  }
  const double dir = (room.up >= room.down) ? 1.0 : -1.0;
  const double avail = std::max(room.up, room.down);
  if (avail < 3.0 * h) h = 0.3 * avail;
  if (!(h >= kMinStep))
    throw EvalError("finite-difference step underflow near the cone boundary");
  st.h = h;
  st.npts = 4;
  const double w = 1.0 / (h * h);
  st.offset = {0.0, dir * h, 2.0 * dir * h, 3.0 * dir * h};
  st.weight = {2.0 * w, -5.0 * w, 4.0 * w, -1.0 * w};
  return st;
}

// Sample ghat at s displaced along one or two axes, clamping rounding
// spill so the tuple stays weakly decreasing.
double sample_ghat(const EnergySpec& spec, const OrderedTuple& s, int i, double di, int j,
                   double dj) {
  std::array<double, kMaxDim> v{};
  const int n = s.dim();
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = s[k];
  v[static_cast<std::size_t>(i)] += di;
  if (j >= 0) v[static_cast<std::size_t>(j)] += dj;
  for (int k = 1; k < n; ++k) {
    auto& cur = v[static_cast<std::size_t>(k)];
    const double prev = v[static_cast<std::size_t>(k - 1)];
    if (cur > prev) cur = prev;
  }
  return spec.ghat(OrderedTuple(std::span<const double>(v.data(), static_cast<std::size_t>(n))));
}

GradArray fd_gradient(const EnergySpec& spec, const OrderedTuple& s, double& max_step) {
  GradArray g{};
  for (int i = 0; i < s.dim(); ++i) {
    const AxisStencil st = first_derivative_stencil(s, i, room_at(s, i, 1.0, 1.0), kSqrtEps);
    max_step = std::max(max_step, st.h);
    double acc = 0.0;
    for (int k = 0; k < st.npts; ++k)
      acc += st.weight[static_cast<std::size_t>(k)] *
             sample_ghat(spec, s, i, st.offset[static_cast<std::size_t>(k)], -1, 0.0);
    g[static_cast<std::size_t>(i)] = acc;
  }
  return g;
}

HessArray fd_hessian(const EnergySpec& spec, const OrderedTuple& s, double& max_step) {
  const int n = s.dim();
  HessArray h{};
  for (int i = 0; i < n; ++i) {
    const AxisStencil st = second_derivative_stencil(s, i, room_at(s, i, 1.0, 1.0));
    max_step = std::max(max_step, st.h);
    double acc = 0.0;
    for (int k = 0; k < st.npts; ++k)
      acc += st.weight[static_cast<std::size_t>(k)] *
             sample_ghat(spec, s, i, st.offset[static_cast<std::size_t>(k)], -1, 0.0);
    h[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = acc;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      // Adjacent axes share their gap, so each side gets half of it.
      // Mixed partials are second derivatives: they use the cbrt(eps)
      // step in each factor.
      const bool adjacent = (j == i + 1);
      const Room ri = room_at(s, i, 1.0, adjacent ? 0.5 : 1.0);
      const Room rj = room_at(s, j, adjacent ? 0.5 : 1.0, 1.0);
      const AxisStencil si = first_derivative_stencil(s, i, ri, kCbrtEps);
      const AxisStencil sj = first_derivative_stencil(s, j, rj, kCbrtEps);
      max_step = std::max({max_step, si.h, sj.h});
      double acc = 0.0;
      for (int a = 0; a < si.npts; ++a)
        for (int b = 0; b < sj.npts; ++b)
          acc += si.weight[static_cast<std::size_t>(a)] * sj.weight[static_cast<std::size_t>(b)] *
                 sample_ghat(spec, s, i, si.offset[static_cast<std::size_t>(a)], j,
                             sj.offset[static_cast<std::size_t>(b)]);
      h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
      h[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = acc;
    }
  }
  return h;
}

}  // namespace

std::string to_string(Regularity r) {
  return r == Regularity::C2Closure ? "c2-closure" : "c2-interior-c1-closure";
}

Regularity regularity_from_string(const std::string& text) {
  if (text == "c2-closure" || text == "c2_closure") return Regularity::C2Closure;
  if (text == "c1-closure" || text == "c2-interior-c1-closure" || text == "c1_closure" ||
      text == "c2_interior_c1_closure")
    return Regularity::C2InteriorC1Closure;
  throw InputError("unknown regularity claim '" + text +
                   "' (expected c1-closure or c2-closure)");
}

double eval_W(const EnergySpec& spec, const Matrix& F) {
  if (F.dim() != spec.n)
    throw InputError("eval_W: matrix dimension " + std::to_string(F.dim()) +
                     " does not match energy dimension " + std::to_string(spec.n));
  const Svd dec = svd_ordered(F);
  if (!dec.det_positive) throw DomainError("eval_W: det F must be positive");
  return spec.ghat(dec.s);
}

DerivativeBundle derivatives_at(const EnergySpec& spec, const OrderedTuple& s, bool need_hess) {
  if (s.dim() != spec.n) throw InputError("derivatives_at: dimension mismatch");
  if (!s.strictly_positive()) throw DomainError("derivatives_at: singular values must be positive");
  if (need_hess && !s.strictly_ordered() && spec.regularity != Regularity::C2Closure)
    throw InputError(
        "derivatives_at: second derivatives at a repeated singular value require a "
        "c2-closure regularity claim");

  DerivativeBundle out;
  out.n = spec.n;
  double max_step = 0.0;
  bool used_fd = false;

  if (spec.has_closed_grad()) {
    out.grad = spec.grad(s);
  } else {
    out.grad = fd_gradient(spec, s, max_step);
    used_fd = true;
  }
  if (need_hess) {
    out.has_hess = true;
    if (spec.has_closed_hess()) {
      out.hess = spec.hess(s);
    } else {
      out.hess = fd_hessian(spec, s, max_step);
      used_fd = true;
    }
  }
  out.method =
      used_fd ? DerivativeBundle::Method::FiniteDifference : DerivativeBundle::Method::ClosedForm;
  out.step_used = max_step;
  return out;
}

GradArray gradient_at(const EnergySpec& spec, const OrderedTuple& s) {
  return derivatives_at(spec, s, false).grad;
}

namespace {

EnergySpec opnorm_energy(int n) {
  EnergySpec e;
  e.n = n;
  e.name = "opnorm";
  e.regularity = Regularity::C2Closure;
  e.ghat = [](const OrderedTuple& s) { return s[0]; };
  e.grad = [](const OrderedTuple&) {
    GradArray g{};
    g[0] = 1.0;
    return g;
  };
  e.hess = [](const OrderedTuple&) { return HessArray{}; };
  return e;
}

EnergySpec distortion_energy() {
  EnergySpec e;
  e.n = 2;
  e.name = "distortion";
  e.regularity = Regularity::C2Closure;
  e.ghat = [](const OrderedTuple& s) { return s[0] / s[1]; };
  e.grad = [](const OrderedTuple& s) {
    GradArray g{};
    g[0] = 1.0 / s[1];
    g[1] = -s[0] / (s[1] * s[1]);
    return g;
  };
  e.hess = [](const OrderedTuple& s) {
    HessArray h{};
    h[0][1] = h[1][0] = -1.0 / (s[1] * s[1]);
    h[1][1] = 2.0 * s[0] / (s[1] * s[1] * s[1]);
    return h;
  };
  return e;
}

EnergySpec log_distortion_energy() {
  EnergySpec e;
  e.n = 2;
  e.name = "log-distortion";
  e.regularity = Regularity::C2Closure;
  e.ghat = [](const OrderedTuple& s) { return std::log(s[0]) - std::log(s[1]); };
  e.grad = [](const OrderedTuple& s) {
    GradArray g{};
    g[0] = 1.0 / s[0];
    g[1] = -1.0 / s[1];
    return g;
  };
  e.hess = [](const OrderedTuple& s) {
    HessArray h{};
    h[0][0] = -1.0 / (s[0] * s[0]);
    h[1][1] = 1.0 / (s[1] * s[1]);
    return h;
  };
  return e;
}

EnergySpec distortion_squared_energy() {
  EnergySpec e;
  e.n = 2;
  e.name = "distortion-squared";
  e.regularity = Regularity::C2Closure;
  e.ghat = [](const OrderedTuple& s) {
    const double k = s[0] / s[1];
    return k * k;
  };
  e.grad = [](const OrderedTuple& s) {
    GradArray g{};
    g[0] = 2.0 * s[0] / (s[1] * s[1]);
    g[1] = -2.0 * s[0] * s[0] / (s[1] * s[1] * s[1]);
    return g;
  };
  e.hess = [](const OrderedTuple& s) {
    HessArray h{};
    h[0][0] = 2.0 / (s[1] * s[1]);
    h[0][1] = h[1][0] = -4.0 * s[0] / (s[1] * s[1] * s[1]);
    h[1][1] = 6.0 * s[0] * s[0] / (s[1] * s[1] * s[1] * s[1]);
    return h;
  };
  return e;
}

EnergySpec det_energy(int n) {
  EnergySpec e;
  e.n = n;
  e.name = "det";
  e.regularity = Regularity::C2Closure;
  e.ghat = [n](const OrderedTuple& s) {
    double p = 1.0;
    for (int i = 0; i < n; ++i) p *= s[i];
    return p;
  };
  e.grad = [n](const OrderedTuple& s) {
    GradArray g{};
    for (int i = 0; i < n; ++i) {
      double p = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) p *= s[j];
      g[static_cast<std::size_t>(i)] = p;
    }
    return g;
  };
  e.hess = [n](const OrderedTuple& s) {
    HessArray h{};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        double p = 1.0;
        for (int k = 0; k < n; ++k)
          if (k != i && k != j) p *= s[k];
        h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = p;
      }
    return h;
  };
  return e;
}

EnergySpec conformal_energy(const std::string& hhat_src) {
  if (hhat_src.empty()) throw InputError("zoo conformal: missing hhat expression");
  const std::vector<std::string> names = {"t"};
  const BoundExpr hhat = Expr::parse(hhat_src).bind(names);
  EnergySpec e;
  e.n = 2;
  e.name = "conformal(" + hhat_src + ")";
  e.ghat = [hhat](const OrderedTuple& s) {
    const double t = s[0] / s[1];
    return hhat.eval(std::span<const double>(&t, 1));
  };
  return e;
}

EnergySpec voliso_energy(const std::string& hhat_src, const std::string& f_src) {
  if (hhat_src.empty() || f_src.empty())
    throw InputError("zoo voliso: needs both hhat and f expressions");
  const std::vector<std::string> tn = {"t"};
  const std::vector<std::string> dn = {"d"};
  const BoundExpr hhat = Expr::parse(hhat_src).bind(tn);
  const BoundExpr fvol = Expr::parse(f_src).bind(dn);
  EnergySpec e;
  e.n = 2;
  e.name = "voliso(" + hhat_src + "; " + f_src + ")";
  e.ghat = [hhat, fvol](const OrderedTuple& s) {
    const double t = s[0] / s[1];
    const double d = s[0] * s[1];
    return hhat.eval(std::span<const double>(&t, 1)) + fvol.eval(std::span<const double>(&d, 1));
  };
  return e;
}

}  // namespace

EnergySpec zoo(const std::string& name, const ZooParams& params) {
  if (params.n < kMinDim || params.n > kMaxDim)
    throw InputError("zoo: dimension must be in [2, 8], got " + std::to_string(params.n));
  EnergySpec e;
  if (name == "opnorm") {
    e = opnorm_energy(params.n);
  } else if (name == "distortion" || name == "K") {
    e = distortion_energy();
  } else if (name == "log-distortion" || name == "logK") {
    e = log_distortion_energy();
  } else if (name == "distortion-squared" || name == "K2") {
    e = distortion_squared_energy();
  } else if (name == "det") {
    e = det_energy(params.n);
  } else if (name == "conformal") {
    e = conformal_energy(params.hhat);
  } else if (name == "voliso") {
    e = voliso_energy(params.hhat, params.f);
  } else {
    throw InputError("unknown zoo energy '" + name + "'");
  }
  if (e.n == 2 && params.n != 2)
    throw InputError("zoo '" + name + "' is a planar family (n = 2), got n = " +
                     std::to_string(params.n));
  if (params.regularity) e.regularity = *params.regularity;
  return e;
}

EnergySpec energy_from_expression(const std::string& ghat_source, int n, Regularity regularity) {
  if (n < kMinDim || n > kMaxDim)
    throw InputError("energy dimension must be in [2, 8], got " + std::to_string(n));
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) names.push_back("l" + std::to_string(i));
  const BoundExpr bound = Expr::parse(ghat_source).bind(names);
  EnergySpec e;
  e.n = n;
  e.name = ghat_source;
  e.regularity = regularity;
  e.ghat = [bound, n](const OrderedTuple& s) {
    return bound.eval(s.values());
  };
  return e;
}

ScalarEnergy glued_parabola(double a, double x0) {
  ScalarEnergy e;
  e.name = "glued-parabola";
  e.kinks = {x0};
  e.f = [a, x0](double x) {
    const double shift = (x >= x0) ? a : -a;
    const double y = x - shift - x0;
    return y * y;
  };
  return e;
}

}  // namespace roc
