#ifndef ROC_ENERGYMODEL_HPP
#define ROC_ENERGYMODEL_HPP

// Isotropic energies in ordered-singular-value form: W(F) = ghat(s(F))
// where s(F) is the weakly decreasing singular-value tuple. The energy
// works on the ordered cone only; the symmetric extension to unordered
// arguments is never constructed. Derivatives come from user-supplied
// closed forms or from finite differences with one-sided stencils
// pointing into the strictly ordered interior near the cone boundary.

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "roc/exprlang.hpp"
#include "roc/smallmat.hpp"

namespace roc {

// Differentiability asserted by the user for ghat on the closed cone.
// C2InteriorC1Closure matches the planar theorem hypothesis; C2Closure
// is required for second derivatives at repeated singular values and
// for the general (n >= 3) theorem. The claim is echoed in reports,
// never verified: regularity is not decidable from point samples.
enum class Regularity { C2InteriorC1Closure, C2Closure };

std::string to_string(Regularity r);
Regularity regularity_from_string(const std::string& text);

using GradArray = std::array<double, kMaxDim>;
using HessArray = std::array<std::array<double, kMaxDim>, kMaxDim>;

struct DerivativeBundle {
  int n = 0;
  GradArray grad{};
  HessArray hess{};
  bool has_hess = false;
  enum class Method { ClosedForm, FiniteDifference } method = Method::ClosedForm;
  double step_used = 0.0;  // largest finite-difference step, 0 for closed form
};

struct EnergySpec {
  int n = 2;
  std::string name;
  Regularity regularity = Regularity::C2InteriorC1Closure;
  std::function<double(const OrderedTuple&)> ghat;
  std::function<GradArray(const OrderedTuple&)> grad;  // optional closed form
  std::function<HessArray(const OrderedTuple&)> hess;  // optional closed form

  bool has_closed_grad() const { return static_cast<bool>(grad); }
  bool has_closed_hess() const { return static_cast<bool>(hess); }
};

// W(F) = ghat(ordered singular values of F); isotropic and objective by
// construction. det F <= 0 raises DomainError.
double eval_W(const EnergySpec& spec, const Matrix& F);

// Gradient and (optionally) Hessian of ghat at s. Closed forms are used
// when available; otherwise central differences with steps
// sqrt(eps)*max(1, s_i) (first order) and cbrt(eps)*max(1, s_i)
// (second order), switching to one-sided stencils into the interior
// when a neighbouring gap is below twice the step. Steps shrink near
// the positive-orthant boundary; below 1e-12 an EvalError is raised.
// Second derivatives at a repeated entry require a C2Closure claim.
DerivativeBundle derivatives_at(const EnergySpec& spec, const OrderedTuple& s,
                                bool need_hess = true);
GradArray gradient_at(const EnergySpec& spec, const OrderedTuple& s);

struct ZooParams {
  int n = 2;
  std::string hhat;  // expression in t, for conformal / voliso
  std::string f;     // expression in d, for voliso
  std::optional<Regularity> regularity;
};

// Built-in energy families:
//   opnorm               ghat = l1                       (any n)
//   distortion | K       ghat = l1/l2
//   log-distortion       ghat = log(l1) - log(l2)        (alias logK)
//   distortion-squared   ghat = (l1/l2)^2                (alias K2)
//   det                  ghat = l1*...*ln                (any n)
//   conformal            ghat = hhat(l1/l2)
//   voliso               ghat = hhat(l1/l2) + f(l1*l2)
// Closed-form derivatives are provided for the first five.
EnergySpec zoo(const std::string& name, const ZooParams& params = {});

// Energy from an expression in the fixed variable names l1..ln.
EnergySpec energy_from_expression(const std::string& ghat_source, int n,
                                  Regularity regularity = Regularity::C2InteriorC1Closure);

// Scalar path energy for scanner regressions: two parabola pieces glued
// continuously at x0 with a slope drop, so the function is smooth and
// strictly convex away from x0 but not convex across it.
struct ScalarEnergy {
  std::function<double(double)> f;
  std::vector<double> kinks;
  std::string name;
};

ScalarEnergy glued_parabola(double a, double x0);

}  // namespace roc

#endif
