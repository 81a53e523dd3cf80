#include "qfi/potential.hpp"

#include <cmath>

#include "qfi/errors.hpp"

namespace qfi {

double ParamValues::real(const std::string& name) const {
  auto it = reals.find(name);
  if (it == reals.end()) throw BadParams("missing real parameter '" + name + "'");
  return it->second;
}

const Fn1& ParamValues::function(const std::string& name) const {
  auto it = functions.find(name);
  if (it == functions.end()) throw BadParams("missing function parameter '" + name + "'");
  return it->second;
}

PotentialSpec::PotentialSpec(std::string name, ParamValues params, Field field,
                             Distance singular_distance, std::string singular_description)
    : name_(std::move(name)),
      params_(std::move(params)),
      field_(std::move(field)),
      distance_(std::move(singular_distance)),
      singular_description_(std::move(singular_description)) {
  if (!distance_) distance_ = [](double, double) { return kNoSingularity; };
}

bool PotentialSpec::is_singular(double x, double y) const {
  return !(distance_(x, y) > kSingularEps);
}

Jet2 PotentialSpec::jet(double x, double y) const {
  if (is_singular(x, y)) throw SingularPoint(name_ + ": point on the singular set", x, y);
  Jet2 v = field_(Jet2::var_x(x), Jet2::var_y(y));
  if (!std::isfinite(v.v) || !std::isfinite(v.gx) || !std::isfinite(v.gy) ||
      !std::isfinite(v.hxx) || !std::isfinite(v.hxy) || !std::isfinite(v.hyy))
    throw SingularPoint(name_ + ": non-finite potential", x, y);
  return v;
}

Jet2 PotentialSpec::at(const Jet2& x, const Jet2& y) const {
  if (is_singular(x.v, y.v)) throw SingularPoint(name_ + ": point on the singular set", x.v, y.v);
  return field_(x, y);
}

Vec2 PotentialSpec::gradient(double x, double y) const {
  const auto j = jet(x, y);
  return {j.gx, j.gy};
}

Sym2 PotentialSpec::hessian(double x, double y) const {
  const auto j = jet(x, y);
  return {j.hxx, j.hxy, j.hyy};
}

PotentialSpec PotentialSpec::scaled(double factor) const {
  auto field = [f = field_, factor](const Jet2& x, const Jet2& y) { return factor * f(x, y); };
  return PotentialSpec(name_, params_, field, distance_, singular_description_);
}

double evaluate(const PotentialSpec& spec, double x, double y) { return spec.value(x, y); }

namespace {

double value_checked(const PotentialSpec& spec, double x, double y) {
  if (spec.is_singular(x, y)) throw SingularPoint(spec.name() + ": stencil hits the singular set", x, y);
  return spec.value(x, y);
}

}  // namespace

Vec2 fd_gradient(const PotentialSpec& spec, double x, double y, double h) {
  const double fxp = value_checked(spec, x + h, y), fxm = value_checked(spec, x - h, y);
  const double fyp = value_checked(spec, x, y + h), fym = value_checked(spec, x, y - h);
  return {(fxp - fxm) / (2 * h), (fyp - fym) / (2 * h)};
}

Sym2 fd_hessian(const PotentialSpec& spec, double x, double y, double h) {
  const double f0 = value_checked(spec, x, y);
  const double fxp = value_checked(spec, x + h, y), fxm = value_checked(spec, x - h, y);
  const double fyp = value_checked(spec, x, y + h), fym = value_checked(spec, x, y - h);
  const double fpp = value_checked(spec, x + h, y + h), fpm = value_checked(spec, x + h, y - h);
  const double fmp = value_checked(spec, x - h, y + h), fmm = value_checked(spec, x - h, y - h);
  return {(fxp - 2 * f0 + fxm) / (h * h), (fpp - fpm - fmp + fmm) / (4 * h * h),
          (fyp - 2 * f0 + fym) / (h * h)};
}

double distance_to_point(double x, double y, double px, double py) {
  return std::hypot(x - px, y - py);
}

double distance_to_line(double x, double y, double a, double b, double c) {
  return std::abs(a * x + b * y - c) / std::hypot(a, b);
}

}  // namespace qfi
