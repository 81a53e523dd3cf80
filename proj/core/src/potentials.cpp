#include "qfi/potentials.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "qfi/errors.hpp"
#include "radial.hpp"

namespace qfi {

namespace {

using detail::distance_to_y_half_axis;
using detail::r_plus_minus;
using Kind = ParamInfo::Kind;

ParamInfo real(std::string name, double def, std::string constraint = {}) {
  return {std::move(name), Kind::Real, def, {}, std::move(constraint)};
}

ParamInfo func(std::string name, std::string def_json) {
  return {std::move(name), Kind::Function, 0.0, std::move(def_json), {}};
}

constexpr double kInf = PotentialSpec::kNoSingularity;

Jet2 inv_sq(const Jet2& u) { return reciprocal(u * u); }

void require_nonzero(const ParamValues& p, const std::string& key, const std::string& family) {
  if (p.real(key) == 0.0) throw BadParams(family + ": parameter '" + key + "' must be nonzero");
}

PotentialSpec build(const std::string& name, const ParamValues& p, PotentialSpec::Field f,
                    PotentialSpec::Distance d = {}, std::string desc = "none") {
  return PotentialSpec(name, p, std::move(f), std::move(d), std::move(desc));
}

std::vector<PotentialFamily> make_families() {
  std::vector<PotentialFamily> fams;

  // ---- linear-FI (class I) families -------------------------------------
  fams.push_back({"V1", "c x + F(y - b x)",
                  {real("c", 0.5), real("b", 0.5), func("F", "\"quadratic\"")},
                  [](const ParamValues& p) {
                    const double c = p.real("c"), b = p.real("b");
                    const Fn1 F = p.function("F");
                    return build("V1", p, [=](const Jet2& x, const Jet2& y) {
                      return c * x + F(y - b * x);
                    });
                  }});
  fams.push_back({"V1a", "c x + lambda y", {real("c", 1.0), real("lambda", 0.5)},
                  [](const ParamValues& p) {
                    const double c = p.real("c"), l = p.real("lambda");
                    return build("V1a", p, [=](const Jet2& x, const Jet2& y) { return c * x + l * y; });
                  }});
  fams.push_back({"V1b", "c x - lambda^2 y^2 / 2", {real("c", 0.5), real("lambda", 0.2, "lambda != 0")},
                  [](const ParamValues& p) {
                    require_nonzero(p, "lambda", "V1b");
                    const double c = p.real("c"), l = p.real("lambda");
                    return build("V1b", p, [=](const Jet2& x, const Jet2& y) {
                      return c * x - 0.5 * l * l * y * y;
                    });
                  }});
  fams.push_back({"V2", "c y + F(x)", {real("c", 0.5), func("F", "\"quadratic\"")},
                  [](const ParamValues& p) {
                    const double c = p.real("c");
                    const Fn1 F = p.function("F");
                    return build("V2", p, [=](const Jet2& x, const Jet2& y) { return c * y + F(x); });
                  }});
  fams.push_back({"V2a", "c y - lambda^2 x^2 / 2", {real("c", 0.5), real("lambda", 0.2, "lambda != 0")},
                  [](const ParamValues& p) {
                    require_nonzero(p, "lambda", "V2a");
                    const double c = p.real("c"), l = p.real("lambda");
                    return build("V2a", p, [=](const Jet2& x, const Jet2& y) {
                      return c * y - 0.5 * l * l * x * x;
                    });
                  }});
  fams.push_back(
      {"V3", "c atan((y + b1)/(b2 - x)) + F((x^2 + y^2)/2 + b1 y - b2 x)",
       {real("c", 0.0), real("b1", 0.3), real("b2", -0.2), func("F", "\"quadratic\"")},
       [](const ParamValues& p) {
         const double c = p.real("c"), b1 = p.real("b1"), b2 = p.real("b2");
         const Fn1 F = p.function("F");
         PotentialSpec::Distance d = [=](double x, double y) {
           return c != 0.0 ? distance_to_point(x, y, b2, -b1) : kInf;
         };
         return build(
             "V3", p,
             [=](const Jet2& x, const Jet2& y) {
               Jet2 v = F(0.5 * (x * x + y * y) + b1 * y - b2 * x);
               // the angle is continuous off the ray {y = -b1, x > b2}
               if (c != 0.0) v += c * atan2(y + b1, b2 - x);
               return v;
             },
             d, c != 0.0 ? "center (b2, -b1)" : "none");
       }});
  fams.push_back({"V3a", "lambda ((x^2 + y^2)/2 + b1 y - b2 x)",
                  {real("lambda", 1.0, "lambda != 0"), real("b1", 0.3), real("b2", -0.2)},
                  [](const ParamValues& p) {
                    require_nonzero(p, "lambda", "V3a");
                    const double l = p.real("lambda"), b1 = p.real("b1"), b2 = p.real("b2");
                    return build("V3a", p, [=](const Jet2& x, const Jet2& y) {
                      return l * (0.5 * (x * x + y * y) + b1 * y - b2 * x);
                    });
                  }});
  fams.push_back({"V3b", "-k^2 (x^2 + y^2) / 2", {real("k", 0.5, "k != 0")}, [](const ParamValues& p) {
                    require_nonzero(p, "k", "V3b");
                    const double k = p.real("k");
                    return build("V3b", p, [=](const Jet2& x, const Jet2& y) {
                      return -0.5 * k * k * (x * x + y * y);
                    });
                  }});

  // ---- quadratic-FI (class II) integrable families ------------------------
  fams.push_back({"V21", "F1(y/x)/(x^2 + y^2) + F2(x^2 + y^2)",
                  {func("F1", R"({"poly":[0,0,0.2]})"), func("F2", R"({"poly":[0,0.5]})")},
                  [](const ParamValues& p) {
                    const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
                    return build(
                        "V21", p,
                        [=](const Jet2& x, const Jet2& y) {
                          const Jet2 r2 = x * x + y * y;
                          return F1(y / x) / r2 + F2(r2);
                        },
                        [](double x, double) { return std::abs(x); }, "line x = 0");
                  }});
  fams.push_back(
      {"V21a", "k/(x^2 + l y^2) + F2(x^2 + y^2)",
       {real("k", 0.5), real("l", 2.0), func("F2", R"({"poly":[0,0.5]})")},
       [](const ParamValues& p) {
         const double k = p.real("k"), l = p.real("l");
         const Fn1 F2 = p.function("F2");
         PotentialSpec::Distance d = [=](double x, double y) {
           if (k == 0.0) return kInf;
           if (l > 0.0) return std::hypot(x, y);
           if (l == 0.0) return std::abs(x);
           const double s = std::sqrt(-l);  // x^2 + l y^2 = 0 on x = +-s y
           return std::min(distance_to_line(x, y, 1.0, -s, 0.0), distance_to_line(x, y, 1.0, s, 0.0));
         };
         return build(
             "V21a", p,
             [=](const Jet2& x, const Jet2& y) {
               Jet2 v = F2(x * x + y * y);
               if (k != 0.0) v += k / (x * x + l * y * y);
               return v;
             },
             d, "zero set of x^2 + l y^2");
       }});
  fams.push_back({"V21b", "k/(2 x^2 + y^2) + F2(x^2 + y^2)",
                  {real("k", 0.5), func("F2", R"({"poly":[0,0.5]})")},
                  [](const ParamValues& p) {
                    const double k = p.real("k");
                    const Fn1 F2 = p.function("F2");
                    return build(
                        "V21b", p,
                        [=](const Jet2& x, const Jet2& y) {
                          Jet2 v = F2(x * x + y * y);
                          if (k != 0.0) v += k / (2.0 * x * x + y * y);
                          return v;
                        },
                        [=](double x, double y) { return k != 0.0 ? std::hypot(x, y) : kInf; },
                        "origin");
                  }});
  fams.push_back(
      {"V22", "(F1(u) - F2(v))/(u^2 - v^2), elliptic coordinates with foci (+-sqrt(A), 0)",
       {real("A", 1.0, "A > 0"), func("F1", R"({"poly":[0,0,0,0,0,0,0.0625]})"),
        func("F2", R"({"poly":[0,0,0,0,0,0,0.0625]})")},
       [](const ParamValues& p) {
         const double A = p.real("A");
         if (!(A > 0.0)) throw BadParams("V22: parameter 'A' must be positive");
         const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
         const double sa = std::sqrt(A);
         return build(
             "V22", p,
             [=](const Jet2& x, const Jet2& y) {
               const Jet2 q = x * x + y * y + A;
               const Jet2 u2 = q + sqrt(q * q - 4.0 * A * x * x);
               const Jet2 u = sqrt(u2);
               // v^2 = 4 A x^2 / u^2; F2 should be even for smoothness across x = 0
               const Jet2 v = 2.0 * sa * abs(x) / u;
               return (F1(u) - F2(v)) / (u2 - v * v);
             },
             [=](double x, double y) {
               return std::min(distance_to_point(x, y, sa, 0.0), distance_to_point(x, y, -sa, 0.0));
             },
             "points (+-sqrt(A), 0)");
       }});
  fams.push_back({"V24", "(F1(r + y) + F2(r - y))/r",
                  {func("F1", R"({"poly":[0,0,0.1,0.25]})"), func("F2", R"({"poly":[0,0,0,0.25]})")},
                  [](const ParamValues& p) {
                    const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
                    return build(
                        "V24", p,
                        [=](const Jet2& x, const Jet2& y) {
                          const auto [plus, minus] = r_plus_minus(x, y);
                          return (F1(plus) + F2(minus)) / sqrt(x * x + y * y);
                        },
                        [](double x, double y) { return std::hypot(x, y); }, "origin");
                  }});
  fams.push_back({"V24b", "(F1(r + x) + F2(r - x))/r",
                  {func("F1", R"({"poly":[0,0,0.1,0.25]})"), func("F2", R"({"poly":[0,0,0,0.25]})")},
                  [](const ParamValues& p) {
                    const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
                    return build(
                        "V24b", p,
                        [=](const Jet2& x, const Jet2& y) {
                          const auto [plus, minus] = r_plus_minus(y, x);
                          return (F1(plus) + F2(minus)) / sqrt(x * x + y * y);
                        },
                        [](double x, double y) { return std::hypot(x, y); }, "origin");
                  }});
  fams.push_back({"V27", "F1(x) + F2(y)",
                  {func("F1", R"({"poly":[0,0,0.5]})"), func("F2", R"({"poly":[0,0,0.5,0,0.25]})")},
                  [](const ParamValues& p) {
                    const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
                    return build("V27", p, [=](const Jet2& x, const Jet2& y) { return F1(x) + F2(y); });
                  }});
  fams.push_back(
      {"V28", "F1(y + (b0 + s) x) + F2(y + (b0 - s) x), b0 = (A - B)/(2C), s = sqrt(b0^2 + 1)",
       {real("A", 2.0), real("B", 1.0), real("C", 1.0, "C != 0"), func("F1", R"({"poly":[0,0,0.5]})"),
        func("F2", R"({"poly":[0,0,0.25,0,0.05]})")},
       [](const ParamValues& p) {
         require_nonzero(p, "C", "V28");
         const double b0 = (p.real("A") - p.real("B")) / (2.0 * p.real("C"));
         const double s = std::sqrt(b0 * b0 + 1.0);
         const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
         return build("V28", p, [=](const Jet2& x, const Jet2& y) {
           return F1(y + (b0 + s) * x) + F2(y + (b0 - s) * x);
         });
       }});
  fams.push_back({"V28_b0", "F1(y + x) + F2(y - x)",
                  {func("F1", R"({"poly":[0,0,0.5]})"), func("F2", R"({"poly":[0,0,0.25,0,0.05]})")},
                  [](const ParamValues& p) {
                    const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
                    return build("V28_b0", p,
                                 [=](const Jet2& x, const Jet2& y) { return F1(y + x) + F2(y - x); });
                  }});

  // ---- superintegrable quadratic-FI families -------------------------------
  fams.push_back(
      {"Vs1", "k (x^2 + y^2)/2 + b/x^2 + c/y^2", {real("k", 1.0), real("b", 0.25), real("c", 0.25)},
       [](const ParamValues& p) {
         const double k = p.real("k"), b = p.real("b"), c = p.real("c");
         return build(
             "Vs1", p,
             [=](const Jet2& x, const Jet2& y) {
               Jet2 v = 0.5 * k * (x * x + y * y);
               if (b != 0.0) v += b * inv_sq(x);
               if (c != 0.0) v += c * inv_sq(y);
               return v;
             },
             [=](double x, double y) {
               return std::min(b != 0.0 ? std::abs(x) : kInf, c != 0.0 ? std::abs(y) : kInf);
             },
             "lines x = 0 (b != 0) and y = 0 (c != 0)");
       }});
  fams.push_back({"Vs2", "k1 (x^2 + 4 y^2)/2 + k2/x^2 + k3 y",
                  {real("k1", 1.0), real("k2", 0.25), real("k3", 0.3)}, [](const ParamValues& p) {
                    const double k1 = p.real("k1"), k2 = p.real("k2"), k3 = p.real("k3");
                    return build(
                        "Vs2", p,
                        [=](const Jet2& x, const Jet2& y) {
                          Jet2 v = 0.5 * k1 * (x * x + 4.0 * y * y) + k3 * y;
                          if (k2 != 0.0) v += k2 * inv_sq(x);
                          return v;
                        },
                        [=](double x, double) { return k2 != 0.0 ? std::abs(x) : kInf; },
                        "line x = 0 (k2 != 0)");
                  }});
  fams.push_back(
      {"Vs3", "k1/x^2 + k2/r + k3 y/(r x^2)", {real("k1", 1.0), real("k2", -1.0), real("k3", 0.3)},
       [](const ParamValues& p) {
         const double k1 = p.real("k1"), k2 = p.real("k2"), k3 = p.real("k3");
         return build(
             "Vs3", p,
             [=](const Jet2& x, const Jet2& y) {
               const Jet2 r = sqrt(x * x + y * y);
               Jet2 v = k2 / r;
               if (k1 != 0.0 || k3 != 0.0) v += (k1 + k3 * y / r) * inv_sq(x);
               return v;
             },
             [=](double x, double y) {
               return (k1 != 0.0 || k3 != 0.0) ? std::abs(x) : std::hypot(x, y);
             },
             "line x = 0 (origin only when k1 = k3 = 0)");
       }});
  fams.push_back(
      {"Vs4", "k1/r + k2 sqrt(r + y)/r + k3 sqrt(r - y)/r",
       {real("k1", 1.0), real("k2", -1.0), real("k3", -0.8)}, [](const ParamValues& p) {
         const double k1 = p.real("k1"), k2 = p.real("k2"), k3 = p.real("k3");
         return build(
             "Vs4", p,
             [=](const Jet2& x, const Jet2& y) {
               const auto [plus, minus] = r_plus_minus(x, y);
               Jet2 num = Jet2(k1);
               if (k2 != 0.0) num += k2 * sqrt(plus);
               if (k3 != 0.0) num += k3 * sqrt(minus);
               return num / sqrt(x * x + y * y);
             },
             [=](double x, double y) {
               double d = std::hypot(x, y);
               if (k3 != 0.0) d = std::min(d, distance_to_y_half_axis(x, y, 1.0));
               if (k2 != 0.0) d = std::min(d, distance_to_y_half_axis(x, y, -1.0));
               return d;
             },
             "origin and the y half-axes where r -+ y vanishes");
       }});
  fams.push_back({"V271", "k1/(x + c1)^2 + k2/(y + c2)^2",
                  {real("k1", 1.0), real("k2", 1.0), real("c1", 0.0), real("c2", 0.0)},
                  [](const ParamValues& p) {
                    const double k1 = p.real("k1"), k2 = p.real("k2"), c1 = p.real("c1"), c2 = p.real("c2");
                    return build(
                        "V271", p,
                        [=](const Jet2& x, const Jet2& y) {
                          Jet2 v;
                          if (k1 != 0.0) v += k1 * inv_sq(x + c1);
                          if (k2 != 0.0) v += k2 * inv_sq(y + c2);
                          return v;
                        },
                        [=](double x, double y) {
                          return std::min(k1 != 0.0 ? std::abs(x + c1) : kInf,
                                          k2 != 0.0 ? std::abs(y + c2) : kInf);
                        },
                        "lines x = -c1, y = -c2");
                  }});
  fams.push_back({"V272", "F1(x) + k2/(y + c2)^2",
                  {func("F1", R"({"poly":[0,0,0.5]})"), real("k2", 1.0), real("c2", 0.0)},
                  [](const ParamValues& p) {
                    const double k2 = p.real("k2"), c2 = p.real("c2");
                    const Fn1 F1 = p.function("F1");
                    return build(
                        "V272", p,
                        [=](const Jet2& x, const Jet2& y) {
                          Jet2 v = F1(x);
                          if (k2 != 0.0) v += k2 * inv_sq(y + c2);
                          return v;
                        },
                        [=](double, double y) { return k2 != 0.0 ? std::abs(y + c2) : kInf; },
                        "line y = -c2");
                  }});
  fams.push_back({"V273", "F2(y) + k1/(x + c1)^2",
                  {func("F2", R"({"poly":[0,0,0.5]})"), real("k1", 1.0), real("c1", 0.0)},
                  [](const ParamValues& p) {
                    const double k1 = p.real("k1"), c1 = p.real("c1");
                    const Fn1 F2 = p.function("F2");
                    return build(
                        "V273", p,
                        [=](const Jet2& x, const Jet2& y) {
                          Jet2 v = F2(y);
                          if (k1 != 0.0) v += k1 * inv_sq(x + c1);
                          return v;
                        },
                        [=](double x, double) { return k1 != 0.0 ? std::abs(x + c1) : kInf; },
                        "line x = -c1");
                  }});
  fams.push_back(
      {"V274",
       "-lambda^2 (x^2 + y^2)/8 - lambda^2 (c1 x + c2 y)/4 - k1/(x + c1)^2 - k2/(y + c2)^2",
       {real("lambda", 0.5, "lambda != 0"), real("c1", 0.0), real("c2", 0.0), real("k1", -0.25),
        real("k2", -0.25)},
       [](const ParamValues& p) {
         require_nonzero(p, "lambda", "V274");
         const double l = p.real("lambda"), c1 = p.real("c1"), c2 = p.real("c2");
         const double k1 = p.real("k1"), k2 = p.real("k2");
         return build(
             "V274", p,
             [=](const Jet2& x, const Jet2& y) {
               Jet2 v = -l * l / 8.0 * (x * x + y * y) - l * l / 4.0 * (c1 * x + c2 * y);
               if (k1 != 0.0) v -= k1 * inv_sq(x + c1);
               if (k2 != 0.0) v -= k2 * inv_sq(y + c2);
               return v;
             },
             [=](double x, double y) {
               return std::min(k1 != 0.0 ? std::abs(x + c1) : kInf, k2 != 0.0 ? std::abs(y + c2) : kInf);
             },
             "lines x = -c1, y = -c2");
       }});

  // ---- test potentials -------------------------------------------------------
  fams.push_back({"free", "0", {}, [](const ParamValues& p) {
                    return build("free", p, [](const Jet2&, const Jet2&) { return Jet2(0.0); });
                  }});
  fams.push_back({"generic", "x^4 y + sin(y) + 0.3 x^3 + 0.2 x y", {}, [](const ParamValues& p) {
                    return build("generic", p, [](const Jet2& x, const Jet2& y) {
                      return x * x * x * x * y + sin(y) + 0.3 * x * x * x + 0.2 * x * y;
                    });
                  }});
  return fams;
}

}  // namespace

const std::vector<PotentialFamily>& potential_families() {
  static const std::vector<PotentialFamily> families = make_families();
  return families;
}

const PotentialFamily& potential_family(const std::string& name) {
  const auto& fams = potential_families();
  auto it = std::find_if(fams.begin(), fams.end(), [&](const auto& f) { return f.name == name; });
  if (it == fams.end()) throw UnknownName("unknown potential '" + name + "'");
  return *it;
}

ParamValues resolve_params(const PotentialFamily& family, const nlohmann::json& params) {
  if (!params.is_null() && !params.is_object())
    throw BadParams(family.name + ": params must be a JSON object");
  ParamValues out;
  for (const auto& info : family.schema) {
    if (info.kind == Kind::Real)
      out.reals[info.name] = info.default_real;
    else
      out.functions[info.name] = function_from_json(nlohmann::json::parse(info.default_function));
  }
  if (params.is_null()) return out;
  for (const auto& [key, value] : params.items()) {
    auto it = std::find_if(family.schema.begin(), family.schema.end(),
                           [&](const auto& i) { return i.name == key; });
    if (it == family.schema.end())
      throw BadParams(family.name + ": unknown parameter '" + key + "'");
    if (it->kind == Kind::Real) {
      if (!value.is_number()) throw BadParams(family.name + ": parameter '" + key + "' must be a number");
      const double v = value.get<double>();
      if (!std::isfinite(v)) throw BadParams(family.name + ": parameter '" + key + "' must be finite");
      out.reals[key] = v;
    } else {
      out.functions[key] = function_from_json(value);
    }
  }
  return out;
}

nlohmann::json params_to_json(const ParamValues& params) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : params.reals) j[k] = v;
  for (const auto& [k, f] : params.functions) j[k] = f.to_json();
  return j;
}

PotentialSpec make_potential(const std::string& name, const nlohmann::json& params) {
  const auto& fam = potential_family(name);
  return fam.build(resolve_params(fam, params));
}

PotentialSpec make_potential(const std::string& name) { return make_potential(name, nlohmann::json()); }

PotentialSpec potential_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string())
    throw BadParams("potential JSON needs a string 'name'");
  if (!j.contains("params")) throw BadParams("potential JSON needs a 'params' object");
  for (const auto& [key, _] : j.items())
    if (key != "name" && key != "params") throw BadParams("unexpected key '" + key + "' in potential JSON");
  return make_potential(j.at("name").get<std::string>(), j.at("params"));
}

PotentialSpec potential_from_closure(std::string name, PotentialSpec::Field field,
                                     PotentialSpec::Distance singular_distance) {
  std::string desc = singular_distance ? "user-defined" : "none";
  return PotentialSpec(std::move(name), {}, std::move(field), std::move(singular_distance), std::move(desc));
}

}  // namespace qfi
