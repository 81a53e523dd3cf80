#include "qfi/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include <nlohmann/json.hpp>

#include "qfi/discovery.hpp"
#include "qfi/errors.hpp"
#include "radial.hpp"

namespace qfi {

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Integrable: return "integrable";
    case Classification::Superintegrable: return "superintegrable";
    case Classification::LFIOnly: return "LFI-only";
  }
  return "integrable";
}

std::string BracketIdentity::describe() const {
  std::string out = "{" + f + ", " + g + "} = ";
  char buf[64];
  bool first = true;
  if (constant != 0.0 || terms.empty()) {
    std::snprintf(buf, sizeof buf, "%.12g", constant);
    out += buf;
    first = false;
  }
  for (const auto& [c, name] : terms) {
    if (!first) out += c < 0 ? " - " : " + ";
    else if (c < 0) out += "-";
    const double a = std::abs(c);
    if (a != 1.0) {
      std::snprintf(buf, sizeof buf, "%.12g ", a);
      out += buf;
    }
    out += name;
    first = false;
  }
  return out;
}

const FirstIntegral& CatalogEntry::fi(const std::string& n) const {
  auto it = std::find_if(fis.begin(), fis.end(), [&](const auto& f) { return f.name() == n; });
  if (it == fis.end()) throw UnknownName(name + ": no first integral named '" + n + "'");
  return *it;
}

std::vector<FirstIntegral> CatalogEntry::select(const std::vector<std::string>& names) const {
  std::vector<FirstIntegral> out;
  for (const auto& n : names) out.push_back(fi(n));
  return out;
}

namespace {

using SC = SpatialCoefficients;
using detail::r_plus_minus;

TimeTerm term(JetFormula f, TimeFactor factor = TimeFactor::power(0), double weight = 1.0) {
  TimeTerm t;
  t.factor = factor;
  t.weight = weight;
  t.field = jet_field(std::move(f));
  return t;
}

FirstIntegral lfi(std::string name, std::vector<TimeTerm> terms) {
  return FirstIntegral(std::move(name), std::move(terms), FIKind::LFI);
}

FirstIntegral qfi(std::string name, std::vector<TimeTerm> terms) {
  return FirstIntegral(std::move(name), std::move(terms), FIKind::QFI);
}

FirstIntegral qfi(std::string name, JetFormula f) { return qfi(std::move(name), {term(std::move(f))}); }

// (y xd - x yd)^2
SC angular_squared(const Jet2& x, const Jet2& y) {
  SC c;
  c.kxx = y * y;
  c.kxy = -(x * y);
  c.kyy = x * x;
  return c;
}

// xd (y xd - x yd)
SC xdot_angular(const Jet2& x, const Jet2& y) {
  SC c;
  c.kxx = y;
  c.kxy = -0.5 * x;
  return c;
}

// yd (x yd - y xd)
SC ydot_angular(const Jet2& x, const Jet2& y) {
  SC c;
  c.kyy = x;
  c.kxy = -0.5 * y;
  return c;
}

// qd^2 / 2 + f(q) along one axis
FirstIntegral axis_energy(std::string name, bool x_axis, std::function<Jet2(const Jet2&)> f) {
  return qfi(std::move(name), [x_axis, f](const Jet2& x, const Jet2& y) {
    SC c;
    (x_axis ? c.kxx : c.kyy) = 0.5;
    c.k = f(x_axis ? x : y);
    return c;
  });
}

// e^{rate t} (qd - rate q) along one axis
FirstIntegral exp_lfi(std::string name, bool x_axis, double rate) {
  return lfi(std::move(name), {term(
                                   [x_axis, rate](const Jet2& x, const Jet2& y) {
                                     SC c;
                                     (x_axis ? c.kx : c.ky) = 1.0;
                                     c.k = -rate * (x_axis ? x : y);
                                     return c;
                                   },
                                   TimeFactor::exponential(rate))});
}

// qd + c t along one axis
FirstIntegral drift_lfi(std::string name, bool x_axis, double c) {
  std::vector<TimeTerm> terms{term([x_axis](const Jet2&, const Jet2&) {
    SC s;
    (x_axis ? s.kx : s.ky) = 1.0;
    return s;
  })};
  if (c != 0.0)
    terms.push_back(term([](const Jet2&, const Jet2&) { return SC{{}, {}, {}, {}, {}, Jet2(1.0)}; },
                         TimeFactor::power(1), c));
  return lfi(std::move(name), std::move(terms));
}

// -t^2/2 qd^2 + t (q + c) qd - t^2 k/(q + c)^2 - q^2/2 - c q
FirstIntegral inverse_square_dilation(std::string name, bool x_axis, double k, double c) {
  auto q = [x_axis](const Jet2& x, const Jet2& y) { return x_axis ? x : y; };
  return qfi(std::move(name),
             {term(
                  [=](const Jet2& x, const Jet2& y) {
                    SC s;
                    (x_axis ? s.kxx : s.kyy) = -0.5;
                    const Jet2 u = q(x, y) + c;
                    if (k != 0.0) s.k = -k / (u * u);
                    return s;
                  },
                  TimeFactor::power(2)),
              term(
                  [=](const Jet2& x, const Jet2& y) {
                    SC s;
                    (x_axis ? s.kx : s.ky) = q(x, y) + c;
                    return s;
                  },
                  TimeFactor::power(1)),
              term([=](const Jet2& x, const Jet2& y) {
                SC s;
                const Jet2 u = q(x, y);
                s.k = -0.5 * u * u - c * u;
                return s;
              })});
}

// e^{l t} [-qd^2 + l (q + c) qd - l^2 (q + c)^2 / 4 + 2 k/(q + c)^2]
FirstIntegral exp_inverse_square(std::string name, bool x_axis, double l, double k, double c) {
  return qfi(std::move(name), {term(
                                   [=](const Jet2& x, const Jet2& y) {
                                     SC s;
                                     const Jet2 u = (x_axis ? x : y) + c;
                                     (x_axis ? s.kxx : s.kyy) = -1.0;
                                     (x_axis ? s.kx : s.ky) = l * u;
                                     s.k = -0.25 * l * l * u * u;
                                     if (k != 0.0) s.k += 2.0 * k / (u * u);
                                     return s;
                                   },
                                   TimeFactor::exponential(l))});
}

class Builder {
 public:
  Builder(std::string name, std::string reference, PotentialSpec spec, Classification cls)
      : e_{std::move(name), std::move(reference), std::move(spec), {}, {}, cls, {}, {}, {}, false} {
    // the energy is single-valued except for the multivalued angle term of V3
    e_.fis.push_back(hamiltonian(e_.potential));
  }
  Builder& fi(FirstIntegral f) {
    e_.fis.push_back(std::move(f));
    return *this;
  }
  Builder& bracket(std::string f, std::string g, double constant,
                   std::vector<std::pair<double, std::string>> terms = {}) {
    e_.bracket_identities.push_back({std::move(f), std::move(g), constant, std::move(terms)});
    return *this;
  }
  // {H, F} = dF/dt for an integral whose time derivative is rate * F
  Builder& energy_rate(const std::string& f, double rate) { return bracket("H", f, 0.0, {{rate, f}}); }
  Builder& involution(std::vector<std::string> names) {
    for (const auto& n : names) bracket("H", n, 0.0);
    return *this;
  }
  Builder& independent(std::vector<std::string> names) {
    e_.independent_set = std::move(names);
    return *this;
  }
  Builder& pair(std::string q) {
    e_.commuting_pair = {"H", std::move(q)};
    return *this;
  }
  Builder& ics(double x, double y, double vx, double vy) {
    e_.reference_ics = {0.0, x, y, vx, vy};
    return *this;
  }
  Builder& closed_form() {
    e_.has_closed_form = true;
    return *this;
  }
  Builder& drop_energy() {
    e_.fis.erase(e_.fis.begin());
    return *this;
  }
  CatalogEntry done() { return std::move(e_); }

 private:
  CatalogEntry e_;
};

using Maker = std::function<CatalogEntry(const PotentialSpec&)>;

struct Registration {
  std::string name;
  Maker make;
};

// ---- class I -----------------------------------------------------------------

CatalogEntry make_v1(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double c = p.real("c"), b = p.real("b");
  return Builder("V1", "Class I integrable: V1", spec, Classification::Integrable)
      .fi(lfi("L21", {term([b](const Jet2&, const Jet2&) { return SC{{}, {}, {}, Jet2(1.0), Jet2(b), {}}; }),
                      term([](const Jet2&, const Jet2&) { return SC{{}, {}, {}, {}, {}, Jet2(1.0)}; },
                           TimeFactor::power(1), c)}))
      .fi(lfi("L22",
              {term([b](const Jet2&, const Jet2&) { return SC{{}, {}, {}, Jet2(1.0), Jet2(b), {}}; },
                    TimeFactor::power(1)),
               term([b](const Jet2& x, const Jet2& y) { return SC{{}, {}, {}, {}, {}, -(x + b * y)}; }),
               term([](const Jet2&, const Jet2&) { return SC{{}, {}, {}, {}, {}, Jet2(1.0)}; },
                    TimeFactor::power(2), 0.5 * c)}))
      .fi(qfi("Q21",
              [b, c](const Jet2& x, const Jet2& y) {
                return SC{Jet2(1.0), Jet2(b), Jet2(b * b), {}, {}, 2.0 * c * (x + b * y)};
              }))
      .bracket("H", "L21", c)
      .involution({"Q21"})
      .bracket("H", "L22", 0.0, {{1.0, "L21"}})
      .bracket("L21", "L22", 1.0 + b * b)
      .bracket("Q21", "L21", 2.0 * c * (1.0 + b * b))
      .bracket("Q21", "L22", 0.0, {{2.0 * (1.0 + b * b), "L21"}})
      .pair("Q21")
      .ics(0.5, 0.3, 0.2, -0.1)
      .done();
}

CatalogEntry make_v1a(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double c = p.real("c"), l = p.real("lambda");
  auto q11 = axis_energy("Q11", true, [c](const Jet2& x) { return c * x; });
  return Builder("V1a", "Class I superintegrable: V1a", spec, Classification::Superintegrable)
      .fi(drift_lfi("L11", true, c))
      .fi(drift_lfi("L12", false, l))
      .fi(q11)
      .fi(axis_energy("Q12", false, [l](const Jet2& y) { return l * y; }))
      .fi(lfi("I2", {term([c, l](const Jet2&, const Jet2&) { return SC{{}, {}, {}, Jet2(l), Jet2(-c), {}}; })}))
      .fi(q11.renamed("I3"))
      .bracket("Q11", "Q12", 0.0)
      .bracket("L11", "Q11", -c)
      .involution({"I2", "I3"})
      .bracket("I2", "I3", -c * l)
      .independent({"H", "I2", "I3"})
      .ics(0.5, 0.5, 0.3, 0.2)
      .done();
}

CatalogEntry make_v1b(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double c = p.real("c"), l = p.real("lambda");
  return Builder("V1b", "Class I superintegrable: V1b", spec, Classification::Superintegrable)
      .fi(drift_lfi("L11", true, c))
      .fi(lfi("L22", {term([](const Jet2&, const Jet2&) { return SC{{}, {}, {}, Jet2(1.0), {}, {}}; },
                           TimeFactor::power(1)),
                      term([](const Jet2& x, const Jet2&) { return SC{{}, {}, {}, {}, {}, -x}; }),
                      term([](const Jet2&, const Jet2&) { return SC{{}, {}, {}, {}, {}, Jet2(1.0)}; },
                           TimeFactor::power(2), 0.5 * c)}))
      .fi(exp_lfi("L23", false, l))
      .fi(axis_energy("Qe1", true, [c](const Jet2& x) { return c * x; }))
      .fi(axis_energy("Qe2", false, [l](const Jet2& y) { return -0.5 * l * l * y * y; }))
      .energy_rate("L23", l)
      .bracket("Qe2", "L23", 0.0, {{l, "L23"}})
      .bracket("Qe1", "L23", 0.0)
      .bracket("L11", "L22", 1.0)
      .bracket("H", "L22", 0.0, {{1.0, "L11"}})
      .involution({"Qe1", "Qe2"})
      .independent({"Qe1", "Qe2", "L23"})
      .ics(0.5, 0.5, 0.3, 0.2)
      .done();
}

CatalogEntry make_v2(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double c = p.real("c");
  const Fn1 F = p.function("F");
  return Builder("V2", "Class I integrable: V2", spec, Classification::Integrable)
      .fi(drift_lfi("L31", false, c))
      .fi(axis_energy("Q31", true, [F](const Jet2& x) { return F(x); }))
      .fi(axis_energy("Q32", false, [c](const Jet2& y) { return c * y; }))
      .bracket("H", "L31", c)
      .involution({"Q31", "Q32"})
      .bracket("Q31", "Q32", 0.0)
      .pair("Q31")
      .ics(0.5, 0.5, 0.3, 0.2)
      .closed_form()
      .done();
}

CatalogEntry make_v2a(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double c = p.real("c"), l = p.real("lambda");
  return Builder("V2a", "Class I superintegrable: V2a", spec, Classification::Superintegrable)
      .fi(drift_lfi("L31", false, c))
      .fi(axis_energy("Q31a", true, [l](const Jet2& x) { return -0.5 * l * l * x * x; }))
      .fi(axis_energy("Q32", false, [c](const Jet2& y) { return c * y; }))
      .fi(exp_lfi("L32", true, l))
      .bracket("H", "L31", c)
      .energy_rate("L32", l)
      .involution({"Q31a", "Q32"})
      .independent({"Q31a", "Q32", "L32"})
      .ics(0.5, 0.5, 0.3, 0.2)
      .done();
}

FirstIntegral rotation_lfi(std::string name, double b1, double b2, double c) {
  std::vector<TimeTerm> terms{term([b1, b2](const Jet2& x, const Jet2& y) {
    SC s;
    s.kx = y + b1;
    s.ky = b2 - x;
    return s;
  })};
  if (c != 0.0)
    terms.push_back(term([](const Jet2&, const Jet2&) { return SC{{}, {}, {}, {}, {}, Jet2(1.0)}; },
                         TimeFactor::power(1), c));
  return lfi(std::move(name), std::move(terms));
}

CatalogEntry make_v3(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double c = p.real("c"), b1 = p.real("b1"), b2 = p.real("b2");
  if (c != 0.0) {
    // V carries a multivalued angle, so only L51 survives as a global integral
    return Builder("V3", "Class I: V3 (c != 0)", spec, Classification::LFIOnly)
        .drop_energy()
        .fi(rotation_lfi("L51", b1, b2, c))
        .ics(0.8, 0.4, 0.1, 0.5)
        .done();
  }
  return Builder("V3", "Class I integrable: V3 (c = 0)", spec, Classification::Integrable)
      .fi(rotation_lfi("L51", b1, b2, 0.0))
      .involution({"L51"})
      .pair("L51")
      .ics(0.8, 0.4, 0.1, 0.5)
      .done();
}

CatalogEntry make_v3a(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double l = p.real("lambda"), b1 = p.real("b1"), b2 = p.real("b2");
  return Builder("V3a", "Class I superintegrable: V3a", spec, Classification::Superintegrable)
      .fi(rotation_lfi("L41", b1, b2, 0.0))
      .fi(axis_energy("Q41", true, [=](const Jet2& x) { return 0.5 * l * x * x - l * b2 * x; }))
      .fi(axis_energy("Q42", false, [=](const Jet2& y) { return 0.5 * l * y * y + l * b1 * y; }))
      .fi(qfi("Q43",
              [=](const Jet2& x, const Jet2& y) {
                return SC{{}, Jet2(0.5), {}, {}, {}, l * (x * y + b1 * x - b2 * y)};
              }))
      .involution({"L41", "Q41"})
      .bracket("Q41", "Q42", 0.0)
      .bracket("L41", "Q41", l * b1 * b2, {{-1.0, "Q43"}})
      .bracket("L41", "Q42", -l * b1 * b2, {{1.0, "Q43"}})
      .bracket("L41", "Q43", l * (b2 * b2 - b1 * b1), {{2.0, "Q41"}, {-2.0, "Q42"}})
      .bracket("Q41", "Q43", 0.0, {{-l, "L41"}})
      .bracket("Q43", "Q42", 0.0, {{-l, "L41"}})
      .independent({"H", "L41", "Q41"})
      .ics(0.8, 0.4, 0.1, 0.5)
      .done();
}

CatalogEntry make_v3b(const PotentialSpec& spec) {
  const double k = spec.params().real("k");
  const double l = -k * k;
  return Builder("V3b", "Class I superintegrable: V3b", spec, Classification::Superintegrable)
      .fi(rotation_lfi("L41b", 0.0, 0.0, 0.0))
      .fi(axis_energy("Q41b", true, [l](const Jet2& x) { return 0.5 * l * x * x; }))
      .fi(axis_energy("Q42b", false, [l](const Jet2& y) { return 0.5 * l * y * y; }))
      .fi(qfi("Q43b", [l](const Jet2& x, const Jet2& y) { return SC{{}, Jet2(0.5), {}, {}, {}, l * x * y}; }))
      .fi(exp_lfi("L42+", true, k))
      .fi(exp_lfi("L42-", true, -k))
      .fi(exp_lfi("L43+", false, k))
      .fi(exp_lfi("L43-", false, -k))
      .involution({"L41b", "Q41b", "Q42b", "Q43b"})
      .bracket("Q41b", "Q42b", 0.0)
      .bracket("L41b", "Q41b", 0.0, {{-1.0, "Q43b"}})
      .bracket("L41b", "Q42b", 0.0, {{1.0, "Q43b"}})
      .bracket("L41b", "Q43b", 0.0, {{2.0, "Q41b"}, {-2.0, "Q42b"}})
      .bracket("Q41b", "Q43b", 0.0, {{-l, "L41b"}})
      .bracket("Q43b", "Q42b", 0.0, {{-l, "L41b"}})
      .energy_rate("L42+", k)
      .energy_rate("L42-", -k)
      .energy_rate("L43+", k)
      .energy_rate("L43-", -k)
      .bracket("L42+", "L42-", -2.0 * k)
      .bracket("L43+", "L43-", -2.0 * k)
      .bracket("L42+", "L43+", 0.0)
      .independent({"H", "L41b", "Q41b"})
      .ics(0.1, 0.05, -0.05, 0.02)
      .closed_form()
      .done();
}

// ---- class II integrable -----------------------------------------------------

CatalogEntry make_v21(const PotentialSpec& spec) {
  const Fn1 F1 = spec.params().function("F1");
  return Builder("V21", "Class II integrable: case 1 (V21)", spec, Classification::Integrable)
      .fi(qfi("I11",
              [F1](const Jet2& x, const Jet2& y) {
                SC c = angular_squared(x, y);
                c.k = 2.0 * F1(y / x);
                return c;
              }))
      .involution({"I11"})
      .pair("I11")
      .ics(1.0, 0.0, 0.0, 0.8)
      .done();
}

CatalogEntry make_v21a(const PotentialSpec& spec) {
  const double k = spec.params().real("k"), l = spec.params().real("l");
  return Builder("V21a", "Class II integrable: case 1 (V21a)", spec, Classification::Integrable)
      .fi(qfi("I11a",
              [k, l](const Jet2& x, const Jet2& y) {
                SC c = angular_squared(x, y);
                if (k != 0.0 && l != 1.0) c.k = 2.0 * k * (1.0 - l) * y * y / (x * x + l * y * y);
                return c;
              }))
      .involution({"I11a"})
      .pair("I11a")
      .ics(1.0, 0.5, 0.2, 0.3)
      .done();
}

CatalogEntry make_v22(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double A = p.real("A");
  const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
  const double sa = std::sqrt(A);
  return Builder("V22", "Class II integrable: case 2 (V22)", spec, Classification::Integrable)
      .fi(qfi("I21",
              [=](const Jet2& x, const Jet2& y) {
                SC c = angular_squared(x, y);
                c.kxx += A;
                const Jet2 q = x * x + y * y + A;
                const Jet2 u2 = q + sqrt(q * q - 4.0 * A * x * x);
                const Jet2 u = sqrt(u2);
                const Jet2 v = 2.0 * sa * abs(x) / u;
                const Jet2 v2 = v * v;
                c.k = (v2 * F1(u) - u2 * F2(v)) / (u2 - v2);
                return c;
              }))
      .involution({"I21"})
      .pair("I21")
      .ics(0.3, 1.2, 0.2, 0.0)
      .done();
}

// ((r + s) F2(r - s) - (r - s) F1(r + s)) / r with s the distinguished coordinate
Jet2 v24_scalar(const Fn1& F1, const Fn1& F2, const Jet2& other, const Jet2& s) {
  const auto [plus, minus] = r_plus_minus(other, s);
  return (plus * F2(minus) - minus * F1(plus)) / sqrt(other * other + s * s);
}

CatalogEntry make_v24(const PotentialSpec& spec) {
  const Fn1 F1 = spec.params().function("F1"), F2 = spec.params().function("F2");
  return Builder("V24", "Class II integrable: case 4a (V24)", spec, Classification::Integrable)
      .fi(qfi("I41",
              [=](const Jet2& x, const Jet2& y) {
                SC c = xdot_angular(x, y);
                c.k = v24_scalar(F1, F2, x, y);
                return c;
              }))
      .involution({"I41"})
      .pair("I41")
      .ics(1.0, 0.5, 0.0, 0.3)
      .done();
}

CatalogEntry make_v24b(const PotentialSpec& spec) {
  const Fn1 F1 = spec.params().function("F1"), F2 = spec.params().function("F2");
  return Builder("V24b", "Class II integrable: case 4b (V24b)", spec, Classification::Integrable)
      .fi(qfi("I41b",
              [=](const Jet2& x, const Jet2& y) {
                SC c = ydot_angular(x, y);
                c.k = v24_scalar(F1, F2, y, x);
                return c;
              }))
      .involution({"I41b"})
      .pair("I41b")
      .ics(0.5, 1.0, 0.3, 0.0)
      .done();
}

CatalogEntry make_v27(const PotentialSpec& spec) {
  const Fn1 F1 = spec.params().function("F1"), F2 = spec.params().function("F2");
  return Builder("V27", "Class II integrable: case 7 (V27)", spec, Classification::Integrable)
      .fi(axis_energy("I71a", true, [F1](const Jet2& x) { return F1(x); }))
      .fi(axis_energy("I71b", false, [F2](const Jet2& y) { return F2(y); }))
      .involution({"I71a", "I71b"})
      .bracket("I71a", "I71b", 0.0)
      .pair("I71a")
      .ics(0.5, 0.7, 0.3, -0.2)
      .closed_form()
      .done();
}

CatalogEntry make_v28(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double A = p.real("A"), B = p.real("B"), C = p.real("C");
  const Fn1 F1 = p.function("F1"), F2 = p.function("F2");
  const double b0 = (A - B) / (2.0 * C);
  const double s = std::sqrt(b0 * b0 + 1.0);
  return Builder("V28", "Class II integrable: case 8 (V28)", spec, Classification::Integrable)
      .fi(qfi("I81",
              [=](const Jet2& x, const Jet2& y) {
                const Jet2 f1 = F1(y + (b0 + s) * x), f2 = F2(y + (b0 - s) * x);
                return SC{Jet2(A), Jet2(C), Jet2(B), {}, {}, (A + B) * (f1 + f2) + 2.0 * C * s * (f1 - f2)};
              }))
      .involution({"I81"})
      .pair("I81")
      .ics(0.4, 0.3, 0.2, 0.1)
      .done();
}

CatalogEntry make_v28_b0(const PotentialSpec& spec) {
  const Fn1 F1 = spec.params().function("F1"), F2 = spec.params().function("F2");
  return Builder("V28_b0", "Class II integrable: case 8 (V28, b0 = 0)", spec, Classification::Integrable)
      .fi(qfi("I82",
              [=](const Jet2& x, const Jet2& y) {
                return SC{{}, Jet2(0.5), {}, {}, {}, F1(y + x) - F2(y - x)};
              }))
      .involution({"I82"})
      .pair("I82")
      .ics(0.4, 0.3, 0.2, 0.1)
      .done();
}

// ---- class II superintegrable ------------------------------------------------

CatalogEntry make_vs1(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double k = p.real("k"), b = p.real("b"), c = p.real("c");
  auto inv = [](double a, const Jet2& u) { return a != 0.0 ? a / (u * u) : Jet2(0.0); };
  return Builder("Vs1", "Class II superintegrable: S1", spec, Classification::Superintegrable)
      .fi(qfi("Is1a",
              [=](const Jet2& x, const Jet2& y) {
                SC s = angular_squared(x, y);
                if (b != 0.0) s.k += 2.0 * b * y * y / (x * x);
                if (c != 0.0) s.k += 2.0 * c * x * x / (y * y);
                return s;
              }))
      .fi(axis_energy("Is1b", true, [=](const Jet2& x) { return 0.5 * k * x * x + inv(b, x); }))
      .fi(axis_energy("Is1c", false, [=](const Jet2& y) { return 0.5 * k * y * y + inv(c, y); }))
      .involution({"Is1a", "Is1b", "Is1c"})
      .bracket("Is1b", "Is1c", 0.0)
      .independent({"H", "Is1a", "Is1b"})
      .ics(1.0, 1.0, 0.2, -0.3)
      .done();
}

CatalogEntry make_vs2(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double k1 = p.real("k1"), k2 = p.real("k2"), k3 = p.real("k3");
  return Builder("Vs2", "Class II superintegrable: S2", spec, Classification::Superintegrable)
      .fi(qfi("Is2a",
              [=](const Jet2& x, const Jet2& y) {
                SC s = xdot_angular(x, y);
                s.k = -k1 * y * x * x - 0.5 * k3 * x * x;
                if (k2 != 0.0) s.k += 2.0 * k2 * y / (x * x);
                return s;
              }))
      .fi(axis_energy("Is2b", true,
                      [=](const Jet2& x) { return 0.5 * k1 * x * x + (k2 != 0.0 ? k2 / (x * x) : Jet2(0.0)); }))
      .fi(axis_energy("Is2c", false, [=](const Jet2& y) { return 2.0 * k1 * y * y + k3 * y; }))
      .involution({"Is2a", "Is2b", "Is2c"})
      .bracket("Is2b", "Is2c", 0.0)
      .independent({"H", "Is2a", "Is2b"})
      .ics(1.0, 0.5, 0.1, 0.2)
      .done();
}

CatalogEntry make_vs3(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double k1 = p.real("k1"), k2 = p.real("k2"), k3 = p.real("k3");
  return Builder("Vs3", "Class II superintegrable: S3", spec, Classification::Superintegrable)
      .fi(qfi("Is3a",
              [=](const Jet2& x, const Jet2& y) {
                SC s = angular_squared(x, y);
                const Jet2 r = sqrt(x * x + y * y);
                if (k1 != 0.0 || k3 != 0.0) s.k = (2.0 * k1 * y * y + 2.0 * k3 * r * y) / (x * x);
                return s;
              }))
      .fi(qfi("Is3b",
              [=](const Jet2& x, const Jet2& y) {
                SC s = xdot_angular(x, y);
                const Jet2 r = sqrt(x * x + y * y);
                s.k = k2 * y / r;
                if (k1 != 0.0 || k3 != 0.0)
                  s.k += (2.0 * k1 * y + k3 * (x * x + 2.0 * y * y) / r) / (x * x);
                return s;
              }))
      .involution({"Is3a", "Is3b"})
      .independent({"H", "Is3a", "Is3b"})
      .ics(1.2, 0.5, 0.0, 0.5)
      .done();
}

CatalogEntry make_vs4(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double k1 = p.real("k1"), k2 = p.real("k2"), k3 = p.real("k3");
  // Is4b has no closed-form scalar part: it is half the quadratic integral of
  // the Killing tensor [[0, -y], [-y, 2x]], whose G is a line integral.
  KTParams kt;
  kt.beta = 1.0;
  return Builder("Vs4", "Class II superintegrable: S4", spec, Classification::Superintegrable)
      .fi(qfi("Is4a",
              [=](const Jet2& x, const Jet2& y) {
                SC s = xdot_angular(x, y);
                const auto [plus, minus] = r_plus_minus(x, y);
                const Jet2 r = sqrt(x * x + y * y);
                Jet2 num = k1 * y;
                if (k3 != 0.0) num += k3 * plus * sqrt(minus);
                if (k2 != 0.0) num -= k2 * minus * sqrt(plus);
                s.k = num / r;
                return s;
              }))
      .fi(reconstructed_qfi("Is4b", kt, spec).scaled(0.5))
      .involution({"Is4a", "Is4b"})
      .independent({"H", "Is4a", "Is4b"})
      .ics(1.19, 0.27, 0.0, 0.3)
      .done();
}

CatalogEntry make_v271(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double k1 = p.real("k1"), k2 = p.real("k2"), c1 = p.real("c1"), c2 = p.real("c2");
  auto inv = [](double k, double c) {
    return [k, c](const Jet2& q) { return k != 0.0 ? k / ((q + c) * (q + c)) : Jet2(0.0); };
  };
  return Builder("V271", "Class II superintegrable: case 7a (V271)", spec, Classification::Superintegrable)
      .fi(axis_energy("I71a", true, inv(k1, c1)))
      .fi(axis_energy("I71b", false, inv(k2, c2)))
      .fi(inverse_square_dilation("I72a", false, k2, c2))
      .fi(inverse_square_dilation("I72b", true, k1, c1))
      .involution({"I71a", "I71b"})
      .bracket("I71a", "I71b", 0.0)
      .bracket("I71a", "I72a", 0.0)
      .bracket("I71b", "I72b", 0.0)
      .independent({"I71a", "I71b", "I72a"})
      .ics(1.0, 1.0, 0.3, 0.1)
      .done();
}

CatalogEntry make_v272(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const Fn1 F1 = p.function("F1");
  const double k2 = p.real("k2"), c2 = p.real("c2");
  return Builder("V272", "Class II superintegrable: case 7b (V272)", spec, Classification::Superintegrable)
      .fi(axis_energy("I71a", true, [F1](const Jet2& x) { return F1(x); }))
      .fi(axis_energy("I71b", false,
                      [=](const Jet2& y) { return k2 != 0.0 ? k2 / ((y + c2) * (y + c2)) : Jet2(0.0); }))
      .fi(inverse_square_dilation("I72a", false, k2, c2))
      .involution({"I71a", "I71b"})
      .bracket("I71a", "I71b", 0.0)
      .bracket("I71a", "I72a", 0.0)
      .independent({"I71a", "I71b", "I72a"})
      .ics(0.5, 1.0, 0.2, 0.1)
      .done();
}

CatalogEntry make_v273(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const Fn1 F2 = p.function("F2");
  const double k1 = p.real("k1"), c1 = p.real("c1");
  return Builder("V273", "Class II superintegrable: case 7c (V273)", spec, Classification::Superintegrable)
      .fi(axis_energy("I71a", true,
                      [=](const Jet2& x) { return k1 != 0.0 ? k1 / ((x + c1) * (x + c1)) : Jet2(0.0); }))
      .fi(axis_energy("I71b", false, [F2](const Jet2& y) { return F2(y); }))
      .fi(inverse_square_dilation("I72b", true, k1, c1))
      .involution({"I71a", "I71b"})
      .bracket("I71a", "I71b", 0.0)
      .bracket("I71b", "I72b", 0.0)
      .independent({"I71a", "I71b", "I72b"})
      .ics(1.0, 0.5, 0.1, 0.2)
      .done();
}

CatalogEntry make_v274(const PotentialSpec& spec) {
  const auto& p = spec.params();
  const double l = p.real("lambda"), c1 = p.real("c1"), c2 = p.real("c2");
  const double k1 = p.real("k1"), k2 = p.real("k2");
  auto part = [l](double k, double c) {
    return [=](const Jet2& q) {
      Jet2 v = -l * l / 8.0 * q * q - l * l / 4.0 * c * q;
      if (k != 0.0) v -= k / ((q + c) * (q + c));
      return v;
    };
  };
  return Builder("V274", "Class II superintegrable: case 7d (V274)", spec, Classification::Superintegrable)
      .fi(axis_energy("I71a", true, part(k1, c1)))
      .fi(axis_energy("I71b", false, part(k2, c2)))
      .fi(exp_inverse_square("I73a", true, l, k1, c1))
      .fi(exp_inverse_square("I73b", false, l, k2, c2))
      .involution({"I71a", "I71b"})
      .bracket("I71a", "I71b", 0.0)
      .energy_rate("I73a", l)
      .energy_rate("I73b", l)
      .bracket("I71a", "I73b", 0.0)
      .independent({"I71a", "I71b", "I73a"})
      .ics(1.0, 1.0, 0.1, 0.1)
      .done();
}

const std::vector<Registration>& registry() {
  static const std::vector<Registration> r{
      {"V1", make_v1},       {"V1a", make_v1a},       {"V1b", make_v1b},   {"V2", make_v2},
      {"V2a", make_v2a},     {"V3", make_v3},         {"V3a", make_v3a},   {"V3b", make_v3b},
      {"V21", make_v21},     {"V21a", make_v21a},     {"V22", make_v22},   {"V24", make_v24},
      {"V24b", make_v24b},   {"V27", make_v27},       {"V28", make_v28},   {"V28_b0", make_v28_b0},
      {"Vs1", make_vs1},     {"Vs2", make_vs2},       {"Vs3", make_vs3},   {"Vs4", make_vs4},
      {"V271", make_v271},   {"V272", make_v272},     {"V273", make_v273}, {"V274", make_v274},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& entry_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& r : registry()) out.push_back(r.name);
    return out;
  }();
  return names;
}

CatalogEntry instantiate(const std::string& name, const nlohmann::json& params) {
  auto it = std::find_if(registry().begin(), registry().end(), [&](const auto& r) { return r.name == name; });
  if (it == registry().end()) throw UnknownName("unknown catalog entry '" + name + "'");
  return it->make(make_potential(name, params));
}

CatalogEntry instantiate(const std::string& name) { return instantiate(name, nlohmann::json()); }

std::vector<EntryInfo> list_entries() {
  std::vector<EntryInfo> out;
  for (const auto& name : entry_names()) {
    const CatalogEntry e = instantiate(name);
    const auto& fam = potential_family(name);
    EntryInfo info{name, e.classification, e.reference, fam.formula, fam.schema, {}};
    for (const auto& f : e.fis) info.fi_names.push_back(f.name());
    out.push_back(std::move(info));
  }
  return out;
}

double identity_residual(const CatalogEntry& entry, const BracketIdentity& id, const State& s) {
  double expected = id.constant;
  for (const auto& [c, name] : id.terms) expected += c * evaluate_fi(entry.fi(name), s);
  return poisson_bracket(entry.fi(id.f), entry.fi(id.g), s) - expected;
}

double relative_drift(const FirstIntegral& fi, const Trajectory& traj) {
  if (traj.states.empty()) return 0.0;
  const double i0 = evaluate_fi(fi, traj.states.front());
  double worst = 0.0, scale = 1.0;
  for (const auto& s : traj.states) {
    worst = std::max(worst, std::abs(evaluate_fi(fi, s) - i0));
    scale = std::max(scale, term_magnitude(fi, s));
  }
  return worst / scale;
}

nlohmann::json catalog_manifest() {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& info : list_entries()) {
    nlohmann::json schema = nlohmann::json::array();
    for (const auto& p : info.schema) {
      nlohmann::json pj{{"name", p.name}};
      if (p.kind == ParamInfo::Kind::Real) {
        pj["kind"] = "real";
        pj["default"] = p.default_real;
      } else {
        pj["kind"] = "function";
        pj["default"] = nlohmann::json::parse(p.default_function);
      }
      if (!p.constraint.empty()) pj["constraint"] = p.constraint;
      schema.push_back(pj);
    }
    entries.push_back({{"name", info.name},
                       {"class", to_string(info.classification)},
                       {"reference", info.reference},
                       {"formula", info.formula},
                       {"parameters", schema},
                       {"first_integrals", info.fi_names}});
  }
  return {{"schema_version", 1}, {"count", entries.size()}, {"entries", entries}};
}

}  // namespace qfi
