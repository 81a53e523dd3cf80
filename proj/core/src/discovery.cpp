#include "qfi/discovery.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <nlohmann/json.hpp>

#include "qfi/potentials.hpp"

namespace qfi {

// ---------------------------------------------------------------------------
// residuals, written exactly as the constraint PDEs read

KTMatrix kt_matrix(const KTParams& p, const Jet2& x, const Jet2& y) {
  return {p.gamma * y * y + 2.0 * p.alpha * y + p.A,
          -p.gamma * x * y - p.alpha * x - p.beta * y + p.C,
          p.gamma * x * x + 2.0 * p.beta * x + p.B};
}

namespace {

double bd_from_jet(const KTParams& p, const Jet2& v, double x, double y) {
  return (p.gamma * x * y + p.alpha * x + p.beta * y - p.C) * (v.hxx - v.hyy) +
         (p.gamma * (y * y - x * x) - 2.0 * p.beta * x + 2.0 * p.alpha * y + p.A - p.B) * v.hxy -
         3.0 * (p.gamma * x + p.beta) * v.gy + 3.0 * (p.gamma * y + p.alpha) * v.gx;
}

double lfi_from_jet(const KVParams& p, const Jet2& v, double x, double y) {
  return (p.b1 + p.b3 * y) * v.gx + (p.b2 - p.b3 * x) * v.gy - p.s;
}

std::array<double, 3> integral3_from_jet(const LVecParams& p, const Jet2& v, double x, double y) {
  const double lx = -2.0 * p.beta * y * y + 2.0 * p.alpha * x * y + p.A * x + p.a1 * y + p.a4;
  const double ly = -2.0 * p.alpha * x * x + 2.0 * p.beta * x * y + p.a3 * x + p.B * y + p.a2;
  const double l2 = p.lambda * p.lambda;
  const double c = 0.5 * (p.a1 + p.a3);
  const double r1 = lx * v.hxx + ly * v.hxy + (-6.0 * p.alpha * x + 2.0 * p.a3 + p.a1) * v.gy +
                    3.0 * (2.0 * p.alpha * y + p.A) * v.gx + l2 * lx;
  const double r2 = ly * v.hyy + lx * v.hxy + 3.0 * (2.0 * p.beta * x + p.B) * v.gy +
                    (-6.0 * p.beta * y + 2.0 * p.a1 + p.a3) * v.gx + l2 * ly;
  const double r3 = (p.alpha * x + p.beta * y - c) * (v.hxx - v.hyy) +
                    (-2.0 * p.beta * x + 2.0 * p.alpha * y + p.A - p.B) * v.hxy - 3.0 * p.beta * v.gy +
                    3.0 * p.alpha * v.gx + 0.5 * l2 * (6.0 * p.alpha * x - 6.0 * p.beta * y + p.a1 - p.a3);
  return {r1, r2, r3};
}

}  // namespace

double bd_residual(const KTParams& p, const PotentialSpec& spec, double x, double y) {
  return bd_from_jet(p, spec.jet(x, y), x, y);
}

double lfi_residual(const KVParams& p, const PotentialSpec& spec, double x, double y) {
  return lfi_from_jet(p, spec.jet(x, y), x, y);
}

std::array<double, 3> integral3_residuals(const LVecParams& p, const PotentialSpec& spec, double x,
                                          double y) {
  return integral3_from_jet(p, spec.jet(x, y), x, y);
}

ResidualOperator bd_operator() {
  return {"bertrand_darboux", 6, 1, [](const double* p, const Jet2& v, double x, double y, double* out) {
            out[0] = bd_from_jet(KTParams::from_array(p), v, x, y);
          }};
}

ResidualOperator lfi_operator() {
  return {"killing_vector", 4, 1, [](const double* p, const Jet2& v, double x, double y, double* out) {
            out[0] = lfi_from_jet(KVParams::from_array(p), v, x, y);
          }};
}

ResidualOperator integral3_operator(double lambda) {
  return {"integral3", 8, 3, [lambda](const double* p, const Jet2& v, double x, double y, double* out) {
            const auto r = integral3_from_jet(LVecParams::from_coefficients(p, lambda), v, x, y);
            std::copy(r.begin(), r.end(), out);
          }};
}

// ---------------------------------------------------------------------------
// collocation and nullspace

double NullspaceResult::tolerance() const { return 1e-8 * (1.0 + derivative_scale); }

namespace {

struct Collocation {
  Eigen::MatrixXd rows;   // raw residual coefficients
  double derivative_scale = 0.0;
};

double derivative_size(const Jet2& v) {
  return std::max({std::abs(v.gx), std::abs(v.gy), std::abs(v.hxx), std::abs(v.hxy), std::abs(v.hyy)});
}

Collocation collocate(const ResidualOperator& op, const PotentialSpec& spec, const std::vector<Vec2>& pts) {
  const int rpp = op.rows_per_point;
  Collocation c;
  c.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pts.size()) * rpp, op.dim);
  std::vector<double> scale(pts.size(), 0.0);
  parallel_for(pts.size(), [&](std::size_t i) {
    const Jet2 v = spec.jet(pts[i][0], pts[i][1]);
    scale[i] = derivative_size(v);
    std::vector<double> e(op.dim, 0.0), out(rpp, 0.0);
    for (int j = 0; j < op.dim; ++j) {
      e[j] = 1.0;
      op.eval(e.data(), v, pts[i][0], pts[i][1], out.data());
      e[j] = 0.0;
      for (int r = 0; r < rpp; ++r) c.rows(static_cast<Eigen::Index>(i) * rpp + r, j) = out[r];
    }
  });
  for (double s : scale) c.derivative_scale = std::max(c.derivative_scale, s);
  return c;
}

Eigen::MatrixXd normalized_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (n > 0.0) out.row(i) /= n;
  }
  return out;
}

// Largest-magnitude component made positive, for reproducible output.
void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0.0) v = -v;
}

struct Extracted {
  Eigen::MatrixXd basis;  // dim x k
  std::vector<double> singular_values;
};

Extracted extract_nullspace(const Eigen::MatrixXd& raw, double tol) {
  const Eigen::MatrixXd m = normalized_rows(raw);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const Eigen::Index dim = m.cols();
  const double smax = sv.size() ? sv(0) : 0.0;
  Extracted out;
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double s = i < sv.size() ? sv(i) : 0.0;
    out.singular_values.push_back(smax > 0.0 ? s / smax : 0.0);
    if (smax == 0.0 || s <= tol * smax) null_cols.push_back(i);
  }
  out.basis.resize(dim, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t k = 0; k < null_cols.size(); ++k) {
    Eigen::VectorXd v = svd.matrixV().col(null_cols[k]);
    fix_sign(v);
    out.basis.col(static_cast<Eigen::Index>(k)) = v;
  }
  return out;
}

std::vector<std::vector<double>> to_vectors(const Eigen::MatrixXd& basis) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index k = 0; k < basis.cols(); ++k)
    out.emplace_back(basis.col(k).data(), basis.col(k).data() + basis.rows());
  return out;
}

std::vector<double> held_out_norms(const Eigen::MatrixXd& raw_holdout, const Eigen::MatrixXd& basis) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < basis.cols(); ++k)
    out.push_back(basis.cols() ? (raw_holdout * basis.col(k)).cwiseAbs().maxCoeff() : 0.0);
  return out;
}

void check_points(const ResidualOperator& op, int n_points) {
  if (n_points < 3 * op.dim)
    throw InsufficientPoints(op.name + ": need at least " + std::to_string(3 * op.dim) +
                             " collocation points, got " + std::to_string(n_points));
}

}  // namespace

NullspaceResult nullspace_solve(const ResidualOperator& op, const PotentialSpec& spec,
                                const NullspaceOptions& opts) {
  const int n = opts.n_points > 0 ? opts.n_points : 3 * op.dim;
  check_points(op, n);
  const int n_hold = std::max(1, static_cast<int>(std::ceil(opts.holdout_factor * n)));
  AnnulusSampler sampler(spec, opts.annulus);
  const auto train = sampler.take(static_cast<std::size_t>(n));
  const auto hold = sampler.take(static_cast<std::size_t>(n_hold));
  const Collocation ct = collocate(op, spec, train);
  const Collocation ch = collocate(op, spec, hold);

  const Extracted ex = extract_nullspace(ct.rows, opts.tol);
  NullspaceResult r;
  r.op = op.name;
  r.dim = op.dim;
  r.n_points = n;
  r.n_holdout = n_hold;
  r.basis = to_vectors(ex.basis);
  r.singular_values = ex.singular_values;
  r.derivative_scale = std::max(ct.derivative_scale, ch.derivative_scale);
  r.residual_norms = held_out_norms(ch.rows, ex.basis);
  const double tol = opts.validation_tol * (1.0 + r.derivative_scale);
  for (std::size_t k = 0; k < r.residual_norms.size(); ++k)
    if (!(r.residual_norms[k] <= tol))
      throw ValidationFailed(op.name + ": nullspace vector " + std::to_string(k) +
                                 " fails on held-out points (residual " +
                                 std::to_string(r.residual_norms[k]) + ")",
                             r);
  return r;
}

// ---------------------------------------------------------------------------
// scalar reconstruction by line integration

namespace {

struct Node {
  double s, w;  // on [0, 1]
};

const std::vector<Node>& unit_gauss_nodes() {
  static const std::vector<Node> nodes = [] {
    using Rule = boost::math::quadrature::gauss<double, 64>;
    const auto& a = Rule::abscissa();
    const auto& w = Rule::weights();
    std::vector<Node> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
      out.push_back({0.5 * (1.0 + a[i]), 0.5 * w[i]});
      if (a[i] != 0.0) out.push_back({0.5 * (1.0 - a[i]), 0.5 * w[i]});
    }
    std::sort(out.begin(), out.end(), [](const Node& l, const Node& r) { return l.s < r.s; });
    return out;
  }();
  return nodes;
}

// f = 2 C grad V and its Jacobian df[i][j] = d f_i / d q_j at a point.
struct OneForm {
  double f[2];
  double df[2][2];
};

OneForm one_form(const KTParams& kt, const PotentialSpec& spec, double x, double y) {
  const KTMatrix c = kt_matrix(kt, Jet2::var_x(x), Jet2::var_y(y));
  const Jet2 v = spec.jet(x, y);
  const double vx = v.gx, vy = v.gy;
  const double dvx[2] = {v.hxx, v.hxy}, dvy[2] = {v.hxy, v.hyy};
  const double dxx[2] = {c.xx.gx, c.xx.gy}, dxy[2] = {c.xy.gx, c.xy.gy}, dyy[2] = {c.yy.gx, c.yy.gy};
  OneForm o;
  o.f[0] = 2.0 * (c.xx.v * vx + c.xy.v * vy);
  o.f[1] = 2.0 * (c.xy.v * vx + c.yy.v * vy);
  for (int j = 0; j < 2; ++j) {
    o.df[0][j] = 2.0 * (dxx[j] * vx + c.xx.v * dvx[j] + dxy[j] * vy + c.xy.v * dvy[j]);
    o.df[1][j] = 2.0 * (dxy[j] * vx + c.xy.v * dvx[j] + dyy[j] * vy + c.yy.v * dvy[j]);
  }
  return o;
}

double clearance_along(const PotentialSpec& spec, Vec2 a, Vec2 b) {
  const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  const int n = std::max(32, static_cast<int>(std::ceil(100.0 * len)));
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    d = std::min(d, spec.singular_distance(a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])));
  }
  return d;
}

struct SegmentIntegral {
  double value = 0.0;
  double grad[2] = {0.0, 0.0};  // derivative with respect to the end point
};

// Panels start at unit length and are halved until shorter than the local
// clearance from the singular set.
void integrate_panel(const KTParams& kt, const PotentialSpec& spec, Vec2 a, Vec2 b, double s0,
                     double s1, bool with_gradient, int depth, SegmentIntegral& acc) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len = std::hypot(dx, dy) * (s1 - s0);
  auto at = [&](double s) { return spec.singular_distance(a[0] + s * dx, a[1] + s * dy); };
  const double clear = std::min({at(s0), at(0.5 * (s0 + s1)), at(s1)});
  if (depth < 40 && len > clear) {
    const double mid = 0.5 * (s0 + s1);
    integrate_panel(kt, spec, a, b, s0, mid, with_gradient, depth + 1, acc);
    integrate_panel(kt, spec, a, b, mid, s1, with_gradient, depth + 1, acc);
    return;
  }
  for (const auto& node : unit_gauss_nodes()) {
    const double s = s0 + (s1 - s0) * node.s;
    const double w = (s1 - s0) * node.w;
    const OneForm o = one_form(kt, spec, a[0] + s * dx, a[1] + s * dy);
    acc.value += w * (o.f[0] * dx + o.f[1] * dy);
    if (with_gradient) {
      for (int j = 0; j < 2; ++j)
        acc.grad[j] += w * (s * (o.df[0][j] * dx + o.df[1][j] * dy) + o.f[j]);
    }
  }
}

SegmentIntegral integrate_segment(const KTParams& kt, const PotentialSpec& spec, Vec2 a, Vec2 b,
                                  bool with_gradient) {
  SegmentIntegral acc;
  const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  if (len == 0.0) {
    // degenerate segment: no area, and the end-point derivative is the form itself
    if (with_gradient) {
      const OneForm o = one_form(kt, spec, b[0], b[1]);
      acc.grad[0] = o.f[0];
      acc.grad[1] = o.f[1];
    }
    return acc;
  }
  const int panels = std::max(1, static_cast<int>(std::ceil(len)));
  for (int i = 0; i < panels; ++i)
    integrate_panel(kt, spec, a, b, static_cast<double>(i) / panels, static_cast<double>(i + 1) / panels,
                    with_gradient, 0, acc);
  return acc;
}

double required_clearance(const PotentialSpec& spec, Vec2 a, Vec2 b) {
  return std::min(0.05, 0.5 * std::min(spec.singular_distance(a[0], a[1]),
                                        spec.singular_distance(b[0], b[1])));
}

// Straight path, else the first clear two-segment detour. Empty if none.
std::vector<Vec2> find_path(const PotentialSpec& spec, Vec2 base, Vec2 target) {
  const double need = required_clearance(spec, base, target);
  if (!(need > 0.0)) return {};
  if (clearance_along(spec, base, target) >= need) return {base, target};
  const double dx = target[0] - base[0], dy = target[1] - base[1];
  const double len = std::hypot(dx, dy);
  const Vec2 mid{0.5 * (base[0] + target[0]), 0.5 * (base[1] + target[1])};
  const Vec2 normal{-dy / len, dx / len};
  for (double h : {0.5, -0.5, 1.0, -1.0, 2.0, -2.0}) {
    const Vec2 w{mid[0] + h * len * normal[0], mid[1] + h * len * normal[1]};
    if (spec.singular_distance(w[0], w[1]) < need) continue;
    if (clearance_along(spec, base, w) >= need && clearance_along(spec, w, target) >= need)
      return {base, w, target};
  }
  return {};
}

std::vector<Vec2> default_bases(const PotentialSpec& spec) {
  std::vector<Vec2> out;
  for (Vec2 d : {Vec2{1, 1}, Vec2{-1, 1}, Vec2{-1, -1}, Vec2{1, -1}})
    for (double scale : {1.0, 1.3, 0.7, 1.6}) {
      const Vec2 p{scale * d[0], scale * d[1]};
      if (spec.singular_distance(p[0], p[1]) >= 0.1) {
        out.push_back(p);
        break;
      }
    }
  return out;
}

}  // namespace

ScalarReconstruction::ScalarReconstruction(KTParams kt, PotentialSpec spec, std::optional<Vec2> base)
    : kt_(kt), spec_(std::move(spec)) {
  if (base) {
    if (spec_.is_singular((*base)[0], (*base)[1]))
      throw SingularPoint(spec_.name() + ": base point on the singular set", (*base)[0], (*base)[1]);
    bases_.push_back(*base);
  } else {
    bases_ = default_bases(spec_);
    if (bases_.empty()) throw PathThroughSingularity(spec_.name() + ": no admissible base point");
  }
}

Jet2 ScalarReconstruction::integrate(double x, double y, bool with_gradient) const {
  if (spec_.is_singular(x, y)) throw SingularPoint(spec_.name() + ": target on the singular set", x, y);
  for (const Vec2& base : bases_) {
    const auto path = find_path(spec_, base, {x, y});
    if (path.empty()) continue;
    Jet2 out;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const bool last = i + 2 == path.size();
      const SegmentIntegral seg = integrate_segment(kt_, spec_, path[i], path[i + 1], with_gradient && last);
      out.v += seg.value;
      if (last) {
        out.gx = seg.grad[0];
        out.gy = seg.grad[1];
      }
    }
    return out;
  }
  throw PathThroughSingularity(spec_.name() + ": no clear integration path to (" + std::to_string(x) +
                               ", " + std::to_string(y) + ")");
}

double ScalarReconstruction::value(double x, double y) const { return integrate(x, y, false).v; }

Jet2 ScalarReconstruction::jet(double x, double y) const {
  Jet2 out = integrate(x, y, true);
  const OneForm o = one_form(kt_, spec_, x, y);
  out.hxx = o.df[0][0];
  out.hxy = 0.5 * (o.df[0][1] + o.df[1][0]);
  out.hyy = o.df[1][1];
  return out;
}

double reconstruct_scalar(const KTParams& kt, const PotentialSpec& spec, Vec2 base, Vec2 target) {
  return ScalarReconstruction(kt, spec, base).value(target[0], target[1]);
}

double loop_integral(const KTParams& kt, const PotentialSpec& spec, const std::vector<Vec2>& polygon) {
  double total = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2 a = polygon[i], b = polygon[(i + 1) % polygon.size()];
    if (clearance_along(spec, a, b) <= kSingularEps)
      throw PathThroughSingularity(spec.name() + ": loop crosses the singular set");
    total += integrate_segment(kt, spec, a, b, false).value;
  }
  return total;
}

FirstIntegral reconstructed_qfi(std::string name, const KTParams& kt, const PotentialSpec& spec) {
  auto g = std::make_shared<ScalarReconstruction>(kt, spec);
  TimeTerm term;
  term.field = [kt, g](double x, double y) {
    const KTMatrix c = kt_matrix(kt, Jet2::var_x(x), Jet2::var_y(y));
    SpatialCoefficients s;
    s.kxx = c.xx;
    s.kxy = c.xy;
    s.kyy = c.yy;
    s.k = g->jet(x, y);
    return s;
  };
  return FirstIntegral(std::move(name), {term}, FIKind::QFI);
}

FirstIntegral reconstructed_lfi(std::string name, const KVParams& kv) {
  std::vector<TimeTerm> terms;
  TimeTerm lin;
  lin.field = jet_field([kv](const Jet2& x, const Jet2& y) {
    SpatialCoefficients c;
    c.kx = kv.b1 + kv.b3 * y;
    c.ky = kv.b2 - kv.b3 * x;
    return c;
  });
  terms.push_back(lin);
  if (kv.s != 0.0) {
    TimeTerm st;
    st.factor = TimeFactor::power(1);
    st.weight = kv.s;
    st.field = [](double, double) {
      SpatialCoefficients c;
      c.k = 1.0;
      return c;
    };
    terms.push_back(st);
  }
  return FirstIntegral(std::move(name), std::move(terms), FIKind::LFI);
}

// ---------------------------------------------------------------------------
// exponential-integral scan

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  for (int i = 0; i < 64; ++i) g.push_back(std::pow(10.0, -2.0 + 4.0 * i / 63.0));
  return g;
}

namespace {

// Rows are affine in lambda^2: M(lambda) = M0 + lambda^2 M1.
struct Pencil {
  Eigen::MatrixXd m0, m1;
  Eigen::MatrixXd at(double lambda) const { return m0 + (lambda * lambda) * m1; }
};

Pencil build_pencil(const PotentialSpec& spec, const std::vector<Vec2>& pts, double& scale) {
  const Collocation c0 = collocate(integral3_operator(0.0), spec, pts);
  const Collocation c1 = collocate(integral3_operator(1.0), spec, pts);
  scale = std::max(scale, c0.derivative_scale);
  return {c0.rows, c1.rows - c0.rows};
}

double sigma_ratio(const Eigen::MatrixXd& raw) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normalized_rows(raw));
  const auto& sv = svd.singularValues();
  return sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
}

double golden_minimum(const std::function<double(double)>& f, double a, double b, double xtol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > xtol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

int matrix_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++r;
  return r;
}

}  // namespace

Integral3Scan integral3_scan(const PotentialSpec& spec, const Integral3Options& opts) {
  Integral3Scan scan;
  scan.grid = opts.lambda_grid.empty() ? default_lambda_grid() : opts.lambda_grid;
  for (double l : scan.grid)
    if (!(l > 0.0) || !std::isfinite(l)) throw BadParams("integral3_scan: lambda values must be positive");
  std::sort(scan.grid.begin(), scan.grid.end());
  const ResidualOperator op = integral3_operator(1.0);
  const auto& nopts = opts.nullspace;
  const int n = nopts.n_points > 0 ? nopts.n_points : 3 * op.dim;
  check_points(op, n);
  const int n_hold = std::max(1, static_cast<int>(std::ceil(nopts.holdout_factor * n)));
  AnnulusSampler sampler(spec, nopts.annulus);
  const auto train = sampler.take(static_cast<std::size_t>(n));
  const auto hold = sampler.take(static_cast<std::size_t>(n_hold));
  double scale = 0.0;
  const Pencil pt = build_pencil(spec, train, scale);
  const Pencil ph = build_pencil(spec, hold, scale);

  for (double l : scan.grid) scan.sigma_ratio.push_back(sigma_ratio(pt.at(l)));

  const std::size_t m = scan.grid.size();
  auto ratio_at = [&](double u) { return sigma_ratio(pt.at(std::exp(u))); };
  for (std::size_t i = 0; i < m; ++i) {
    const double r = scan.sigma_ratio[i];
    const bool left_ok = i == 0 || r <= scan.sigma_ratio[i - 1];
    const bool right_ok = i + 1 == m || r <= scan.sigma_ratio[i + 1];
    if (!left_ok || !right_ok) continue;
    double lambda = scan.grid[i];
    if (m > 1) {
      const double lo = std::log(scan.grid[i == 0 ? 0 : i - 1]);
      const double hi = std::log(scan.grid[i + 1 == m ? m - 1 : i + 1]);
      lambda = std::exp(golden_minimum(ratio_at, lo, hi, opts.refine_xtol));
    }
    const Extracted ex = extract_nullspace(pt.at(lambda), nopts.tol);
    if (ex.basis.cols() == 0) continue;
    const auto norms = held_out_norms(ph.at(lambda), ex.basis);
    const double tol = nopts.validation_tol * (1.0 + scale);
    if (!std::all_of(norms.begin(), norms.end(), [&](double v) { return v <= tol; })) continue;
    const bool duplicate = std::any_of(scan.hits.begin(), scan.hits.end(), [&](const Integral3Hit& h) {
      return std::abs(h.lambda - lambda) <= 1e-9 * lambda;
    });
    if (duplicate) continue;

    Integral3Hit hit;
    hit.lambda = lambda;
    hit.sigma_ratio = sigma_ratio(pt.at(lambda));
    hit.residual_norms = norms;
    for (Eigen::Index k = 0; k < ex.basis.cols(); ++k)
      hit.basis.push_back(LVecParams::from_coefficients(ex.basis.col(k).data(), lambda));
    // alpha, beta and a1 - a3 applied to the basis
    Eigen::MatrixXd constraint = Eigen::MatrixXd::Zero(3, 8);
    constraint(0, 0) = 1.0;
    constraint(1, 1) = 1.0;
    constraint(2, 4) = 1.0;
    constraint(2, 6) = -1.0;
    hit.novel_dimension = matrix_rank(constraint * ex.basis, 1e-8);
    hit.overlap_dimension = static_cast<int>(ex.basis.cols()) - hit.novel_dimension;
    scan.hits.push_back(std::move(hit));
  }
  return scan;
}

// ---------------------------------------------------------------------------
// report

namespace {

const Eigen::VectorXd& trivial_kt() {
  static const Eigen::VectorXd t = [] {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
    v(3) = v(4) = 1.0 / std::sqrt(2.0);
    return v;
  }();
  return t;
}

Eigen::MatrixXd as_matrix(const std::vector<std::vector<double>>& basis, int dim) {
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    for (int i = 0; i < dim; ++i) m(i, static_cast<Eigen::Index>(k)) = basis[k][i];
  return m;
}

// Orthonormal basis of span(n) intersected with the orthogonal complement of w.
Eigen::MatrixXd complement_in_span(const Eigen::MatrixXd& n, const Eigen::VectorXd& w) {
  if (n.cols() == 0) return n;
  const Eigen::MatrixXd proj = n - w * (w.transpose() * n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(proj, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-6) keep.push_back(i);
  Eigen::MatrixXd out(n.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    Eigen::VectorXd v = svd.matrixU().col(keep[k]);
    fix_sign(v);
    out.col(static_cast<Eigen::Index>(k)) = v;
  }
  return out;
}

double max_relative_flow(const FirstIntegral& fi, const PotentialSpec& spec, const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& s : traj.states) {
    const double d = flow_derivative(fi, spec, s);
    worst = std::max(worst, std::abs(d) / (1.0 + std::abs(evaluate_fi(fi, s))));
  }
  return worst;
}

Trajectory validation_trajectory(const PotentialSpec& spec, const DiscoveryOptions& opts) {
  const State s0 = random_states(spec, 1, opts.seed, 1.0, 0.0)[0];
  try {
    return integrate(spec, s0, opts.validation_dt, opts.validation_steps, Integrator::RK4);
  } catch (const SingularApproach& e) {
    return e.partial();
  }
}

}  // namespace

DiscoveryReport assemble_report(const PotentialSpec& spec, const DiscoveryOptions& opts) {
  DiscoveryReport rep;
  rep.potential = spec.name();

  auto solve = [&](const ResidualOperator& op, std::optional<NullspaceResult>& slot) -> bool {
    try {
      slot = nullspace_solve(op, spec, opts.nullspace);
      return true;
    } catch (const ValidationFailed& e) {
      slot = e.result();
      rep.errors.push_back(e.what());
    } catch (const Error& e) {
      rep.errors.push_back(e.what());
    }
    return false;
  };

  // Killing vectors: split into the autonomous part (s = 0) and at most one
  // direction with s != 0, whose integral carries s t.
  Eigen::MatrixXd lfi_dirs(4, 0);
  if (solve(lfi_operator(), rep.lfi)) {
    const Eigen::MatrixXd n = as_matrix(rep.lfi->basis, 4);
    Eigen::VectorXd srow = n.row(3).transpose();
    if (n.cols() > 0 && srow.norm() > 1e-12) {
      const Eigen::VectorXd w = srow / srow.norm();
      Eigen::MatrixXd coeff = Eigen::MatrixXd::Identity(n.cols(), n.cols());
      const Eigen::MatrixXd auto_part = n * complement_in_span(coeff, w);
      Eigen::VectorXd timed = n * w;
      fix_sign(timed);
      lfi_dirs.resize(4, auto_part.cols() + 1);
      lfi_dirs << auto_part, timed;
    } else {
      lfi_dirs = n;
    }
    for (Eigen::Index k = 0; k < lfi_dirs.cols(); ++k) {
      Eigen::VectorXd v = lfi_dirs.col(k);
      v(3) = std::abs(v(3)) < 1e-12 ? 0.0 : v(3);
      rep.lfi_basis.push_back(KVParams::from_array(v.data()));
    }
  }

  Eigen::MatrixXd kt_dirs(6, 0);
  if (solve(bd_operator(), rep.bd)) {
    const Eigen::MatrixXd n = as_matrix(rep.bd->basis, 6);
    const double in_span = (n.transpose() * trivial_kt()).norm();
    if (std::abs(in_span - 1.0) > 1e-8)
      rep.errors.push_back("trivial Killing tensor direction missing from the Bertrand-Darboux nullspace");
    kt_dirs = complement_in_span(n, trivial_kt());
    rep.kt_basis.push_back(KTParams::from_array(trivial_kt().data()));
    for (Eigen::Index k = 0; k < kt_dirs.cols(); ++k)
      rep.kt_basis.push_back(KTParams::from_array(kt_dirs.col(k).data()));
  }

  if (opts.scan_integral3) {
    try {
      rep.integral3 = integral3_scan(spec, opts.integral3);
    } catch (const Error& e) {
      rep.errors.push_back(e.what());
    }
  }

  const Trajectory traj = validation_trajectory(spec, opts);
  auto add = [&](FirstIntegral fi, std::string source, std::vector<double> params) {
    DiscoveredFI d{std::move(fi), std::move(source), std::move(params)};
    try {
      d.max_flow_derivative = max_relative_flow(d.fi, spec, traj);
      d.validated = d.max_flow_derivative <= opts.flow_tol;
    } catch (const Error& e) {
      rep.errors.push_back(d.fi.name() + ": " + e.what());
    }
    rep.reconstructed.push_back(std::move(d));
  };
  for (std::size_t k = 0; k < rep.lfi_basis.size(); ++k) {
    const auto a = rep.lfi_basis[k].to_array();
    add(reconstructed_lfi("L" + std::to_string(k + 1), rep.lfi_basis[k]), "lfi", {a.begin(), a.end()});
  }
  for (std::size_t k = 1; k < rep.kt_basis.size(); ++k) {
    const auto a = rep.kt_basis[k].to_array();
    try {
      add(reconstructed_qfi("Q" + std::to_string(k), rep.kt_basis[k], spec), "bd", {a.begin(), a.end()});
    } catch (const Error& e) {
      rep.errors.push_back("Q" + std::to_string(k) + ": " + e.what());
    }
  }

  // verdict from the validated autonomous integrals
  try {
    const auto states = random_states(spec, static_cast<std::size_t>(opts.validation_states), opts.seed + 1);
    const FirstIntegral h = hamiltonian(spec);
    std::vector<FirstIntegral> autonomous{h};
    for (const auto& d : rep.reconstructed)
      if (d.validated && d.fi.autonomous()) autonomous.push_back(d.fi);
    rep.autonomous_rank = independence_rank(autonomous, states);
    for (std::size_t i = 1; i < autonomous.size() && !rep.commuting_pair; ++i) {
      double worst = 0.0;
      for (const auto& s : states) worst = std::max(worst, std::abs(poisson_bracket(h, autonomous[i], s)));
      if (worst <= opts.involution_tol && independence_rank({h, autonomous[i]}, states) == 2)
        rep.commuting_pair = true;
    }
  } catch (const Error& e) {
    rep.errors.push_back(std::string("verdict: ") + e.what());
  }
  rep.verdict = rep.autonomous_rank >= 3 ? "superintegrable-candidate"
                : rep.commuting_pair     ? "integrable-candidate"
                                         : "none";
  return rep;
}

nlohmann::json to_json(const NullspaceResult& r) {
  return {{"operator", r.op},
          {"parameter_dimension", r.dim},
          {"nullspace_dimension", r.basis.size()},
          {"n_points", r.n_points},
          {"n_holdout", r.n_holdout},
          {"basis", r.basis},
          {"residual_norms", r.residual_norms},
          {"singular_values", r.singular_values},
          {"derivative_scale", r.derivative_scale},
          {"tolerance", r.tolerance()}};
}

nlohmann::json to_json(const DiscoveryReport& r) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["potential"] = r.potential;
  j["lfi"] = r.lfi ? to_json(*r.lfi) : nlohmann::json(nullptr);
  j["bd"] = r.bd ? to_json(*r.bd) : nlohmann::json(nullptr);
  j["lfi_basis"] = nlohmann::json::array();
  for (const auto& p : r.lfi_basis) j["lfi_basis"].push_back(p.to_array());
  j["kt_basis"] = nlohmann::json::array();
  for (const auto& p : r.kt_basis) j["kt_basis"].push_back(p.to_array());
  if (r.integral3) {
    nlohmann::json s;
    s["grid"] = r.integral3->grid;
    s["sigma_ratio"] = r.integral3->sigma_ratio;
    s["hits"] = nlohmann::json::array();
    for (const auto& h : r.integral3->hits) {
      nlohmann::json hj{{"lambda", h.lambda},
                        {"sigma_ratio", h.sigma_ratio},
                        {"residual_norms", h.residual_norms},
                        {"overlap_dimension", h.overlap_dimension},
                        {"novel_dimension", h.novel_dimension}};
      hj["basis"] = nlohmann::json::array();
      for (const auto& b : h.basis) {
        auto c = b.coefficients();
        std::vector<double> row(c.begin(), c.end());
        row.push_back(b.lambda);
        hj["basis"].push_back(row);
      }
      s["hits"].push_back(hj);
    }
    j["integral3"] = s;
  } else {
    j["integral3"] = nullptr;
  }
  j["reconstructed"] = nlohmann::json::array();
  for (const auto& d : r.reconstructed)
    j["reconstructed"].push_back({{"name", d.fi.name()},
                                  {"source", d.source},
                                  {"kind", to_string(d.fi.kind())},
                                  {"time_dependence", to_string(d.fi.time_dependence())},
                                  {"params", d.params},
                                  {"max_flow_derivative", d.max_flow_derivative},
                                  {"validated", d.validated}});
  j["autonomous_rank"] = r.autonomous_rank;
  j["commuting_pair"] = r.commuting_pair;
  j["verdict"] = r.verdict;
  j["errors"] = r.errors;
  return j;
}

}  // namespace qfi
