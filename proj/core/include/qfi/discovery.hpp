#pragma once

// Discovery of first integrals for a fixed potential: the symmetry
// parameters (Killing vectors, Killing tensors, KT-generating vectors) enter
// the constraint PDEs linearly, so collocation at sample points turns each
// constraint into a matrix whose nullspace holds the admitted integrals.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qfi/errors.hpp"
#include "qfi/first_integral.hpp"
#include "qfi/potential.hpp"
#include "qfi/sampling.hpp"

namespace qfi {

/// General second-order Killing tensor of the plane:
///   C = [[g y^2 + 2a y + A,  -g x y - a x - b y + C],
///        [-g x y - a x - b y + C,  g x^2 + 2b x + B]]
struct KTParams {
  double alpha = 0.0, beta = 0.0, gamma = 0.0, A = 0.0, B = 0.0, C = 0.0;

  std::array<double, 6> to_array() const { return {alpha, beta, gamma, A, B, C}; }
  static KTParams from_array(const double* p) { return {p[0], p[1], p[2], p[3], p[4], p[5]}; }
};

struct KTMatrix {
  Jet2 xx, xy, yy;
};
KTMatrix kt_matrix(const KTParams& p, const Jet2& x, const Jet2& y);

/// Killing vector (b1 + b3 y, b2 - b3 x) with the constant s of L.grad V = s.
struct KVParams {
  double b1 = 0.0, b2 = 0.0, b3 = 0.0, s = 0.0;

  std::array<double, 4> to_array() const { return {b1, b2, b3, s}; }
  static KVParams from_array(const double* p) { return {p[0], p[1], p[2], p[3]}; }
};

/// Vector generating a Killing tensor through its symmetrized derivative:
///   L^x = -2b y^2 + 2a x y + A x + a1 y + a4
///   L^y = -2a x^2 + 2b x y + a3 x + B y + a2
/// The induced tensor has off-diagonal constant C = (a1 + a3)/2.
struct LVecParams {
  double alpha = 0.0, beta = 0.0, A = 0.0, B = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0;
  double lambda = 1.0;

  std::array<double, 8> coefficients() const { return {alpha, beta, A, B, a1, a2, a3, a4}; }
  static LVecParams from_coefficients(const double* p, double lambda) {
    return {p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], lambda};
  }
  /// The Killing tensor L_(a;b) as general KT parameters (gamma = 0).
  KTParams induced_kt() const { return {alpha, beta, 0.0, A, B, 0.5 * (a1 + a3)}; }
};

/// Bertrand-Darboux residual. Throws SingularPoint.
double bd_residual(const KTParams& p, const PotentialSpec& spec, double x, double y);
/// (b1 + b3 y) V_x + (b2 - b3 x) V_y - s. Throws SingularPoint.
double lfi_residual(const KVParams& p, const PotentialSpec& spec, double x, double y);
/// The three residuals of the exponential-integral constraint. Throws SingularPoint.
std::array<double, 3> integral3_residuals(const LVecParams& p, const PotentialSpec& spec, double x,
                                          double y);

/// A residual that is linear in `dim` parameters, evaluated from the jet of V.
struct ResidualOperator {
  std::string name;
  int dim = 0;
  int rows_per_point = 1;
  std::function<void(const double* params, const Jet2& v, double x, double y, double* out)> eval;
};

ResidualOperator bd_operator();
ResidualOperator lfi_operator();
ResidualOperator integral3_operator(double lambda);

struct NullspaceOptions {
  int n_points = 0;        // 0 selects 3 * dim
  double holdout_factor = 2.0;
  double tol = 1e-9;       // relative singular value threshold
  double validation_tol = 1e-8;
  AnnulusOptions annulus;
};

struct NullspaceResult {
  std::string op;
  int dim = 0;
  int n_points = 0;
  int n_holdout = 0;
  std::vector<std::vector<double>> basis;   // orthonormal
  std::vector<double> residual_norms;       // max held-out |residual| per basis vector
  std::vector<double> singular_values;      // descending, relative to the largest
  double derivative_scale = 0.0;            // max |V derivative| over all samples
  double tolerance() const;                 // validation_tol * (1 + derivative_scale)
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

class ValidationFailed : public Error {
 public:
  ValidationFailed(const std::string& what, NullspaceResult result)
      : Error(what), result_(std::move(result)) {}
  const NullspaceResult& result() const { return result_; }

 private:
  NullspaceResult result_;
};

class PathThroughSingularity : public Error {
 public:
  using Error::Error;
};

/// Collocation on Halton points of the annulus, SVD nullspace, held-out
/// validation. Throws InsufficientPoints, ValidationFailed.
NullspaceResult nullspace_solve(const ResidualOperator& op, const PotentialSpec& spec,
                                const NullspaceOptions& opts = {});

/// Scalar part G of the quadratic integral C_ab qd^a qd^b + G, defined by
/// G_a = 2 C_ab V^b and G(base) = 0. The value is a Gauss-Legendre line
/// integral (64 nodes per unit length, panels refined near the singular set)
/// along a straight path, or a two-segment detour when the straight path
/// passes too close to the singular set. The gradient differentiates the
/// same quadrature under the integral sign, so a non-closed 1-form shows up
/// as a mismatch with 2 C grad V.
class ScalarReconstruction {
 public:
  ScalarReconstruction(KTParams kt, PotentialSpec spec, std::optional<Vec2> base = std::nullopt);

  const KTParams& kt() const { return kt_; }
  /// Base points tried in order; G vanishes at the first one that reaches the target.
  const std::vector<Vec2>& bases() const { return bases_; }

  double value(double x, double y) const;
  Jet2 jet(double x, double y) const;

 private:
  Jet2 integrate(double x, double y, bool with_gradient) const;

  KTParams kt_;
  PotentialSpec spec_;
  std::vector<Vec2> bases_;
};

/// G(target) with G(base) = 0. Throws PathThroughSingularity.
double reconstruct_scalar(const KTParams& kt, const PotentialSpec& spec, Vec2 base, Vec2 target);

/// Line integral of 2 C grad V around a closed polygon.
double loop_integral(const KTParams& kt, const PotentialSpec& spec, const std::vector<Vec2>& polygon);

/// The QFI C_ab qd^a qd^b + G for a Bertrand-Darboux nullspace direction.
FirstIntegral reconstructed_qfi(std::string name, const KTParams& kt, const PotentialSpec& spec);
/// The LFI L_a qd^a + s t for a Killing-vector nullspace direction.
FirstIntegral reconstructed_lfi(std::string name, const KVParams& kv);

struct Integral3Hit {
  double lambda = 0.0;
  double sigma_ratio = 0.0;  // sigma_min / sigma_max at lambda
  std::vector<LVecParams> basis;
  std::vector<double> residual_norms;
  /// Directions with alpha = beta = 0 and a1 = a3 also solve the
  /// Bertrand-Darboux equation; overlap counts those, novel the rest.
  int overlap_dimension = 0;
  int novel_dimension = 0;
};

struct Integral3Options {
  std::vector<double> lambda_grid;  // empty selects 64 log-spaced values in [1e-2, 1e2]
  NullspaceOptions nullspace;
  double refine_xtol = 1e-13;       // relative tolerance of the lambda refinement
};

struct Integral3Scan {
  std::vector<double> grid;
  std::vector<double> sigma_ratio;  // sigma_min / sigma_max at each grid value
  std::vector<Integral3Hit> hits;
};

std::vector<double> default_lambda_grid();

/// Scans lambda, refines every local minimum of sigma_min / sigma_max by
/// golden-section search in log(lambda), and reports the refined values
/// whose nullspace is nontrivial and validated.
Integral3Scan integral3_scan(const PotentialSpec& spec, const Integral3Options& opts = {});

struct DiscoveredFI {
  FirstIntegral fi;
  std::string source;            // "lfi" or "bd"
  std::vector<double> params;    // 4- or 6-tuple
  double max_flow_derivative = 0.0;  // relative, along the validation trajectory
  bool validated = false;
};

struct DiscoveryOptions {
  NullspaceOptions nullspace;
  bool scan_integral3 = false;
  Integral3Options integral3;
  std::uint64_t seed = 1;
  int validation_states = 20;
  double validation_dt = 1e-3;
  int validation_steps = 500;
  double flow_tol = 1e-8;
  double involution_tol = 1e-8;
};

struct DiscoveryReport {
  std::string potential;
  std::optional<NullspaceResult> lfi;
  std::optional<NullspaceResult> bd;
  std::vector<KVParams> lfi_basis;
  std::vector<KTParams> kt_basis;
  std::optional<Integral3Scan> integral3;
  std::vector<DiscoveredFI> reconstructed;
  int autonomous_rank = 0;
  bool commuting_pair = false;
  std::string verdict = "none";
  std::vector<std::string> errors;  // failures of sub-steps; partial results are kept
};

inline constexpr int kReportSchemaVersion = 1;

DiscoveryReport assemble_report(const PotentialSpec& spec, const DiscoveryOptions& opts = {});

nlohmann::json to_json(const NullspaceResult& r);
nlohmann::json to_json(const DiscoveryReport& r);

}  // namespace qfi
