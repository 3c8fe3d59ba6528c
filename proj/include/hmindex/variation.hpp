#pragma once

// Second variation of energy (Q_f) and volume (H_f) along the gradient test
// fields w_j = -grad u_j o f, and the index certificates built from them.

#include "hmindex/conformal.hpp"
#include "hmindex/maps.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hmindex {

inline constexpr double kCovariantStep = 1e-3;
/// Sectional curvature of the round target sphere.
inline constexpr double kTargetCurvature = 1.0;
inline constexpr double kNegativeEigenRelative = 1e-8;
inline constexpr double kSpanRankRelative = 1e-8;
inline constexpr double kStressDefinite = 1e-10;
inline constexpr double kBoundSlackFloor = -1e-6;

/// A section of f^{-1} T S^n, available at every domain position so that
/// covariant derivatives can be taken by finite differences.
class VariationField {
 public:
  using Sampler = std::function<Vec(const Vec& position)>;

  /// `map` must outlive the field.
  VariationField(const ZooMap& map, Sampler sampler);

  const ZooMap& map() const { return *map_; }
  Vec operator()(const Vec& position) const { return sampler_(position); }
  TangentVec at_node(std::size_t node) const;

  VariationField scaled(double c) const;

 private:
  const ZooMap* map_;
  Sampler sampler_;
};

VariationField linear_combination(double a, const VariationField& w1, double b, const VariationField& w2);
VariationField zero_field(const ZooMap& f);

/// w_j = -grad u_j o f.
VariationField restrict_field(const TestFunction& u, const ZooMap& f);

/// Removes the df(T M) component. Throws std::domain_error where df is rank
/// deficient.
VariationField normal_projection(const ZooMap& f, const VariationField& w);

/// nabla_v W at a domain position: central difference along the domain
/// geodesic with parallel transport in the target.
Vec covariant_derivative(const ZooMap& f, const VariationField& w, const Vec& position, const Vec& direction,
                         double step = kCovariantStep);

/// Q_f(w1, w2) = int <nabla w1, nabla w2> - sum_a <R(df e_a, w1) w2, df e_a>.
/// Throws std::invalid_argument("Q_f defined for harmonic maps").
double q_form(const ZooMap& f, const VariationField& w1, const VariationField& w2);
Eigen::MatrixXd q_matrix(const ZooMap& f, const std::vector<VariationField>& fields);

/// H_f(w1, w2) = int <nabla^perp w1, nabla^perp w2> - <sigma(w1), sigma(w2)>
///               - sum_a <R(df e_a, w1) w2, df e_a>
/// for normal fields w1, w2 along a minimal immersion.
double h_form(const ZooMap& f, const VariationField& w);
double h_form(const ZooMap& f, const VariationField& w1, const VariationField& w2);
Eigen::MatrixXd h_matrix(const ZooMap& f, const std::vector<VariationField>& fields);

/// int 2 e (lambda/n^2 - kappa/2) |w|^2 - ||sigma(w)||^2, the closed form the
/// degree-1 volume argument predicts for H_f(w) with w normal.
double h_form_predicted(const ZooMap& f, const VariationField& w_normal, double lambda, double kappa);

/// L2 Gram matrix int <w_j, w_k> dv_g.
Eigen::MatrixXd field_gram(const ZooMap& f, const std::vector<VariationField>& fields);

enum class IndexKind { energy, volume };

struct Hypotheses {
  double kappa = kTargetCurvature;
  double lambda = 0.0;
  int target_dim = 0;
  bool lambda_bound_ok = false;     // lambda <= n^2 kappa / 2
  bool curvature_bound_ok = false;  // 0 < kappa <= K = 1
  bool dimension_ok = false;        // n >= 3
  bool map_ok = false;              // harmonic (energy) / minimal isometric immersion (volume)
  bool nonconstant = false;
  double stress_min = 0.0;
  bool stress_positive = false;  // S_g^0 > 0 everywhere (definite)
  bool totally_geodesic = false;
  int min_rank = 0;  // smallest rank of df over the grid
};

struct IndexCertificate {
  IndexKind kind = IndexKind::energy;
  std::string map_name;
  int degree = 0;
  Hypotheses hypotheses;
  bool accepted = false;
  std::vector<std::string> declined_reasons;
  Eigen::MatrixXd q_matrix;
  std::vector<double> eigenvalues;  // ascending
  int negative_count = 0;
  int certified_bound = 0;
  int span_dim = 0;
  std::vector<double> bound_slack;         // energy: rhs - Q(w_j, w_j) per j
  std::vector<double> gram_eigenvalues;    // volume: projected Gram spectrum
  std::vector<double> diagonal_predicted;  // volume: h_form_predicted per j
  int resolution = 0;
  std::uint64_t seed = 0;
};

IndexCertificate certify_energy_index(const ZooMap& f, const FieldFamily& family, double kappa = kTargetCurvature);
IndexCertificate certify_volume_index(const ZooMap& f, const FieldFamily& family, double kappa = kTargetCurvature);

/// Internal consistency plus, for accepted certificates, the index claim:
/// bound >= n+1 with nonnegative pointwise-bound slack (energy), or
/// bound = dim L^perp (volume).
bool certificate_passes(const IndexCertificate& cert);

nlohmann::ordered_json certificate_to_json(const IndexCertificate& cert);

}  // namespace hmindex
