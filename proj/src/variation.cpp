#include "hmindex/variation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hmindex {

namespace {

constexpr double kNormalFieldTolerance = 1e-8;

struct NodeGeometry {
  Vec position;
  Vec value;
  double weight = 0.0;
  std::vector<Vec> frame;   // domain, g-orthonormal
  std::vector<Vec> images;  // df(e_a)
};

NodeGeometry node_geometry(const ZooMap& f, std::size_t i) {
  const GridNode& node = f.grid().node(i);
  NodeGeometry g;
  g.position = node.position;
  g.value = f.value(node.position);
  g.weight = node.weight;
  g.frame = f.grid().frame_at(i);
  for (const Vec& e : g.frame) g.images.push_back(f.push(node.position, e));
  return g;
}

double curvature_sum(const std::vector<Vec>& images, const Vec& w1, const Vec& w2) {
  double sum = 0.0;
  for (const Vec& x : images) sum += ambient::curvature_form(x, w1, w2, kTargetCurvature);
  return sum;
}

Vec remove_components(Vec v, const std::vector<Vec>& orthonormal) {
  for (const Vec& q : orthonormal) v -= q.dot(v) * q;
  return v;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& lower) {
  return lower.selfadjointView<Eigen::Lower>();
}

std::vector<double> sorted_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return {};
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  std::vector<double> out(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

int count_negative(const std::vector<double>& eigenvalues) {
  double norm = 0.0;
  for (double e : eigenvalues) norm = std::max(norm, std::abs(e));
  if (norm == 0.0) return 0;
  return static_cast<int>(std::count_if(eigenvalues.begin(), eigenvalues.end(),
                                        [norm](double e) { return e < -kNegativeEigenRelative * norm; }));
}

void require_normal_field(const ZooMap& f, const NodeGeometry& g, const Vec& w) {
  const double scale = std::max(1.0, w.norm());
  for (const Vec& q : image_frame(f, g.position)) {
    if (std::abs(q.dot(w)) > kNormalFieldTolerance * scale) {
      throw std::invalid_argument("h_form: field is not normal to the immersion");
    }
  }
}

void require_harmonic(const ZooMap& f) {
  if (!f.flags().harmonic) throw std::invalid_argument("Q_f defined for harmonic maps");
}

void require_minimal(const ZooMap& f) {
  if (!f.flags().minimal_immersion) throw std::invalid_argument("H_f defined for minimal immersions");
}

int min_rank(const ZooMap& f) {
  int rank = f.domain_dim();
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    rank = std::min(rank, static_cast<int>(image_frame(f, f.grid().node(i).position).size()));
  }
  return rank;
}

}  // namespace

VariationField::VariationField(const ZooMap& map, Sampler sampler) : map_(&map), sampler_(std::move(sampler)) {}

TangentVec VariationField::at_node(std::size_t node) const {
  return TangentVec(map_->value_at(node), sampler_(map_->grid().node(node).position));
}

VariationField VariationField::scaled(double c) const {
  auto inner = sampler_;
  return VariationField(*map_, [inner, c](const Vec& p) { return Vec(c * inner(p)); });
}

VariationField linear_combination(double a, const VariationField& w1, double b, const VariationField& w2) {
  if (&w1.map() != &w2.map()) throw std::invalid_argument("linear_combination: fields along different maps");
  return VariationField(w1.map(), [w1, w2, a, b](const Vec& p) { return Vec(a * w1(p) + b * w2(p)); });
}

VariationField zero_field(const ZooMap& f) {
  const int dim = f.target_dim() + 1;
  return VariationField(f, [dim](const Vec&) { return Vec(Vec::Zero(dim)); });
}

VariationField restrict_field(const TestFunction& u, const ZooMap& f) {
  if (u.sphere_dim() != f.target_dim()) throw std::invalid_argument("restrict_field: target dimension mismatch");
  const ZooMap* map = &f;
  return VariationField(f, [u, map](const Vec& p) { return Vec(-u.gradient(map->value(p))); });
}

VariationField normal_projection(const ZooMap& f, const VariationField& w) {
  const ZooMap* map = &f;
  const int m = f.domain_dim();
  return VariationField(f, [w, map, m](const Vec& p) {
    const auto images = image_frame(*map, p);
    if (static_cast<int>(images.size()) < m) throw std::domain_error("normal_projection: rank-deficient differential");
    return remove_components(w(p), images);
  });
}

Vec covariant_derivative(const ZooMap& f, const VariationField& w, const Vec& position, const Vec& direction,
                         double step) {
  const Manifold& m = f.grid().manifold();
  const Vec y0 = f.value(position);
  const Vec q_plus = manifold_geodesic(m, position, direction, step);
  const Vec q_minus = manifold_geodesic(m, position, direction, -step);
  const Vec plus = ambient::transport(f.value(q_plus), y0, w(q_plus));
  const Vec minus = ambient::transport(f.value(q_minus), y0, w(q_minus));
  return ambient::tangent_part(y0, Vec((plus - minus) / (2.0 * step)));
}

Eigen::MatrixXd q_matrix(const ZooMap& f, const std::vector<VariationField>& fields) {
  require_harmonic(f);
  const int count = static_cast<int>(fields.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(count, count);
  std::vector<Vec> values(count);
  std::vector<std::vector<Vec>> derivs(count);
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const NodeGeometry g = node_geometry(f, i);
    for (int j = 0; j < count; ++j) {
      values[j] = fields[j](g.position);
      derivs[j].clear();
      for (const Vec& e : g.frame) derivs[j].push_back(covariant_derivative(f, fields[j], g.position, e));
    }
    for (int j = 0; j < count; ++j) {
      for (int k = 0; k <= j; ++k) {
        double grad = 0.0;
        for (std::size_t a = 0; a < g.frame.size(); ++a) grad += derivs[j][a].dot(derivs[k][a]);
        q(j, k) += g.weight * (grad - curvature_sum(g.images, values[j], values[k]));
      }
    }
  }
  return symmetrize(q);
}

double q_form(const ZooMap& f, const VariationField& w1, const VariationField& w2) {
  // Evaluate the off-diagonal entry directly so that q_form(w1, w2) and
  // q_form(w2, w1) perform the same arithmetic.
  return q_matrix(f, {w1, w2})(1, 0);
}

Eigen::MatrixXd h_matrix(const ZooMap& f, const std::vector<VariationField>& fields) {
  require_minimal(f);
  const int count = static_cast<int>(fields.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(count, count);
  std::vector<Vec> values(count);
  std::vector<std::vector<Vec>> derivs(count);
  std::vector<std::vector<double>> sigma(count);
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const NodeGeometry g = node_geometry(f, i);
    const auto images = image_frame(f, g.position);
    const auto second = second_fundamental_tensor(f, i);
    for (int j = 0; j < count; ++j) {
      values[j] = fields[j](g.position);
      require_normal_field(f, g, values[j]);
      derivs[j].clear();
      for (const Vec& e : g.frame) {
        derivs[j].push_back(remove_components(covariant_derivative(f, fields[j], g.position, e), images));
      }
      sigma[j].clear();
      for (const Vec& s : second) sigma[j].push_back(s.dot(values[j]));
    }
    for (int j = 0; j < count; ++j) {
      for (int k = 0; k <= j; ++k) {
        double grad = 0.0;
        for (std::size_t a = 0; a < g.frame.size(); ++a) grad += derivs[j][a].dot(derivs[k][a]);
        double shape = 0.0;
        for (std::size_t s = 0; s < second.size(); ++s) shape += sigma[j][s] * sigma[k][s];
        h(j, k) += g.weight * (grad - shape - curvature_sum(g.images, values[j], values[k]));
      }
    }
  }
  return symmetrize(h);
}

double h_form(const ZooMap& f, const VariationField& w) { return h_matrix(f, {w})(0, 0); }

double h_form(const ZooMap& f, const VariationField& w1, const VariationField& w2) {
  return h_matrix(f, {w1, w2})(1, 0);
}

double h_form_predicted(const ZooMap& f, const VariationField& w_normal, double lambda, double kappa) {
  require_minimal(f);
  const double n = f.target_dim();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const NodeGeometry g = node_geometry(f, i);
    const Vec w = w_normal(g.position);
    double e = 0.0;
    for (const Vec& x : g.images) e += 0.5 * x.squaredNorm();
    double shape = 0.0;
    for (const Vec& s : second_fundamental_tensor(f, i)) shape += std::pow(s.dot(w), 2);
    sum += g.weight * (2.0 * e * (lambda / (n * n) - 0.5 * kappa) * w.squaredNorm() - shape);
  }
  return sum;
}

Eigen::MatrixXd field_gram(const ZooMap& f, const std::vector<VariationField>& fields) {
  const int count = static_cast<int>(fields.size());
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(count, count);
  std::vector<Vec> values(count);
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const GridNode& node = f.grid().node(i);
    for (int j = 0; j < count; ++j) values[j] = fields[j](node.position);
    for (int j = 0; j < count; ++j) {
      for (int k = 0; k <= j; ++k) gram(j, k) += node.weight * values[j].dot(values[k]);
    }
  }
  return symmetrize(gram);
}

namespace {

Hypotheses common_hypotheses(const ZooMap& f, const FieldFamily& family, double kappa) {
  if (!family.basis || family.basis->sphere_dim() != f.target_dim()) {
    throw std::invalid_argument("certificate: family lives on a different target sphere");
  }
  Hypotheses h;
  h.kappa = kappa;
  h.lambda = family.basis->eigenvalue();
  h.target_dim = f.target_dim();
  const double n = f.target_dim();
  h.lambda_bound_ok = h.lambda <= 0.5 * n * n * kappa + 1e-12;
  h.curvature_bound_ok = kappa > 0.0 && kappa <= kTargetCurvature;
  h.dimension_ok = f.target_dim() >= 3;
  h.nonconstant = total_energy(f) > 1e-12;
  h.totally_geodesic = f.flags().totally_geodesic;
  h.min_rank = min_rank(f);
  return h;
}

void common_declines(const Hypotheses& h, std::vector<std::string>& reasons) {
  if (!h.dimension_ok) reasons.emplace_back("target dimension n < 3");
  if (!h.curvature_bound_ok) reasons.emplace_back("kappa outside (0, K] with K = 1");
  if (!h.lambda_bound_ok) reasons.emplace_back("lambda > n^2 kappa / 2");
}

std::vector<VariationField> gradient_fields(const ZooMap& f, const FieldFamily& family) {
  std::vector<VariationField> fields;
  for (const TestFunction& u : family.functions) fields.push_back(restrict_field(u, f));
  return fields;
}

}  // namespace

IndexCertificate certify_energy_index(const ZooMap& f, const FieldFamily& family, double kappa) {
  IndexCertificate cert;
  cert.kind = IndexKind::energy;
  cert.map_name = f.name();
  cert.degree = family.basis ? family.basis->degree() : 0;
  cert.resolution = f.grid().resolution();
  cert.hypotheses = common_hypotheses(f, family, kappa);
  Hypotheses& h = cert.hypotheses;
  h.map_ok = f.flags().harmonic;

  if (!h.map_ok) {
    cert.declined_reasons.emplace_back("map is not harmonic");
    return cert;
  }
  const StressReport stress = stress_energy(f);
  h.stress_min = stress.global_min;
  h.stress_positive = stress.global_min > kStressDefinite;

  const auto fields = gradient_fields(f, family);
  cert.q_matrix = q_matrix(f, fields);
  cert.eigenvalues = sorted_eigenvalues(cert.q_matrix);
  cert.negative_count = count_negative(cert.eigenvalues);
  cert.span_dim = static_cast<int>(fields.size());

  // Right-hand side of the pointwise bound on Q(w_j, w_j).
  const double n = f.target_dim();
  const double factor = 2.0 * h.lambda / (n * n) - kappa;
  std::vector<double> rhs(fields.size(), 0.0);
  for (std::size_t i = 0; i < f.grid().size(); ++i) {
    const GridNode& node = f.grid().node(i);
    const double e = energy_density(f, i);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      const double grad_sq = fields[j](node.position).squaredNorm();
      rhs[j] += node.weight * (e * factor * grad_sq - kappa * stress.s_min[i] * grad_sq);
    }
  }
  for (std::size_t j = 0; j < fields.size(); ++j) cert.bound_slack.push_back(rhs[j] - cert.q_matrix(j, j));

  common_declines(h, cert.declined_reasons);
  if (!h.nonconstant) cert.declined_reasons.emplace_back("map is constant");
  if (!h.stress_positive) cert.declined_reasons.emplace_back("stress-energy tensor not positive definite");
  cert.accepted = cert.declined_reasons.empty();
  cert.certified_bound = cert.accepted ? cert.negative_count : 0;
  return cert;
}

IndexCertificate certify_volume_index(const ZooMap& f, const FieldFamily& family, double kappa) {
  IndexCertificate cert;
  cert.kind = IndexKind::volume;
  cert.map_name = f.name();
  cert.degree = family.basis ? family.basis->degree() : 0;
  cert.resolution = f.grid().resolution();
  cert.hypotheses = common_hypotheses(f, family, kappa);
  Hypotheses& h = cert.hypotheses;
  h.map_ok = f.flags().minimal_immersion && f.flags().isometric;

  if (!f.flags().minimal_immersion || h.min_rank < f.domain_dim()) {
    cert.declined_reasons.emplace_back("map is not a minimal immersion");
    return cert;
  }
  const auto raw = gradient_fields(f, family);
  std::vector<VariationField> normal;
  for (const auto& w : raw) normal.push_back(normal_projection(f, w));

  const Eigen::MatrixXd full_gram = field_gram(f, raw);
  const Eigen::MatrixXd gram = field_gram(f, normal);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full_eig(full_gram, Eigen::EigenvaluesOnly);
  const double scale = full_eig.eigenvalues().maxCoeff();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  cert.gram_eigenvalues = sorted_eigenvalues(gram);

  std::vector<int> kept;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()[i] > kSpanRankRelative * scale) kept.push_back(i);
  }
  cert.span_dim = static_cast<int>(kept.size());

  if (cert.span_dim > 0) {
    const Eigen::MatrixXd h_full = h_matrix(f, normal);
    // Coordinates in which the projected Gram matrix is the identity.
    Eigen::MatrixXd basis(gram.rows(), cert.span_dim);
    for (int c = 0; c < cert.span_dim; ++c) {
      basis.col(c) = eig.eigenvectors().col(kept[c]) / std::sqrt(eig.eigenvalues()[kept[c]]);
    }
    const Eigen::MatrixXd restricted = basis.transpose() * h_full * basis;
    cert.q_matrix = 0.5 * (restricted + restricted.transpose());
    for (const auto& w : normal) cert.diagonal_predicted.push_back(h_form_predicted(f, w, h.lambda, kappa));
  } else {
    cert.q_matrix.resize(0, 0);
  }
  cert.eigenvalues = sorted_eigenvalues(cert.q_matrix);
  cert.negative_count = count_negative(cert.eigenvalues);

  common_declines(h, cert.declined_reasons);
  if (!f.flags().isometric) cert.declined_reasons.emplace_back("immersion is not isometric");
  if (h.totally_geodesic) cert.declined_reasons.emplace_back("immersion is totally geodesic");
  cert.accepted = cert.declined_reasons.empty();
  cert.certified_bound = cert.accepted ? cert.negative_count : 0;
  return cert;
}

bool certificate_passes(const IndexCertificate& cert) {
  const auto& q = cert.q_matrix;
  if (q.rows() > 0) {
    const double norm = std::max(1.0, q.cwiseAbs().maxCoeff());
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > tol::kAlgebraic * norm) return false;
  }
  if (cert.certified_bound > cert.span_dim) return false;
  if (!cert.accepted) return true;
  if (cert.kind == IndexKind::energy) {
    if (cert.certified_bound < cert.hypotheses.target_dim + 1) return false;
    for (double s : cert.bound_slack) {
      if (s < kBoundSlackFloor) return false;
    }
    return true;
  }
  return cert.certified_bound == cert.span_dim;
}

nlohmann::ordered_json certificate_to_json(const IndexCertificate& cert) {
  using nlohmann::ordered_json;
  const Hypotheses& h = cert.hypotheses;
  ordered_json j;
  j["kind"] = cert.kind == IndexKind::energy ? "energy" : "volume";
  j["map"] = cert.map_name;
  j["degree"] = cert.degree;
  j["hypotheses"] = {
      {"kappa", h.kappa},
      {"lambda", h.lambda},
      {"target_dim", h.target_dim},
      {"lambda_bound_ok", h.lambda_bound_ok},
      {"curvature_bound_ok", h.curvature_bound_ok},
      {"dimension_ok", h.dimension_ok},
      {"map_ok", h.map_ok},
      {"nonconstant", h.nonconstant},
      {"stress_min", h.stress_min},
      {"stress_positive", h.stress_positive},
      {"totally_geodesic", h.totally_geodesic},
      {"min_rank", h.min_rank},
  };
  j["accepted"] = cert.accepted;
  j["declined_reasons"] = cert.declined_reasons;
  j["eigenvalues"] = cert.eigenvalues;
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < cert.q_matrix.rows(); ++r) {
    std::vector<double> row(cert.q_matrix.cols());
    for (Eigen::Index c = 0; c < cert.q_matrix.cols(); ++c) row[c] = cert.q_matrix(r, c);
    rows.push_back(row);
  }
  j["q_matrix"] = rows;
  j["negative_count"] = cert.negative_count;
  j["span_dim"] = cert.span_dim;
  j["certified_bound"] = cert.certified_bound;
  if (cert.kind == IndexKind::energy) {
    j["bound_slack"] = cert.bound_slack;
  } else {
    j["gram_eigenvalues"] = cert.gram_eigenvalues;
    j["diagonal_predicted"] = cert.diagonal_predicted;
  }
  j["thresholds"] = {
      {"negative_eigenvalue_relative", kNegativeEigenRelative},
      {"span_rank_relative", kSpanRankRelative},
      {"stress_definite", kStressDefinite},
      {"bound_slack_floor", kBoundSlackFloor},
      {"covariant_step", kCovariantStep},
  };
  j["resolution"] = cert.resolution;
  j["seed"] = cert.seed;
  j["verdict"] = certificate_passes(cert) ? "PASS" : "FAIL";
  return j;
}

}  // namespace hmindex
