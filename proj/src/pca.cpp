#include "adscreen/pca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "adscreen/dataset.hpp"
#include "adscreen/error.hpp"

namespace adscreen {

namespace {

std::vector<PcaInput> collect_inputs(const Schema& schema) {
  std::vector<PcaInput> inputs;
  for (auto c : schema.predictors()) {
    const auto& spec = schema[c];
    if (spec.kind == FeatureKind::Categorical) {
      for (const auto& lv : spec.levels) inputs.push_back({spec.name, lv});
    } else {
      inputs.push_back({spec.name, {}});
    }
  }
  return inputs;
}

// Raw (unstandardized) row-major input matrix.
std::vector<double> raw_inputs(const std::vector<PcaInput>& inputs, const Table& table) {
  const auto& schema = table.schema();
  const std::size_t n = table.n_rows();
  const std::size_t p = inputs.size();
  std::vector<double> x(n * p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto c = schema.index_of(inputs[j].column);
    for (std::size_t r = 0; r < n; ++r) {
      if (table.missing(r, c)) {
        throw Error(Errc::MissingValues, "masked '" + inputs[j].column + "' at row " + std::to_string(r + 1));
      }
      x[r * p + j] = inputs[j].level.empty() ? table.number(r, c) : (table.text(r, c) == inputs[j].level ? 1.0 : 0.0);
    }
  }
  return x;
}

void check_k(const PcaModel& model, std::size_t k) {
  if (k < 1 || k > model.n_components()) {
    throw Error(Errc::BadComponentCount, "k = " + std::to_string(k) + " outside [1, " +
                                             std::to_string(model.n_components()) + "]");
  }
}

}  // namespace

PcaModel fit_pca(const Table& train) {
  const std::size_t n = train.n_rows();
  if (n < 2) throw Error(Errc::TooFewRows, "PCA needs at least 2 rows");
  PcaModel model;
  model.inputs = collect_inputs(train.schema());
  const std::size_t p = model.inputs.size();
  if (p == 0) throw Error(Errc::InvalidArgument, "no predictor columns");
  auto x = raw_inputs(model.inputs, train);
  model.means.assign(p, 0.0);
  model.scales.assign(p, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += x[r * p + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (x[r * p + j] - mean) * (x[r * p + j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    model.means[j] = mean;
    model.scales[j] = sd > 0.0 ? sd : 1.0;
    for (std::size_t r = 0; r < n; ++r) x[r * p + j] = (x[r * p + j] - mean) / model.scales[j];
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> z(x.data(), n, p);
  const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error(Errc::InvalidArgument, "eigen-decomposition failed");
  // Eigen returns ascending eigenvalues.
  for (std::size_t i = 0; i < p; ++i) {
    const auto col = static_cast<Eigen::Index>(p - 1 - i);
    model.eigenvalues.push_back(std::max(0.0, solver.eigenvalues()(col)));
    std::vector<double> v(p);
    std::size_t arg = 0;
    for (std::size_t j = 0; j < p; ++j) {
      v[j] = solver.eigenvectors()(static_cast<Eigen::Index>(j), col);
      if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
    }
    if (v[arg] < 0.0) {
      for (auto& e : v) e = -e;
    }
    model.components.push_back(std::move(v));
  }
  return model;
}

std::vector<double> standardize(const PcaModel& model, const Table& table) {
  auto x = raw_inputs(model.inputs, table);
  const std::size_t p = model.inputs.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = i % p;
    x[i] = (x[i] - model.means[j]) / model.scales[j];
  }
  return x;
}

std::vector<double> pca_scores(const PcaModel& model, const Table& table, std::size_t k) {
  check_k(model, k);
  const auto z = standardize(model, table);
  const std::size_t n = table.n_rows();
  const std::size_t p = model.inputs.size();
  std::vector<double> s(n * k, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < p; ++j) acc += z[r * p + j] * model.components[c][j];
      s[r * k + c] = acc;
    }
  }
  return s;
}

std::vector<double> reconstruct(const PcaModel& model, const std::vector<double>& scores, std::size_t k) {
  check_k(model, k);
  if (scores.size() % k != 0) throw Error(Errc::ShapeError, "score matrix width is not k");
  const std::size_t n = scores.size() / k;
  const std::size_t p = model.inputs.size();
  std::vector<double> z(n * p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < p; ++j) z[r * p + j] += scores[r * k + c] * model.components[c][j];
    }
  }
  return z;
}

Table project(const PcaModel& model, const Table& table, std::size_t k) {
  const auto s = pca_scores(model, table, k);
  const std::size_t n = table.n_rows();
  std::vector<ColumnSpec> specs;
  std::vector<Column> cols;
  for (std::size_t c = 0; c < k; ++c) {
    ColumnSpec spec;
    spec.name = "PC" + std::to_string(c + 1);
    spec.kind = FeatureKind::Numeric;
    spec.group = FeatureGroup::Meta;
    std::vector<double> v(n);
    for (std::size_t r = 0; r < n; ++r) v[r] = s[r * k + c];
    specs.push_back(std::move(spec));
    cols.push_back(Column::numeric(std::move(v)));
  }
  if (const auto t = table.schema().target()) {
    specs.push_back(table.schema()[*t]);
    cols.push_back(table.column(*t));
  }
  return Table(Schema(std::move(specs)), std::move(cols));
}

std::vector<double> explained_variance(const PcaModel& model) {
  double total = 0.0;
  for (double e : model.eigenvalues) total += e;
  std::vector<double> out;
  double acc = 0.0;
  for (double e : model.eigenvalues) {
    acc += e;
    out.push_back(total > 0.0 ? acc / total : 1.0);
  }
  return out;
}

std::vector<PcaCurvePoint> accuracy_vs_components(const Table& train, const Table& test,
                                                  const std::vector<std::size_t>& ks,
                                                  const ForestConfig& forest_config) {
  const auto model = fit_pca(train);
  for (auto k : ks) check_k(model, k);
  const auto t = test.schema().require_target();
  std::vector<PcaCurvePoint> curve;
  for (auto k : ks) {
    const auto forest = fit_forest(project(model, train, k), forest_config);
    const auto pred = forest.predict(project(model, test, k));
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test.n_rows(); ++r) {
      correct += forest.classes[pred[r].label] == test.text(r, t);
    }
    curve.push_back({k, 100.0 * static_cast<double>(correct) / static_cast<double>(test.n_rows())});
  }
  return curve;
}

std::string pca_curve_csv(const std::vector<PcaCurvePoint>& curve) {
  std::ostringstream out;
  out << "k,test_accuracy\n";
  for (const auto& pt : curve) out << pt.k << ',' << format_double(pt.test_accuracy) << '\n';
  return out.str();
}

std::string variance_csv(const std::vector<double>& cumulative) {
  std::ostringstream out;
  out << "k,cumulative_fraction\n";
  for (std::size_t i = 0; i < cumulative.size(); ++i) out << i + 1 << ',' << format_double(cumulative[i]) << '\n';
  return out.str();
}

}  // namespace adscreen
