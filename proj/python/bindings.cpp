#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "adscreen/dataset.hpp"
#include "adscreen/error.hpp"
#include "adscreen/eval.hpp"
#include "adscreen/forest.hpp"
#include "adscreen/pipeline.hpp"
#include "adscreen/synthgen.hpp"

namespace py = pybind11;
using namespace adscreen;

namespace {

using Matrix = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> column_major(const Matrix& x, std::size_t& n, std::size_t& p) {
  if (x.ndim() != 2) throw Error(Errc::ShapeError, "expected a 2-D array");
  n = static_cast<std::size_t>(x.shape(0));
  p = static_cast<std::size_t>(x.shape(1));
  const auto v = x.unchecked<2>();
  std::vector<double> out(n * p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < p; ++f) out[f * n + r] = v(static_cast<py::ssize_t>(r), static_cast<py::ssize_t>(f));
  }
  return out;
}

std::unique_ptr<bool[]> bools(const std::vector<bool>& v) {
  std::unique_ptr<bool[]> b(new bool[v.size()]);
  std::copy(v.begin(), v.end(), b.get());
  return b;
}

py::dict scores_dict(const Scores& s) {
  py::dict d;
  d["accuracy"] = s.accuracy;
  d["precision"] = s.precision ? py::cast(*s.precision) : py::none();
  d["recall"] = s.recall ? py::cast(*s.recall) : py::none();
  return d;
}

RandomForest fit(const Matrix& x, const std::vector<std::string>& y, std::size_t ntree, std::optional<std::size_t> mtry,
                 std::size_t min_node_size, std::uint64_t seed, std::size_t threads) {
  std::size_t n = 0, p = 0;
  auto values = column_major(x, n, p);
  if (y.size() != n) throw Error(Errc::ShapeError, "label count differs from row count");
  std::vector<std::string> classes(y.begin(), y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::vector<int> labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    labels[r] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), y[r]) - classes.begin());
  }
  std::vector<FeatureInfo> features(p);
  for (std::size_t f = 0; f < p; ++f) features[f].name = "x" + std::to_string(f + 1);
  ForestConfig cfg;
  cfg.ntree = ntree;
  cfg.mtry = mtry;
  cfg.min_node_size = min_node_size;
  cfg.seed = seed;
  cfg.threads = threads;
  return fit_forest(TrainingData::classification(std::move(features), n, std::move(values), std::move(labels), classes),
                    cfg);
}

py::tuple predict(const RandomForest& f, const Matrix& x) {
  std::size_t n = 0, p = 0;
  const auto cm = column_major(x, n, p);
  if (p != f.features.size()) throw Error(Errc::ShapeError, "feature count differs from the fitted forest");
  std::vector<std::string> labels(n);
  py::array_t<double> proba({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(f.classes.size())});
  auto out = proba.mutable_unchecked<2>();
  std::vector<double> row(p);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) row[j] = cm[j * n + r];
    const auto pr = f.predict(row);
    labels[r] = f.classes[pr.label];
    for (std::size_t c = 0; c < f.classes.size(); ++c) {
      out(static_cast<py::ssize_t>(r), static_cast<py::ssize_t>(c)) = pr.vote_fractions[c];
    }
  }
  return py::make_tuple(labels, proba);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Random-forest screening pipeline core";
  m.attr("__version__") = kToolVersion;

  static py::exception<Error> error_type(m, "AdscreenError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      exc.attr("code") = std::string(errc_name(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("default_config_json", [] { return config_to_json(PipelineConfig{}); });
  m.def("normalize_config_json", [](const std::string& text) {
    const auto cfg = config_from_json(text);
    validate_config(cfg);
    return config_to_json(cfg);
  });
  m.def("stage_order", [](const std::string& text) { return stage_order(config_from_json(text)); });
  m.def(
      "run_stage",
      [](const std::string& stage, const std::string& text, const std::string& dir) {
        run_stage(stage, config_from_json(text), dir);
      },
      py::arg("stage"), py::arg("config_json"), py::arg("out_dir"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "run_pipeline",
      [](const std::string& text, const std::string& dir) { return run_pipeline(config_from_json(text), dir).string(); },
      py::arg("config_json"), py::arg("out_dir"), py::call_guard<py::gil_scoped_release>());
  m.def("emit_reports", [](const std::string& dir) { emit_reports(dir); });

  m.def(
      "generate_cohort",
      [](std::size_t n_subjects, std::uint64_t seed, double missing_rate) {
        CohortConfig cc;
        cc.n_subjects = n_subjects;
        cc.seed = seed;
        cc.missing_rate = missing_rate;
        const auto [table, truth] = generate_cohort(cc);
        std::ostringstream csv;
        write_csv(csv, table);
        return py::make_tuple(csv.str(), schema_to_json(table.schema()), truth_csv(truth));
      },
      py::arg("n_subjects") = 862, py::arg("seed") = 1, py::arg("missing_rate") = 0.05);

  m.def("gini_impurity", [](const std::vector<double>& counts) { return gini_impurity(counts); });
  m.def(
      "confusion_matrix",
      [](const std::vector<bool>& predicted, const std::vector<bool>& truth) {
        const auto p = bools(predicted);
        const auto t = bools(truth);
        const auto cm = confusion_matrix(std::span<const bool>(p.get(), predicted.size()),
                                         std::span<const bool>(t.get(), truth.size()));
        py::dict d;
        d["tp"] = cm.tp;
        d["fp"] = cm.fp;
        d["fn"] = cm.fn;
        d["tn"] = cm.tn;
        return d;
      },
      py::arg("predicted"), py::arg("truth"));
  m.def(
      "scores", [](std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) { return scores_dict(scores({tp, fp, fn, tn})); },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
  m.def(
      "roc_auc",
      [](const std::vector<double>& s, const std::vector<bool>& truth) {
        const auto t = bools(truth);
        const auto roc = roc_curve(s, std::span<const bool>(t.get(), truth.size()));
        std::vector<std::tuple<double, double, double>> pts;
        for (const auto& p : roc) pts.emplace_back(p.threshold, p.fpr, p.tpr);
        return py::make_tuple(pts, auc(roc));
      },
      py::arg("scores"), py::arg("truth"));

  py::class_<RandomForest>(m, "RandomForest")
      .def_static("fit", &fit, py::arg("x"), py::arg("y"), py::arg("ntree") = 500, py::arg("mtry") = py::none(),
                  py::arg("min_node_size") = 1, py::arg("seed") = 1, py::arg("threads") = 1,
                  py::call_guard<py::gil_scoped_release>())
      .def("predict", &predict, py::arg("x"))
      .def("oob_error", [](const RandomForest& f, const Matrix& x, const std::vector<std::string>& y) {
        std::size_t n = 0, p = 0;
        auto values = column_major(x, n, p);
        std::vector<int> labels(n);
        for (std::size_t r = 0; r < n; ++r) {
          labels[r] = static_cast<int>(std::find(f.classes.begin(), f.classes.end(), y.at(r)) - f.classes.begin());
        }
        const auto data = TrainingData::classification(f.features, n, std::move(values), std::move(labels), f.classes);
        return oob_error(f, data).overall.back();
      })
      .def_readonly("classes", &RandomForest::classes)
      .def_readonly("mtry", &RandomForest::mtry)
      .def_property_readonly("ntree", [](const RandomForest& f) { return f.trees.size(); })
      .def("to_json", [](const RandomForest& f) { return forest_to_json(f); })
      .def_static("from_json", [](const std::string& s) { return forest_from_json(s); });
}
