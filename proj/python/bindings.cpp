#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "igam/error.hpp"
#include "igam/info_amount.hpp"
#include "igam/io.hpp"
#include "igam/loss.hpp"
#include "igam/planner.hpp"
#include "igam/stats.hpp"
#include "igam/toy.hpp"

namespace py = pybind11;
using namespace igam;

namespace {

InfoVariant info_variant(const std::string& name) {
  if (name == "paper-double-exp") return InfoVariant::kPaperDoubleExp;
  if (name == "softmax-single-exp") return InfoVariant::kSoftmaxSingleExp;
  throw InputError("variant must be paper-double-exp or softmax-single-exp");
}

ReferenceMode reference_mode(const std::string& name) {
  if (name == "sum") return ReferenceMode::kSum;
  if (name == "mean") return ReferenceMode::kMean;
  throw InputError("ibar must be sum or mean");
}

MarginVariant margin_variant(const std::string& name) {
  if (name == "clamped") return MarginVariant::kClamped;
  if (name == "signed") return MarginVariant::kSigned;
  throw InputError("margin must be clamped or signed");
}

py::dict loss_dict(const LossOutput& out) {
  py::dict d;
  d["loss"] = out.loss;
  d["grad_cos"] = out.grad_cos;
  d["grad_features"] = out.grad_features;
  d["grad_weights"] = out.grad_weights;
  d["clamped_gradient"] = out.clamped_gradient;
  return d;
}

CosineClassifier classifier(const Matrix& weights, double scale) {
  CosineClassifier clf;
  clf.weights = weights;
  clf.scale = scale;
  return clf;
}

MarginMatrix margin_matrix(const std::optional<Matrix>& m, Eigen::Index classes) {
  if (!m) return MarginMatrix::zeros(static_cast<int>(classes));
  MarginMatrix out = MarginMatrix::zeros(static_cast<int>(m->rows()));
  out.m = *m;
  return out;
}

}  // namespace

PYBIND11_MODULE(_igam, m) {
  m.doc() = "Information-amount guided angular margin: statistics, margins, losses and planning";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "local_stats",
      [](const Matrix& x) {
        std::vector<EmbeddingRecord> recs;
        for (Eigen::Index i = 0; i < x.rows(); ++i) recs.push_back({0, x.row(i).transpose()});
        const LocalStats s = compute_local_stats(recs).front();
        return py::make_tuple(s.count, s.mean, s.cov);
      },
      py::arg("embeddings"), "Count, mean and population covariance of the rows of `embeddings`.");

  py::class_<StreamingStats>(m, "StreamingStats")
      .def(py::init<std::size_t, int>(), py::arg("queue_len"), py::arg("dim"))
      .def(
          "push", [](StreamingStats& s, CategoryId c, const Vector& v) { s.push({c, v}); }, py::arg("category"),
          py::arg("vector"))
      .def(
          "finalize",
          [](StreamingStats& s, const std::vector<CategoryId>& expected) {
            return py::module_::import("json").attr("loads")(io::dump(io::to_json(s.finalize(expected))));
          },
          py::arg("expected") = std::vector<CategoryId>{},
          "Merge the epoch's windows; returns the statistics document as a dict.");

  m.def(
      "shrink_covariance",
      [](const Matrix& cov, std::size_t samples) {
        return shrink_covariance(cov, ShrinkageSpec{static_cast<int>(cov.rows()), samples});
      },
      py::arg("cov"), py::arg("samples"));
  m.def(
      "information_amount",
      [](const Matrix& cov, std::size_t samples) {
        return information_amount(shrink_covariance(cov, ShrinkageSpec{static_cast<int>(cov.rows()), samples}));
      },
      py::arg("cov"), py::arg("samples"), "Information amount in bits of a covariance estimated from `samples` rows.");
  m.def("information_amount_from_embeddings", &information_amount_from_embeddings, py::arg("embeddings"));

  m.def(
      "normalize_info",
      [](const std::vector<double>& raw, const std::string& variant, const std::string& ibar) {
        NormalizationOptions opts;
        opts.variant = info_variant(variant);
        opts.reference = reference_mode(ibar);
        return normalize_info(raw, opts).normalized;
      },
      py::arg("info"), py::arg("variant") = "paper-double-exp", py::arg("ibar") = "sum");
  m.def(
      "margins",
      [](const std::vector<double>& raw, const std::string& variant, const std::string& ibar,
         const std::string& margin) {
        NormalizationOptions opts;
        opts.variant = info_variant(variant);
        opts.reference = reference_mode(ibar);
        return build_margins(normalize_info(raw, opts), margin_variant(margin)).m;
      },
      py::arg("info"), py::arg("variant") = "paper-double-exp", py::arg("ibar") = "sum",
      py::arg("margin") = "clamped", "Margin matrix from raw information amounts.");

  m.def("cosines", &cosines, py::arg("x"), py::arg("weights"));
  m.def(
      "igam_loss",
      [](const Vector& x, int label, const Matrix& weights, const std::optional<Matrix>& margins, double s) {
        return loss_dict(igam_backward(x, label, classifier(weights, s), margin_matrix(margins, weights.cols())));
      },
      py::arg("x"), py::arg("label"), py::arg("weights"), py::arg("margins") = py::none(), py::arg("s") = 30.0);
  m.def(
      "normface_loss",
      [](const Vector& x, int label, const Matrix& weights, double s) {
        return loss_dict(normface_backward(x, label, classifier(weights, s)));
      },
      py::arg("x"), py::arg("label"), py::arg("weights"), py::arg("s") = 30.0);
  m.def(
      "ce_loss",
      [](const Vector& x, int label, const Matrix& weights) {
        return loss_dict(ce_backward(x, label, classifier(weights, 1.0)));
      },
      py::arg("x"), py::arg("label"), py::arg("weights"));

  m.def(
      "plan",
      [](std::int64_t n, std::int64_t p, std::int64_t c, const std::string& mode, std::optional<std::int64_t> d) {
        if (mode != "grid" && mode != "exact") throw InputError("mode must be grid or exact");
        const PlanInput in{n, p, c, mode == "grid" ? SearchMode::kPaperGrid : SearchMode::kExactInteger};
        const PlanResult r = d ? memory_report(in, *d) : optimal_queue_length(in);
        return py::module_::import("json").attr("loads")(io::dump(io::to_json(r)));
      },
      py::arg("N"), py::arg("p"), py::arg("C"), py::arg("mode") = "grid", py::arg("queue_len") = py::none());

  m.def(
      "train",
      [](const std::string& config_json, std::optional<std::uint64_t> seed) {
        io::RunConfig cfg = io::run_config_from_json(io::json::parse(config_json));
        if (seed) cfg.dataset.seed = cfg.train.seed = *seed;
        const Dataset data = generate_dataset(cfg.dataset);
        io::json runs = io::json::array();
        for (LossKind loss : cfg.losses) {
          TrainConfig tc = cfg.train;
          tc.loss = loss;
          io::json epochs = io::json::array();
          for (const auto& e : train(data, tc).epochs) epochs.push_back(io::to_json(e));
          runs.push_back({{"loss", to_string(loss)}, {"epochs", epochs}});
        }
        return io::dump({{"runs", runs}});
      },
      py::arg("config_json"), py::arg("seed") = py::none(), "Run a toy experiment; returns the report as JSON text.");
}
