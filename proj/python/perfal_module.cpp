#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "perfal/al.hpp"
#include "perfal/embed.hpp"
#include "perfal/fa_ast.hpp"
#include "perfal/gpr.hpp"
#include "perfal/graph.hpp"
#include "perfal/harness.hpp"
#include "perfal/synthetic.hpp"

namespace py = pybind11;
using namespace perfal;

namespace {

embed::EmbeddingConfig embedding_config(const std::string& method, int dim, const std::string& scope,
                                        std::uint64_t seed) {
  embed::EmbeddingConfig c;
  c.method = embed::parse_method(method);
  c.aggregation = embed::default_aggregation(c.method);
  c.dim = dim;
  c.scope = embed::parse_scope(scope);
  c.seed = seed;
  c.validate();
  return c;
}

py::dict run_dict(const al::AlRun& run) {
  py::list records;
  for (const auto& r : run.records) {
    py::dict d;
    d["iteration"] = r.iteration;
    d["labels_used"] = r.labels_used;
    d["pearson"] = r.pearson;
    d["degenerate"] = r.degenerate;
    d["queried"] = r.queried;
    records.append(d);
  }
  py::dict out;
  out["strategy"] = std::string(al::strategy_name(run.strategy));
  out["records"] = records;
  out["test_reads_during_query"] = run.test_reads_during_query;
  out["sets_consistent"] = run.sets_consistent;
  out["error"] = run.error ? py::object(py::str(*run.error)) : py::object(py::none());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Code-graph embeddings and Gaussian-process active learning for test execution time";

  const auto base = py::register_exception<Error>(m, "Error");
  const auto value_error = py::make_tuple(base, py::handle(PyExc_ValueError));
  py::register_exception<ConfigError>(m, "ConfigError", value_error);
  py::register_exception<ShapeError>(m, "ShapeError", value_error);

  // graphs
  py::class_<fa_ast::CodeGraph>(m, "CodeGraph")
      .def_readonly("path", &fa_ast::CodeGraph::path)
      .def_property_readonly("num_nodes", &fa_ast::CodeGraph::size)
      .def_property_readonly("num_edges", [](const fa_ast::CodeGraph& g) { return g.edges.size(); })
      .def("edge_counts",
           [](const fa_ast::CodeGraph& g) {
             std::map<std::string, std::size_t> out;
             for (auto k : fa_ast::kAllEdgeKinds) out[std::string(fa_ast::edge_kind_name(k))] = g.count(k);
             return out;
           })
      .def("to_json", [](const fa_ast::CodeGraph& g) { return fa_ast::to_json(g); })
      .def("__repr__", [](const fa_ast::CodeGraph& g) {
        return "<CodeGraph " + g.path + " nodes=" + std::to_string(g.size()) + " edges=" +
               std::to_string(g.edges.size()) + ">";
      });
  m.def("parse_java", &fa_ast::build_file_graph, py::arg("source"), py::arg("path") = "",
        "FA-AST of one Java source file.");
  m.def("graph_from_json", &fa_ast::graph_from_json, py::arg("text"));
  m.def("metric_names", [] {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < graph::kMetricCount; ++i) out.emplace_back(graph::metric_name(i));
    return out;
  });
  m.def(
      "manual_embed", [](const fa_ast::CodeGraph& g) { return graph::manual_embed(g); }, py::arg("graph"),
      "The twelve manual metric slots in their fixed order.");
  m.def(
      "embed",
      [](const std::vector<fa_ast::CodeGraph>& graphs, const std::string& method, int dim, std::uint64_t seed) {
        py::gil_scoped_release release;
        return embed::embed_corpus(graphs, {}, embedding_config(method, dim, "train-unlabeled-test", seed)).rows;
      },
      py::arg("graphs"), py::arg("method") = "graph2vec", py::arg("dim") = 128, py::arg("seed") = 0,
      "One embedding row per graph, fitted over the whole corpus.");

  // Gaussian process
  py::class_<gpr::GprModel>(m, "GprModel")
      .def_property_readonly("length_scale", [](const gpr::GprModel& g) { return g.kernel().length_scale; })
      .def_property_readonly("signal_variance", [](const gpr::GprModel& g) { return g.kernel().signal_variance; })
      .def_property_readonly("noise_variance", [](const gpr::GprModel& g) { return g.kernel().noise_variance; })
      .def_property_readonly("nu", [](const gpr::GprModel& g) { return g.kernel().nu; })
      .def_property_readonly("log_marginal_likelihood", &gpr::GprModel::log_marginal_likelihood)
      .def(
          "predict",
          [](const gpr::GprModel& g, const Eigen::MatrixXd& x) {
            const auto p = g.predict(x);
            return py::make_tuple(p.mean, p.variance);
          },
          py::arg("x"), "(mean on the raw scale, variance on the standardized scale)");
  m.def(
      "fit_gp",
      [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double nu, bool tune, std::uint64_t seed,
         double length_scale, double noise_variance) {
        gpr::FitOptions o;
        o.tune = tune;
        o.seed = seed;
        o.kernel.nu = nu;
        o.kernel.length_scale = length_scale;
        o.kernel.noise_variance = noise_variance;
        py::gil_scoped_release release;
        return gpr::fit(x, y, o);
      },
      py::arg("x"), py::arg("y"), py::arg("nu") = 2.5, py::arg("tune") = true, py::arg("seed") = 0,
      py::arg("length_scale") = 1.0, py::arg("noise_variance") = 1e-2);
  m.def(
      "pearson",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        const auto r = gpr::pearson(a, b);
        return py::make_tuple(r.r, r.degenerate);
      },
      py::arg("a"), py::arg("b"), "(r, degenerate)");

  // active learning
  py::class_<al::DatasetSplit>(m, "DatasetSplit")
      .def_readonly("labeled", &al::DatasetSplit::labeled)
      .def_readonly("unlabeled", &al::DatasetSplit::unlabeled)
      .def_readonly("test", &al::DatasetSplit::test);
  m.def("make_splits", &al::make_splits, py::arg("n"), py::arg("test_frac"), py::arg("l0_size"), py::arg("seed"));
  m.def(
      "run_active",
      [](const Eigen::MatrixXd& features, const std::vector<double>& labels, const al::DatasetSplit& split,
         const std::string& strategy, int batch, int budget, std::uint64_t seed) {
        const auto s = al::parse_strategy(strategy);
        al::AlRun run;
        {
          py::gil_scoped_release release;
          run = al::run_active(features, labels, split, s, batch, budget, seed);
        }
        return run_dict(run);
      },
      py::arg("features"), py::arg("labels"), py::arg("split"), py::arg("strategy"), py::arg("batch") = 20,
      py::arg("budget") = 0, py::arg("seed") = 0);
  m.def(
      "run_passive",
      [](const Eigen::MatrixXd& features, const std::vector<double>& labels, const al::DatasetSplit& split,
         std::uint64_t seed) {
        const auto r = al::run_passive(features, labels, split, seed);
        return py::make_tuple(r.r, r.degenerate);
      },
      py::arg("features"), py::arg("labels"), py::arg("split"), py::arg("seed") = 0);

  // synthetic corpora and experiments
  m.def(
      "generate_synthetic",
      [](int n, std::uint64_t seed) {
        py::list out;
        for (const auto& f : synth::generate(n, seed)) out.append(py::make_tuple(f.path, f.source, f.label));
        return out;
      },
      py::arg("n"), py::arg("seed") = 0, "[(path, source, label_ms)]");
  m.def("write_synthetic", [](int n, std::uint64_t seed, const std::string& out) {
    synth::write_corpus(synth::generate(n, seed), out);
  }, py::arg("n"), py::arg("seed"), py::arg("out_dir"));
  m.def("default_experiment_json", [] { return harness::experiment_to_json(harness::default_experiment()); });
  m.def(
      "run_experiment",
      [](const std::string& config_json, bool use_cache) {
        const auto cfg = harness::experiment_from_json(config_json);
        cfg.validate();
        harness::ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = harness::run_experiment(cfg, harness::Cache(use_cache));
        }
        py::dict out;
        out["output_dir"] = r.output_dir.string();
        out["exit_code"] = r.exit_code();
        py::list failures;
        for (const auto& f : r.failures)
          failures.append(py::make_tuple(f.embedding, f.strategy, f.seed, f.message));
        out["failures"] = failures;
        out["test_reads_during_query"] = r.test_reads_during_query;
        return out;
      },
      py::arg("config_json"), py::arg("use_cache") = true);
  m.def("report", [](const std::string& dir) { return harness::report(dir); }, py::arg("result_dir"));
}
