#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scimap/analysis.hpp"
#include "scimap/error.hpp"
#include "scimap/pipeline.hpp"
#include "scimap/serialize.hpp"

namespace py = pybind11;
using namespace scimap;

namespace {

// Structured results cross the boundary as JSON text; the python side parses them.
std::string dump(const Json& j) { return j.dump(); }

std::vector<double> flatten(const std::vector<std::vector<double>>& rows, std::size_t& dim) {
  if (rows.empty()) throw Error(ErrorKind::Validation, "no rows");
  dim = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * dim);
  for (const auto& r : rows) {
    if (r.size() != dim) throw Error(ErrorKind::DimensionMismatch, "rows have different lengths");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return flat;
}

}  // namespace

PYBIND11_MODULE(_sciencemap, m) {
  m.doc() = "Embedding and citation-graph analysis of text corpora";

  static py::exception<Error> error_type(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(py::str(e.what()));
      exc.attr("kind") = std::string(to_string(e.kind()));
      exc.attr("offset") = e.offset() ? py::cast(*e.offset()) : py::none();
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<Record>(m, "Record")
      .def(py::init<>())
      .def_readwrite("id", &Record::id)
      .def_readwrite("title", &Record::title)
      .def_readwrite("abstract", &Record::abstract)
      .def_readwrite("year", &Record::year)
      .def_readwrite("authors", &Record::authors)
      .def_readwrite("journal", &Record::journal)
      .def_readwrite("subjects", &Record::subjects)
      .def_readwrite("references", &Record::references)
      .def("to_json", &record_to_json)
      .def_static("from_json", [](const std::string& line) { return parse_record(line); });

  py::class_<Corpus>(m, "Corpus")
      .def(py::init<>())
      .def("add", &Corpus::add)
      .def("__len__", &Corpus::size)
      .def("__getitem__",
           [](const Corpus& c, std::size_t i) {
             if (i >= c.size()) throw py::index_error();
             return c[i];
           })
      .def("ids",
           [](const Corpus& c) {
             std::vector<std::string> ids;
             for (const auto& r : c) ids.push_back(r.id);
             return ids;
           })
      .def("find", [](const Corpus& c, const std::string& id) -> std::optional<Record> {
        if (auto* r = c.find(id)) return *r;
        return std::nullopt;
      });

  m.def("load_corpus", &load_corpus, py::arg("path"));
  m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("path"));
  m.def(
      "_preprocess",
      [](const Corpus& c, std::size_t min_chars) -> py::tuple {
        auto [kept, report] = preprocess(c, min_chars);
        return py::make_tuple(kept, dump(to_json(report)));
      },
      py::arg("corpus"), py::arg("min_abstract_chars") = 100);
  m.def(
      "sample", [](const Corpus& c, double p, std::uint64_t seed) { return sample(c, {p, seed}); }, py::arg("corpus"),
      py::arg("p"), py::arg("seed"));

  py::class_<SynthCorpus>(m, "SynthCorpus")
      .def_readonly("corpus", &SynthCorpus::corpus)
      .def_readonly("topic_of", &SynthCorpus::topic_of)
      .def_readonly("dim", &SynthCorpus::dim)
      .def("planted_store", &planted_embed);
  m.def(
      "synth_corpus",
      [](std::size_t topics, std::size_t per_topic, std::size_t dim, double sigma, double tau, double degree,
         std::uint64_t seed) { return synth_corpus({topics, per_topic, dim, sigma, tau, degree, seed}); },
      py::arg("topics") = 5, py::arg("records_per_topic") = 200, py::arg("dim") = 128, py::arg("sigma") = 0.1,
      py::arg("tau") = 0.2, py::arg("mean_out_degree") = 8.0, py::arg("seed") = 0);

  py::class_<EmbeddingStore>(m, "EmbeddingStore")
      .def(py::init<std::size_t, std::string>(), py::arg("dim"), py::arg("model") = "")
      .def("add", [](EmbeddingStore& s, std::string id, std::vector<float> v) { s.add(std::move(id), v); })
      .def("__len__", &EmbeddingStore::size)
      .def_property_readonly("dim", &EmbeddingStore::dim)
      .def_property_readonly("model", &EmbeddingStore::model)
      .def_property_readonly("ids", &EmbeddingStore::ids)
      .def("vector", [](const EmbeddingStore& s, const std::string& id) {
        auto v = s.at(id);
        return std::vector<float>(v.begin(), v.end());
      });
  m.def("save_store", &save_store, py::arg("store"), py::arg("path"));
  m.def("load_store", &load_store, py::arg("path"));
  m.def("mock_embed", &mock_embed, py::arg("seed"), py::arg("dim"), py::arg("text"));
  m.def(
      "embed_texts",
      [](const std::vector<std::pair<std::string, std::string>>& texts, const std::string& provider,
         const std::string& endpoint, const std::string& model, std::size_t dim, std::uint64_t seed,
         std::size_t batch_size, std::size_t max_in_flight, std::size_t retry_count, double timeout_s) {
        EmbedderConfig cfg;
        cfg.provider = parse_provider(provider);
        cfg.endpoint = endpoint;
        cfg.model = model;
        cfg.dim = dim;
        cfg.seed = seed;
        cfg.batch_size = batch_size;
        cfg.max_in_flight = max_in_flight;
        cfg.retry_count = retry_count;
        cfg.timeout = std::chrono::milliseconds(static_cast<long>(timeout_s * 1000));
        std::vector<TextItem> items;
        for (const auto& [id, text] : texts) items.push_back({id, text});
        py::gil_scoped_release release;
        return embed_texts(cfg, items);
      },
      py::arg("texts"), py::arg("provider") = "mock", py::arg("endpoint") = "http://localhost:11434",
      py::arg("model") = "mxbai-embed-large:335m", py::arg("dim") = 1024, py::arg("seed") = 0,
      py::arg("batch_size") = 32, py::arg("max_in_flight") = 4, py::arg("retry_count") = 3,
      py::arg("timeout") = 60.0);

  m.def(
      "cosine_distance",
      [](const std::vector<float>& u, const std::vector<float>& v) { return cosine_distance(u, v); }, py::arg("u"),
      py::arg("v"));

  py::class_<SubjectCenters>(m, "SubjectCenters")
      .def_readonly("dim", &SubjectCenters::dim)
      .def("subjects",
           [](const SubjectCenters& c) {
             std::vector<std::string> out;
             for (const auto& [name, unused] : c.subjects) out.push_back(name);
             return out;
           })
      .def("center", [](const SubjectCenters& c, const std::string& s) { return c.subjects.at(s).center; })
      .def("_json", [](const SubjectCenters& c) { return dump(to_json(c)); });
  m.def(
      "subject_centers",
      [](const EmbeddingStore& s, const Corpus& c, std::vector<std::string> exclude) {
        return subject_centers(s, c, {std::move(exclude)});
      },
      py::arg("store"), py::arg("corpus"), py::arg("exclude") = std::vector<std::string>{});
  m.def(
      "_classify_soft",
      [](const std::vector<float>& v, const SubjectCenters& c, double t) { return dump(to_json(classify_soft(v, c, t))); },
      py::arg("vector"), py::arg("centers"), py::arg("temperature") = kDefaultTemperature);

  py::class_<CitationGraph>(m, "CitationGraph")
      .def_property_readonly("node_count", &CitationGraph::node_count)
      .def_property_readonly("edge_count", &CitationGraph::edge_count)
      .def_property_readonly("ids", &CitationGraph::ids)
      .def_readonly("dangling_count", &CitationGraph::dangling_count);
  m.def("build_graph", &build_graph, py::arg("corpus"));
  m.def(
      "shortest_path_distance",
      [](const CitationGraph& g, const std::string& a, const std::string& b, const std::string& mode) {
        return shortest_path_distance(g, a, b, parse_path_mode(mode));
      },
      py::arg("graph"), py::arg("a"), py::arg("b"), py::arg("mode") = "undirected");

  py::class_<PairSample>(m, "PairSample")
      .def_readonly("pairs", &PairSample::pairs)
      .def_readonly("seed", &PairSample::seed)
      .def("__len__", &PairSample::count);
  m.def(
      "sample_pairs", [](const CitationGraph& g, std::size_t n, std::uint64_t seed) { return sample_pairs(g.ids(), n, seed); },
      py::arg("graph"), py::arg("n"), py::arg("seed"));

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); });
  m.def(
      "_correlate_distances",
      [](const EmbeddingStore& s, const CitationGraph& g, const PairSample& p, const std::string& mode,
         std::size_t threads) {
        py::gil_scoped_release release;
        return dump(to_json(correlate_distances(s, g, p, parse_path_mode(mode), threads)));
      },
      py::arg("store"), py::arg("graph"), py::arg("sample"), py::arg("mode") = "undirected", py::arg("threads") = 1);

  py::class_<PcaModel>(m, "PcaModel")
      .def_readonly("dim", &PcaModel::dim)
      .def_readonly("mean", &PcaModel::mean)
      .def_readonly("components", &PcaModel::components)
      .def_readonly("eigenvalues", &PcaModel::eigenvalues)
      .def_readonly("explained_variance_ratios", &PcaModel::explained_variance_ratios)
      .def("project", [](const PcaModel& m, const std::vector<double>& v) -> py::tuple {
        auto p = project_2d(m, std::span<const double>(v));
        return py::make_tuple(p.x, p.y);
      });
  m.def(
      "pca_fit",
      [](const std::vector<std::vector<double>>& rows, std::size_t k) {
        std::size_t dim = 0;
        auto flat = flatten(rows, dim);
        return pca_fit(flat, dim, k);
      },
      py::arg("rows"), py::arg("k"));
  m.def(
      "explained_variance_curve",
      [](const std::vector<std::vector<double>>& rows, std::size_t up_to) {
        std::size_t dim = 0;
        auto flat = flatten(rows, dim);
        return explained_variance_curve(flat, dim, up_to);
      },
      py::arg("rows"), py::arg("up_to"));
  m.def(
      "_kde_hdr_contours",
      [](const std::vector<std::pair<double, double>>& pts, std::vector<double> levels, std::optional<double> bandwidth,
         std::size_t grid_size) -> py::tuple {
        std::vector<Point2> points;
        for (auto [x, y] : pts) points.push_back({x, y});
        KdeOptions opt;
        opt.levels = std::move(levels);
        opt.bandwidth = bandwidth;
        opt.grid_size = grid_size;
        auto out = kde_hdr_contours(points, opt);
        py::list result;
        if (!out.result) return py::make_tuple(py::none(), out.notice);
        for (const auto& level : out.result->levels) {
          py::list rings;
          for (const auto& ring : level.rings) {
            py::list r;
            for (const auto& p : ring) r.append(py::make_tuple(p.x, p.y));
            rings.append(r);
          }
          py::dict d;
          d["mass"] = level.mass;
          d["threshold"] = level.threshold;
          d["area"] = level.area;
          d["rings"] = rings;
          result.append(d);
        }
        return py::make_tuple(result, out.notice);
      },
      py::arg("points"), py::arg("levels"), py::arg("bandwidth") = py::none(), py::arg("grid_size") = 128);

  m.def(
      "_run_command",
      [](const std::string& command, const std::map<std::string, std::string>& settings) {
        pipeline::Settings s;
        for (const auto& [k, v] : settings) s.set(k, v);
        const auto cfg = pipeline::resolve(s);
        py::gil_scoped_release release;
        return dump(pipeline::run_command(command, cfg));
      },
      py::arg("command"), py::arg("settings"));
  m.attr("__version__") = pipeline::kVersion;
}
