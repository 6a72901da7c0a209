#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "emojipred/cli.hpp"
#include "emojipred/corpus.hpp"
#include "emojipred/metrics.hpp"
#include "emojipred/textprep.hpp"
#include "emojipred/unicode.hpp"

namespace py = pybind11;
using namespace emojipred;

namespace {

std::vector<std::string> emojis_in(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& sp : unicode::find_emojis(text)) out.push_back(text.substr(sp.begin, sp.end - sp.begin));
  return out;
}

std::vector<std::string> segment(const std::string& tag, const std::map<std::string, std::uint64_t>& counts) {
  return segment_hashtag(tag, SegmentLexicon(SegmentLexicon::CountMap(counts.begin(), counts.end())));
}

std::string metrics_json(const std::vector<ClassId>& preds, const std::vector<ClassId>& golds,
                         int num_classes) {
  return evaluate_predictions(preds, golds, num_classes).to_json().dump();
}

py::tuple run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = cli::run(args, out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

std::vector<py::dict> synthetic(const std::string& preset, std::size_t n, std::uint64_t seed) {
  std::vector<py::dict> out;
  for (const auto& t : generate_synthetic_corpus(SyntheticSpec::preset(preset), n, seed)) {
    py::dict d;
    d["id"] = t.id;
    d["text"] = t.text;
    d["source"] = t.source ? py::object(py::str(*t.source)) : py::object(py::none());
    d["created_at"] = t.timestamp ? py::object(py::str(*t.timestamp)) : py::object(py::none());
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the emojipred package.";

  // Translators registered later are tried first, so subclasses follow the base.
  const auto& error = py::register_exception<Error>(m, "Error");
  py::register_exception<InputError>(m, "InputError", error.ptr());
  py::register_exception<MissingResourceError>(m, "MissingResourceError", error.ptr());
  py::register_exception<ConsistencyError>(m, "ConsistencyError", error.ptr());

  m.def("normalize", [](const std::string& s) { return normalize(s); }, py::arg("text"));
  m.def("tokenize", [](const std::string& s) { return tokenize(s); }, py::arg("text"));
  m.def("extract_hashtags", [](const std::string& s) { return extract_hashtags(s); }, py::arg("text"));
  m.def("find_emojis", &emojis_in, py::arg("text"));
  m.def("segment_hashtag", &segment, py::arg("tag"), py::arg("counts"));
  m.def("metrics_json", &metrics_json, py::arg("preds"), py::arg("golds"), py::arg("num_classes"));
  m.def("synthetic_corpus", &synthetic, py::arg("preset"), py::arg("n"), py::arg("seed") = 1);
  m.def("run_cli", &run_cli, py::arg("args"));
}
