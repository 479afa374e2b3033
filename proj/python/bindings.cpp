#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "flc/classifier.hpp"
#include "flc/container.hpp"
#include "flc/corpus.hpp"
#include "flc/error.hpp"
#include "flc/tokenizer.hpp"

namespace py = pybind11;

namespace {

using VariantArg = std::optional<std::variant<int, std::string>>;

py::bytes compress(const std::string& data, const VariantArg& variant, const std::string& backend,
                     std::uint32_t blockLines, const std::optional<py::bytes>& model, bool embedModel) {
  flc::WriteSettings s;
  s.backend = flc::BackendId::parse(backend);
  s.blockLines = blockLines;
  s.embedModel = embedModel;
  const auto filters = flc::FilterRegistry::fromEnvironment();
  s.filters = &filters;

  std::optional<flc::NlcaModel> loaded;
  if (model) {
    const std::string raw = *model;
    loaded = flc::NlcaModel::deserialize(
        flc::ByteView(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
    s.model = &*loaded;
  }

  // Same defaults as the command line: auto with a model, otherwise variant 7.
  if (!variant) {
    if (!loaded) s.variant = flc::variantFromId(7);
  } else if (const int* id = std::get_if<int>(&*variant)) {
    s.variant = flc::variantFromId(*id);
  } else {
    const std::string& name = std::get<std::string>(*variant);
    if (name == "none") {
      s.transform = false;
    } else if (name != "auto") {
      throw std::invalid_argument("variant must be 0..7, 'auto' or 'none'");
    } else if (!loaded) {
      throw std::invalid_argument("variant 'auto' needs a model");
    }
  }

  std::istringstream in(data);
  std::ostringstream out;
  {
    py::gil_scoped_release release;
    flc::writeArchive(in, s, out);
  }
  return py::bytes(out.str());
}

py::bytes decompress(const std::string& archive) {
  const auto filters = flc::FilterRegistry::fromEnvironment();
  std::istringstream in(archive);
  std::ostringstream out;
  {
    py::gil_scoped_release release;
    flc::readArchive(in, out, &filters);
  }
  return py::bytes(out.str());
}

py::dict verify(const std::string& archive) {
  const auto filters = flc::FilterRegistry::fromEnvironment();
  std::istringstream in(archive);
  flc::VerifyReport r;
  {
    py::gil_scoped_release release;
    r = flc::verifyArchive(in, &filters);
  }
  py::dict d;
  d["ok"] = r.ok;
  d["blocks"] = r.blocks;
  d["error"] = r.errorCode ? py::object(py::str(std::string(flc::errcName(*r.errorCode)))) : py::object(py::none());
  d["error_block"] = r.errorBlock ? py::object(py::int_(*r.errorBlock)) : py::object(py::none());
  d["message"] = r.firstError;
  return d;
}

py::list tokenize(const std::string& line) {
  if (line.find('\n') != std::string::npos) throw std::invalid_argument("tokenize takes a single line without LF");
  py::list out;
  for (const auto& t : flc::tokenize(line).tokens) {
    out.append(py::make_tuple(std::string(flc::tokenClassName(t.cls)), py::bytes(t.text)));
  }
  return out;
}

py::bytes train(const std::vector<std::string>& paths, int k, std::size_t population, std::size_t generations,
                std::uint64_t seed, const std::string& backend, std::uint32_t blockLines, int radius) {
  flc::GaConfig cfg;
  cfg.populationSize = population;
  cfg.generations = generations;
  cfg.seed = seed;
  flc::TrainOptions opts;
  opts.k = k;
  opts.radius = radius;
  const auto filters = flc::FilterRegistry::fromEnvironment();
  flc::Bytes bytes;
  {
    py::gil_scoped_release release;
    const auto training = flc::loadTrainingSet(paths, blockLines, flc::BackendId::parse(backend), &filters);
    bytes = flc::trainModel(training, cfg, opts).model.serialize();
  }
  return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

py::dict modelInfo(const py::bytes& raw) {
  const std::string s = raw;
  const auto m =
      flc::NlcaModel::deserialize(flc::ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  py::list basins;
  for (const auto& b : m.basins) {
    basins.append(py::dict(py::arg("attractor") = b.attractor.toString(), py::arg("variant") = b.variant.id(),
                           py::arg("quality") = b.quality));
  }
  py::dict d;
  d["radius"] = m.rule.radius();
  d["rule_table"] = m.rule.table();
  d["default_variant"] = m.defaultVariant.id();
  d["max_steps"] = m.maxSteps;
  d["basins"] = basins;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the flca log compressor";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> errorType;
  errorType.call_once_and_store_result(
      [&]() { return py::object(py::exception<flc::Error>(m, "FlcaError", PyExc_RuntimeError)); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const flc::Error& e) {
      const py::object& type = errorType.get_stored();
      py::object inst = type(e.what());
      inst.attr("code") = std::string(flc::errcName(e.code()));
      inst.attr("block") = e.blockIndex() ? py::object(py::int_(*e.blockIndex())) : py::object(py::none());
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  m.def("compress", &compress, py::arg("data"), py::kw_only(), py::arg("variant") = py::none(),
        py::arg("backend") = "lz", py::arg("block_lines") = flc::kDefaultBlockLines, py::arg("model") = py::none(),
        py::arg("embed_model") = true, "Compress log bytes into an archive.");
  m.def("decompress", &decompress, py::arg("archive"), "Restore the original bytes of an archive.");
  m.def("verify", &verify, py::arg("archive"), "Check every block without keeping the output.");
  m.def("tokenize", &tokenize, py::arg("line"), "Split one line into (class, bytes) tokens.");
  m.def(
      "classify_token", [](const std::string& t) {
        if (t.empty()) throw std::invalid_argument("empty token");
        return std::string(flc::tokenClassName(flc::classifyToken(t)));
      },
      py::arg("text"));
  m.def(
      "generate_corpus",
      [](const std::string& style, std::uint64_t lines, std::uint64_t seed) {
        return py::bytes(flc::generateCorpus(flc::CorpusSpec{flc::parseCorpusStyle(style), lines, seed}));
      },
      py::arg("style"), py::arg("lines"), py::arg("seed") = 1);
  m.def("train", &train, py::arg("paths"), py::kw_only(), py::arg("k") = flc::kDefaultBasinCount,
        py::arg("population") = 50, py::arg("generations") = 30, py::arg("seed") = 1, py::arg("backend") = "lz",
        py::arg("block_lines") = flc::kDefaultBlockLines, py::arg("radius") = 2,
        "Train a block classifier on log files and return the serialized model.");
  m.def("model_info", &modelInfo, py::arg("model"));
}
