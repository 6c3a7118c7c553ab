#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "ftlgan/cli.hpp"
#include "ftlgan/datasets.hpp"
#include "ftlgan/embeddings.hpp"
#include "ftlgan/error.hpp"
#include "ftlgan/evaluation.hpp"
#include "ftlgan/generator.hpp"
#include "ftlgan/losses.hpp"
#include "ftlgan/upsamplers.hpp"

namespace py = pybind11;
using namespace ftlgan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Images cross the boundary as (3, H, W) float64 arrays.
ImageArray to_image(const Array& a) {
  if (a.ndim() != 3 || a.shape(0) != 3) throw InvalidArgument("expected a (3, H, W) array");
  ImageArray img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
  std::memcpy(img.pixels.data(), a.data(), img.pixels.size() * sizeof(double));
  return img;
}

Array to_array(const ImageArray& img) {
  Array out({3, img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.pixels.data(), img.pixels.size() * sizeof(double));
  return out;
}

EmbeddingVector to_embedding(const std::vector<double>& v) { return EmbeddingVector{v, false}; }

}  // namespace

PYBIND11_MODULE(_ftlgan, m) {
  m.doc() = "Face super-resolution with identity-preserving triplet loss";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DegenerateInput>(m, "DegenerateInput", base.ptr());
  py::register_exception<LoadError>(m, "LoadError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  // Images and resampling.
  m.def("read_png", [](const std::filesystem::path& p) { return to_array(read_png(p)); });
  m.def("write_png", [](const std::filesystem::path& p, const Array& a) { write_png(p, to_image(a)); });
  m.def(
      "resize",
      [](const Array& a, int h, int w, const std::string& method) {
        return to_array(resize(to_image(a), h, w, ResampleMethod::parse(method)));
      },
      py::arg("image"), py::arg("height"), py::arg("width"), py::arg("method") = "bicubic");
  m.def(
      "upsample",
      [](const Array& a, const std::string& method) {
        return to_array(upsample_chain(to_image(a), 112, ResampleMethod::parse(method)));
      },
      py::arg("image"), py::arg("method") = "bicubic", "Interpolate a 14/28/56 image to 112x112.");
  m.def("synthetic_degrade", [](const Array& a, int target) { return to_array(synthetic_degrade(to_image(a), target)); });
  m.def("resample_methods", &resample_method_names);

  // Generator.
  py::class_<GeneratorParams>(m, "Generator")
      .def(py::init([](int scale, int n_rrdb, bool toy, std::uint64_t seed) {
             GeneratorConfig c = toy ? GeneratorConfig::toy(scale) : GeneratorConfig{};
             c.scale = scale;
             if (n_rrdb > 0) c.n_rrdb = n_rrdb;
             return init_generator(c, seed);
           }),
           py::arg("scale") = 4, py::arg("n_rrdb") = 0, py::arg("toy") = true, py::arg("seed") = 0)
      .def_static("load", &load_checkpoint)
      .def("save", [](const GeneratorParams& p, const std::filesystem::path& path) { save_checkpoint(path, p); })
      .def_property_readonly("scale", [](const GeneratorParams& p) { return p.config.scale; })
      .def_property_readonly("parameter_count", &GeneratorParams::parameter_count)
      .def_property_readonly("hash", &GeneratorParams::hash)
      .def("forward", [](const GeneratorParams& p, const Array& a) { return to_array(forward(p, to_image(a))); })
      .def(
          "super_resolve",
          [](const GeneratorParams& p, const Array& a, int target) { return to_array(super_resolve(p, to_image(a), target)); },
          py::arg("image"), py::arg("target") = 112);

  // Embeddings.
  py::class_<EmbeddingExtractor>(m, "Extractor")
      .def(py::init([](const std::string& backend, std::optional<std::filesystem::path> weights) {
             return load_extractor(backend, weights);
           }),
           py::arg("backend") = "toy_deterministic", py::arg("weights") = py::none())
      .def_property_readonly("backend", [](const EmbeddingExtractor& e) { return to_string(e.backend()); })
      .def_property_readonly("embed_dim", &EmbeddingExtractor::embed_dim)
      .def_property_readonly("weights_hash", &EmbeddingExtractor::weights_hash)
      .def("embed", [](const EmbeddingExtractor& e, const Array& a) { return e.embed(to_image(a)).values; });
  m.def(
      "normalize", [](const std::vector<double>& v, double alpha) { return normalize(to_embedding(v), alpha).values; },
      py::arg("v"), py::arg("alpha") = 1.0);
  m.def("distance",
        [](const std::vector<double>& a, const std::vector<double>& b) { return distance(to_embedding(a), to_embedding(b)); });

  // Losses.
  m.def(
      "triplet_loss",
      [](const std::vector<double>& a, const std::vector<double>& p, const std::vector<double>& n, double margin) {
        return triplet_loss(to_embedding(a), to_embedding(p), to_embedding(n), margin);
      },
      py::arg("anchor"), py::arg("positive"), py::arg("negative"), py::arg("margin") = 0.2);
  m.def(
      "contrastive_loss",
      [](const std::vector<double>& a, const std::vector<double>& b, int y, double eps_plus, double eps_minus) {
        return contrastive_loss(to_embedding(a), to_embedding(b), y, eps_plus, eps_minus);
      },
      py::arg("a"), py::arg("b"), py::arg("y"), py::arg("eps_plus"), py::arg("eps_minus"));
  m.def("combined_loss", &combined_loss, py::arg("l_percep"), py::arg("l_triplet"), py::arg("alpha") = 0.8,
        py::arg("beta") = 0.2);
  m.def("mse_loss", [](const Array& sr, const Array& hr) { return mse_loss(to_image(sr), to_image(hr)); });

  // Evaluation.
  m.def("dprime", [](const std::vector<double>& g, const std::vector<double>& i) { return dprime(g, i); });
  m.def("roc", [](const std::vector<double>& g, const std::vector<double>& i) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : roc(g, i)) out.emplace_back(p.fmr, p.tpr);
    return out;
  });
  m.def("auc", [](const std::vector<double>& g, const std::vector<double>& i) { return auc(roc(g, i)); });

  // Data.
  m.def(
      "make_synthetic_corpus",
      [](const std::filesystem::path& dir, int identities, int images, std::uint64_t seed) {
        SyntheticCorpusOptions o;
        o.identities = identities;
        o.images_per_identity = images;
        o.seed = seed;
        make_synthetic_corpus(dir, o);
      },
      py::arg("dir"), py::arg("identities") = 32, py::arg("images") = 6, py::arg("seed") = 0);
  m.def(
      "build_resolution_sets",
      [](const std::filesystem::path& corpus, const std::filesystem::path& out, const std::vector<int>& resolutions,
         std::uint64_t seed) { return build_resolution_sets(corpus, out, resolutions, seed).entries.size(); },
      py::arg("corpus"), py::arg("out"), py::arg("resolutions"), py::arg("seed") = 0,
      "Writes the derivative sets and returns the number of manifest entries.");

  // Command line.
  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "ftlgan");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return cli::run(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the ftlgan command line and returns its exit code.");
}
