#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "../support/oracles.hpp"
#include "ftlgan/embeddings.hpp"
#include "ftlgan/error.hpp"

using namespace ftlgan;
namespace fs = std::filesystem;

TEST_CASE("normalize") {
  const EmbeddingVector v{{3.0, 4.0}, false};
  const EmbeddingVector n = normalize(v);
  CHECK(n.values[0] == doctest::Approx(0.6));
  CHECK(n.values[1] == doctest::Approx(0.8));
  CHECK(n.normalized);
  const EmbeddingVector nn = normalize(n);
  CHECK(nn.values[0] == doctest::Approx(n.values[0]).epsilon(1e-15));
  CHECK(normalize(v, 2.0).values[1] == doctest::Approx(1.6));
  CHECK_THROWS_AS(normalize(EmbeddingVector{{0.0, 0.0}, false}), DegenerateInput);
}

TEST_CASE("distance") {
  const EmbeddingVector a{{1.0, 0.0}, false}, b{{0.0, 1.0}, false};
  CHECK(distance(a, a) == 0.0);
  CHECK(distance(a, b) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(distance(a, EmbeddingVector{{1.0}, false}), InvalidArgument);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int k = 0; k < 1000; ++k) {
    EmbeddingVector x{{g(rng), g(rng), g(rng)}, false}, y{{g(rng), g(rng), g(rng)}, false};
    CHECK(distance(x, y) == distance(y, x));
  }
}

TEST_CASE("toy extractor contract") {
  const auto ex = load_extractor("toy_deterministic");
  CHECK(ex.embed_dim() == 64);
  CHECK(ex.frozen());
  std::mt19937_64 rng(2);
  const ImageArray img = oracle::random_image(112, 112, rng);
  CHECK(ex.embed(img).values == ex.embed(img).values);
  const auto zero = ex.embed(ImageArray(112, 112, 0.0));
  const auto one = ex.embed(ImageArray(112, 112, 1.0));
  CHECK(distance(zero, one) > 0.0);
  CHECK_THROWS_AS(ex.embed(ImageArray(56, 56, 0.5)), InvalidArgument);
  CHECK(load_extractor("toy_deterministic").weights_hash() == ex.weights_hash());
  CHECK(load_extractor("toy_angular").weights_hash() != ex.weights_hash());
}

TEST_CASE("gradient of squared embedding norm matches finite differences") {
  for (const char* backend : {"toy_deterministic", "toy_angular"}) {
    const auto ex = load_extractor(backend);
    std::mt19937_64 rng(3);
    const ImageArray img = oracle::random_image(112, 112, rng);
    ad::Var x = ad::Var::leaf(img.pixels);
    const ad::Var e = ex.embed_graph(x);
    Tensor seed = e.value();
    seed *= 2.0;
    ad::backward(e, seed);
    auto sq = [&](const Tensor& t) {
      double s = 0;
      for (double v : ex.embed(ImageArray(t)).values) s += v * v;
      return s;
    };
    const double eps = backend == std::string("toy_angular") ? 1e-7 : 1e-5;
    for (std::size_t i : {std::size_t{5}, std::size_t{20000}, std::size_t{37000}}) {
      Tensor p = img.pixels, m = img.pixels;
      p[i] += eps;
      m[i] -= eps;
      const double fd = (sq(p) - sq(m)) / (2 * eps);
      INFO(backend << " pixel " << i);
      CHECK(oracle::rel_err(x.grad()[i], fd, 1e-6) < 1e-3);
    }
  }
}

TEST_CASE("angular toy backend has much larger input gradients") {
  std::mt19937_64 rng(4);
  const ImageArray img = oracle::random_image(112, 112, rng);
  auto grad_norm = [&](const char* backend) {
    const auto ex = load_extractor(backend);
    ad::Var x = ad::Var::leaf(img.pixels);
    const ad::Var e = ad::l2_normalize(ex.embed_graph(x));
    ad::backward(e, Tensor(e.value().shape(), 1.0));
    return std::sqrt(x.grad().squared_norm());
  };
  CHECK(grad_norm("toy_angular") > 10.0 * grad_norm("toy_deterministic"));
}

TEST_CASE("pretrained backends need a weight file") {
  const fs::path dir = fs::temp_directory_path() / "ftlgan_weights_test";
  fs::remove_all(dir);
  try {
    load_extractor(ExtractorBackend::facenet_pretrained, dir / "facenet_pretrained.ftw");
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("facenet_pretrained.ftw") != std::string::npos);
  }
  // A file written in the container format loads and embeds at 512 dimensions.
  const auto arch = default_arch(ExtractorBackend::facenet_pretrained);
  CHECK(arch.embed_dim == 512);
  ConvStackArch small = arch;
  small.channels = {4, 4};
  small.embed_dim = 512;
  const auto made = make_seeded_extractor(ExtractorBackend::facenet_pretrained, small, 77);
  save_extractor(dir / "facenet_pretrained.ftw", made);
  const auto loaded = load_extractor(ExtractorBackend::facenet_pretrained, dir / "facenet_pretrained.ftw");
  CHECK(loaded.weights_hash() == made.weights_hash());
  CHECK(loaded.embed(ImageArray(112, 112, 0.3)).dim() == 512);
  CHECK_THROWS_AS(parse_backend("vgg"), InvalidArgument);
  fs::remove_all(dir);
}
