#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "../support/oracles.hpp"
#include "ftlgan/error.hpp"
#include "ftlgan/generator.hpp"
#include "ftlgan/kernels.hpp"
#include "ftlgan/upsamplers.hpp"

using namespace ftlgan;
namespace fs = std::filesystem;

TEST_CASE("parameter count equals the closed form from layer shapes") {
  for (int scale : {2, 4, 8}) {
    for (auto kind : {UpsampleKind::subpixel, UpsampleKind::transposed}) {
      GeneratorConfig c = GeneratorConfig::toy(scale);
      c.upsample_kind = kind;
      CHECK(init_generator(c, 1).parameter_count() == oracle::generator_parameter_count(c));
    }
  }
  const GeneratorConfig toy = GeneratorConfig::toy(2);
  CHECK(toy.n_rrdb == 2);
  CHECK(toy.base_channels == 16);
  CHECK(toy.growth_channels == 8);
  // conv_first 448, 2 RRDBs x 3 dense blocks x 15024, trunk 2320, one x2 stage 9280,
  // hr_conv 2320, conv_last 435.
  CHECK(oracle::generator_parameter_count(toy) == 104947);
}

TEST_CASE("init is deterministic per seed") {
  const auto c = GeneratorConfig::toy(4);
  CHECK(init_generator(c, 5).hash() == init_generator(c, 5).hash());
  CHECK(init_generator(c, 5).hash() != init_generator(c, 6).hash());
}

TEST_CASE("config validation") {
  GeneratorConfig c = GeneratorConfig::toy(2);
  c.n_rrdb = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = GeneratorConfig::toy(2);
  c.scale = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.scale = 16;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("output is scale times the input for both upsampling kinds") {
  std::mt19937_64 rng(1);
  for (auto kind : {UpsampleKind::subpixel, UpsampleKind::transposed}) {
    for (int s : {2, 4, 8}) {
      GeneratorConfig c = GeneratorConfig::toy(s);
      c.n_rrdb = 1;
      c.upsample_kind = kind;
      const auto p = init_generator(c, 2);
      const ImageArray out = forward(p, oracle::random_image(5, 3, rng));
      CHECK(out.height() == 5 * s);
      CHECK(out.width() == 3 * s);
    }
  }
  const auto p8 = init_generator(GeneratorConfig::toy(8), 3);
  CHECK(super_resolve(p8, oracle::random_image(14, 14, rng)).height() == 112);
  CHECK_THROWS_AS(super_resolve(p8, oracle::random_image(28, 28, rng)), InvalidArgument);
}

TEST_CASE("untrained output stays close to the bicubic skip") {
  std::mt19937_64 rng(4);
  const auto p = init_generator(GeneratorConfig::toy(4), 9);
  const ImageArray lr = oracle::random_image(28, 28, rng);
  const ImageArray sr = forward(p, lr, false);
  const ImageArray bic = resize(lr, 112, 112, ResampleMethod::bicubic());
  double l1 = 0;
  for (std::size_t i = 0; i < sr.pixels.size(); ++i) l1 += std::abs(sr.pixels[i] - bic.pixels[i]);
  CHECK(l1 / sr.pixels.size() < 0.05);
}

TEST_CASE("transposed upsample") {
  SUBCASE("zero input with zero bias gives zero") {
    const Tensor w({2, 2, 3, 3}, 0.3);
    const Tensor out = transposed_upsample(Tensor({2, 3, 3}), w, Tensor({2}), 2);
    CHECK(out.shape() == std::vector<int>{2, 6, 6});
    for (double v : out.values()) CHECK(v == 0.0);
  }
  SUBCASE("1x1 input lands only on the kernel footprint") {
    // One channel, value 2, kernel with distinct taps. After zero insertion the sample sits
    // at (0,0) of a 2x2 grid; a padded 3x3 convolution reaches (0,0),(0,1),(1,0),(1,1) with
    // the kernel taps at offsets (1,1),(1,0),(0,1),(0,0).
    Tensor w({1, 1, 3, 3});
    for (int k = 0; k < 9; ++k) w[k] = k + 1;
    const Tensor out = transposed_upsample(Tensor({1, 1, 1}, 2.0), w, Tensor({1}), 2);
    CHECK(out.at(0, 0, 0) == 2.0 * 5);
    CHECK(out.at(0, 0, 1) == 2.0 * 4);
    CHECK(out.at(0, 1, 0) == 2.0 * 2);
    CHECK(out.at(0, 1, 1) == 2.0 * 1);
  }
  CHECK_THROWS_AS(transposed_upsample(Tensor({1, 2, 2}), Tensor({1, 1, 3, 3}), Tensor({1}), 1), InvalidArgument);
}

TEST_CASE("subpixel upsample is the pixel shuffle") {
  const Tensor x({4, 1, 1}, std::vector<double>{1, 2, 3, 4});
  CHECK(subpixel_upsample(x, 2).storage() == std::vector<double>{1, 2, 3, 4});
  CHECK_THROWS_AS(subpixel_upsample(Tensor({6, 2, 2}), 2), InvalidArgument);
}

TEST_CASE("directional derivative of the mean output matches central differences") {
  std::mt19937_64 rng(7);
  GeneratorConfig c = GeneratorConfig::toy(2);
  const GeneratorParams p = init_generator(c, 11);
  const ImageArray lr = oracle::random_image(6, 6, rng);

  auto leaves = bind_parameters(p, true);
  const ad::Var out = generator_graph(c, leaves, ad::Var::constant(lr.pixels));
  const double n = static_cast<double>(out.value().size());
  ad::backward(out, Tensor(out.value().shape(), 1.0 / n));

  auto mean_out = [&](const GeneratorParams& q) {
    return forward(q, lr, false).pixels.sum() / n;
  };
  for (std::size_t k : {std::size_t{0}, p.arrays.size() / 2, p.arrays.size() - 2}) {
    const Tensor dir = oracle::random_tensor(p.arrays[k].value.shape(), rng, -1, 1);
    double analytic = 0;
    for (std::size_t i = 0; i < dir.size(); ++i) analytic += leaves[k].grad()[i] * dir[i];
    const double eps = 1e-4;
    GeneratorParams plus = p, minus = p;
    for (std::size_t i = 0; i < dir.size(); ++i) {
      plus.arrays[k].value[i] += eps * dir[i];
      minus.arrays[k].value[i] -= eps * dir[i];
    }
    const double fd = (mean_out(plus) - mean_out(minus)) / (2 * eps);
    INFO(p.arrays[k].name);
    CHECK(oracle::rel_err(analytic, fd) < 1e-3);
  }
}

TEST_CASE("checkpoint round trip is bit exact") {
  const fs::path dir = fs::temp_directory_path() / "ftlgan_gen_ckpt";
  fs::remove_all(dir);
  GeneratorConfig c = GeneratorConfig::toy(4);
  c.upsample_kind = UpsampleKind::transposed;
  const auto p = init_generator(c, 21);
  save_checkpoint(dir / "g.ftw", p);
  const auto q = load_checkpoint(dir / "g.ftw");
  CHECK(q.config == c);
  REQUIRE(q.arrays.size() == p.arrays.size());
  for (std::size_t k = 0; k < p.arrays.size(); ++k) {
    CHECK(q.arrays[k].name == p.arrays[k].name);
    CHECK(q.arrays[k].value.shape() == p.arrays[k].value.shape());
    CHECK(std::memcmp(q.arrays[k].value.data(), p.arrays[k].value.data(), p.arrays[k].value.size() * sizeof(double)) == 0);
  }
  CHECK(q.hash() == p.hash());
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ftw"), LoadError);
  fs::remove_all(dir);
}
