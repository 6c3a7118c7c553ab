#include "ftlgan/weights_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <memory>

#include "ftlgan/error.hpp"

static_assert(std::endian::native == std::endian::little, "weight files assume a little-endian host");

namespace ftlgan {

namespace {

constexpr std::array<char, 8> kMagic{'F', 'T', 'L', 'G', 'A', 'N', 'W', '1'};

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string data_digest(std::span<const NamedArray> arrays) {
  Sha256 h;
  for (const auto& a : arrays) h.update(a.value.data(), a.value.size() * sizeof(double));
  return h.hex();
}

}  // namespace

std::string sha256_hex(std::span<const unsigned char> bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string hash_arrays(std::span<const NamedArray> arrays) {
  Sha256 h;
  for (const auto& a : arrays) {
    h.update(a.name.data(), a.name.size() + 1);
    for (int d : a.value.shape()) h.update(&d, sizeof d);
    h.update(a.value.data(), a.value.size() * sizeof(double));
  }
  return h.hex();
}

void save_weight_file(const std::filesystem::path& path, const WeightFile& file) {
  nlohmann::json header;
  header["meta"] = file.meta;
  header["arrays"] = nlohmann::json::array();
  for (const auto& a : file.arrays) header["arrays"].push_back({{"name", a.name}, {"shape", a.value.shape()}});
  header["sha256"] = data_digest(file.arrays);
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write weight file " + path.string());
  out.write(kMagic.data(), kMagic.size());
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& a : file.arrays) {
    out.write(reinterpret_cast<const char*>(a.value.data()),
              static_cast<std::streamsize>(a.value.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing weight file " + path.string());
}

WeightFile load_weight_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("weight file not found: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw LoadError("not a weight file (bad magic): " + path.string());
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1u << 26)) throw LoadError("corrupt weight file header: " + path.string());
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw LoadError("truncated weight file header: " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("unparseable weight file header in " + path.string() + ": " + e.what());
  }

  WeightFile file;
  file.meta = header.value("meta", nlohmann::json::object());
  for (const auto& entry : header.at("arrays")) {
    std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw LoadError("truncated weight data in " + path.string());
    file.arrays.push_back({entry.at("name").get<std::string>(), std::move(t)});
  }
  if (data_digest(file.arrays) != header.value("sha256", std::string{})) {
    throw LoadError("checksum mismatch in " + path.string());
  }
  return file;
}

}  // namespace ftlgan
