#include "tensorcert/io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace tensorcert {

namespace {

constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

bool is_little_endian() {
  const std::uint16_t probe = 1;
  unsigned char byte;
  std::memcpy(&byte, &probe, 1);
  return byte == 1;
}

std::string doubles_to_b64(const Eigen::VectorXd& values) {
  const std::size_t bytes = static_cast<std::size_t>(values.size()) * 8;
  std::string raw(bytes, '\0');
  std::memcpy(raw.data(), values.data(), bytes);
  if (!is_little_endian())
    for (std::size_t i = 0; i < bytes; i += 8)
      std::reverse(raw.begin() + i, raw.begin() + i + 8);
  return base64_encode(reinterpret_cast<const unsigned char*>(raw.data()), bytes);
}

Eigen::VectorXd b64_to_doubles(const std::string& b64, const char* field,
                               Eigen::Index expected) {
  const std::string raw = base64_decode(b64);
  if (raw.size() != static_cast<std::size_t>(expected) * 8)
    throw TensorFileError(field, std::string(field) + ": expected " +
                                     std::to_string(expected * 8) + " bytes, got " +
                                     std::to_string(raw.size()));
  Eigen::VectorXd values(expected);
  std::string bytes = raw;
  if (!is_little_endian())
    for (std::size_t i = 0; i < bytes.size(); i += 8)
      std::reverse(bytes.begin() + i, bytes.begin() + i + 8);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

}  // namespace

std::string base64_encode(const unsigned char* data, std::size_t len) {
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  for (std::size_t i = 0; i < len; i += 3) {
    const unsigned b0 = data[i];
    const unsigned b1 = i + 1 < len ? data[i + 1] : 0;
    const unsigned b2 = i + 2 < len ? data[i + 2] : 0;
    out.push_back(kAlphabet[b0 >> 2]);
    out.push_back(kAlphabet[((b0 & 0x3) << 4) | (b1 >> 4)]);
    out.push_back(i + 1 < len ? kAlphabet[((b1 & 0xF) << 2) | (b2 >> 6)] : '=');
    out.push_back(i + 2 < len ? kAlphabet[b2 & 0x3F] : '=');
  }
  return out;
}

std::string base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    if (c == '=') return -1;
    throw std::invalid_argument("base64: invalid character");
  };
  if (text.size() % 4 != 0) throw std::invalid_argument("base64: truncated input");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const int v0 = value_of(text[i]);
    const int v1 = value_of(text[i + 1]);
    const int v2 = value_of(text[i + 2]);
    const int v3 = value_of(text[i + 3]);
    if (v0 < 0 || v1 < 0) throw std::invalid_argument("base64: malformed quad");
    out.push_back(static_cast<char>((v0 << 2) | (v1 >> 4)));
    if (v2 >= 0) out.push_back(static_cast<char>(((v1 & 0xF) << 4) | (v2 >> 2)));
    if (v3 >= 0) out.push_back(static_cast<char>(((v2 & 0x3) << 6) | v3));
  }
  return out;
}

std::string serialize_tensor(const SymmetricTensor3& tensor) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["n"] = tensor.n();
  if (tensor.is_component_form()) {
    const ComponentSet& comps = tensor.components();
    j["kind"] = "components";
    j["m"] = comps.m;
    j["ensemble"] = to_string(comps.ensemble);
    j["seed"] = comps.seed;
    j["noise_norm"] = tensor.noise_norm();
    Eigen::VectorXd flat(static_cast<Eigen::Index>(comps.m) * comps.n);
    for (int i = 0; i < comps.m; ++i)
      flat.segment(static_cast<Eigen::Index>(i) * comps.n, comps.n) =
          comps.vectors.row(i).transpose();
    j["data_b64"] = doubles_to_b64(flat);
    if (tensor.has_noise()) j["noise_b64"] = doubles_to_b64(*tensor.noise());
  } else {
    j["kind"] = "dense";
    j["m"] = 0;
    j["ensemble"] = nullptr;
    j["seed"] = 0;
    j["noise_norm"] = 0.0;
    j["data_b64"] = doubles_to_b64(tensor.dense_entries());
  }
  return j.dump() + "\n";
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end())
    throw TensorFileError(field, std::string("missing header field: ") + field);
  return *it;
}

}  // namespace

SymmetricTensor3 parse_tensor(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw TensorFileError("(document)", std::string("not valid JSON: ") + e.what());
  }
  if (require_field(j, "format_version").get<int>() != 1)
    throw TensorFileError("format_version", "unsupported format_version");
  const std::string kind = require_field(j, "kind").get<std::string>();
  const int n = require_field(j, "n").get<int>();
  if (n < 1) throw TensorFileError("n", "n must be a positive integer");

  if (kind == "dense") {
    Eigen::VectorXd entries = b64_to_doubles(
        require_field(j, "data_b64").get<std::string>(), "data_b64",
        static_cast<Eigen::Index>(n) * n * n);
    // Dense payloads must describe a symmetric tensor.
    for (int i = 0; i < n; ++i)
      for (int jj = i; jj < n; ++jj)
        for (int k = jj; k < n; ++k) {
          const double v = entries[dense_index(n, i, jj, k)];
          const int idx[3] = {i, jj, k};
          int perm[3] = {0, 1, 2};
          do {
            if (std::abs(entries[dense_index(n, idx[perm[0]], idx[perm[1]],
                                             idx[perm[2]])] -
                         v) > 1e-12)
              throw TensorFileError("data_b64",
                                    "dense entries are not permutation-symmetric");
          } while (std::next_permutation(perm, perm + 3));
        }
    return SymmetricTensor3::dense(n, std::move(entries));
  }
  if (kind != "components")
    throw TensorFileError("kind", "kind must be \"components\" or \"dense\"");

  const int m = require_field(j, "m").get<int>();
  if (m < 1) throw TensorFileError("m", "m must be a positive integer");
  ComponentSet comps;
  comps.n = n;
  comps.m = m;
  try {
    comps.ensemble =
        ensemble_from_string(require_field(j, "ensemble").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw TensorFileError("ensemble", e.what());
  }
  comps.seed = require_field(j, "seed").get<std::uint64_t>();
  const double noise_norm = require_field(j, "noise_norm").get<double>();
  if (noise_norm < 0.0)
    throw TensorFileError("noise_norm", "noise_norm must be nonnegative");

  const Eigen::VectorXd flat = b64_to_doubles(
      require_field(j, "data_b64").get<std::string>(), "data_b64",
      static_cast<Eigen::Index>(m) * n);
  comps.vectors.resize(m, n);
  for (int i = 0; i < m; ++i)
    comps.vectors.row(i) = flat.segment(static_cast<Eigen::Index>(i) * n, n).transpose();
  try {
    comps.validate();
  } catch (const std::invalid_argument& e) {
    throw TensorFileError("data_b64", e.what());
  }

  SymmetricTensor3 tensor = SymmetricTensor3::from_components(std::move(comps));
  if (j.contains("noise_b64")) {
    Eigen::VectorXd noise =
        b64_to_doubles(j["noise_b64"].get<std::string>(), "noise_b64",
                       static_cast<Eigen::Index>(n) * n * n);
    tensor = SymmetricTensor3::with_noise(std::move(tensor), std::move(noise), noise_norm);
  } else if (noise_norm != 0.0) {
    throw TensorFileError("noise_norm", "noise_norm > 0 but no noise_b64 payload");
  }
  return tensor;
}

void write_tensor_file(const std::string& path, const SymmetricTensor3& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << serialize_tensor(tensor);
}

SymmetricTensor3 read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_tensor(buffer.str());
}

}  // namespace tensorcert
