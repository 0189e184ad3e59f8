#pragma once

#include <string>

#include "tensorcert/tensor.hpp"

namespace tensorcert {

/// Raised on malformed tensor files; `field` names the offending header
/// entry so the CLI can point at it.
class TensorFileError : public std::runtime_error {
 public:
  TensorFileError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Serialize to the tensor/component file format: a single JSON object with
/// header fields {format_version, kind, n, m, ensemble, seed, noise_norm}
/// and base64 blobs of little-endian float64s ("data_b64"; row-major A for
/// components, lexicographic (i,j,k) for dense; "noise_b64" for a dense
/// noise term riding on a component-form tensor). Round-trips bit-exactly.
std::string serialize_tensor(const SymmetricTensor3& tensor);
SymmetricTensor3 parse_tensor(const std::string& text);

void write_tensor_file(const std::string& path, const SymmetricTensor3& tensor);
SymmetricTensor3 read_tensor_file(const std::string& path);

std::string base64_encode(const unsigned char* data, std::size_t len);
std::string base64_decode(const std::string& text);

}  // namespace tensorcert
