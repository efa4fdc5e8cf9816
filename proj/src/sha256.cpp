#include "swapsim/sha256.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace swapsim {

Bytes32 sha256(const std::uint8_t* data, std::size_t len) {
  Bytes32 out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 ||
      out_len != out.size()) {
    throw std::runtime_error("sha256 failed");
  }
  return out;
}

Bytes32 sha256(const std::vector<std::uint8_t>& data) {
  return sha256(data.data(), data.size());
}

Secret secret_from_label(const std::string& label) {
  const std::string tagged = "swapsim.secret." + label;
  return sha256(reinterpret_cast<const std::uint8_t*>(tagged.data()), tagged.size());
}

}  // namespace swapsim
