#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swapsim/types.hpp"

namespace swapsim {

Bytes32 sha256(const std::uint8_t* data, std::size_t len);
Bytes32 sha256(const std::vector<std::uint8_t>& data);

/// H(secret) for hashlocks. Fixed to SHA-256 so vectors are portable.
inline Hash hash_secret(const Secret& s) { return sha256(s.data(), s.size()); }

/// Deterministic 32-byte secret derived from a scenario label ("A", "A2", ...).
Secret secret_from_label(const std::string& label);

}  // namespace swapsim
