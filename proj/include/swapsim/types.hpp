#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace swapsim {

// Parties and chains are identified by short names. Names order events:
// simultaneous actions settle in (time, chain, party) order, so keep them
// lowercase ASCII in scenarios.
using PartyId = std::string;
using ChainId = std::string;

// One global discrete clock shared by all chains.
using TimePoint = std::uint64_t;
using TimeDelta = std::uint64_t;

// Amounts are integer base units: 1 coin = 1,000,000 base units.
using Amount = std::int64_t;
inline constexpr Amount kCoin = 1'000'000;

using Bytes32 = std::array<std::uint8_t, 32>;
using Secret = Bytes32;
using Hash = Bytes32;
using Digest = Bytes32;

std::string hex(const Bytes32& b);
std::string hex8(const Bytes32& b);  // first 4 bytes, for traces
Bytes32 from_hex(const std::string& s);

// "1.5" -> 1500000; rejects more than 6 decimals and negative values.
Amount parse_amount(const std::string& s);
std::string format_amount(Amount a);  // 1500000 -> "1.500000"

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace swapsim
