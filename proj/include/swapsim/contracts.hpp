#pragma once

#include "swapsim/predicate.hpp"
#include "swapsim/types.hpp"

namespace swapsim {

struct HtlcSpec {
  PartyId payee;  // spends with a preimage any time
  PartyId payer;  // spends alone once the timelock expires
  Hash hash{};
  TimePoint expiry = 0;
};

struct AntiCheatSpec {
  PartyId owner;     // collects after a relative delay
  PartyId punisher;  // collects immediately with the counterpart secret
  Hash punish_hash{};
  TimeDelta delay = 1;
};

struct MarginContractSpec {
  PartyId depositor;    // posted the margin
  PartyId beneficiary;  // takes it if no principal arrives by expiry
  Amount margin = 0;
  Amount principal = 0;
  TimePoint margin_expiry = 0;
};

/// Any( All(sig payee, preimage), All(sig payer, after expiry) )
Predicate htlc_predicate(const HtlcSpec& spec);

/// Hashlock branch needs both signatures, so pre-signed children pin the
/// outputs. Refund branch is single-signer after `refund_time`.
Predicate funding_contract_predicate(const PartyId& a, const PartyId& b, const Hash& hash,
                                     const PartyId& refund_party, TimePoint refund_time);

/// Any( All(sig punisher, preimage punish_hash), All(sig owner, rel delay) )
Predicate anticheat_predicate(const AntiCheatSpec& spec);

/// Any( All(sig b, preimage cancel_hash), All(sig b, after expiry) )
Predicate cancel_expiration_predicate(const PartyId& b, const Hash& cancel_hash,
                                      TimePoint expiry);

/// Any( All(sig depositor, sig beneficiary), All(sig beneficiary, after expiry) )
/// The cooperative branch is only ever exercised through pre-signed children
/// (principal deposit with an AnyoneCanPay countersignature, or a re-mark).
Predicate margin_contract_predicate(const MarginContractSpec& spec);

}  // namespace swapsim
