#include "swapsim/contracts.hpp"

#include <stdexcept>

namespace swapsim {

Predicate htlc_predicate(const HtlcSpec& spec) {
  if (spec.payee == spec.payer || spec.payee.empty() || spec.payer.empty()) {
    throw std::invalid_argument("htlc: payee and payer must be distinct");
  }
  return p_any({
      p_all({p_sig(spec.payee), p_preimage(spec.hash)}),
      p_all({p_sig(spec.payer), p_after(spec.expiry)}),
  });
}

Predicate funding_contract_predicate(const PartyId& a, const PartyId& b, const Hash& hash,
                                     const PartyId& refund_party, TimePoint refund_time) {
  if (a == b || a.empty() || b.empty()) {
    throw std::invalid_argument("funding contract: parties must be distinct");
  }
  return p_any({
      p_all({p_sig(a), p_sig(b), p_preimage(hash)}),
      p_all({p_sig(refund_party), p_after(refund_time)}),
  });
}

Predicate anticheat_predicate(const AntiCheatSpec& spec) {
  if (spec.delay < 1) throw std::invalid_argument("anti-cheat delay must be >= 1");
  if (spec.owner == spec.punisher) {
    throw std::invalid_argument("anti-cheat: owner and punisher must be distinct");
  }
  return p_any({
      p_all({p_sig(spec.punisher), p_preimage(spec.punish_hash)}),
      p_all({p_sig(spec.owner), p_after_rel(spec.delay)}),
  });
}

Predicate cancel_expiration_predicate(const PartyId& b, const Hash& cancel_hash,
                                      TimePoint expiry) {
  return p_any({
      p_all({p_sig(b), p_preimage(cancel_hash)}),
      p_all({p_sig(b), p_after(expiry)}),
  });
}

Predicate margin_contract_predicate(const MarginContractSpec& spec) {
  if (!(spec.margin > 0 && spec.margin < spec.principal)) {
    throw std::invalid_argument("margin contract: 0 < margin < principal required");
  }
  if (spec.depositor == spec.beneficiary) {
    throw std::invalid_argument("margin contract: parties must be distinct");
  }
  return p_any({
      p_all({p_sig(spec.depositor), p_sig(spec.beneficiary)}),
      p_all({p_sig(spec.beneficiary), p_after(spec.margin_expiry)}),
  });
}

}  // namespace swapsim
