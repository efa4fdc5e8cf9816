#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swapsim/engine.hpp"
#include "swapsim/price.hpp"

namespace swapsim {

enum class Numeraire { ACoin, BCoin };

enum class DefaultChoice { Honor, Default };

struct MarginPolicy {
  Amount threshold = 0;  // max tolerable default gain, in a_chain base units
  Amount headroom = 0;
  TimeDelta remark_interval = 7;  // maps to M; >= 2

  void validate() const;
};

/// Immediate-exercise value of a fixed-margin swaption at ratio r, not
/// counting margin deposits:
///   ACoin numeraire: max(0, min(m_b*r, p_b*r - p_a))
///   BCoin numeraire: the same divided by r.
Rational intrinsic_value_exact(const SwaptionTerms& terms, const Rational& r, Numeraire num);

/// Base-unit amount; payouts round down.
Amount intrinsic_value(const SwaptionTerms& terms, const Rational& r, Numeraire num);

/// Strategic-default rule at ratio r. The writer defaults iff the exercise
/// loss strictly exceeds the margin value; the holder compares depositing
/// (then playing on) with forfeiting the margin. Ties honor. With equal
/// margin-to-principal ratios the holder always honors.
DefaultChoice default_decision(const SwaptionTerms& terms, const Rational& r,
                               const PartyId& party);

struct PayoffPoint {
  Rational r;
  Rational value;   // exact, in the chosen numeraire
  Amount amount;    // rounded down to base units
};

std::vector<Rational> make_grid(const Rational& lo, const Rational& hi, const Rational& step);
std::vector<PayoffPoint> payoff_curve(const SwaptionTerms& terms,
                                      const std::vector<Rational>& grid, Numeraire num);
std::string payoff_table_text(const std::vector<PayoffPoint>& curve);

/// Call-spread equivalent of the fixed-margin payoff: long q1 calls struck at
/// k1 = p_a/p_b minus short q2 calls struck at the default boundary
/// k2 = p_a/(p_b - m_b). When m_b = p_b the short leg vanishes.
struct CallSpread {
  Rational k1;
  Amount q1 = 0;  // b_chain units
  Rational k2;
  Amount q2 = 0;

  Rational payoff_acoin(const Rational& r) const;
};

CallSpread decompose(const SwaptionTerms& terms);

/// Smallest margin (base units, rounded up) keeping the current-price
/// default gain at or below policy.threshold, plus headroom.
Amount required_margin(const SwaptionTerms& terms, const Rational& r, const MarginPolicy& policy);

/// A live on-chain margin contract, addressable for re-marking.
struct MarginContractHandle {
  ChainId chain;
  OutPoint outpoint{};
  MarginContractSpec spec;
};

struct RemarkResult {
  bool changed = false;
  bool impending_default = false;  // wallet could not cover the increase
  MarginContractHandle contract;   // new handle when changed, else the old one
};

/// Cooperative atomic cancel-and-recreate of a margin contract at ratio r.
/// Margin top-ups come from the depositor's wallet; releases return to it.
/// A non-consenting counterparty leaves the contract unchanged.
RemarkResult remark(World& world, const MarginContractHandle& contract, const Rational& r,
                    const MarginPolicy& policy, const SwaptionTerms& terms,
                    bool counterparty_consents);

/// Two margined swaptions with mirrored roles opened atomically under one
/// funding secret: a long call plus a short put, i.e. a futures position.
RunResult open_future(World& world, const SwaptionTerms& leg1_terms,
                      const StrategyTable& strategies, const PricePath& prices);

SwaptionTerms mirror_terms(const SwaptionTerms& t);

/// Value of `x` units on `chain` in a_chain terms at ratio r (two-chain worlds).
Rational chain_value(Amount x, const ChainId& chain, const ChainId& canon_a, const Rational& r);

/// Plays the protocol honestly except for price-driven choices: exercise only
/// strictly in the money, deposit or default per default_decision.
class RationalSwaptionStrategy : public Strategy {
 public:
  RationalSwaptionStrategy(PartyId self, SwaptionTerms leg1, PricePath prices,
                           std::optional<SwaptionTerms> leg2 = std::nullopt);
  MoveOption decide(const DecisionPoint& dp) override;

 private:
  PartyId self_;
  SwaptionTerms leg1_;
  std::optional<SwaptionTerms> leg2_;
  PricePath prices_;
};

StrategyTable rational_strategies(const SwaptionTerms& terms, const PricePath& prices);

/// Strategies covering both legs of a future (leg2 = mirror of leg1).
StrategyTable rational_future_strategies(const SwaptionTerms& leg1, const PricePath& prices);

/// Wallets for a two-leg future: the holder funds a_chain for both legs,
/// the writer funds b_chain for both.
void seed_for_future(World& world, const SwaptionTerms& leg1);

}  // namespace swapsim
