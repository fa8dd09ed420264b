#pragma once

// Market evaluators used by the simulation loop.
//
// FullEngine re-evaluates the whole market after every price change and
// scans for the loser. IncrementalEngine recomputes only what a single price
// change can reach and keeps the loser in an indexed heap. Both use the
// per-agent formulas from market.hpp in the same order, so snapshots and
// loser sequences agree exactly.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "socmarket/loser_queue.hpp"
#include "socmarket/market.hpp"

namespace socmarket {

enum class EngineKind { full, incremental };

std::string_view to_string(EngineKind kind) noexcept;
EngineKind parse_engine_kind(std::string_view text);

// Agents whose quantities may change when one agent's price changes.
//   produce:  the changed agent and its customers (production, wants)
//   supply:   suppliers of `produce` (demand, shares on their customer edges)
//   trade:    produce U supply (traded quantity)
//   profit:   trade U customers(trade)
struct AffectedSets {
  std::vector<AgentId> produce;
  std::vector<AgentId> supply;
  std::vector<AgentId> trade;
  std::vector<AgentId> profit;
};

// Recomputes a snapshot after a single price change. Holds scratch space
// for the affected-set construction; not thread safe.
class IncrementalUpdater {
 public:
  explicit IncrementalUpdater(const TradeNetwork& net);

  // Updates `snap` in place; `snap` must be consistent with `prices` except
  // for `changed`. Returns the agents whose profit was recomputed.
  std::span<const AgentId> apply(MarketSnapshot& snap, AgentId changed, const PriceVector& prices,
                                 const ExpenditureMatrix& wts);

  const AffectedSets& sets() const noexcept { return sets_; }
  // Fills sets() for `changed` without touching any snapshot.
  const AffectedSets& collect(AgentId changed);

 private:
  void add(std::vector<AgentId>& out, std::vector<std::uint32_t>& mark, AgentId id);

  const TradeNetwork* net_;
  AffectedSets sets_;
  std::vector<std::uint32_t> mark_produce_;
  std::vector<std::uint32_t> mark_supply_;
  std::vector<std::uint32_t> mark_trade_;
  std::vector<std::uint32_t> mark_profit_;
  std::uint32_t epoch_ = 0;
};

// Free-function form: copy of `prev` brought up to date for `changed`.
MarketSnapshot incremental_evaluate(const MarketSnapshot& prev, AgentId changed,
                                    const PriceVector& prices, const TradeNetwork& net,
                                    const ExpenditureMatrix& wts);

class MarketEngine {
 public:
  virtual ~MarketEngine() = default;

  virtual EngineKind kind() const noexcept = 0;
  // Full evaluation at `prices`.
  virtual void reset(const PriceVector& prices) = 0;
  // `prices` differs from the last evaluated vector only at `changed`.
  virtual void price_changed(AgentId changed, const PriceVector& prices) = 0;
  virtual AgentId loser() const = 0;
  virtual const MarketSnapshot& snapshot() const noexcept = 0;
};

class FullEngine final : public MarketEngine {
 public:
  FullEngine(const TradeNetwork& net, const ExpenditureMatrix& wts) : net_(&net), wts_(&wts) {}

  EngineKind kind() const noexcept override { return EngineKind::full; }
  void reset(const PriceVector& prices) override;
  void price_changed(AgentId changed, const PriceVector& prices) override;
  AgentId loser() const override { return loser_; }
  const MarketSnapshot& snapshot() const noexcept override { return snap_; }

 private:
  const TradeNetwork* net_;
  const ExpenditureMatrix* wts_;
  MarketSnapshot snap_;
  AgentId loser_ = 0;
};

class IncrementalEngine final : public MarketEngine {
 public:
  // audit_interval > 0 compares against a full evaluation every that many
  // updates and throws ConsistencyError on a mismatch above 1e-10.
  IncrementalEngine(const TradeNetwork& net, const ExpenditureMatrix& wts,
                    std::uint64_t audit_interval = 0);

  EngineKind kind() const noexcept override { return EngineKind::incremental; }
  void reset(const PriceVector& prices) override;
  void price_changed(AgentId changed, const PriceVector& prices) override;
  AgentId loser() const override { return queue_.top(); }
  const MarketSnapshot& snapshot() const noexcept override { return snap_; }

  // Profit set of the last update.
  std::span<const AgentId> last_affected() const noexcept { return last_affected_; }
  void audit(const PriceVector& prices) const;

 private:
  const TradeNetwork* net_;
  const ExpenditureMatrix* wts_;
  IncrementalUpdater updater_;
  MarketSnapshot snap_;
  LoserQueue queue_;
  std::span<const AgentId> last_affected_;
  std::uint64_t audit_interval_;
  std::uint64_t updates_ = 0;
};

std::unique_ptr<MarketEngine> make_engine(EngineKind kind, const TradeNetwork& net,
                                          const ExpenditureMatrix& wts,
                                          std::uint64_t audit_interval = 0);

}  // namespace socmarket
