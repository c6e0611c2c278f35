#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ssdsim/types.hpp"

namespace ssdsim {

struct HostRequest {
  RequestId id = 0;
  HostOp op = HostOp::Read;
  std::uint64_t lba = 0;  // 512-byte sectors
  std::uint32_t n_sector = 1;
  Tick arrival_tick = 0;

  std::uint64_t bytes() const { return std::uint64_t{n_sector} * kSectorSize; }
};

struct LatencyBreakdown {
  Tick queueing = 0;  // arrival -> handed to the FTL
  Tick firmware = 0;  // waiting on GC / merges before host pages could go
  Tick flash = 0;     // remaining time in flash transactions

  bool operator==(const LatencyBreakdown &) const = default;
};

struct CompletionRecord {
  RequestId request_id = 0;
  HostOp op = HostOp::Read;
  std::uint64_t bytes = 0;
  Tick arrival_tick = 0;
  Tick finish_tick = 0;
  Tick device_latency = 0;
  LatencyBreakdown breakdown;

  bool operator==(const CompletionRecord &) const = default;
};

struct Pending {
  bool operator==(const Pending &) const = default;
};

// What the layer below reports after servicing a request.
struct DispatchResult {
  Tick finish_tick = 0;     // max over every spawned flash transaction
  Tick firmware_ticks = 0;  // part of the latency spent waiting on GC
};

/// Lower-layer entry points. The FTL implements this.
class RequestHandler {
 public:
  virtual ~RequestHandler() = default;
  virtual DispatchResult read_transaction(const HostRequest &request, Tick now) = 0;
  virtual DispatchResult write_transaction(const HostRequest &request, Tick now) = 0;
};

/// Extension point for request reordering. Returns the index into the
/// waiting queue of the request to dispatch next.
class QueuePolicy {
 public:
  virtual ~QueuePolicy() = default;
  virtual std::size_t pick(std::span<const HostRequest> waiting) const = 0;
};

class FcfsPolicy final : public QueuePolicy {
 public:
  std::size_t pick(std::span<const HostRequest>) const override { return 0; }
};

enum class SubmitResult { Accepted, QueueFull };

/// Host interface layer: a bounded device queue in front of the FTL and a
/// latency map table that publishes completions once simulated time has
/// reached their finish tick.
///
/// A slot stays occupied from submit() until the request completes.
/// Completion records persist in the table until drained.
class Hil {
 public:
  Hil(std::uint64_t capacity_sectors, std::uint32_t queue_depth,
      RequestHandler &handler,
      std::unique_ptr<QueuePolicy> policy = std::make_unique<FcfsPolicy>());

  // Throws OutOfRange for an empty request or one past the exported
  // capacity, and std::invalid_argument if arrival_tick is in the past.
  SubmitResult submit(const HostRequest &request);

  // Hands every waiting request to the FTL at the current tick, in the
  // order chosen by the queue policy. Returns how many were dispatched.
  std::size_t dispatch();

  // Moves the clock forward and publishes completions with finish <= tick.
  void advance_to(Tick tick);

  // Throws UnknownRequest for ids never accepted (or already drained).
  std::variant<CompletionRecord, Pending> poll_completion(RequestId id) const;

  // Removes and returns published records in completion order.
  std::vector<CompletionRecord> drain_completed();

  std::optional<Tick> next_completion_tick() const;
  Tick now() const { return now_; }
  std::size_t outstanding() const { return waiting_.size() + in_flight_.size(); }
  std::uint32_t queue_depth() const { return queue_depth_; }
  std::uint64_t capacity_sectors() const { return capacity_sectors_; }

 private:
  struct InFlight {
    HostRequest request;
    CompletionRecord record;
  };

  std::uint64_t capacity_sectors_;
  std::uint32_t queue_depth_;
  RequestHandler &handler_;
  std::unique_ptr<QueuePolicy> policy_;
  Tick now_ = 0;

  std::vector<HostRequest> waiting_;
  // (finish_tick, id) -> request; ordered so completions publish in time order.
  std::map<std::pair<Tick, RequestId>, InFlight> in_flight_;
  std::map<RequestId, Tick> in_flight_index_;
  std::map<RequestId, CompletionRecord> table_;
  std::vector<RequestId> published_order_;
};

}  // namespace ssdsim
