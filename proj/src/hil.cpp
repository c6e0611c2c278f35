#include "ssdsim/hil.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "ssdsim/errors.hpp"

namespace ssdsim {

Hil::Hil(std::uint64_t capacity_sectors, std::uint32_t queue_depth,
         RequestHandler &handler, std::unique_ptr<QueuePolicy> policy)
    : capacity_sectors_(capacity_sectors),
      queue_depth_(queue_depth),
      handler_(handler),
      policy_(std::move(policy)) {}

SubmitResult Hil::submit(const HostRequest &request) {
  if (request.n_sector == 0) {
    throw OutOfRange(fmt::format("request {} has no sectors", request.id));
  }
  if (request.lba >= capacity_sectors_ ||
      request.n_sector > capacity_sectors_ - request.lba) {
    throw OutOfRange(fmt::format("request {}: LBA {} + {} sectors exceeds capacity {}",
                                 request.id, request.lba, request.n_sector,
                                 capacity_sectors_));
  }
  if (request.arrival_tick < now_) {
    throw std::invalid_argument(
        fmt::format("request {} arrives at {} but the clock is at {}", request.id,
                    request.arrival_tick, now_));
  }
  if (outstanding() >= queue_depth_) return SubmitResult::QueueFull;
  waiting_.push_back(request);
  return SubmitResult::Accepted;
}

std::size_t Hil::dispatch() {
  std::size_t count = 0;
  while (!waiting_.empty()) {
    const auto index = policy_->pick(waiting_);
    const HostRequest request = waiting_.at(index);
    waiting_.erase(waiting_.begin() + static_cast<std::ptrdiff_t>(index));

    // A request arriving in the future is dispatched on arrival.
    const Tick start = std::max(now_, request.arrival_tick);
    const auto result = request.op == HostOp::Read
                            ? handler_.read_transaction(request, start)
                            : handler_.write_transaction(request, start);

    CompletionRecord rec;
    rec.request_id = request.id;
    rec.op = request.op;
    rec.bytes = request.bytes();
    rec.arrival_tick = request.arrival_tick;
    rec.finish_tick = std::max(result.finish_tick, start);
    rec.device_latency = rec.finish_tick - request.arrival_tick;
    rec.breakdown.queueing = start - request.arrival_tick;
    rec.breakdown.firmware = result.firmware_ticks;
    rec.breakdown.flash = rec.device_latency - rec.breakdown.queueing - rec.breakdown.firmware;

    in_flight_index_.emplace(request.id, rec.finish_tick);
    in_flight_.emplace(std::make_pair(rec.finish_tick, request.id),
                       InFlight{request, rec});
    ++count;
  }
  return count;
}

void Hil::advance_to(Tick tick) {
  if (tick < now_) return;
  now_ = tick;
  while (!in_flight_.empty() && in_flight_.begin()->first.first <= now_) {
    auto node = in_flight_.extract(in_flight_.begin());
    const auto &rec = node.mapped().record;
    in_flight_index_.erase(rec.request_id);
    published_order_.push_back(rec.request_id);
    table_.emplace(rec.request_id, rec);
  }
}

std::variant<CompletionRecord, Pending> Hil::poll_completion(RequestId id) const {
  if (auto it = table_.find(id); it != table_.end()) return it->second;
  if (in_flight_index_.count(id) != 0) return Pending{};
  for (const auto &w : waiting_) {
    if (w.id == id) return Pending{};
  }
  throw UnknownRequest(fmt::format("request {} is not known to the HIL", id));
}

std::vector<CompletionRecord> Hil::drain_completed() {
  std::vector<CompletionRecord> out;
  out.reserve(published_order_.size());
  for (auto id : published_order_) {
    auto node = table_.extract(id);
    if (!node.empty()) out.push_back(std::move(node.mapped()));
  }
  published_order_.clear();
  return out;
}

std::optional<Tick> Hil::next_completion_tick() const {
  if (in_flight_.empty()) return std::nullopt;
  return in_flight_.begin()->first.first;
}

}  // namespace ssdsim
