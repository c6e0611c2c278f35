#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "ssdsim/config.hpp"
#include "ssdsim/hil.hpp"
#include "ssdsim/pal.hpp"
#include "ssdsim/types.hpp"

namespace ssdsim {

struct SubRequest {
  RequestId parent_id = 0;
  SubOp op = SubOp::Read;
  Lpn lpn = 0;
  std::optional<Ppn> ppn;
  bool read_modify_write = false;  // read half of a partial-page write
  Tick issue_tick = 0;
  Tick finish_tick = 0;
};

// Page-granularity pieces of a host request, in LPN order. A write that
// only partly covers a page is preceded by a read of that page.
std::vector<SubRequest> split_request(const HostRequest &request,
                                      std::uint32_t page_size);

enum class BlockRole : std::uint8_t { Free, Data, Log };

struct BlockMeta {
  BlockRole role = BlockRole::Free;
  std::uint32_t erase_count = 0;
  std::uint64_t set = 0;
  std::uint64_t logical_block = 0;  // data blocks only
  std::uint32_t write_pointer = 0;  // next programmable page
  std::uint32_t valid_count = 0;
  std::uint32_t programmed_count = 0;
  std::vector<std::uint64_t> valid_bits;
  std::vector<std::uint64_t> programmed_bits;
  std::vector<Lpn> page_lpn;  // log blocks only

  std::uint32_t invalid_count() const { return programmed_count - valid_count; }
  bool is_valid(std::uint32_t page) const {
    return (valid_bits[page >> 6] >> (page & 63)) & 1u;
  }
  bool is_programmed(std::uint32_t page) const {
    return (programmed_bits[page >> 6] >> (page & 63)) & 1u;
  }
};

// Returns a block with minimal erase count, lowest id on ties.
// Throws EmptyPool when pool is empty.
BlockId wear_leveling_select(std::span<const BlockId> pool,
                             std::span<const BlockMeta> blocks);

struct FtlPage {
  BlockId block = kNoBlock;
  std::uint32_t page = 0;

  bool operator==(const FtlPage &) const = default;
};

struct PageCopy {
  Lpn lpn = 0;
  FtlPage from;
  FtlPage to;
};

enum class ReclaimKind : std::uint8_t {
  Compaction,  // GC: log victim's valid pages appended to the set's log space
  DataMerge,   // GC: data victim rebuilt with its logical block's latest pages
  LogMerge,    // full merge of every logical block with pages in a log block
};

struct ReclaimJob {
  ReclaimKind kind = ReclaimKind::Compaction;
  BlockId victim = kNoBlock;
  std::vector<PageCopy> copies;
  std::vector<BlockId> erased;
};

struct GcDecision {
  BlockId victim = kNoBlock;
  std::uint32_t victim_invalid = 0;
  bool fallback = false;  // no block had invalid pages; a log block is merged
};

struct WriteResult {
  FtlPage placed;
  std::optional<FtlPage> previous;
  std::vector<ReclaimJob> jobs;
  bool gc_ran = false;
};

struct MappingGeometry {
  std::uint64_t pages_per_block = 0;  // FTL (super)block
  std::uint32_t blocks = 0;
  std::uint64_t logical_pages = 0;
  std::uint64_t logical_blocks = 0;
  std::uint32_t blocks_per_set = 0;  // clamped to logical_blocks
  std::uint32_t log_blocks_per_set = 0;
  std::uint64_t sets = 0;
  std::uint32_t gc_threshold_blocks = 0;

  static MappingGeometry from(const SsdConfig &config);
};

struct SetState {
  std::vector<BlockId> data;  // one slot per logical block in the set
  std::vector<BlockId> logs;  // allocation order; the last one is active
};

struct FtlStats {
  std::uint64_t host_page_writes = 0;
  std::uint64_t gc_invocations = 0;
  std::uint64_t gc_victims = 0;
  std::uint64_t pages_moved = 0;  // GC and merge copies
  std::uint64_t compactions = 0;
  std::uint64_t data_merges = 0;
  std::uint64_t log_merges = 0;  // in-set and fallback full merges
  std::uint64_t erases = 0;
};

/// Address translation state for the set-associative log-block FTL.
///
/// Logical block X (pages_per_block consecutive LPNs) belongs to set
/// X / blocks_per_set. Each logical block maps to at most one data block,
/// written in place while the page offset is at or past its write pointer.
/// Other writes append to the set's log blocks, of which a set holds at
/// most log_blocks_per_set. blocks_per_set = log_blocks_per_set = 1 gives
/// block-level mapping; one set spanning the device is fully associative.
///
/// Purely functional: no timing. Returned jobs describe the page copies and
/// erases so the caller can time them.
class MappingState {
 public:
  using GcObserver = std::function<void(const MappingState &, const GcDecision &)>;

  explicit MappingState(const MappingGeometry &geometry, bool track_tokens = false);

  std::optional<FtlPage> lookup(Lpn lpn) const;

  // Places a new version of lpn. Runs GC first when the free pool is at or
  // below the threshold. Throws OutOfRange for lpn >= logical_pages.
  WriteResult write(Lpn lpn, std::uint64_t token = 0);

  // Greedy reclaim until free blocks exceed the threshold by one. Returns
  // an empty list when nothing needs reclaiming.
  std::vector<ReclaimJob> garbage_collection();

  // Marks [begin, end) as written without timing. Fresh device only.
  void prefill(Lpn begin, Lpn end);

  std::optional<std::uint64_t> token_at(FtlPage page) const;
  Ppn to_ppn(FtlPage page) const { return page.block * geometry_.pages_per_block + page.page; }

  const MappingGeometry &geometry() const { return geometry_; }
  std::span<const BlockMeta> blocks() const { return blocks_; }
  const BlockMeta &block(BlockId id) const { return blocks_.at(id); }
  std::uint32_t free_blocks() const { return static_cast<std::uint32_t>(free_pool_.size()); }
  std::vector<BlockId> free_pool() const;
  const SetState *set(std::uint64_t id) const;
  const FtlStats &stats() const { return stats_; }

  void set_gc_observer(GcObserver observer) { gc_observer_ = std::move(observer); }

  // Full structural check; throws InvariantViolation. O(device).
  void check_invariants() const;

 private:
  SetState &set_state(std::uint64_t id) { return sets_[id]; }
  BlockId allocate(BlockRole role, std::uint64_t set, std::uint64_t logical_block);
  void program(BlockId block, std::uint32_t page, Lpn lpn, std::uint64_t token);
  void invalidate(FtlPage page);
  void erase(BlockId block, ReclaimJob &job);
  void copy_page(Lpn lpn, FtlPage from, FtlPage to, ReclaimJob &job);
  void drop_empty_logs(SetState &set, ReclaimJob &job);

  void merge_logical_block(std::uint64_t logical_block, ReclaimJob &job);
  ReclaimJob merge_log_block(BlockId victim);
  ReclaimJob compact_log_block(BlockId victim);
  BlockId most_invalid_log(const SetState &set) const;

  MappingGeometry geometry_;
  std::vector<BlockMeta> blocks_;
  std::set<std::pair<std::uint32_t, BlockId>> free_pool_;  // (erase_count, id)
  std::vector<SetState> sets_;
  std::unordered_map<Lpn, FtlPage> log_map_;
  bool track_tokens_;
  std::unordered_map<Ppn, std::uint64_t> tokens_;
  FtlStats stats_;
  GcObserver gc_observer_;
};

/// Timed FTL: translates host requests, lets PAL time every resulting
/// flash transaction, and charges GC work to the request that triggered it.
class Ftl final : public RequestHandler {
 public:
  Ftl(const SsdConfig &config, Pal &pal, bool track_tokens = false);

  DispatchResult read_transaction(const HostRequest &request, Tick now) override;
  DispatchResult write_transaction(const HostRequest &request, Tick now) override;

  void prefill(Lpn begin, Lpn end) { mapping_.prefill(begin, end); }

  MappingState &mapping() { return mapping_; }
  const MappingState &mapping() const { return mapping_; }

  // Sub-requests produced by the most recent transaction call.
  const std::vector<SubRequest> &last_sub_requests() const { return last_subs_; }

 private:
  Tick time_jobs(const std::vector<ReclaimJob> &jobs, Tick start, RequestId parent);

  std::uint32_t page_size_;
  std::uint64_t units_;
  Pal &pal_;
  MappingState mapping_;
  std::vector<Tick> block_ready_;  // erase completion per FTL block
  std::vector<SubRequest> last_subs_;
};

}  // namespace ssdsim
