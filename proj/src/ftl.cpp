#include "ssdsim/ftl.hpp"

#include <algorithm>
#include <bit>

#include <fmt/format.h>

#include "ssdsim/errors.hpp"

namespace ssdsim {

std::vector<SubRequest> split_request(const HostRequest &request,
                                      std::uint32_t page_size) {
  const std::uint64_t spp = page_size / kSectorSize;
  const std::uint64_t end = request.lba + request.n_sector;
  const Lpn first = request.lba / spp;
  const Lpn last = (end - 1) / spp;

  std::vector<SubRequest> subs;
  subs.reserve(last - first + 1);
  for (Lpn lpn = first; lpn <= last; ++lpn) {
    SubRequest sub;
    sub.parent_id = request.id;
    sub.lpn = lpn;
    if (request.op == HostOp::Read) {
      sub.op = SubOp::Read;
      subs.push_back(sub);
      continue;
    }
    const bool partial = (lpn == first && request.lba % spp != 0) ||
                         (lpn == last && end % spp != 0);
    if (partial) {
      sub.op = SubOp::Read;
      sub.read_modify_write = true;
      subs.push_back(sub);
      sub.read_modify_write = false;
    }
    sub.op = SubOp::Write;
    subs.push_back(sub);
  }
  return subs;
}

BlockId wear_leveling_select(std::span<const BlockId> pool,
                             std::span<const BlockMeta> blocks) {
  if (pool.empty()) throw EmptyPool("free block pool is empty");
  BlockId best = pool.front();
  for (BlockId id : pool) {
    const auto key = std::pair{blocks[id].erase_count, id};
    if (key < std::pair{blocks[best].erase_count, best}) best = id;
  }
  return best;
}

MappingGeometry MappingGeometry::from(const SsdConfig &config) {
  MappingGeometry g;
  g.pages_per_block = config.topology.superblock_pages();
  g.blocks = config.topology.blocks;
  g.logical_pages = total_logical_pages(config.topology, config.firmware);
  g.logical_blocks = (g.logical_pages + g.pages_per_block - 1) / g.pages_per_block;
  g.blocks_per_set = static_cast<std::uint32_t>(
      std::min<std::uint64_t>(config.firmware.blocks_per_set, g.logical_blocks));
  g.log_blocks_per_set = config.firmware.log_blocks_per_set;
  g.sets = (g.logical_blocks + g.blocks_per_set - 1) / g.blocks_per_set;
  g.gc_threshold_blocks = ssdsim::gc_threshold_blocks(config.topology, config.firmware);
  return g;
}

MappingState::MappingState(const MappingGeometry &geometry, bool track_tokens)
    : geometry_(geometry), blocks_(geometry.blocks), track_tokens_(track_tokens) {
  const auto words = (geometry_.pages_per_block + 63) / 64;
  for (BlockId id = 0; id < geometry_.blocks; ++id) {
    blocks_[id].valid_bits.assign(words, 0);
    blocks_[id].programmed_bits.assign(words, 0);
    free_pool_.emplace(0, id);
  }
  sets_.resize(geometry_.sets);
  for (auto &s : sets_) s.data.assign(geometry_.blocks_per_set, kNoBlock);
}

std::optional<FtlPage> MappingState::lookup(Lpn lpn) const {
  if (auto it = log_map_.find(lpn); it != log_map_.end()) return it->second;
  const auto x = lpn / geometry_.pages_per_block;
  const auto &s = sets_[x / geometry_.blocks_per_set];
  const BlockId data = s.data[x % geometry_.blocks_per_set];
  const auto off = static_cast<std::uint32_t>(lpn % geometry_.pages_per_block);
  if (data != kNoBlock && blocks_[data].is_valid(off)) return FtlPage{data, off};
  return std::nullopt;
}

const SetState *MappingState::set(std::uint64_t id) const {
  return id < sets_.size() ? &sets_[id] : nullptr;
}

std::vector<BlockId> MappingState::free_pool() const {
  std::vector<BlockId> out;
  out.reserve(free_pool_.size());
  for (const auto &[count, id] : free_pool_) out.push_back(id);
  return out;
}

std::optional<std::uint64_t> MappingState::token_at(FtlPage page) const {
  if (!track_tokens_) return std::nullopt;
  if (auto it = tokens_.find(to_ppn(page)); it != tokens_.end()) return it->second;
  return std::nullopt;
}

BlockId MappingState::allocate(BlockRole role, std::uint64_t set,
                               std::uint64_t logical_block) {
  if (free_pool_.empty()) {
    throw DeviceFull("no free block left for allocation");
  }
  const BlockId id = free_pool_.begin()->second;
  free_pool_.erase(free_pool_.begin());
  auto &b = blocks_[id];
  b.role = role;
  b.set = set;
  b.logical_block = logical_block;
  b.write_pointer = 0;
  if (role == BlockRole::Log) b.page_lpn.assign(geometry_.pages_per_block, 0);
  return id;
}

void MappingState::program(BlockId block, std::uint32_t page, Lpn lpn,
                           std::uint64_t token) {
  auto &b = blocks_[block];
  const std::uint64_t bit = std::uint64_t{1} << (page & 63);
  if (b.programmed_bits[page >> 6] & bit) {
    throw InvariantViolation(
        fmt::format("page {} of block {} programmed twice", page, block));
  }
  b.programmed_bits[page >> 6] |= bit;
  b.valid_bits[page >> 6] |= bit;
  ++b.programmed_count;
  ++b.valid_count;
  b.write_pointer = std::max(b.write_pointer, page + 1);
  if (b.role == BlockRole::Log) b.page_lpn[page] = lpn;
  if (track_tokens_) tokens_[to_ppn({block, page})] = token;
}

void MappingState::invalidate(FtlPage page) {
  auto &b = blocks_[page.block];
  const std::uint64_t bit = std::uint64_t{1} << (page.page & 63);
  if (!(b.valid_bits[page.page >> 6] & bit)) {
    throw InvariantViolation(fmt::format("page {} of block {} is not valid",
                                         page.page, page.block));
  }
  b.valid_bits[page.page >> 6] &= ~bit;
  --b.valid_count;
}

void MappingState::erase(BlockId block, ReclaimJob &job) {
  auto &b = blocks_[block];
  if (b.valid_count != 0) {
    throw InvariantViolation(
        fmt::format("erasing block {} with {} valid pages", block, b.valid_count));
  }
  if (track_tokens_) {
    for (std::uint32_t p = 0; p < b.write_pointer; ++p) tokens_.erase(to_ppn({block, p}));
  }
  std::fill(b.valid_bits.begin(), b.valid_bits.end(), 0);
  std::fill(b.programmed_bits.begin(), b.programmed_bits.end(), 0);
  b.page_lpn.clear();
  b.page_lpn.shrink_to_fit();
  b.role = BlockRole::Free;
  b.set = 0;
  b.logical_block = 0;
  b.write_pointer = 0;
  b.programmed_count = 0;
  ++b.erase_count;
  free_pool_.emplace(b.erase_count, block);
  job.erased.push_back(block);
  ++stats_.erases;
}

void MappingState::copy_page(Lpn lpn, FtlPage from, FtlPage to, ReclaimJob &job) {
  const std::uint64_t token = track_tokens_ ? token_at(from).value_or(0) : 0;
  program(to.block, to.page, lpn, token);
  invalidate(from);
  if (blocks_[to.block].role == BlockRole::Log) {
    log_map_[lpn] = to;
  } else {
    log_map_.erase(lpn);
  }
  job.copies.push_back({lpn, from, to});
  ++stats_.pages_moved;
}

void MappingState::drop_empty_logs(SetState &set, ReclaimJob &job) {
  auto keep = set.logs.begin();
  for (BlockId id : set.logs) {
    const auto &b = blocks_[id];
    if (b.valid_count == 0 && b.programmed_count > 0) {
      erase(id, job);
    } else {
      *keep++ = id;
    }
  }
  set.logs.erase(keep, set.logs.end());
}

void MappingState::merge_logical_block(std::uint64_t logical_block, ReclaimJob &job) {
  const auto ppb = geometry_.pages_per_block;
  const auto set_id = logical_block / geometry_.blocks_per_set;
  const auto slot = logical_block % geometry_.blocks_per_set;
  auto &s = set_state(set_id);
  const BlockId old = s.data[slot];

  std::vector<std::pair<Lpn, FtlPage>> live;
  const Lpn base = logical_block * ppb;
  const Lpn stop = std::min<Lpn>(base + ppb, geometry_.logical_pages);
  for (Lpn lpn = base; lpn < stop; ++lpn) {
    if (auto loc = lookup(lpn)) live.emplace_back(lpn, *loc);
  }

  if (!live.empty()) {
    const BlockId fresh = allocate(BlockRole::Data, set_id, logical_block);
    for (const auto &[lpn, from] : live) {
      copy_page(lpn, from, {fresh, static_cast<std::uint32_t>(lpn - base)}, job);
    }
    s.data[slot] = fresh;
  } else {
    s.data[slot] = kNoBlock;
  }
  if (old != kNoBlock) erase(old, job);
  drop_empty_logs(s, job);
}

ReclaimJob MappingState::merge_log_block(BlockId victim) {
  ReclaimJob job{ReclaimKind::LogMerge, victim, {}, {}};
  const auto &v = blocks_[victim];
  std::vector<std::uint64_t> owners;
  for (std::uint32_t p = 0; p < v.write_pointer; ++p) {
    if (v.is_valid(p)) owners.push_back(v.page_lpn[p] / geometry_.pages_per_block);
  }
  std::sort(owners.begin(), owners.end());
  owners.erase(std::unique(owners.begin(), owners.end()), owners.end());
  const auto set_id = v.set;
  for (auto x : owners) merge_logical_block(x, job);
  // A victim with no valid pages left is dropped by the last merge; when it
  // had none to begin with nothing was merged, so drop it here.
  drop_empty_logs(set_state(set_id), job);
  ++stats_.log_merges;
  return job;
}

ReclaimJob MappingState::compact_log_block(BlockId victim) {
  ReclaimJob job{ReclaimKind::Compaction, victim, {}, {}};
  const auto ppb = geometry_.pages_per_block;
  const auto set_id = blocks_[victim].set;
  auto &s = set_state(set_id);
  const auto end = blocks_[victim].write_pointer;
  for (std::uint32_t p = 0; p < end; ++p) {
    if (!blocks_[victim].is_valid(p)) continue;
    BlockId active = s.logs.back();
    if (active == victim || blocks_[active].write_pointer >= ppb) {
      active = allocate(BlockRole::Log, set_id, 0);
      s.logs.push_back(active);
    }
    copy_page(blocks_[victim].page_lpn[p], {victim, p},
              {active, blocks_[active].write_pointer}, job);
  }
  erase(victim, job);
  s.logs.erase(std::find(s.logs.begin(), s.logs.end(), victim));
  ++stats_.compactions;
  return job;
}

BlockId MappingState::most_invalid_log(const SetState &set) const {
  BlockId best = kNoBlock;
  for (BlockId id : set.logs) {
    if (best == kNoBlock || blocks_[id].invalid_count() > blocks_[best].invalid_count() ||
        (blocks_[id].invalid_count() == blocks_[best].invalid_count() && id < best)) {
      best = id;
    }
  }
  return best;
}

std::vector<ReclaimJob> MappingState::garbage_collection() {
  std::vector<ReclaimJob> jobs;
  const auto threshold = geometry_.gc_threshold_blocks;
  if (free_pool_.size() > threshold) return jobs;
  ++stats_.gc_invocations;

  // Every reclaim either frees a block or strictly reduces the pages held
  // in log blocks, so this bound is only reached by a broken model.
  const std::uint64_t guard = 4ull * geometry_.blocks * (geometry_.pages_per_block + 1);
  for (std::uint64_t iter = 0; free_pool_.size() <= threshold; ++iter) {
    if (iter > guard) throw DeviceFull("garbage collection made no progress");

    GcDecision decision;
    for (BlockId id = 0; id < geometry_.blocks; ++id) {
      const auto &b = blocks_[id];
      if (b.role == BlockRole::Free) continue;
      if (decision.victim == kNoBlock || b.invalid_count() > decision.victim_invalid) {
        decision.victim = id;
        decision.victim_invalid = b.invalid_count();
      }
    }
    if (decision.victim_invalid == 0) {
      decision.victim = kNoBlock;
      decision.fallback = true;
      for (BlockId id = 0; id < geometry_.blocks; ++id) {
        if (blocks_[id].role == BlockRole::Log) {
          decision.victim = id;
          break;
        }
      }
      if (decision.victim == kNoBlock) {
        throw NoVictim(fmt::format("{} free blocks, none reclaimable", free_pool_.size()));
      }
    }
    if (gc_observer_) gc_observer_(*this, decision);
    ++stats_.gc_victims;

    const auto &victim = blocks_[decision.victim];
    if (decision.fallback) {
      jobs.push_back(merge_log_block(decision.victim));
    } else if (victim.role == BlockRole::Log) {
      jobs.push_back(compact_log_block(decision.victim));
    } else {
      ReclaimJob job{ReclaimKind::DataMerge, decision.victim, {}, {}};
      const auto x = victim.logical_block;
      if (victim.valid_count == 0) {
        auto &s = set_state(victim.set);
        s.data[x % geometry_.blocks_per_set] = kNoBlock;
        erase(decision.victim, job);
        drop_empty_logs(s, job);
      } else {
        merge_logical_block(x, job);
      }
      ++stats_.data_merges;
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

WriteResult MappingState::write(Lpn lpn, std::uint64_t token) {
  if (lpn >= geometry_.logical_pages) {
    throw OutOfRange(fmt::format("LPN {} beyond {} logical pages", lpn,
                                 geometry_.logical_pages));
  }
  WriteResult result;
  result.jobs = garbage_collection();
  result.gc_ran = !result.jobs.empty();

  const auto ppb = geometry_.pages_per_block;
  const auto x = lpn / ppb;
  const auto set_id = x / geometry_.blocks_per_set;
  const auto slot = x % geometry_.blocks_per_set;
  const auto off = static_cast<std::uint32_t>(lpn % ppb);

  for (;;) {
    auto &s = set_state(set_id);
    BlockId data = s.data[slot];
    if (data == kNoBlock || off >= blocks_[data].write_pointer) {
      if (data == kNoBlock) {
        data = allocate(BlockRole::Data, set_id, x);
        s.data[slot] = data;
      }
      result.previous = lookup(lpn);
      if (result.previous) {
        invalidate(*result.previous);
        log_map_.erase(lpn);
      }
      program(data, off, lpn, token);
      result.placed = {data, off};
      break;
    }

    const bool has_room = !s.logs.empty() && blocks_[s.logs.back()].write_pointer < ppb;
    if (!has_room && s.logs.size() >= geometry_.log_blocks_per_set) {
      result.jobs.push_back(merge_log_block(most_invalid_log(s)));
      continue;  // the merge may have made an in-place write possible
    }
    if (!has_room) s.logs.push_back(allocate(BlockRole::Log, set_id, 0));

    const BlockId active = s.logs.back();
    const FtlPage to{active, blocks_[active].write_pointer};
    result.previous = lookup(lpn);
    if (result.previous) invalidate(*result.previous);
    program(to.block, to.page, lpn, token);
    log_map_[lpn] = to;
    result.placed = to;
    break;
  }
  ++stats_.host_page_writes;
  return result;
}

void MappingState::prefill(Lpn begin, Lpn end) {
  end = std::min(end, geometry_.logical_pages);
  const auto ppb = geometry_.pages_per_block;
  Lpn lpn = begin;
  while (lpn < end) {
    const auto x = lpn / ppb;
    const auto set_id = x / geometry_.blocks_per_set;
    auto &s = set_state(set_id);
    BlockId &data = s.data[x % geometry_.blocks_per_set];
    if (data == kNoBlock) data = allocate(BlockRole::Data, set_id, x);
    auto &b = blocks_[data];

    const auto first = static_cast<std::uint32_t>(lpn % ppb);
    const auto last = static_cast<std::uint32_t>(std::min<Lpn>(end - x * ppb, ppb));
    if (first < b.write_pointer) {
      throw InvariantViolation(fmt::format("prefill of LPN {} over written data", lpn));
    }
    // Word-at-a-time fill of [first, last).
    for (std::uint32_t p = first; p < last;) {
      const std::uint32_t w = p >> 6;
      const std::uint32_t lo = p & 63;
      const std::uint32_t hi = std::min<std::uint32_t>(64, lo + (last - p));
      const std::uint64_t mask =
          (hi == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << hi) - 1)) &
          ~((std::uint64_t{1} << lo) - 1);
      b.valid_bits[w] |= mask;
      b.programmed_bits[w] |= mask;
      p += hi - lo;
    }
    b.valid_count += last - first;
    b.programmed_count += last - first;
    b.write_pointer = last;
    if (track_tokens_) {
      for (std::uint32_t p = first; p < last; ++p) tokens_[to_ppn({data, p})] = 0;
    }
    lpn = x * ppb + last;
  }
}

void MappingState::check_invariants() const {
  auto fail = [](const std::string &what) { throw InvariantViolation(what); };
  std::uint64_t allocated = 0;
  std::uint64_t log_valid = 0;
  for (BlockId id = 0; id < geometry_.blocks; ++id) {
    const auto &b = blocks_[id];
    std::uint64_t valid = 0;
    std::uint64_t programmed = 0;
    for (std::size_t w = 0; w < b.valid_bits.size(); ++w) {
      if (b.valid_bits[w] & ~b.programmed_bits[w]) {
        fail(fmt::format("block {}: valid bit on an unprogrammed page", id));
      }
      valid += std::popcount(b.valid_bits[w]);
      programmed += std::popcount(b.programmed_bits[w]);
    }
    if (valid != b.valid_count || programmed != b.programmed_count) {
      fail(fmt::format("block {}: counters disagree with bitmaps", id));
    }
    const bool pooled = free_pool_.count({b.erase_count, id}) != 0;
    if ((b.role == BlockRole::Free) != pooled) {
      fail(fmt::format("block {}: role and free pool disagree", id));
    }
    if (b.role == BlockRole::Free && programmed != 0) {
      fail(fmt::format("free block {} holds programmed pages", id));
    }
    if (b.role != BlockRole::Free) ++allocated;
    if (b.role == BlockRole::Log) log_valid += valid;
  }
  if (allocated + free_pool_.size() != geometry_.blocks) fail("block count mismatch");
  if (log_valid != log_map_.size()) fail("log page map size disagrees with log bitmaps");

  for (std::uint64_t sid = 0; sid < sets_.size(); ++sid) {
    const auto &s = sets_[sid];
    if (s.logs.size() > geometry_.log_blocks_per_set + 1) {
      fail(fmt::format("set {} holds {} log blocks", sid, s.logs.size()));
    }
    for (std::size_t slot = 0; slot < s.data.size(); ++slot) {
      const BlockId d = s.data[slot];
      if (d == kNoBlock) continue;
      const auto &b = blocks_[d];
      if (b.role != BlockRole::Data || b.set != sid ||
          b.logical_block != sid * geometry_.blocks_per_set + slot) {
        fail(fmt::format("set {} slot {}: bad data block {}", sid, slot, d));
      }
    }
    for (BlockId l : s.logs) {
      if (blocks_[l].role != BlockRole::Log || blocks_[l].set != sid) {
        fail(fmt::format("set {}: bad log block {}", sid, l));
      }
    }
  }
  for (const auto &[lpn, page] : log_map_) {
    const auto &b = blocks_[page.block];
    if (b.role != BlockRole::Log || !b.is_valid(page.page) || b.page_lpn[page.page] != lpn) {
      fail(fmt::format("LPN {}: log entry does not point at its own valid page", lpn));
    }
    const auto x = lpn / geometry_.pages_per_block;
    const BlockId d = sets_[x / geometry_.blocks_per_set].data[x % geometry_.blocks_per_set];
    if (d != kNoBlock && blocks_[d].is_valid(lpn % geometry_.pages_per_block)) {
      fail(fmt::format("LPN {} is live in both a data and a log block", lpn));
    }
  }
}

Ftl::Ftl(const SsdConfig &config, Pal &pal, bool track_tokens)
    : page_size_(config.topology.page_size),
      units_(config.topology.units()),
      pal_(pal),
      mapping_(MappingGeometry::from(config), track_tokens),
      block_ready_(config.topology.blocks, 0) {}

DispatchResult Ftl::read_transaction(const HostRequest &request, Tick now) {
  last_subs_ = split_request(request, page_size_);
  DispatchResult result{now, 0};
  for (auto &sub : last_subs_) {
    const auto loc = mapping_.lookup(sub.lpn);
    if (!loc) {
      throw UnmappedRead(fmt::format("request {} reads unwritten LPN {}", request.id, sub.lpn));
    }
    sub.ppn = mapping_.to_ppn(*loc);
    const auto rec = pal_.submit(request.id, SubOp::Read, *sub.ppn, now);
    sub.issue_tick = rec.issue_tick;
    sub.finish_tick = rec.finish_tick;
    result.finish_tick = std::max(result.finish_tick, rec.finish_tick);
  }
  return result;
}

DispatchResult Ftl::write_transaction(const HostRequest &request, Tick now) {
  last_subs_ = split_request(request, page_size_);
  DispatchResult result{now, 0};
  Tick gate = now;
  Tick rmw_finish = 0;
  for (auto &sub : last_subs_) {
    if (sub.op == SubOp::Read) {
      // Read half of a read-modify-write; nothing to merge on a fresh page.
      rmw_finish = 0;
      if (const auto loc = mapping_.lookup(sub.lpn)) {
        sub.ppn = mapping_.to_ppn(*loc);
        const auto rec = pal_.submit(request.id, SubOp::Read, *sub.ppn, gate);
        sub.issue_tick = rec.issue_tick;
        sub.finish_tick = rec.finish_tick;
        rmw_finish = rec.finish_tick;
        result.finish_tick = std::max(result.finish_tick, rec.finish_tick);
      }
      continue;
    }

    const auto placed = mapping_.write(sub.lpn, request.id);
    if (!placed.jobs.empty()) {
      const Tick after = time_jobs(placed.jobs, gate, request.id);
      result.firmware_ticks += after - gate;
      gate = after;
      result.finish_tick = std::max(result.finish_tick, after);
    }
    sub.ppn = mapping_.to_ppn(placed.placed);
    const Tick issue = std::max({gate, rmw_finish, block_ready_[placed.placed.block]});
    const auto rec = pal_.submit(request.id, SubOp::Write, *sub.ppn, issue);
    sub.issue_tick = rec.issue_tick;
    sub.finish_tick = rec.finish_tick;
    result.finish_tick = std::max(result.finish_tick, rec.finish_tick);
    rmw_finish = 0;
  }
  return result;
}

Tick Ftl::time_jobs(const std::vector<ReclaimJob> &jobs, Tick start, RequestId parent) {
  Tick t = start;
  for (const auto &job : jobs) {
    Tick end = t;
    for (const auto &copy : job.copies) {
      const auto read = pal_.submit(parent, SubOp::GcRead, mapping_.to_ppn(copy.from), t);
      const Tick issue = std::max(read.finish_tick, block_ready_[copy.to.block]);
      const auto write = pal_.submit(parent, SubOp::GcWrite, mapping_.to_ppn(copy.to), issue);
      end = std::max(end, write.finish_tick);
    }
    const Tick erase_issue = end;
    for (BlockId block : job.erased) {
      Tick ready = erase_issue;
      // One erase per unit: FTL page u of a block is page 0 of unit u.
      for (std::uint64_t u = 0; u < units_; ++u) {
        const auto rec = pal_.submit(parent, SubOp::Erase, mapping_.to_ppn({block, static_cast<std::uint32_t>(u)}), erase_issue);
        ready = std::max(ready, rec.finish_tick);
      }
      block_ready_[block] = ready;
      end = std::max(end, ready);
    }
    t = end;
  }
  return t;
}

}  // namespace ssdsim
