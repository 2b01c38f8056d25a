#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "blockcache/geometry.hpp"

namespace blockcache {

enum class AccessOp : char { kLookup = 'L', kInsert = 'I', kRemove = 'R' };

struct AccessEvent {
  std::uint64_t seq = 0;
  AccessOp op = AccessOp::kLookup;
  BlockKey key;
  std::int64_t frame = 0;

  friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

/// Ordered block-access events; seq is the position in the trace.
class AccessTrace {
 public:
  void append(AccessOp op, const BlockKey& key, std::int64_t frame);

  const std::vector<AccessEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const AccessEvent& operator[](std::size_t i) const { return events_[i]; }

  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }

  /// Events are appended with seq = size(); this checks a trace built or
  /// parsed elsewhere. Throws ParseError.
  static AccessTrace from_events(std::vector<AccessEvent> events);

 private:
  std::vector<AccessEvent> events_;
};

inline constexpr const char* kTraceHeader = "seq,op,frame,kx,ky,kz";

/// CSV, LF line endings, header `seq,op,frame,kx,ky,kz`.
void write_trace_csv(std::ostream& os, const AccessTrace& trace);
void write_trace_csv(const std::string& path, const AccessTrace& trace);

/// Throws ParseError carrying the 1-based line number of the bad row.
AccessTrace read_trace_csv(std::istream& is);
AccessTrace read_trace_csv(const std::string& path);

}  // namespace blockcache
