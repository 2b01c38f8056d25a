#include "blockcache/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace blockcache {

void AccessTrace::append(AccessOp op, const BlockKey& key, std::int64_t frame) {
  events_.push_back({events_.size(), op, key, frame});
}

AccessTrace AccessTrace::from_events(std::vector<AccessEvent> events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0 && events[i].seq <= events[i - 1].seq) {
      throw ParseError("seq must be strictly increasing", i + 2);
    }
    if (i > 0 && events[i].frame < events[i - 1].frame) {
      throw ParseError("frame must be non-decreasing", i + 2);
    }
  }
  AccessTrace t;
  t.events_ = std::move(events);
  return t;
}

void write_trace_csv(std::ostream& os, const AccessTrace& trace) {
  os << kTraceHeader << '\n';
  char buf[128];
  for (const auto& e : trace) {
    char* p = buf;
    char* const end = buf + sizeof buf;
    p = std::to_chars(p, end, e.seq).ptr;
    *p++ = ',';
    *p++ = static_cast<char>(e.op);
    *p++ = ',';
    p = std::to_chars(p, end, e.frame).ptr;
    for (std::int32_t c : {e.key.x, e.key.y, e.key.z}) {
      *p++ = ',';
      p = std::to_chars(p, end, c).ptr;
    }
    *p++ = '\n';
    os.write(buf, p - buf);
  }
}

void write_trace_csv(const std::string& path, const AccessTrace& trace) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open " + path + " for writing");
  write_trace_csv(os, trace);
}

namespace {

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(std::string("bad ") + name + " field '" +
                         std::string(field) + "'",
                     line);
  }
  return value;
}

}  // namespace

AccessTrace read_trace_csv(std::istream& is) {
  std::string row;
  std::size_t line = 0;
  if (!std::getline(is, row)) return {};
  ++line;
  if (row != kTraceHeader) throw ParseError("unexpected trace header", line);

  std::vector<AccessEvent> events;
  while (std::getline(is, row)) {
    ++line;
    if (row.empty()) continue;
    std::string_view fields[6];
    std::size_t n = 0;
    std::string_view rest(row);
    while (true) {
      const auto comma = rest.find(',');
      if (n == 6) throw ParseError("too many fields", line);
      fields[n++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (n != 6) throw ParseError("expected 6 fields", line);
    AccessEvent e;
    e.seq = parse_field<std::uint64_t>(fields[0], line, "seq");
    if (fields[1] == "L") e.op = AccessOp::kLookup;
    else if (fields[1] == "I") e.op = AccessOp::kInsert;
    else if (fields[1] == "R") e.op = AccessOp::kRemove;
    else throw ParseError("bad op '" + std::string(fields[1]) + "'", line);
    e.frame = parse_field<std::int64_t>(fields[2], line, "frame");
    e.key.x = parse_field<std::int32_t>(fields[3], line, "kx");
    e.key.y = parse_field<std::int32_t>(fields[4], line, "ky");
    e.key.z = parse_field<std::int32_t>(fields[5], line, "kz");
    if (!events.empty() && e.seq <= events.back().seq) {
      throw ParseError("seq must be strictly increasing", line);
    }
    if (!events.empty() && e.frame < events.back().frame) {
      throw ParseError("frame must be non-decreasing", line);
    }
    events.push_back(e);
  }
  return AccessTrace::from_events(std::move(events));
}

AccessTrace read_trace_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open " + path);
  return read_trace_csv(is);
}

}  // namespace blockcache
