#include "io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace rsu::io {

namespace {

class Writer {
 public:
  template <class T>
  void put(T value) {
    using U = std::make_unsigned_t<T>;
    U u = static_cast<U>(value);
    for (size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>(u & 0xFF));
      u = static_cast<U>(u >> 8);
    }
  }
  void put_f32(float v) { put(std::bit_cast<std::uint32_t>(v)); }
  void put_tag(const char (&tag)[5]) { out_.append(tag, 4); }
  std::string take() { return std::move(out_); }
  void reserve(size_t n) { out_.reserve(n); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <class T>
  T get() {
    need(sizeof(T));
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (size_t i = 0; i < sizeof(T); ++i)
      u = static_cast<U>(u | static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  bool tag(const char (&expected)[5]) {
    need(4);
    const bool ok = bytes_.compare(pos_, 4, expected, 4) == 0;
    pos_ += 4;
    return ok;
  }
  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::format, "truncated data");
  }
  std::string_view bytes_;
  size_t pos_ = 0;
};

bool has_txt_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".txt";
}

std::string encode_events_text(const EventStream& stream) {
  std::ostringstream os;
  os << "# EVT1 height=" << stream.geometry().height
     << " width=" << stream.geometry().width << "\n";
  for (const Event& e : stream.events())
    os << e.t << ' ' << e.x << ' ' << e.y << ' ' << static_cast<int>(e.p) << '\n';
  return os.str();
}

EventStream decode_events_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  Geometry g;
  bool have_geometry = false;
  std::vector<Event> events;
  int max_x = -1, max_y = -1;
  size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      int h = 0, w = 0;
      if (std::sscanf(line.c_str(), "# EVT1 height=%d width=%d", &h, &w) == 2) {
        g = {h, w};
        have_geometry = true;
      }
      continue;
    }
    std::istringstream ls(line);
    long long t;
    long x, y;
    int p;
    if (!(ls >> t >> x >> y >> p))
      throw Error(ErrorCode::format, "malformed event on line " + std::to_string(lineno));
    if (x < 0 || y < 0 || x > 0xFFFF || y > 0xFFFF)
      throw Error(ErrorCode::geometry, "event coordinates out of range on line " +
                                           std::to_string(lineno));
    if (p != 1 && p != -1)
      throw Error(ErrorCode::format, "polarity must be +-1 on line " + std::to_string(lineno));
    events.push_back({t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                      static_cast<std::int8_t>(p)});
    max_x = std::max<int>(max_x, static_cast<int>(x));
    max_y = std::max<int>(max_y, static_cast<int>(y));
  }
  if (!have_geometry) g = {std::max(1, max_y + 1), std::max(1, max_x + 1)};
  const std::int64_t t_min = events.empty() ? 0 : events.front().t;
  const std::int64_t t_max = events.empty() ? 0 : events.back().t;
  for (size_t i = 1; i < events.size(); ++i)
    if (event_less(events[i], events[i - 1]))
      throw Error(ErrorCode::unsorted, "event " + std::to_string(i) +
                                           " breaks the (t, y, x, p) order");
  return EventStream(g, std::min(t_min, t_max), std::max(t_min, t_max), std::move(events));
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "short write to " + path.string());
}

std::string encode_events(const EventStream& stream) {
  const Geometry g = stream.geometry();
  if (g.height > 0xFFFF || g.width > 0xFFFF)
    throw Error(ErrorCode::geometry, "geometry exceeds the EVT1 16-bit limit");
  Writer w;
  w.reserve(kEvt1HeaderSize + stream.size() * kEvt1RecordSize);
  w.put_tag("EVT1");
  w.put<std::uint16_t>(1);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(g.height));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(g.width));
  w.put<std::uint16_t>(0);
  const std::uint64_t count = stream.size();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(count & 0xFFFFFFFFu));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(count >> 32));
  for (const Event& e : stream.events()) {
    if (e.t < 0)
      throw Error(ErrorCode::range, "EVT1 stores unsigned timestamps; got " + std::to_string(e.t));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(e.t));
    w.put<std::uint16_t>(e.x);
    w.put<std::uint16_t>(e.y);
    w.put<std::int8_t>(e.p);
    w.put<std::uint8_t>(0);
  }
  return w.take();
}

EventStream decode_events(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kEvt1HeaderSize) throw Error(ErrorCode::format, "truncated EVT1 header");
  if (!r.tag("EVT1")) throw Error(ErrorCode::format, "bad magic: not an EVT1 file");
  const auto version = r.get<std::uint16_t>();
  if (version != 1)
    throw Error(ErrorCode::format, "unsupported EVT1 version " + std::to_string(version));
  const int H = r.get<std::uint16_t>();
  const int W = r.get<std::uint16_t>();
  r.get<std::uint16_t>();
  const std::uint64_t lo = r.get<std::uint32_t>();
  const std::uint64_t hi = r.get<std::uint32_t>();
  const std::uint64_t count = lo | (hi << 32);
  if (H == 0 || W == 0) throw Error(ErrorCode::format, "EVT1 geometry must be positive");
  if (count > r.remaining() / kEvt1RecordSize)
    throw Error(ErrorCode::format, "truncated record: header promises " +
                                       std::to_string(count) + " events");
  if (r.remaining() != count * kEvt1RecordSize)
    throw Error(ErrorCode::format, "trailing bytes after the last EVT1 record");

  std::vector<Event> events(static_cast<size_t>(count));
  for (size_t i = 0; i < events.size(); ++i) {
    const auto t = r.get<std::uint64_t>();
    if (t > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
      throw Error(ErrorCode::format, "timestamp overflow in record " + std::to_string(i));
    Event& e = events[i];
    e.t = static_cast<std::int64_t>(t);
    e.x = r.get<std::uint16_t>();
    e.y = r.get<std::uint16_t>();
    e.p = r.get<std::int8_t>();
    r.get<std::uint8_t>();
    if (e.x >= W || e.y >= H)
      throw Error(ErrorCode::geometry, "record " + std::to_string(i) + " lies outside " +
                                           std::to_string(H) + "x" + std::to_string(W));
    if (e.p != 1 && e.p != -1)
      throw Error(ErrorCode::format, "record " + std::to_string(i) + " has polarity " +
                                         std::to_string(e.p));
    if (i > 0 && event_less(e, events[i - 1]))
      throw Error(ErrorCode::unsorted, "record " + std::to_string(i) +
                                           " breaks the (t, y, x, p) order");
  }
  const std::int64_t t_min = events.empty() ? 0 : events.front().t;
  const std::int64_t t_max = events.empty() ? 0 : events.back().t;
  return EventStream({H, W}, t_min, t_max, std::move(events));
}

void write_events(const EventStream& stream, const std::filesystem::path& path) {
  write_file(path, has_txt_extension(path) ? encode_events_text(stream)
                                           : encode_events(stream));
}

EventStream read_events(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  return has_txt_extension(path) ? decode_events_text(bytes) : decode_events(bytes);
}

EventStream with_coverage(const EventStream& stream, std::int64_t t_min,
                          std::int64_t t_max) {
  const auto ev = stream.events();
  return EventStream(stream.geometry(), t_min, t_max, {ev.begin(), ev.end()});
}

std::string encode_flow(const FlowField& flow) {
  if (flow.channels() != 2) throw Error(ErrorCode::shape, "flow needs two bands");
  Writer w;
  w.reserve(12 + flow.size() * 4);
  w.put_tag("PIEH");
  w.put<std::int32_t>(flow.width());
  w.put<std::int32_t>(flow.height());
  for (double v : flow.values()) w.put_f32(static_cast<float>(v));
  return w.take();
}

FlowField decode_flow(std::string_view bytes) {
  Reader r(bytes);
  if (!r.tag("PIEH")) throw Error(ErrorCode::format, "bad magic: not a PIEH flow file");
  const auto W = r.get<std::int32_t>();
  const auto H = r.get<std::int32_t>();
  if (W <= 0 || H <= 0 || W > (1 << 16) || H > (1 << 16))
    throw Error(ErrorCode::format, "implausible flow dimensions");
  if (r.remaining() != static_cast<size_t>(W) * H * 8)
    throw Error(ErrorCode::format, "flow payload size does not match dimensions");
  FlowField flow(H, W, 2);
  for (double& v : flow.values()) v = r.get_f32();
  return flow;
}

void write_flow(const FlowField& flow, const std::filesystem::path& path) {
  write_file(path, encode_flow(flow));
}

FlowField read_flow(const std::filesystem::path& path) {
  return decode_flow(read_file(path));
}

namespace {

void put_map(Writer& w, const TimeMap& m) {
  if (m.is_global()) {
    w.put<std::int64_t>(m.as_global().t);
    w.put<std::int64_t>(0);
  } else {
    w.put<std::int64_t>(m.as_rolling().t0);
    w.put<std::int64_t>(m.as_rolling().readout);
  }
}

TimeMap get_map(Reader& r, unsigned kind, int rows) {
  const auto a = r.get<std::int64_t>();
  const auto b = r.get<std::int64_t>();
  if (kind == 0) return TimeMap::global(a);
  if (kind == 1) return TimeMap::rolling(a, b, rows);
  throw Error(ErrorCode::format, "unknown time map kind " + std::to_string(kind));
}

}  // namespace

std::string encode_voxels(const EventVoxelGrid& grid) {
  Writer w;
  w.reserve(56 + grid.counts.size() * 4);
  w.put_tag("VOX1");
  w.put<std::uint32_t>(1);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.bins));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.height));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(grid.width));
  const std::uint32_t kinds = (grid.source.is_rolling() ? 1u : 0u) |
                              ((grid.target.is_rolling() ? 1u : 0u) << 8);
  w.put<std::uint32_t>(kinds);
  put_map(w, grid.source);
  put_map(w, grid.target);
  for (std::uint32_t c : grid.counts) w.put<std::uint32_t>(c);
  return w.take();
}

EventVoxelGrid decode_voxels(std::string_view bytes) {
  Reader r(bytes);
  if (!r.tag("VOX1")) throw Error(ErrorCode::format, "bad magic: not a VOX1 file");
  if (r.get<std::uint32_t>() != 1) throw Error(ErrorCode::format, "unsupported VOX1 version");
  EventVoxelGrid g;
  g.bins = static_cast<int>(r.get<std::uint32_t>());
  g.height = static_cast<int>(r.get<std::uint32_t>());
  g.width = static_cast<int>(r.get<std::uint32_t>());
  const auto kinds = r.get<std::uint32_t>();
  if (g.bins < 1 || g.height < 1 || g.width < 1)
    throw Error(ErrorCode::format, "VOX1 dimensions must be positive");
  g.source = get_map(r, kinds & 0xFF, g.height);
  g.target = get_map(r, (kinds >> 8) & 0xFF, g.height);
  const size_t n = static_cast<size_t>(2 * g.bins) * g.height * g.width;
  if (r.remaining() != n * 4)
    throw Error(ErrorCode::format, "VOX1 payload size does not match dimensions");
  g.counts.resize(n);
  for (auto& c : g.counts) c = r.get<std::uint32_t>();
  return g;
}

void write_voxels(const EventVoxelGrid& grid, const std::filesystem::path& path) {
  write_file(path, encode_voxels(grid));
}

EventVoxelGrid read_voxels(const std::filesystem::path& path) {
  return decode_voxels(read_file(path));
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  size_t lineno = 0;
  size_t pos = 0;
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::format, "expected key = value on line " + std::to_string(lineno));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorCode::format, "empty key on line " + std::to_string(lineno));
    kv[std::string(key)] = std::string(value);
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  return parse_key_values(read_file(path));
}

namespace {

template <class T>
T parse_number(const KeyValues& kv, const std::string& key, T fallback, bool required) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    if (required) throw Error(ErrorCode::argument, "config is missing `" + key + "`");
    return fallback;
  }
  const std::string& s = it->second;
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    value = static_cast<T>(std::strtod(s.c_str(), &end));
    if (end == s.c_str() || *end != '\0')
      throw Error(ErrorCode::format, "config `" + key + "` is not a number: " + s);
  } else {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
      throw Error(ErrorCode::format, "config `" + key + "` is not an integer: " + s);
  }
  return value;
}

}  // namespace

TimeMap TimingConfig::rs_map(int index) const {
  return TimeMap::rolling(t0_us + static_cast<std::int64_t>(index) * (readout_us + interframe_gap_us),
                          readout_us, height);
}

TimingConfig parse_timing_config(const KeyValues& kv) {
  TimingConfig c;
  c.t0_us = parse_number<std::int64_t>(kv, "t0_us", 0, true);
  c.readout_us = parse_number<std::int64_t>(kv, "readout_T_us", 0, true);
  c.interframe_gap_us = parse_number<std::int64_t>(kv, "interframe_gap_us", 0, false);
  c.height = parse_number<int>(kv, "H", 0, true);
  c.width = parse_number<int>(kv, "W", 0, true);
  c.eta = parse_number<double>(kv, "eta", 0.2, false);
  c.bins = parse_number<int>(kv, "bins_N", kDefaultBins, false);
  c.flow.levels = parse_number<int>(kv, "flow_levels", c.flow.levels, false);
  c.flow.patch = parse_number<int>(kv, "flow_patch", c.flow.patch, false);
  c.flow.radius = parse_number<int>(kv, "flow_radius", c.flow.radius, false);
  c.flow.min_events = parse_number<int>(kv, "flow_min_events", c.flow.min_events, false);
  c.lambda_len = parse_number<double>(kv, "lambda_len", c.lambda_len, false);
  c.has_coverage = kv.count("coverage_start_us") && kv.count("coverage_end_us");
  if (c.has_coverage) {
    c.coverage_start_us = parse_number<std::int64_t>(kv, "coverage_start_us", 0, true);
    c.coverage_end_us = parse_number<std::int64_t>(kv, "coverage_end_us", 0, true);
    if (c.coverage_start_us > c.coverage_end_us)
      throw Error(ErrorCode::argument, "coverage_start_us exceeds coverage_end_us");
  }
  if (c.readout_us <= 0) throw Error(ErrorCode::argument, "readout_T_us must be > 0");
  if (c.height < 1 || c.width < 1) throw Error(ErrorCode::argument, "H and W must be >= 1");
  if (!(c.eta > 0.0)) throw Error(ErrorCode::argument, "eta must be > 0");
  if (c.bins < 1) throw Error(ErrorCode::argument, "bins_N must be >= 1");
  if (c.interframe_gap_us < 0) throw Error(ErrorCode::argument, "interframe_gap_us must be >= 0");
  return c;
}

TimingConfig read_timing_config(const std::filesystem::path& path) {
  return parse_timing_config(read_key_values(path));
}

namespace {

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_timing_config(const TimingConfig& c) {
  std::ostringstream os;
  os << "t0_us = " << c.t0_us << "\n"
     << "readout_T_us = " << c.readout_us << "\n"
     << "interframe_gap_us = " << c.interframe_gap_us << "\n"
     << "H = " << c.height << "\n"
     << "W = " << c.width << "\n"
     << "eta = " << shortest(c.eta) << "\n"
     << "bins_N = " << c.bins << "\n"
     << "flow_levels = " << c.flow.levels << "\n"
     << "flow_patch = " << c.flow.patch << "\n"
     << "flow_radius = " << c.flow.radius << "\n"
     << "flow_min_events = " << c.flow.min_events << "\n"
     << "lambda_len = " << shortest(c.lambda_len) << "\n";
  if (c.has_coverage)
    os << "coverage_start_us = " << c.coverage_start_us << "\n"
       << "coverage_end_us = " << c.coverage_end_us << "\n";
  return os.str();
}

}  // namespace rsu::io
