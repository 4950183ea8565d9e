#ifndef VTT_IO_HPP_
#define VTT_IO_HPP_

// File formats.
//
// Detections, one per line ('#' comments and blank lines ignored):
//   frame hint x1 y1 x2 y2 x3 y3 x4 y4 confidence ["transcription"] [dim v1 .. vdim]
// hint is -1 when absent; the transcription is double-quoted, with
// backslash escapes for quote and backslash.
//
// Ground truth (canonical), one box per line:
//   frame id x1 y1 x2 y2 x3 y3 x4 y4 ["transcription"]
// Files starting with '<' are read as ICDAR VideoText-style XML instead:
//   <frame ID="n"> <object ID="k" Transcription="..."> <Point x=".." y=".."/> x4
// Frame IDs there are 1-based and mapped to 0-based indices.
//
// Frames: binary portable graymaps ("P5", maxval 255), named %06d.pgm.
//
// Tracker configuration and scenario specs: key=value lines.
//
// Tracking results:
//   frames N / seed S / config key=value ... /
//   instance frame id x1 y1 .. y4 confidence ... /
//   trajectory id birth last length state
//
// Real numbers are written in shortest round-trip form, so every
// writer/reader pair is lossless.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "vtt/errors.hpp"
#include "vtt/localization.hpp"
#include "vtt/metrics.hpp"
#include "vtt/synth.hpp"
#include "vtt/tracker.hpp"
#include "vtt/types.hpp"

namespace vtt::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Text helpers

inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct Token {
  std::string text;
  std::size_t column = 0;  // 1-based
  bool quoted = false;
};

/// Splits on whitespace; double-quoted tokens may contain spaces.
inline std::vector<Token> tokenize(std::string_view line, const std::string& source,
                                   std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    Token t;
    t.column = i + 1;
    if (line[i] == '"') {
      t.quoted = true;
      ++i;
      bool closed = false;
      while (i < line.size()) {
        const char c = line[i++];
        if (c == '\\' && i < line.size()) {
          t.text.push_back(line[i++]);
        } else if (c == '"') {
          closed = true;
          break;
        } else {
          t.text.push_back(c);
        }
      }
      if (!closed) throw ParseError(source, line_no, t.column, "unterminated quoted string");
    } else {
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
        t.text.push_back(line[i++]);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

inline double parse_real(const Token& t, const std::string& source, std::size_t line_no) {
  double v = 0.0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  const auto res = std::from_chars(b, e, v);
  if (t.quoted || res.ec != std::errc() || res.ptr != e) {
    throw ParseError(source, line_no, t.column, "expected a number, got '" + t.text + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const Token& t, const std::string& source, std::size_t line_no) {
  Int v = 0;
  const char* b = t.text.data();
  const char* e = b + t.text.size();
  const auto res = std::from_chars(b, e, v);
  if (t.quoted || res.ec != std::errc() || res.ptr != e) {
    throw ParseError(source, line_no, t.column, "expected an integer, got '" + t.text + "'");
  }
  return v;
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

/// Calls f(line_no, line) for every non-blank, non-comment line.
template <typename F>
void for_each_record(std::string_view text, F&& f) {
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    const std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') f(line_no, line);
    if (end == text.size()) break;
  }
}

// ---------------------------------------------------------------------------
// Atomic output

/// Stages files under temporary names; commit() renames them into place.
/// Anything not committed is removed on destruction.
class OutputTransaction {
 public:
  OutputTransaction() = default;
  OutputTransaction(const OutputTransaction&) = delete;
  OutputTransaction& operator=(const OutputTransaction&) = delete;
  ~OutputTransaction() { rollback(); }

  void write(const fs::path& path, std::string_view contents) {
    const fs::path tmp = path.string() + ".tmp-vtt";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write " + tmp.string());
      staged_.push_back({tmp, path});
      out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
      out.flush();
      if (!out) throw IoError("write failed: " + tmp.string());
    }
  }

  void commit() {
    for (auto& [tmp, dest] : staged_) {
      std::error_code ec;
      fs::rename(tmp, dest, ec);
      if (ec) throw IoError("cannot rename " + tmp.string() + " to " + dest.string());
      committed_.push_back(dest);
    }
    staged_.clear();
  }

  void rollback() noexcept {
    for (auto& [tmp, dest] : staged_) {
      std::error_code ec;
      fs::remove(tmp, ec);
    }
    staged_.clear();
  }

 private:
  std::vector<std::pair<fs::path, fs::path>> staged_;
  std::vector<fs::path> committed_;
};

inline void write_file_atomic(const fs::path& path, std::string_view contents) {
  OutputTransaction tx;
  tx.write(path, contents);
  tx.commit();
}

// ---------------------------------------------------------------------------
// Detections

inline std::string format_detection(int frame, const Detection& d) {
  std::string s = std::to_string(frame) + " " + std::to_string(d.hint);
  for (const Point& p : d.quad.vertices()) s += " " + format_real(p.x) + " " + format_real(p.y);
  s += " " + format_real(d.confidence);
  if (d.transcription) s += " " + quote(*d.transcription);
  if (d.embedding) {
    s += " " + std::to_string(d.embedding->size());
    for (double v : *d.embedding) s += " " + format_real(v);
  }
  return s;
}

inline std::string format_detections(const std::vector<FrameDetections>& frames) {
  std::string s;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    for (const Detection& d : frames[f]) s += format_detection(static_cast<int>(f), d) + "\n";
  }
  return s;
}

namespace detail {

inline Quad parse_quad(const std::vector<Token>& tok, std::size_t first, const std::string& src,
                       std::size_t line_no) {
  std::array<Point, 4> v;
  for (int i = 0; i < 4; ++i) {
    v[i] = {parse_real(tok[first + 2 * i], src, line_no),
            parse_real(tok[first + 2 * i + 1], src, line_no)};
  }
  try {
    return Quad(v);
  } catch (const GeometryError&) {
    throw ParseError(src, line_no, tok[first].column, "degenerate quad (zero area)");
  }
}

}  // namespace detail

/// Index = frame. Frames without records are empty.
inline std::vector<FrameDetections> parse_detections(std::string_view text,
                                                     const std::string& source = "detections") {
  std::vector<FrameDetections> frames;
  for_each_record(text, [&](std::size_t line_no, std::string_view line) {
    const std::vector<Token> tok = tokenize(line, source, line_no);
    if (tok.size() < 11) {
      throw ParseError(source, line_no, line.size() + 1,
                       "expected at least 11 fields, got " + std::to_string(tok.size()));
    }
    const int frame = parse_int<int>(tok[0], source, line_no);
    if (frame < 0) throw ParseError(source, line_no, tok[0].column, "negative frame index");
    Detection d{detail::parse_quad(tok, 2, source, line_no), parse_real(tok[10], source, line_no),
                std::nullopt, std::nullopt, parse_int<int>(tok[1], source, line_no)};
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      throw ParseError(source, line_no, tok[10].column, "confidence outside [0, 1]");
    }
    std::size_t i = 11;
    if (i < tok.size() && tok[i].quoted) d.transcription = tok[i++].text;
    if (i < tok.size()) {
      const auto dim = parse_int<std::size_t>(tok[i], source, line_no);
      if (tok.size() - i - 1 != dim) {
        throw ParseError(source, line_no, tok[i].column,
                         "embedding declares " + std::to_string(dim) + " values, found " +
                             std::to_string(tok.size() - i - 1));
      }
      Embedding e(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        e[k] = parse_real(tok[i + 1 + k], source, line_no);
        if (!std::isfinite(e[k])) {
          throw ParseError(source, line_no, tok[i + 1 + k].column, "non-finite embedding value");
        }
      }
      d.embedding = std::move(e);
    }
    if (static_cast<std::size_t>(frame) >= frames.size()) frames.resize(frame + 1);
    frames[frame].push_back(std::move(d));
  });
  return frames;
}

inline std::vector<FrameDetections> load_detections(const fs::path& path) {
  return parse_detections(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Ground truth

inline std::string format_ground_truth(const GroundTruth& gt) {
  // Ordered by (frame, id) so files read like per-frame annotations.
  std::vector<std::pair<int, std::string>> lines;
  for (const auto& [id, boxes] : gt.trajectories) {
    for (const GtBox& b : boxes) {
      std::string s = std::to_string(b.frame) + " " + std::to_string(id);
      for (const Point& p : b.quad.vertices()) s += " " + format_real(p.x) + " " + format_real(p.y);
      if (b.transcription) s += " " + quote(*b.transcription);
      lines.emplace_back(b.frame, std::move(s));
    }
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out;
  for (auto& [f, s] : lines) out += s + "\n";
  return out;
}

namespace detail {

inline void add_gt_box(GroundTruth& gt, int id, GtBox box, const std::string& source,
                       std::size_t line_no) {
  auto& boxes = gt.trajectories[id];
  for (const GtBox& b : boxes) {
    if (b.frame == box.frame) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": duplicate (id " +
                            std::to_string(id) + ", frame " + std::to_string(box.frame) + ")");
    }
  }
  const auto pos = std::upper_bound(boxes.begin(), boxes.end(), box.frame,
                                    [](int f, const GtBox& b) { return f < b.frame; });
  boxes.insert(pos, std::move(box));
}

inline std::optional<std::string> xml_attr(std::string_view tag, std::string_view name) {
  std::size_t pos = 0;
  while ((pos = tag.find(name, pos)) != std::string_view::npos) {
    const bool boundary = pos > 0 && (tag[pos - 1] == ' ' || tag[pos - 1] == '\t' ||
                                      tag[pos - 1] == '\n' || tag[pos - 1] == '\r');
    std::size_t i = pos + name.size();
    while (i < tag.size() && tag[i] == ' ') ++i;
    if (boundary && i < tag.size() && tag[i] == '=') {
      ++i;
      while (i < tag.size() && tag[i] == ' ') ++i;
      if (i >= tag.size() || (tag[i] != '"' && tag[i] != '\'')) return std::nullopt;
      const char q = tag[i++];
      const std::size_t end = tag.find(q, i);
      if (end == std::string_view::npos) return std::nullopt;
      std::string raw(tag.substr(i, end - i));
      // Minimal entity decoding.
      const std::pair<const char*, const char*> ents[] = {
          {"&quot;", "\""}, {"&apos;", "'"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&amp;", "&"}};
      for (auto [from, to] : ents) {
        for (std::size_t p = raw.find(from); p != std::string::npos; p = raw.find(from, p + 1)) {
          raw.replace(p, std::string_view(from).size(), to);
        }
      }
      return raw;
    }
    pos += name.size();
  }
  return std::nullopt;
}

/// ICDAR VideoText-style XML. Reads frame@ID, object@ID, object@Transcription
/// and the four Point@x/@y children; other attributes are ignored.
inline GroundTruth parse_icdar_xml(std::string_view text, const std::string& source) {
  GroundTruth gt;
  std::optional<int> frame;
  struct Pending {
    int id = 0;
    std::optional<std::string> transcription;
    std::vector<Point> points;
    std::size_t line = 0;
  };
  std::optional<Pending> obj;
  std::size_t pos = 0;
  auto line_of = [&](std::size_t p) {
    return static_cast<std::size_t>(std::count(text.begin(), text.begin() + p, '\n')) + 1;
  };
  auto need_int = [&](std::string_view tag, std::string_view name, std::size_t at) {
    const auto v = xml_attr(tag, name);
    int out = 0;
    if (!v || std::from_chars(v->data(), v->data() + v->size(), out).ec != std::errc()) {
      throw ParseError(source, line_of(at), 1,
                       "missing or non-integer attribute '" + std::string(name) + "'");
    }
    return out;
  };
  auto need_real = [&](std::string_view tag, std::string_view name, std::size_t at) {
    const auto v = xml_attr(tag, name);
    double out = 0;
    if (!v || std::from_chars(v->data(), v->data() + v->size(), out).ec != std::errc()) {
      throw ParseError(source, line_of(at), 1,
                       "missing or non-numeric attribute '" + std::string(name) + "'");
    }
    return out;
  };
  auto finish_object = [&]() {
    if (!obj) return;
    if (obj->points.size() != 4) {
      throw ParseError(source, obj->line, 1,
                       "object needs exactly 4 Point elements, found " +
                           std::to_string(obj->points.size()));
    }
    Quad q = [&] {
      try {
        return Quad({obj->points[0], obj->points[1], obj->points[2], obj->points[3]});
      } catch (const GeometryError&) {
        throw ParseError(source, obj->line, 1, "degenerate quad (zero area)");
      }
    }();
    add_gt_box(gt, obj->id, {*frame, q, obj->transcription}, source, obj->line);
    obj.reset();
  };

  while ((pos = text.find('<', pos)) != std::string_view::npos) {
    const std::size_t end = text.find('>', pos);
    if (end == std::string_view::npos) throw ParseError(source, line_of(pos), 1, "unclosed tag");
    const std::string_view tag = text.substr(pos + 1, end - pos - 1);
    const std::size_t at = pos;
    pos = end + 1;
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
    const bool closing = tag[0] == '/';
    std::string_view name = tag.substr(closing ? 1 : 0);
    name = name.substr(0, name.find_first_of(" \t\r\n/"));
    if (name == "frame") {
      if (closing) {
        finish_object();
        frame.reset();
      } else {
        const int id = need_int(tag, "ID", at);
        if (id < 1) throw ParseError(source, line_of(at), 1, "frame IDs are 1-based");
        frame = id - 1;
      }
    } else if (name == "object") {
      if (closing) {
        finish_object();
      } else {
        if (!frame) throw ParseError(source, line_of(at), 1, "object outside a frame element");
        finish_object();
        obj = Pending{need_int(tag, "ID", at), xml_attr(tag, "Transcription"), {}, line_of(at)};
        if (tag.back() == '/') finish_object();
      }
    } else if (name == "Point" && !closing) {
      if (!obj) throw ParseError(source, line_of(at), 1, "Point outside an object element");
      obj->points.push_back({need_real(tag, "x", at), need_real(tag, "y", at)});
    }
  }
  finish_object();
  return gt;
}

}  // namespace detail

inline GroundTruth parse_ground_truth(std::string_view text,
                                      const std::string& source = "ground truth") {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '<') {
    return detail::parse_icdar_xml(text, source);
  }
  GroundTruth gt;
  for_each_record(text, [&](std::size_t line_no, std::string_view line) {
    const std::vector<Token> tok = tokenize(line, source, line_no);
    if (tok.size() != 10 && !(tok.size() == 11 && tok[10].quoted)) {
      throw ParseError(source, line_no, 1,
                       "expected: frame id x1 y1 x2 y2 x3 y3 x4 y4 [\"transcription\"]");
    }
    const int frame = parse_int<int>(tok[0], source, line_no);
    const int id = parse_int<int>(tok[1], source, line_no);
    if (frame < 0) throw ParseError(source, line_no, tok[0].column, "negative frame index");
    GtBox box{frame, detail::parse_quad(tok, 2, source, line_no), std::nullopt};
    if (tok.size() == 11) box.transcription = tok[10].text;
    detail::add_gt_box(gt, id, std::move(box), source, line_no);
  });
  return gt;
}

inline GroundTruth load_ground_truth(const fs::path& path) {
  return parse_ground_truth(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Portable graymap frames

inline std::string encode_pgm(const GrayFrame& f) {
  std::string s = "P5\n" + std::to_string(f.width()) + " " + std::to_string(f.height()) + "\n255\n";
  s.append(reinterpret_cast<const char*>(f.values().data()), f.values().size());
  return s;
}

inline GrayFrame decode_pgm(std::string_view data, const std::string& source = "frame") {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space();
    const std::size_t start = pos;
    while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') ++pos;
    if (start == pos) throw ValidationError(source + ": malformed PGM header (" + what + ")");
    long v = 0;
    std::from_chars(data.data() + start, data.data() + pos, v);
    return v;
  };
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') {
    throw ValidationError(source + ": not a binary PGM (P5)");
  }
  pos = 2;
  const long w = read_uint("width");
  const long h = read_uint("height");
  const long maxval = read_uint("maxval");
  if (w <= 0 || h <= 0) throw ValidationError(source + ": PGM dimensions must be positive");
  if (maxval != 255) {
    throw ValidationError(source + ": unsupported PGM maxval " + std::to_string(maxval) +
                          " (only 255)");
  }
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
    throw ValidationError(source + ": malformed PGM header");
  }
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() - pos < need) throw ValidationError(source + ": truncated PGM payload");
  GrayFrame f(static_cast<int>(w), static_cast<int>(h));
  std::copy_n(reinterpret_cast<const std::uint8_t*>(data.data() + pos), need, f.values().begin());
  return f;
}

inline GrayFrame read_frame(const fs::path& path) {
  return decode_pgm(read_text_file(path), path.string());
}

inline void write_frame(const fs::path& path, const GrayFrame& f) {
  write_file_atomic(path, encode_pgm(f));
}

inline fs::path frame_path(const fs::path& dir, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.pgm", index);
  return dir / name;
}

/// Number of consecutive frame files 000000.pgm, 000001.pgm, ... in `dir`.
inline int count_frames(const fs::path& dir) {
  int n = 0;
  while (fs::exists(frame_path(dir, n))) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// key=value documents

using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline KeyValues parse_key_values(std::string_view text, const std::string& source) {
  KeyValues kv;
  for_each_record(text, [&](std::size_t line_no, std::string_view line) {
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, 1, "expected key=value");
    auto trim = [](std::string_view s) {
      const std::size_t a = s.find_first_not_of(" \t\r");
      if (a == std::string_view::npos) return std::string();
      const std::size_t b = s.find_last_not_of(" \t\r");
      return std::string(s.substr(a, b - a + 1));
    };
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(source, line_no, 1, "empty key");
    kv.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  });
  return kv;
}

namespace detail {

inline double kv_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ValidationError("key '" + key + "': expected a number, got '" + v + "'");
  }
  return out;
}

inline long long kv_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ValidationError("key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t kv_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ValidationError("key '" + key + "': expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

inline bool kv_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ValidationError("key '" + key + "': expected true/false, got '" + v + "'");
}

}  // namespace detail

inline std::string to_string(FusionMode m) {
  return m == FusionMode::kGatedBoost ? "gated" : "mask";
}

inline std::string to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::kFromFile:
      return "file";
    case EmbeddingKind::kPatch:
      return "patch";
    case EmbeddingKind::kTranscription:
      return "transcription";
    case EmbeddingKind::kPatchPlusTranscription:
      return "patch+transcription";
    case EmbeddingKind::kSynthetic:
      return "synthetic";
  }
  return "?";
}

inline std::string to_string(MotionKind m) {
  switch (m) {
    case MotionKind::kLinear:
      return "linear";
    case MotionKind::kCrossing:
      return "crossing";
    case MotionKind::kCircular:
      return "circular";
    case MotionKind::kMixed:
      return "mixed";
  }
  return "?";
}

/// Resolved configuration, one key=value per entry, in a fixed key order.
inline KeyValues config_entries(const TrackerConfig& c) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"alpha", format_real(c.weights.alpha)},
      {"beta", format_real(c.weights.beta)},
      {"gamma", format_real(c.weights.gamma)},
      {"sigma1", format_real(c.weights.sigma1)},
      {"sigma2", format_real(c.weights.sigma2)},
      {"sigma3", format_real(c.weights.sigma3)},
      {"gate", format_real(c.gate)},
      {"h1", format_real(c.h1)},
      {"h2", format_real(c.h2)},
      {"max_lost", std::to_string(c.max_lost)},
      {"complement_enabled", b(c.complement_enabled)},
      {"complement_only_lost", b(c.complement.only_lost)},
      {"search_scale", format_real(c.complement.search_scale)},
      {"ncc_accept", format_real(c.complement.ncc_accept)},
      {"max_templates", std::to_string(c.complement.max_templates)},
      {"fusion_mode", to_string(c.fusion)},
      {"min_area", std::to_string(c.min_area)},
      {"keep_raw", b(c.keep_raw)},
      {"embedding_enabled", b(c.embedding_enabled)},
      {"embedding_provider", to_string(c.provider.kind)},
      {"dim_visual", std::to_string(c.provider.dim_visual)},
      {"dim_semantic", std::to_string(c.provider.dim_semantic)},
      {"seed", std::to_string(c.provider.seed)},
      {"new_track_min_conf", format_real(c.new_track_min_conf)},
      {"triplet_margin", format_real(c.triplet_margin)},
  };
}

inline void apply_config_entry(TrackerConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  if (key == "alpha") c.weights.alpha = kv_real(key, v);
  else if (key == "beta") c.weights.beta = kv_real(key, v);
  else if (key == "gamma") c.weights.gamma = kv_real(key, v);
  else if (key == "sigma1") c.weights.sigma1 = kv_real(key, v);
  else if (key == "sigma2") c.weights.sigma2 = kv_real(key, v);
  else if (key == "sigma3") c.weights.sigma3 = kv_real(key, v);
  else if (key == "gate") c.gate = kv_real(key, v);
  else if (key == "h1") c.h1 = kv_real(key, v);
  else if (key == "h2") c.h2 = kv_real(key, v);
  else if (key == "max_lost") c.max_lost = static_cast<int>(kv_int(key, v));
  else if (key == "complement_enabled") c.complement_enabled = kv_bool(key, v);
  else if (key == "complement_only_lost") c.complement.only_lost = kv_bool(key, v);
  else if (key == "search_scale") c.complement.search_scale = kv_real(key, v);
  else if (key == "ncc_accept") c.complement.ncc_accept = kv_real(key, v);
  else if (key == "max_templates") c.complement.max_templates = static_cast<int>(kv_int(key, v));
  else if (key == "fusion_mode") {
    if (v == "gated") c.fusion = FusionMode::kGatedBoost;
    else if (v == "mask") c.fusion = FusionMode::kMaskBoost;
    else throw ValidationError("fusion_mode must be 'gated' or 'mask'");
  } else if (key == "min_area") c.min_area = static_cast<int>(kv_int(key, v));
  else if (key == "keep_raw") c.keep_raw = kv_bool(key, v);
  else if (key == "embedding_enabled") c.embedding_enabled = kv_bool(key, v);
  else if (key == "embedding_provider") {
    if (v == "file") c.provider.kind = EmbeddingKind::kFromFile;
    else if (v == "patch") c.provider.kind = EmbeddingKind::kPatch;
    else if (v == "transcription") c.provider.kind = EmbeddingKind::kTranscription;
    else if (v == "patch+transcription") c.provider.kind = EmbeddingKind::kPatchPlusTranscription;
    else if (v == "synthetic") c.provider.kind = EmbeddingKind::kSynthetic;
    else throw ValidationError("unknown embedding_provider '" + v + "'");
  } else if (key == "dim_visual") c.provider.dim_visual = static_cast<std::size_t>(kv_u64(key, v));
  else if (key == "dim_semantic") c.provider.dim_semantic = static_cast<std::size_t>(kv_u64(key, v));
  else if (key == "seed") c.provider.seed = kv_u64(key, v);
  else if (key == "new_track_min_conf") c.new_track_min_conf = kv_real(key, v);
  else if (key == "triplet_margin") c.triplet_margin = kv_real(key, v);
  else throw ValidationError("unknown configuration key '" + key + "'");
}

inline TrackerConfig parse_config(std::string_view text, const std::string& source = "config",
                                  TrackerConfig base = {}) {
  for (const auto& [k, v] : parse_key_values(text, source)) apply_config_entry(base, k, v);
  base.validate();
  return base;
}

inline TrackerConfig load_config(const fs::path& path) {
  return parse_config(read_text_file(path), path.string());
}

inline std::string format_config(const TrackerConfig& c) {
  std::string s;
  for (const auto& [k, v] : config_entries(c)) s += k + "=" + v + "\n";
  return s;
}

inline KeyValues spec_entries(const ScenarioSpec& s) {
  return {
      {"width", std::to_string(s.width)},
      {"height", std::to_string(s.height)},
      {"frames", std::to_string(s.frames)},
      {"tracks", std::to_string(s.tracks)},
      {"motion", to_string(s.motion)},
      {"speed", format_real(s.speed)},
      {"dropout_p", format_real(s.dropout_p)},
      {"jitter_sigma", format_real(s.jitter_sigma)},
      {"distractor_rate", format_real(s.distractor_rate)},
      {"twin_pairs", std::to_string(s.twin_pairs)},
      {"seed", std::to_string(s.seed)},
      {"box_w_min", std::to_string(s.box_w_min)},
      {"box_w_max", std::to_string(s.box_w_max)},
      {"box_h_min", std::to_string(s.box_h_min)},
      {"box_h_max", std::to_string(s.box_h_max)},
      {"min_lifespan", std::to_string(s.min_lifespan)},
      {"hard_fraction", format_real(s.hard_fraction)},
      {"hard_dropout_p", format_real(s.hard_dropout_p)},
      {"confidence_min", format_real(s.confidence_min)},
      {"confidence_max", format_real(s.confidence_max)},
      {"noise_amplitude", std::to_string(s.noise_amplitude)},
  };
}

inline ScenarioSpec parse_spec(std::string_view text, const std::string& source = "spec") {
  using namespace detail;
  ScenarioSpec s;
  for (const auto& [key, v] : parse_key_values(text, source)) {
    if (key == "width") s.width = static_cast<int>(kv_int(key, v));
    else if (key == "height") s.height = static_cast<int>(kv_int(key, v));
    else if (key == "frames") s.frames = static_cast<int>(kv_int(key, v));
    else if (key == "tracks") s.tracks = static_cast<int>(kv_int(key, v));
    else if (key == "motion") {
      if (v == "linear") s.motion = MotionKind::kLinear;
      else if (v == "crossing") s.motion = MotionKind::kCrossing;
      else if (v == "circular") s.motion = MotionKind::kCircular;
      else if (v == "mixed") s.motion = MotionKind::kMixed;
      else throw ValidationError("unknown motion '" + v + "'");
    } else if (key == "speed") s.speed = kv_real(key, v);
    else if (key == "dropout_p") s.dropout_p = kv_real(key, v);
    else if (key == "jitter_sigma") s.jitter_sigma = kv_real(key, v);
    else if (key == "distractor_rate") s.distractor_rate = kv_real(key, v);
    else if (key == "twin_pairs") s.twin_pairs = static_cast<int>(kv_int(key, v));
    else if (key == "seed") s.seed = kv_u64(key, v);
    else if (key == "box_w_min") s.box_w_min = static_cast<int>(kv_int(key, v));
    else if (key == "box_w_max") s.box_w_max = static_cast<int>(kv_int(key, v));
    else if (key == "box_h_min") s.box_h_min = static_cast<int>(kv_int(key, v));
    else if (key == "box_h_max") s.box_h_max = static_cast<int>(kv_int(key, v));
    else if (key == "min_lifespan") s.min_lifespan = static_cast<int>(kv_int(key, v));
    else if (key == "hard_fraction") s.hard_fraction = kv_real(key, v);
    else if (key == "hard_dropout_p") s.hard_dropout_p = kv_real(key, v);
    else if (key == "confidence_min") s.confidence_min = kv_real(key, v);
    else if (key == "confidence_max") s.confidence_max = kv_real(key, v);
    else if (key == "noise_amplitude") s.noise_amplitude = static_cast<int>(kv_int(key, v));
    else throw ValidationError("unknown scenario key '" + key + "'");
  }
  s.validate();
  return s;
}

inline ScenarioSpec load_spec(const fs::path& path) {
  return parse_spec(read_text_file(path), path.string());
}

inline std::string format_spec(const ScenarioSpec& s) {
  std::string out;
  for (const auto& [k, v] : spec_entries(s)) out += k + "=" + v + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Tracking results

inline std::string format_result(const TrackingResult& r) {
  std::string s = "# vtt tracking result\n";
  s += "frames " + std::to_string(r.frame_count) + "\n";
  s += "seed " + std::to_string(r.seed) + "\n";
  for (const auto& [k, v] : config_entries(r.config)) s += "config " + k + "=" + v + "\n";
  for (const TextInstance& i : r.instances) {
    s += "instance " + std::to_string(i.frame) + " " + std::to_string(i.trajectory_id);
    for (const Point& p : i.quad.vertices()) s += " " + format_real(p.x) + " " + format_real(p.y);
    s += " " + format_real(i.confidence) + "\n";
  }
  for (const TrajectorySummary& t : r.trajectories) {
    s += "trajectory " + std::to_string(t.id) + " " + std::to_string(t.birth_frame) + " " +
         std::to_string(t.last_frame) + " " + std::to_string(t.length) + " " + t.state + "\n";
  }
  return s;
}

inline TrackingResult parse_result(std::string_view text, const std::string& source = "result") {
  TrackingResult r;
  for_each_record(text, [&](std::size_t line_no, std::string_view line) {
    const std::vector<Token> tok = tokenize(line, source, line_no);
    const std::string& kind = tok[0].text;
    if (kind == "frames" && tok.size() == 2) {
      r.frame_count = parse_int<int>(tok[1], source, line_no);
    } else if (kind == "seed" && tok.size() == 2) {
      r.seed = parse_int<std::uint64_t>(tok[1], source, line_no);
    } else if (kind == "config" && tok.size() == 2) {
      const std::size_t eq = tok[1].text.find('=');
      if (eq == std::string::npos) throw ParseError(source, line_no, tok[1].column, "expected key=value");
      try {
        apply_config_entry(r.config, tok[1].text.substr(0, eq), tok[1].text.substr(eq + 1));
      } catch (const ValidationError& e) {
        throw ParseError(source, line_no, tok[1].column, e.what());
      }
    } else if (kind == "instance" && tok.size() == 12) {
      TextInstance inst{detail::parse_quad(tok, 3, source, line_no), std::nullopt,
                        parse_real(tok[11], source, line_no),
                        parse_int<int>(tok[2], source, line_no),
                        parse_int<int>(tok[1], source, line_no)};
      r.instances.push_back(std::move(inst));
    } else if (kind == "trajectory" && tok.size() == 6) {
      r.trajectories.push_back({parse_int<int>(tok[1], source, line_no),
                                parse_int<int>(tok[2], source, line_no),
                                parse_int<int>(tok[3], source, line_no),
                                parse_int<std::size_t>(tok[4], source, line_no), tok[5].text});
    } else {
      throw ParseError(source, line_no, 1, "unrecognized result record '" + kind + "'");
    }
  });
  r.config.validate();
  return r;
}

inline TrackingResult load_result(const fs::path& path) {
  return parse_result(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Metric reports

inline KeyValues report_entries(const MetricsReport& m) {
  return {
      {"mota", format_real(m.mota)},
      {"motp", format_real(m.motp)},
      {"idf1", format_real(m.idf1)},
      {"fp", std::to_string(m.fp)},
      {"fn", std::to_string(m.fn)},
      {"idsw", std::to_string(m.idsw)},
      {"mm", std::to_string(m.mm)},
      {"pm", std::to_string(m.pm)},
      {"ml", std::to_string(m.ml)},
      {"precision", format_real(m.precision)},
      {"recall", format_real(m.recall)},
      {"fmeasure", format_real(m.fmeasure)},
      {"gt_trajectories", std::to_string(m.gt_trajectories)},
      {"gt_boxes", std::to_string(m.gt_boxes)},
      {"pred_boxes", std::to_string(m.pred_boxes)},
      {"idtp", std::to_string(m.idtp)},
      {"idfp", std::to_string(m.idfp)},
      {"idfn", std::to_string(m.idfn)},
  };
}

inline std::string format_report_text(const MetricsReport& m) {
  std::string s;
  for (const auto& [k, v] : report_entries(m)) s += k + "=" + v + "\n";
  return s;
}

inline nlohmann::ordered_json report_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["mota"] = m.mota;
  j["motp"] = m.motp;
  j["idf1"] = m.idf1;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["idsw"] = m.idsw;
  j["mm"] = m.mm;
  j["pm"] = m.pm;
  j["ml"] = m.ml;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["fmeasure"] = m.fmeasure;
  j["gt_trajectories"] = m.gt_trajectories;
  j["gt_boxes"] = m.gt_boxes;
  j["pred_boxes"] = m.pred_boxes;
  j["idtp"] = m.idtp;
  j["idfp"] = m.idfp;
  j["idfn"] = m.idfn;
  return j;
}

inline MetricsReport parse_report_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  MetricsReport m;
  m.mota = j.at("mota");
  m.motp = j.at("motp");
  m.idf1 = j.at("idf1");
  m.fp = j.at("fp");
  m.fn = j.at("fn");
  m.idsw = j.at("idsw");
  m.mm = j.at("mm");
  m.pm = j.at("pm");
  m.ml = j.at("ml");
  m.precision = j.at("precision");
  m.recall = j.at("recall");
  m.fmeasure = j.at("fmeasure");
  m.gt_trajectories = j.at("gt_trajectories");
  m.gt_boxes = j.at("gt_boxes");
  m.pred_boxes = j.at("pred_boxes");
  m.idtp = j.at("idtp");
  m.idfp = j.at("idfp");
  m.idfn = j.at("idfn");
  return m;
}

// ---------------------------------------------------------------------------
// Scenario directories and video input

/// Stages a scenario's files (frames/, gt.txt, detections.txt, spec.txt)
/// into `tx`.
inline void stage_scenario(OutputTransaction& tx, const fs::path& dir, const Scenario& sc) {
  std::error_code ec;
  fs::create_directories(dir / "frames", ec);
  if (ec) throw IoError("cannot create " + (dir / "frames").string());
  for (std::size_t f = 0; f < sc.frames.size(); ++f) {
    tx.write(frame_path(dir / "frames", static_cast<int>(f)), encode_pgm(sc.frames[f]));
  }
  tx.write(dir / "gt.txt", format_ground_truth(sc.gt));
  tx.write(dir / "detections.txt", format_detections(sc.detections));
  tx.write(dir / "spec.txt", format_spec(sc.spec));
}

struct VideoInput {
  std::vector<FrameDetections> detections;
  std::optional<fs::path> frames_dir;
  int frame_count = 0;

  FrameSource frame_source() const {
    if (!frames_dir) return {};
    const fs::path dir = *frames_dir;
    return [dir](int t) {
      const fs::path p = frame_path(dir, t);
      if (!fs::exists(p)) throw IoError("missing frame file " + p.string());
      return read_frame(p);
    };
  }
};

inline VideoInput load_video(const fs::path& detections_path,
                             const std::optional<fs::path>& frames_dir) {
  VideoInput v;
  v.detections = load_detections(detections_path);
  v.frame_count = static_cast<int>(v.detections.size());
  if (frames_dir) {
    if (!fs::is_directory(*frames_dir)) throw IoError("not a directory: " + frames_dir->string());
    v.frames_dir = frames_dir;
    const int n = count_frames(*frames_dir);
    if (n < v.frame_count) {
      throw ValidationError("detections reference frame " + std::to_string(v.frame_count - 1) +
                            " but only " + std::to_string(n) + " frames exist");
    }
    v.frame_count = n;
  }
  return v;
}

}  // namespace vtt::io

#endif  // VTT_IO_HPP_
