#include "framesift/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "framesift/error.hpp"

namespace framesift {

using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

json parse_line(const std::string& line, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    static const std::regex non_finite(R"((^|[^"\w])-?(NaN|Infinity)\b)");
    if (std::regex_search(line, non_finite))
      throw ValidationError("line " + std::to_string(lineno) + ": non-finite number");
    throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
  }
}

const json& field(const json& obj, const char* name, std::size_t lineno) {
  if (!obj.is_object()) throw ParseError("expected a JSON object", lineno);
  auto it = obj.find(name);
  if (it == obj.end()) throw ParseError(std::string("missing field \"") + name + "\"", lineno);
  return *it;
}

std::string get_string(const json& obj, const char* name, std::size_t lineno) {
  const json& v = field(obj, name, lineno);
  if (!v.is_string()) throw ParseError(std::string("field \"") + name + "\" must be a string", lineno);
  return v.get<std::string>();
}

std::int64_t get_index(const json& obj, const char* name, std::size_t lineno) {
  const json& v = field(obj, name, lineno);
  if (!v.is_number_integer()) throw ParseError(std::string("field \"") + name + "\" must be an integer", lineno);
  const auto idx = v.get<std::int64_t>();
  if (idx < 0) throw ValidationError("line " + std::to_string(lineno) + ": " + name + " must be non-negative");
  return idx;
}

double get_number(const json& v, const std::string& name, std::size_t lineno) {
  if (!v.is_number()) throw ParseError("field \"" + name + "\" must be a number", lineno);
  return v.get<double>();
}

// ---- little-endian binary helpers -------------------------------------------------

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const fs::path& path) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw ParseError("truncated binary file " + path.string(), 0);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

constexpr char kEmbeddingMagic[4] = {'F', 'S', 'E', 'M'};

std::vector<EmbeddingVector> read_embeddings_binary(std::istream& in, const fs::path& path) {
  char magic[4];
  in.read(magic, 4);
  const auto dim = get_le<std::uint32_t>(in, path);
  const auto count = get_le<std::uint64_t>(in, path);
  if (dim == 0 && count > 0) throw ValidationError("embedding dim must be positive");
  std::vector<EmbeddingVector> rows;
  rows.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t r = 0; r < count; ++r) {
    EmbeddingVector row;
    const auto len = get_le<std::uint32_t>(in, path);
    row.frame.sequence_id.resize(len);
    if (len && !in.read(row.frame.sequence_id.data(), len))
      throw ParseError("truncated binary file " + path.string(), 0);
    row.frame.frame_index = get_le<std::int64_t>(in, path);
    if (row.frame.frame_index < 0)
      throw ValidationError("row " + std::to_string(r + 1) + ": idx must be non-negative");
    row.values.resize(dim);
    for (auto& v : row.values) {
      v = static_cast<double>(get_le<float>(in, path));
      if (!std::isfinite(v)) throw ValidationError("row " + std::to_string(r + 1) + ": non-finite value");
    }
    rows.push_back(std::move(row));
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw ParseError("trailing bytes after " + std::to_string(count) + " records in " + path.string(), 0);
  return rows;
}

std::string summary_field(const std::optional<ContentSummary>& s, int which) {
  if (!s) return "";
  switch (which) {
    case 0: return std::to_string(s->pedestrians);
    case 1: return std::to_string(s->vehicles);
    case 2: return std::to_string(s->night);
    case 3: return csv::format_double(s->uncertainty);
    default: return csv::format_double(s->windowed_uncertainty);
  }
}

std::string optional_double(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

const char* kTagsHeader = "seq,idx,time_of_day,lighting,scene,P,V,B,U,U_bar,label";
const char* kSelectionHeader = "seq,idx,ssim_to_prev_ref,blur_norm";

std::vector<std::vector<std::string>> read_csv_body(const fs::path& path, const std::string& header,
                                                    std::size_t columns) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header in " + path.string(), 1);
  csv::strip_cr(line);
  if (line != header) throw ParseError("unexpected header in " + path.string() + ": " + line, 1);
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    csv::strip_cr(line);
    if (line.empty()) continue;
    auto fields = csv::split(line);
    if (!fields) throw ParseError("unterminated quote", lineno);
    if (fields->size() != columns)
      throw ParseError("expected " + std::to_string(columns) + " columns, got " + std::to_string(fields->size()),
                       lineno);
    fields->push_back(std::to_string(lineno));
    rows.push_back(std::move(*fields));
  }
  return rows;
}

std::int64_t csv_int(const std::string& s, const char* name, std::size_t lineno) {
  auto v = csv::parse_int(s);
  if (!v) throw ParseError(std::string("bad integer in column ") + name + ": \"" + s + "\"", lineno);
  return *v;
}

double csv_double(const std::string& s, const char* name, std::size_t lineno) {
  auto v = csv::parse_double(s);
  if (!v) throw ParseError(std::string("bad number in column ") + name + ": \"" + s + "\"", lineno);
  return *v;
}

std::optional<double> csv_optional_double(const std::string& s, const char* name, std::size_t lineno) {
  if (s.empty()) return std::nullopt;
  return csv_double(s, name, lineno);
}

}  // namespace

// ---- detections -------------------------------------------------------------------

std::vector<FrameDetections> read_detections(const fs::path& path, double score_floor) {
  auto in = open_in(path);
  std::vector<FrameDetections> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const json obj = parse_line(line, lineno);
    FrameDetections fd;
    fd.frame.sequence_id = get_string(obj, "seq", lineno);
    fd.frame.frame_index = get_index(obj, "idx", lineno);
    const json& dets = field(obj, "dets", lineno);
    if (!dets.is_array()) throw ParseError("field \"dets\" must be an array", lineno);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      const std::string where = "dets[" + std::to_string(i) + "]";
      const json& d = dets[i];
      Detection det;
      det.class_name = get_string(d, "cls", lineno);
      det.score = get_number(field(d, "score", lineno), where + ".score", lineno);
      if (!(det.score >= 0.0 && det.score <= 1.0))
        throw ValidationError("line " + std::to_string(lineno) + ": " + where + ".score must be in [0,1], got " +
                              csv::format_double(det.score));
      const json& box = field(d, "bbox", lineno);
      if (!box.is_array() || box.size() != 4) throw ParseError(where + ".bbox must hold 4 numbers", lineno);
      for (int k = 0; k < 4; ++k) det.bbox[k] = get_number(box[k], where + ".bbox", lineno);
      if (!(det.bbox[0] < det.bbox[2] && det.bbox[1] < det.bbox[3]))
        throw ValidationError("line " + std::to_string(lineno) + ": " + where +
                              ".bbox needs x_min < x_max and y_min < y_max");
      if (det.score > score_floor) fd.detections.push_back(std::move(det));
    }
    frames.push_back(std::move(fd));
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const auto& a, const auto& b) { return frame_less(a.frame, b.frame); });
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i].frame.key() == frames[i - 1].frame.key())
      throw ValidationError("duplicate frame " + frames[i].frame.sequence_id + "#" +
                            std::to_string(frames[i].frame.frame_index) + " in " + path.string());
  return frames;
}

void write_detections(std::span<const FrameDetections> frames, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& fd : frames) {
    json dets = json::array();
    for (const auto& d : fd.detections)
      dets.push_back({{"cls", d.class_name}, {"score", d.score}, {"bbox", d.bbox}});
    json obj = {{"seq", fd.frame.sequence_id}, {"idx", fd.frame.frame_index}, {"dets", std::move(dets)}};
    out << obj.dump() << '\n';
  }
  finish(out, path);
}

// ---- embeddings -------------------------------------------------------------------

std::vector<EmbeddingVector> read_embeddings(const fs::path& path) {
  {
    auto probe = open_in(path, std::ios::binary);
    char magic[4] = {};
    probe.read(magic, 4);
    if (probe.gcount() == 4 && std::memcmp(magic, kEmbeddingMagic, 4) == 0) {
      probe.seekg(0);
      return read_embeddings_binary(probe, path);
    }
  }
  auto in = open_in(path);
  std::vector<EmbeddingVector> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const std::size_t row_no = rows.size() + 1;
    const json obj = parse_line(line, lineno);
    EmbeddingVector row;
    row.frame.sequence_id = get_string(obj, "seq", lineno);
    row.frame.frame_index = get_index(obj, "idx", lineno);
    const json& vec = field(obj, "vec", lineno);
    if (!vec.is_array()) throw ParseError("field \"vec\" must be an array", lineno);
    row.values.reserve(vec.size());
    for (const auto& v : vec) {
      if (v.is_null())
        throw ValidationError("row " + std::to_string(row_no) + " (line " + std::to_string(lineno) +
                              "): null/NaN value");
      row.values.push_back(get_number(v, "vec", lineno));
    }
    if (row.values.empty())
      throw ValidationError("row " + std::to_string(row_no) + " (line " + std::to_string(lineno) + "): empty vector");
    if (!rows.empty() && row.dim() != rows.front().dim())
      throw ValidationError("row " + std::to_string(row_no) + " (line " + std::to_string(lineno) + "): dim " +
                            std::to_string(row.dim()) + " differs from dim " + std::to_string(rows.front().dim()) +
                            " of row 1");
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_embeddings_jsonl(std::span<const EmbeddingVector> rows, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& r : rows) {
    json obj = {{"seq", r.frame.sequence_id}, {"idx", r.frame.frame_index}, {"vec", r.values}};
    out << obj.dump() << '\n';
  }
  finish(out, path);
}

void write_embeddings_binary(std::span<const EmbeddingVector> rows, const fs::path& path) {
  const std::uint32_t dim = rows.empty() ? 0 : static_cast<std::uint32_t>(rows.front().dim());
  for (const auto& r : rows)
    if (r.dim() != dim) throw ValidationError("embedding rows must share one dim");
  auto out = open_out(path, std::ios::binary);
  out.write(kEmbeddingMagic, 4);
  put_le<std::uint32_t>(out, dim);
  put_le<std::uint64_t>(out, rows.size());
  for (const auto& r : rows) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.frame.sequence_id.size()));
    out.write(r.frame.sequence_id.data(), static_cast<std::streamsize>(r.frame.sequence_id.size()));
    put_le<std::int64_t>(out, r.frame.frame_index);
    for (double v : r.values) put_le<float>(out, static_cast<float>(v));
  }
  finish(out, path);
}

// ---- tags -------------------------------------------------------------------------

void write_tags(std::span<const TagRecord> tags, const fs::path& path) {
  auto out = open_out(path);
  out << kTagsHeader << '\n';
  for (const auto& t : tags) {
    out << csv::quote(t.frame.sequence_id) << ',' << t.frame.frame_index << ','
        << static_cast<int>(t.tag.time_of_day) << ',' << static_cast<int>(t.tag.lighting) << ','
        << static_cast<int>(t.tag.scene);
    for (int k = 0; k < 5; ++k) out << ',' << summary_field(t.summary, k);
    out << ',' << t.tag.label() << '\n';
  }
  finish(out, path);
}

std::vector<TagRecord> read_tags(const fs::path& path) {
  std::vector<TagRecord> tags;
  for (const auto& f : read_csv_body(path, kTagsHeader, 11)) {
    const std::size_t lineno = std::stoul(f[11]);
    TagRecord t;
    t.frame.sequence_id = f[0];
    t.frame.frame_index = csv_int(f[1], "idx", lineno);
    try {
      t.tag = SceneTag::from_codes(static_cast<int>(csv_int(f[2], "time_of_day", lineno)),
                                   static_cast<int>(csv_int(f[3], "lighting", lineno)),
                                   static_cast<int>(csv_int(f[4], "scene", lineno)));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
    const bool any = std::any_of(f.begin() + 5, f.begin() + 10, [](const auto& s) { return !s.empty(); });
    const bool all = std::all_of(f.begin() + 5, f.begin() + 10, [](const auto& s) { return !s.empty(); });
    if (any && !all) throw ParseError("summary columns must be all present or all blank", lineno);
    if (all) {
      ContentSummary s;
      s.frame = t.frame;
      s.pedestrians = static_cast<int>(csv_int(f[5], "P", lineno));
      s.vehicles = static_cast<int>(csv_int(f[6], "V", lineno));
      s.night = static_cast<int>(csv_int(f[7], "B", lineno));
      s.uncertainty = csv_double(f[8], "U", lineno);
      s.windowed_uncertainty = csv_double(f[9], "U_bar", lineno);
      t.summary = s;
    }
    if (f[10] != t.tag.label())
      throw ValidationError("line " + std::to_string(lineno) + ": label \"" + f[10] + "\" does not match codes (" +
                            t.tag.label() + ")");
    tags.push_back(std::move(t));
  }
  return tags;
}

// ---- selection / run labels -------------------------------------------------------

void write_selection(std::span<const SelectionRecord> rows, const fs::path& path) {
  auto out = open_out(path);
  out << kSelectionHeader << '\n';
  for (const auto& r : rows)
    out << csv::quote(r.frame.sequence_id) << ',' << r.frame.frame_index << ','
        << optional_double(r.ssim_to_prev_ref) << ',' << optional_double(r.blur_norm) << '\n';
  finish(out, path);
}

std::vector<SelectionRecord> read_selection(const fs::path& path) {
  std::vector<SelectionRecord> rows;
  for (const auto& f : read_csv_body(path, kSelectionHeader, 4)) {
    const std::size_t lineno = std::stoul(f[4]);
    SelectionRecord r;
    r.frame.sequence_id = f[0];
    r.frame.frame_index = csv_int(f[1], "idx", lineno);
    r.ssim_to_prev_ref = csv_optional_double(f[2], "ssim_to_prev_ref", lineno);
    r.blur_norm = csv_optional_double(f[3], "blur_norm", lineno);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_run_labels(std::span<const FrameRef> frames, const std::vector<std::vector<int>>& labels,
                      const fs::path& path) {
  if (labels.size() != frames.size()) throw ValidationError("run label rows must match frames");
  const std::size_t runs = labels.empty() ? 0 : labels.front().size();
  auto out = open_out(path);
  out << "seq,idx";
  for (std::size_t r = 0; r < runs; ++r) out << ",run_" << r;
  out << '\n';
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (labels[i].size() != runs) throw ValidationError("ragged run label matrix");
    out << csv::quote(frames[i].sequence_id) << ',' << frames[i].frame_index;
    for (int code : labels[i]) out << ',' << code;
    out << '\n';
  }
  finish(out, path);
}

// ---- manifest ---------------------------------------------------------------------

namespace {

SceneTag parse_tag(const json& v, const std::string& where) {
  try {
    if (v.is_array() && v.size() == 3)
      return SceneTag::from_codes(v[0].get<int>(), v[1].get<int>(), v[2].get<int>());
    if (v.is_object())
      return SceneTag::from_codes(v.at("time_of_day").get<int>(), v.at("lighting").get<int>(),
                                  v.at("scene").get<int>());
  } catch (const json::exception& e) {
    throw ParseError(where + ": bad tag: " + e.what(), 0);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  throw ParseError(where + ": tag must be [time_of_day, lighting, scene] or an object", 0);
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() ? p : base / p; }

}  // namespace

void Manifest::build_index() {
  by_sequence_.clear();
  by_frame_.clear();
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    if (!by_sequence_.emplace(seq.id, s).second) throw ValidationError("duplicate sequence id " + seq.id);
    for (std::size_t f = 0; f < seq.frames.size(); ++f)
      if (!by_frame_.emplace(FrameKey{seq.id, seq.frames[f].index}, std::pair{s, f}).second)
        throw ValidationError("duplicate frame " + seq.id + "#" + std::to_string(seq.frames[f].index));
  }
}

const ManifestSequence* Manifest::find(const std::string& id) const {
  auto it = by_sequence_.find(id);
  return it == by_sequence_.end() ? nullptr : &sequences[it->second];
}

const ManifestFrame* Manifest::find(const FrameKey& key) const {
  auto it = by_frame_.find(key);
  return it == by_frame_.end() ? nullptr : &sequences[it->second.first].frames[it->second.second];
}

std::optional<SceneTag> Manifest::tag_of(const FrameKey& key) const {
  if (const auto* f = find(key); f && f->tag) return f->tag;
  if (const auto* s = find(key.sequence_id)) return s->tag;
  return std::nullopt;
}

std::optional<Split> Manifest::split_of(const std::string& sequence_id) const {
  if (const auto* s = find(sequence_id)) return s->split;
  return std::nullopt;
}

std::vector<FrameRef> Manifest::frames_of(const ManifestSequence& seq) const {
  std::vector<FrameRef> out;
  out.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.push_back({seq.id, f.index, f.image});
  return out;
}

namespace {

// One %d conversion (optional zero flag and width); "%%" is a literal percent.
bool valid_index_pattern(const std::string& p) {
  int fields = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != '%') continue;
    if (i + 1 < p.size() && p[i + 1] == '%') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < p.size() && std::isdigit(static_cast<unsigned char>(p[j]))) ++j;
    if (j >= p.size() || p[j] != 'd' || j - i > 4) return false;
    ++fields;
    i = j;
  }
  return fields == 1;
}

}  // namespace

Manifest parse_manifest(const std::string& json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), 0);
  }
  if (!root.is_object() || !root.contains("sequences") || !root["sequences"].is_array())
    throw ParseError("manifest needs a \"sequences\" array", 0);
  Manifest m;
  try {
    for (const auto& js : root["sequences"]) {
      ManifestSequence seq;
      if (!js.is_object() || !js.contains("id")) throw ParseError("sequence entry needs an \"id\"", 0);
      seq.id = js["id"].is_string() ? js["id"].get<std::string>() : js["id"].dump();
      const std::string where = "sequence " + seq.id;
      const std::string split = js.value("split", std::string("test"));
      if (split == "train")
        seq.split = Split::train;
      else if (split == "test")
        seq.split = Split::test;
      else
        throw ValidationError(where + ": split must be \"train\" or \"test\"");
      if (js.contains("tag")) seq.tag = parse_tag(js["tag"], where);
      if (js.contains("frames")) {
        const json& frames = js["frames"];
        if (frames.is_array()) {
          for (const auto& jf : frames) {
            ManifestFrame f;
            if (!jf.contains("idx") || !jf["idx"].is_number_integer())
              throw ParseError(where + ": frame entry needs an integer \"idx\"", 0);
            f.index = jf["idx"].get<std::int64_t>();
            if (f.index < 0) throw ValidationError(where + ": frame idx must be non-negative");
            if (jf.contains("image")) f.image = resolve(jf["image"].get<std::string>(), base_dir);
            if (jf.contains("night")) {
              const int b = jf["night"].get<int>();
              if (b != 0 && b != 1) throw ValidationError(where + ": night must be 0 or 1");
              f.night = b;
            }
            if (jf.contains("tag")) f.tag = parse_tag(jf["tag"], where);
            seq.frames.push_back(std::move(f));
          }
        } else if (frames.is_object()) {
          const fs::path dir = resolve(frames.at("dir").get<std::string>(), base_dir);
          const std::string pattern = frames.at("pattern").get<std::string>();
          if (!valid_index_pattern(pattern))
            throw ValidationError(where + ": frame pattern needs exactly one integer field such as %06d");
          const auto count = frames.at("count").get<std::int64_t>();
          const auto start = frames.value("start", std::int64_t{0});
          for (std::int64_t i = 0; i < count; ++i) {
            char name[512];
            std::snprintf(name, sizeof(name), pattern.c_str(), static_cast<int>(start + i));  // printf-style, e.g. %06d
            seq.frames.push_back({start + i, dir / name, std::nullopt, std::nullopt});
          }
        } else {
          throw ParseError(where + ": \"frames\" must be an array or a pattern object", 0);
        }
        std::sort(seq.frames.begin(), seq.frames.end(),
                  [](const auto& a, const auto& b) { return a.index < b.index; });
      }
      m.sequences.push_back(std::move(seq));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what(), 0);
  }
  m.build_index();
  return m;
}

Manifest read_manifest(const fs::path& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

}  // namespace framesift
