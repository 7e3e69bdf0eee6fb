#include "crossfuse/dataset.h"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "crossfuse/errors.h"

namespace crossfuse {
namespace {

using nlohmann::json;

int ParseDigits(std::string_view s, std::size_t pos, std::size_t n,
                std::string_view whole) {
  int v = 0;
  if (pos + n > s.size()) throw FormatError("bad timestamp '" + std::string(whole) + "'");
  const auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + n, v);
  if (ec != std::errc() || ptr != s.data() + pos + n) {
    throw FormatError("bad timestamp '" + std::string(whole) + "'");
  }
  return v;
}

void Expect(std::string_view s, std::size_t pos, char c, std::string_view whole) {
  if (pos >= s.size() || s[pos] != c) {
    throw FormatError("bad timestamp '" + std::string(whole) + "'");
  }
}

ImageInput InlineImage(const json& j) {
  return ImageInput(j.at("height").get<std::size_t>(),
                    j.at("width").get<std::size_t>(),
                    j.at("channels").get<std::size_t>(),
                    j.at("pixels").get<std::vector<double>>());
}

int ResolveLabel(const json& j, const char* key, const TaskSpec& task,
                 bool* dropped) {
  if (!j.contains(key) || j.at(key).is_null()) return -1;
  const auto idx = task.ClassIndex(j.at(key).get<std::string>());
  if (!idx) {
    *dropped = true;
    return -1;
  }
  return *idx;
}

Sample ParseSample(const json& j, const TaskSpec& task,
                   const std::filesystem::path& base, bool* dropped) {
  Sample s;
  s.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                : j.at("id").dump();
  if (j.contains("text") && !j.at("text").is_null()) {
    s.text = NormalizeTweet(j.at("text").get<std::string>());
  }
  if (j.contains("image") && !j.at("image").is_null()) {
    const json& im = j.at("image");
    if (im.is_string()) {
      std::filesystem::path p = im.get<std::string>();
      if (p.is_relative()) p = base / p;
      s.image = ReadNetpbm(p.string());
    } else {
      s.image = InlineImage(im);
    }
  }
  if (j.contains("image_vec")) s.image_vec = j.at("image_vec").get<std::vector<double>>();
  if (j.contains("text_vec")) s.text_vec = j.at("text_vec").get<std::vector<double>>();
  s.label_image = ResolveLabel(j, "label_image", task, dropped);
  if (task.text_label_from_image) {
    s.label_text = s.label_image;
  } else {
    s.label_text = ResolveLabel(j, "label_text", task, dropped);
  }
  if (!*dropped && (s.label_image < 0 || s.label_text < 0)) {
    throw FormatError("sample '" + s.id + "' is missing a label");
  }
  s.event = j.value("event", std::string());
  if (j.contains("timestamp") && !j.at("timestamp").is_null()) {
    const json& ts = j.at("timestamp");
    s.timestamp = ts.is_number() ? ts.get<std::int64_t>()
                                 : ParseTimestamp(ts.get<std::string>());
  }
  return s;
}

}  // namespace

std::int64_t ParseTimestamp(std::string_view iso) {
  using namespace std::chrono;
  const int y = ParseDigits(iso, 0, 4, iso);
  Expect(iso, 4, '-', iso);
  const int mo = ParseDigits(iso, 5, 2, iso);
  Expect(iso, 7, '-', iso);
  const int d = ParseDigits(iso, 8, 2, iso);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw FormatError("bad date in timestamp '" + std::string(iso) + "'");
  std::int64_t secs = sys_days{ymd}.time_since_epoch().count() * 86400LL;
  if (iso.size() == 10) return secs;
  if (iso[10] != 'T' && iso[10] != ' ') {
    throw FormatError("bad timestamp '" + std::string(iso) + "'");
  }
  const int hh = ParseDigits(iso, 11, 2, iso);
  Expect(iso, 13, ':', iso);
  const int mm = ParseDigits(iso, 14, 2, iso);
  Expect(iso, 16, ':', iso);
  const int ss = ParseDigits(iso, 17, 2, iso);
  if (hh > 23 || mm > 59 || ss > 60) {
    throw FormatError("bad time in timestamp '" + std::string(iso) + "'");
  }
  secs += hh * 3600 + mm * 60 + ss;
  std::size_t pos = 19;
  if (pos < iso.size() && iso[pos] == '.') {
    ++pos;
    while (pos < iso.size() && iso[pos] >= '0' && iso[pos] <= '9') ++pos;
  }
  if (pos == iso.size()) return secs;
  if (iso[pos] == 'Z' && pos + 1 == iso.size()) return secs;
  if ((iso[pos] == '+' || iso[pos] == '-') && pos + 6 == iso.size()) {
    const int oh = ParseDigits(iso, pos + 1, 2, iso);
    Expect(iso, pos + 3, ':', iso);
    const int om = ParseDigits(iso, pos + 4, 2, iso);
    const int offset = oh * 3600 + om * 60;
    return iso[pos] == '+' ? secs - offset : secs + offset;
  }
  throw FormatError("bad timezone in timestamp '" + std::string(iso) + "'");
}

std::string FormatTimestamp(std::int64_t seconds) {
  using namespace std::chrono;
  const std::int64_t day_count =
      seconds >= 0 ? seconds / 86400 : -((-seconds + 86399) / 86400);
  const std::int64_t rem = seconds - day_count * 86400;
  const year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>(rem % 3600 / 60), static_cast<int>(rem % 60));
  return buf;
}

Corpus ReadCorpus(std::istream& in, const TaskSpec& task,
                  const std::string& base_dir, LoadStats* stats) {
  Corpus out;
  LoadStats local;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++local.lines;
    bool dropped = false;
    try {
      Sample s = ParseSample(json::parse(line), task, base_dir, &dropped);
      if (dropped) {
        ++local.dropped_label;
        continue;
      }
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw FormatError("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw FormatError("corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  local.loaded = out.size();
  if (stats) *stats = local;
  return out;
}

Corpus LoadCorpus(const std::string& path, const TaskSpec& task,
                  LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open corpus '" + path + "'");
  const auto base = std::filesystem::path(path).parent_path();
  return ReadCorpus(in, task, base.empty() ? "." : base.string(), stats);
}

void WriteCorpus(std::ostream& out, const Corpus& corpus, const TaskSpec& task) {
  for (const Sample& s : corpus) {
    json j;
    j["id"] = s.id;
    if (s.text) j["text"] = s.text->raw;
    if (s.image) {
      j["image"] = json{{"height", s.image->height},
                        {"width", s.image->width},
                        {"channels", s.image->channels},
                        {"pixels", s.image->pixels}};
    }
    if (s.image_vec) j["image_vec"] = *s.image_vec;
    if (s.text_vec) j["text_vec"] = *s.text_vec;
    j["label_image"] = task.ClassName(s.label_image);
    j["label_text"] = task.ClassName(s.label_text);
    j["event"] = s.event;
    j["timestamp"] = FormatTimestamp(s.timestamp);
    out << j.dump() << '\n';
  }
}

void SaveCorpus(const std::string& path, const Corpus& corpus,
                const TaskSpec& task) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write corpus '" + path + "'");
  WriteCorpus(out, corpus, task);
}

void ValidateCorpus(const Corpus& corpus) {
  std::optional<std::size_t> image_len, text_len;
  for (const Sample& s : corpus) {
    if (!s.image && !s.image_vec) {
      throw DimensionError("sample '" + s.id + "' has no image representation");
    }
    if (!s.text && !s.text_vec) {
      throw DimensionError("sample '" + s.id + "' has no text representation");
    }
    if (s.image_vec) {
      if (!image_len) image_len = s.image_vec->size();
      if (*image_len != s.image_vec->size()) {
        throw DimensionError("sample '" + s.id + "' image_vec has length " +
                             std::to_string(s.image_vec->size()) + ", expected " +
                             std::to_string(*image_len));
      }
    }
    if (s.text_vec) {
      if (!text_len) text_len = s.text_vec->size();
      if (*text_len != s.text_vec->size()) {
        throw DimensionError("sample '" + s.id + "' text_vec has length " +
                             std::to_string(s.text_vec->size()) + ", expected " +
                             std::to_string(*text_len));
      }
    }
  }
}

}  // namespace crossfuse
