#include "maxrf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "maxrf/common.hpp"

namespace maxrf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& context, int line_no) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end) {
    throw DataError(context + ": non-numeric value '" + s + "' at line " +
                    std::to_string(line_no));
  }
  return v;
}

// Shortest round-trip decimal; integral values print without a fraction.
std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_nonempty_line(std::istream& in, bool& ok) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ok = true;
    return line;
  }
  ok = false;
  return line;
}

}  // namespace

std::string task_name(Task t) { return t == Task::CaCO3 ? "CaCO3" : "TOC"; }

Task parse_task(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "caco3") return Task::CaCO3;
  if (lower == "toc") return Task::TOC;
  throw DataError("unknown task '" + name + "' (expected CaCO3 or TOC)");
}

std::vector<Spectrum> load_spectra(const std::string& path, int n_channels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open spectra file: " + path);

  bool ok = false;
  const std::string header = read_nonempty_line(in, ok);
  if (!ok) throw DataError(path + ": empty file");
  const auto head_cols = split_line(header);
  if (head_cols.size() != static_cast<std::size_t>(n_channels) + 3 ||
      head_cols[0] != "record_id" || head_cols[1] != "core_id" ||
      head_cols[2] != "depth_cm") {
    throw DataError(path + ": bad header, expected record_id,core_id,depth_cm,ch_0000,... with " +
                    std::to_string(n_channels) + " channel columns");
  }

  std::vector<Spectrum> out;
  std::unordered_set<std::string> seen;
  int line_no = 1;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_line(line);
    if (cols.size() != static_cast<std::size_t>(n_channels) + 3) {
      throw DataError(path + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(cols.size()) + " columns, expected " +
                      std::to_string(n_channels + 3));
    }
    Spectrum s;
    s.record_id = cols[0];
    s.core_id = cols[1];
    s.depth_cm = parse_double(cols[2], path, line_no);
    if (!(s.depth_cm >= 0.0) || !std::isfinite(s.depth_cm)) {
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": depth_cm must be non-negative and finite");
    }
    if (!seen.insert(s.record_id).second) {
      throw DataError(path + ": duplicate record_id '" + s.record_id + "' at line " +
                      std::to_string(line_no));
    }
    s.channels.reserve(n_channels);
    for (int i = 0; i < n_channels; ++i) {
      const double v = parse_double(cols[3 + i], path, line_no);
      if (!std::isfinite(v) || v < 0.0) {
        throw DataError(path + ": line " + std::to_string(line_no) + ": channel " +
                        std::to_string(i) + " has invalid count " + cols[3 + i]);
      }
      s.channels.push_back(v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void save_spectra(const std::vector<Spectrum>& spectra, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write spectra file: " + path);
  const std::size_t n = spectra.empty() ? 2048 : spectra.front().channels.size();
  out << "record_id,core_id,depth_cm";
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), ",ch_%04zu", i);
    out << buf;
  }
  out << "\n";
  for (const auto& s : spectra) {
    out << s.record_id << ',' << s.core_id << ',' << format_double(s.depth_cm);
    for (double v : s.channels) out << ',' << format_double(v);
    out << "\n";
  }
}

std::vector<GeochemLabel> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file: " + path);
  bool ok = false;
  const std::string header = read_nonempty_line(in, ok);
  if (!ok) throw DataError(path + ": empty file");
  if (header != "record_id,task,value_wt_pct") {
    throw DataError(path + ": bad header, expected record_id,task,value_wt_pct");
  }
  std::vector<GeochemLabel> out;
  std::unordered_set<std::string> seen;
  int line_no = 1;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_line(line);
    if (cols.size() != 3) {
      throw DataError(path + ": line " + std::to_string(line_no) +
                      " has wrong column count");
    }
    GeochemLabel l;
    l.record_id = cols[0];
    l.task = parse_task(cols[1]);
    l.value_wt_pct = parse_double(cols[2], path, line_no);
    if (!std::isfinite(l.value_wt_pct) || l.value_wt_pct < 0.0 ||
        l.value_wt_pct > 100.0) {
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": value_wt_pct must be in [0, 100]");
    }
    if (!seen.insert(l.record_id + "\x1f" + task_name(l.task)).second) {
      throw DataError(path + ": duplicate (record_id, task) at line " +
                      std::to_string(line_no));
    }
    out.push_back(std::move(l));
  }
  return out;
}

void save_labels(const std::vector<GeochemLabel>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write labels file: " + path);
  out << "record_id,task,value_wt_pct\n";
  for (const auto& l : labels) {
    out << l.record_id << ',' << task_name(l.task) << ','
        << format_double(l.value_wt_pct) << "\n";
  }
}

std::vector<LabeledSpectrum> align_labels(const std::vector<Spectrum>& spectra,
                                          const std::vector<GeochemLabel>& labels,
                                          Task task) {
  std::unordered_map<std::string, double> by_id;
  std::unordered_set<std::string> known;
  for (const auto& s : spectra) known.insert(s.record_id);

  std::vector<std::string> orphans;
  for (const auto& l : labels) {
    if (l.task != task) continue;
    if (!known.count(l.record_id)) {
      orphans.push_back(l.record_id);
      continue;
    }
    by_id[l.record_id] = l.value_wt_pct;
  }
  if (!orphans.empty()) {
    std::string msg = "labels reference unknown record_ids:";
    for (const auto& id : orphans) msg += " " + id;
    throw DataError(msg);
  }

  std::vector<LabeledSpectrum> out;
  out.reserve(by_id.size());
  for (const auto& s : spectra) {
    const auto it = by_id.find(s.record_id);
    if (it != by_id.end()) out.push_back({&s, it->second});
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<std::string>& ids, double ratio_val,
                           std::uint64_t seed) {
  if (ids.empty()) throw DataError("split_dataset: empty id list");
  if (!(ratio_val > 0.0 && ratio_val < 1.0)) {
    throw DataError("split_dataset: ratio_val must be in (0, 1)");
  }
  std::unordered_set<std::string> uniq(ids.begin(), ids.end());
  if (uniq.size() != ids.size()) throw DataError("split_dataset: duplicate ids");

  std::vector<std::string> shuffled = ids;
  Rng rng(derive_seed(seed, 0x5714ULL));
  rng.shuffle(std::span<std::string>(shuffled));

  const std::size_t n_val =
      static_cast<std::size_t>(std::floor(static_cast<double>(ids.size()) * ratio_val));
  DatasetSplit split;
  split.seed = seed;
  split.val_ids.assign(shuffled.begin(), shuffled.begin() + n_val);
  split.train_ids.assign(shuffled.begin() + n_val, shuffled.end());
  return split;
}

}  // namespace maxrf
