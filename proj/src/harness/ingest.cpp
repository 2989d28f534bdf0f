#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "perfal/fa_ast.hpp"
#include "perfal/graph.hpp"
#include "perfal/harness.hpp"

namespace perfal::harness {

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Write then rename so concurrent readers never see half a file.
void write_atomically(const fs::path& p, const std::string& bytes) {
  fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp" + std::to_string(std::hash<std::string>{}(bytes) & 0xffff);
  {
    std::ofstream out(tmp, std::ios::binary);
    out << bytes;
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

}  // namespace

std::string_view label_aggregation_name(LabelAggregation a) { return a == LabelAggregation::Mean ? "mean" : "median"; }

LabelAggregation parse_label_aggregation(std::string_view s) {
  if (s == "mean") return LabelAggregation::Mean;
  if (s == "median") return LabelAggregation::Median;
  throw ConfigError("unknown label aggregation '" + std::string(s) + "'");
}

std::vector<LabelRow> read_labels(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read labels file " + file.string());
  std::vector<LabelRow> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos)
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": expected path,duration_ms");
    const auto path = trim(line.substr(0, comma));
    const auto value = trim(line.substr(comma + 1));
    char* end = nullptr;
    const double d = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
      if (lineno == 1 && rows.empty()) continue;  // header
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": bad duration '" + value + "'");
    }
    if (!std::isfinite(d) || d <= 0)
      throw ConfigError(file.string() + ":" + std::to_string(lineno) + ": duration must be positive and finite");
    rows.push_back({path, d});
  }
  return rows;
}

std::map<std::string, double> aggregate_labels(const std::vector<LabelRow>& rows, LabelAggregation agg) {
  std::map<std::string, std::vector<double>> runs;
  for (const auto& r : rows) runs[r.path].push_back(r.duration_ms);
  std::map<std::string, double> out;
  for (auto& [path, v] : runs) {
    if (agg == LabelAggregation::Mean) {
      double s = 0;
      for (double x : v) s += x;
      out[path] = s / static_cast<double>(v.size());
    } else {
      std::sort(v.begin(), v.end());
      const auto n = v.size();
      out[path] = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
  }
  return out;
}

std::vector<std::string> list_sources(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".java")
      out.push_back(fs::relative(e.path(), dir).generic_string());
  std::sort(out.begin(), out.end());
  return out;
}

Corpus parse_directory(const fs::path& dir, fa_ast::ParseDepth depth) {
  Corpus c;
  c.depth = depth;
  for (const auto& rel : list_sources(dir)) {
    try {
      c.graphs.push_back(fa_ast::build_file_graph(read_file(dir / rel), rel));
      c.ids.push_back(rel);
    } catch (const fa_ast::ParseError& e) {
      c.report.parse_failed.push_back(rel + ": " + e.what());
    }
  }
  if (depth == fa_ast::ParseDepth::System && !c.graphs.empty()) {
    const fa_ast::DeclarationIndex index(c.graphs);
    std::vector<fa_ast::CodeGraph> system;
    system.reserve(c.graphs.size());
    for (std::size_t i = 0; i < c.graphs.size(); ++i) system.push_back(fa_ast::resolve_system_level(index, i).graph);
    c.graphs = std::move(system);
  }
  return c;
}

Corpus ingest(const fs::path& corpus_dir, const fs::path& labels_file, fa_ast::ParseDepth depth, LabelAggregation agg) {
  const auto labels = aggregate_labels(read_labels(labels_file), agg);
  Corpus parsed = parse_directory(corpus_dir, depth);

  std::set<std::string> parsable(parsed.ids.begin(), parsed.ids.end());
  std::set<std::string> sources;
  for (const auto& s : list_sources(corpus_dir)) sources.insert(s);

  Corpus c;
  c.depth = depth;
  c.report.parse_failed = parsed.report.parse_failed;
  for (const auto& [path, _] : labels)
    if (!sources.count(path)) c.report.missing_file.push_back(path);
  for (std::size_t i = 0; i < parsed.ids.size(); ++i) {
    auto it = labels.find(parsed.ids[i]);
    if (it == labels.end()) {
      c.report.missing_label.push_back(parsed.ids[i]);
      continue;
    }
    c.ids.push_back(parsed.ids[i]);
    c.graphs.push_back(std::move(parsed.graphs[i]));
    c.labels.push_back(it->second);
  }
  if (c.ids.empty()) throw ConfigError("no source file under " + corpus_dir.string() + " has a label");
  return c;
}

void write_graphs(const Corpus& c, const fs::path& out_dir) {
  for (std::size_t i = 0; i < c.graphs.size(); ++i) {
    auto p = out_dir / c.ids[i];
    p.replace_extension(".json");
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << fa_ast::to_json(c.graphs[i]) << '\n';
  }
}

std::vector<fa_ast::CodeGraph> read_graphs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<fa_ast::CodeGraph> out;
  for (const auto& f : files) out.push_back(fa_ast::graph_from_json(read_file(f)));
  return out;
}

std::string metrics_csv(const std::vector<fa_ast::CodeGraph>& graphs) {
  std::string out = "path";
  for (std::size_t i = 0; i < graph::kMetricCount; ++i) out += "," + std::string(graph::metric_name(i));
  out += '\n';
  char buf[40];
  for (const auto& g : graphs) {
    out += g.path;
    for (double v : graph::manual_embed(g)) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

// ---- cache --------------------------------------------------------------------------

Cache::Cache(bool enabled, std::optional<fs::path> root) : enabled_(enabled) {
  if (root) {
    root_ = *root;
  } else if (const char* env = std::getenv("PERFAL_CACHE_DIR"); env && *env) {
    root_ = env;
  } else if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) {
    root_ = fs::path(xdg) / "perfal";
  } else if (const char* home = std::getenv("HOME"); home && *home) {
    root_ = fs::path(home) / ".cache" / "perfal";
  } else {
    root_ = fs::temp_directory_path() / "perfal-cache";
  }
}

fs::path Cache::slot(const std::string& kind, std::uint64_t key) const {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(key));
  return root_ / kind / hex;
}

std::optional<fs::path> Cache::find(const std::string& kind, std::uint64_t key) const {
  if (!enabled_) return std::nullopt;
  auto p = slot(kind, key);
  if (fs::exists(p)) return p;
  return std::nullopt;
}

std::uint64_t corpus_hash(const Corpus& c) {
  std::uint64_t h = fnv1a(fa_ast::depth_name(c.depth));
  for (std::size_t i = 0; i < c.graphs.size(); ++i) {
    h = fnv1a(c.ids[i], h);
    h = fnv1a(fa_ast::to_json(c.graphs[i]), h);
  }
  return h;
}

namespace detail {
void cache_store(const fs::path& p, const std::string& bytes) { write_atomically(p, bytes); }
std::string cache_load(const fs::path& p) { return read_file(p); }
}  // namespace detail

}  // namespace perfal::harness
