#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "perfal/harness.hpp"

namespace perfal::harness {

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string num(double v, int digits = 3) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
                                    "#7f7f7f"};

struct Cell {
  std::string embedding;  // display name
  std::string strategy;
  std::vector<AggregatePoint> points;
};

}  // namespace

std::string curves_svg(const std::string& title, const std::vector<Series>& series) {
  constexpr double W = 640, H = 400, left = 60, right = 140, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = 0, ymax = 1;
  for (const auto& s : series)
    for (const auto& p : s.points) {
      xmin = std::min(xmin, double(p.labels_used));
      xmax = std::max(xmax, double(p.labels_used));
      ymin = std::min(ymin, p.mean - p.std);
      ymax = std::max(ymax, p.mean + p.std);
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  ymin = std::floor(ymin * 10) / 10;
  ymax = std::ceil(ymax * 10) / 10;
  const auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  const auto Y = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" font-family=\"sans-serif\" "
                    "font-size=\"12\">\n<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(W / 2, 1) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";
  // axes and ticks
  svg += "<path d=\"M" + num(left, 1) + "," + num(top, 1) + " V" + num(top + ph, 1) + " H" + num(left + pw, 1) +
         "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = ymin + (ymax - ymin) * i / 5.0, x = xmin + (xmax - xmin) * i / 5.0;
    svg += "<text x=\"" + num(left - 6, 1) + "\" y=\"" + num(Y(y) + 4, 1) + "\" text-anchor=\"end\">" + num(y, 2) +
           "</text>\n";
    svg += "<line x1=\"" + num(left, 1) + "\" x2=\"" + num(left + pw, 1) + "\" y1=\"" + num(Y(y), 1) + "\" y2=\"" +
           num(Y(y), 1) + "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + num(X(x), 1) + "\" y=\"" + num(top + ph + 18, 1) + "\" text-anchor=\"middle\">" +
           num(x, 0) + "</text>\n";
  }
  svg += "<text x=\"" + num(left + pw / 2, 1) + "\" y=\"" + num(H - 10, 1) +
         "\" text-anchor=\"middle\">labelled programs</text>\n";
  svg += "<text transform=\"translate(16," + num(top + ph / 2, 1) +
         ") rotate(-90)\" text-anchor=\"middle\">Pearson r</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::string colour = kPalette[k % std::size(kPalette)];
    if (s.points.empty()) continue;
    std::string band, line;
    for (const auto& p : s.points) band += (band.empty() ? "M" : " L") + num(X(p.labels_used), 2) + "," + num(Y(p.mean + p.std), 2);
    for (auto it = s.points.rbegin(); it != s.points.rend(); ++it)
      band += " L" + num(X(it->labels_used), 2) + "," + num(Y(it->mean - it->std), 2);
    for (const auto& p : s.points) line += (line.empty() ? "M" : " L") + num(X(p.labels_used), 2) + "," + num(Y(p.mean), 2);
    svg += "<path d=\"" + band + " Z\" fill=\"" + colour + "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    svg += "<path d=\"" + line + "\" fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(k);
    svg += "<line x1=\"" + num(left + pw + 12, 1) + "\" x2=\"" + num(left + pw + 32, 1) + "\" y1=\"" + num(ly, 1) +
           "\" y2=\"" + num(ly, 1) + "\" stroke=\"" + colour + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(left + pw + 38, 1) + "\" y=\"" + num(ly + 4, 1) + "\">" + escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string report(const fs::path& dir) {
  if (!fs::is_directory(dir)) return "no runs found in " + dir.string() + "\n";

  // display names and scopes from the config snapshot
  std::map<std::string, std::string> display;
  std::map<std::string, std::string> scope;
  std::map<std::string, std::string> method;
  if (fs::exists(dir / "config.json")) {
    try {
      const auto cfg = experiment_from_json(read_text(dir / "config.json"));
      for (const auto& e : cfg.embeddings) {
        display[slug(e.name)] = e.name;
        scope[e.name] = embed::scope_name(e.config.scope);
        method[e.name] = embed::method_name(e.config.method);
      }
    } catch (const Error&) {
    }
  }

  std::vector<Cell> cells;
  if (fs::is_directory(dir / "aggregates")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / "aggregates"))
      if (e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const auto stem = f.stem().string();
      const auto cut = stem.rfind("__");
      if (cut == std::string::npos) continue;
      Cell c;
      const auto es = stem.substr(0, cut);
      c.embedding = display.count(es) ? display[es] : es;
      c.strategy = stem.substr(cut + 2);
      c.points = parse_aggregate_csv(read_text(f));
      if (!c.points.empty()) cells.push_back(std::move(c));
    }
  }
  const bool has_passive = fs::exists(dir / "passive.csv");
  if (cells.empty() && !has_passive) return "no runs found in " + dir.string() + "\n";

  std::string md = "# Results: " + dir.filename().string() + "\n";

  // passive baseline
  std::map<std::string, std::vector<double>> passive;
  if (has_passive) {
    std::istringstream in(read_text(dir / "passive.csv"));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::istringstream row(line);
      std::string emb, seed, r;
      if (std::getline(row, emb, ',') && std::getline(row, seed, ',') && std::getline(row, r, ','))
        passive[emb].push_back(std::stod(r));
    }
    md += "\n## Passive baseline\n\n| embedding | Pearson mean | std | runs |\n|---|---|---|---|\n";
    for (const auto& [emb, v] : passive) {
      double m = 0, s = 0;
      for (double x : v) m += x;
      m /= double(v.size());
      for (double x : v) s += (x - m) * (x - m);
      s = std::sqrt(s / double(v.size()));
      md += "| " + emb + " | " + num(m) + " | " + num(s) + " | " + std::to_string(v.size()) + " |\n";
    }
  }

  if (!cells.empty()) {
    std::vector<std::string> embeddings;
    for (const auto& c : cells)
      if (std::find(embeddings.begin(), embeddings.end(), c.embedding) == embeddings.end())
        embeddings.push_back(c.embedding);

    md += "\n## Final scores\n\n| embedding | strategy | labels | Pearson mean | std | runs |\n|---|---|---|---|---|---|\n";
    for (const auto& c : cells) {
      const auto& p = c.points.back();
      md += "| " + c.embedding + " | " + c.strategy + " | " + std::to_string(p.labels_used) + " | " + num(p.mean) +
            " | " + num(p.std) + " | " + std::to_string(p.runs) + " |\n";
    }

    md += "\n## Best strategy per budget\n";
    for (const auto& emb : embeddings) {
      std::map<int, std::pair<std::string, double>> best;
      for (const auto& c : cells) {
        if (c.embedding != emb) continue;
        for (const auto& p : c.points) {
          auto it = best.find(p.labels_used);
          if (it == best.end() || p.mean > it->second.second) best[p.labels_used] = {c.strategy, p.mean};
        }
      }
      md += "\n### " + emb + "\n\n| labels | best strategy | Pearson mean |\n|---|---|---|\n";
      for (const auto& [labels, b] : best)
        md += "| " + std::to_string(labels) + " | " + b.first + " | " + num(b.second) + " |\n";
    }

    // split-space against full-scope fits of the same method
    std::string scope_rows;
    for (const auto& emb : embeddings) {
      if (!scope.count(emb) || scope[emb] != "split-space") continue;
      for (const auto& other : embeddings) {
        if (other == emb || !scope.count(other) || scope[other] == "split-space" || method[other] != method[emb])
          continue;
        for (const auto& c : cells) {
          if (c.embedding != emb) continue;
          for (const auto& o : cells)
            if (o.embedding == other && o.strategy == c.strategy)
              scope_rows += "| " + c.strategy + " | " + emb + " | " + num(c.points.back().mean) + " | " + other +
                            " | " + num(o.points.back().mean) + " |\n";
        }
      }
    }
    if (!scope_rows.empty())
      md += "\n## Split-space against full scope\n\n| strategy | split-space | final | full scope | final |\n"
            "|---|---|---|---|---|\n" +
            scope_rows;
  }

  if (fs::exists(dir / "summary.json")) {
    try {
      const auto s = nlohmann::json::parse(read_text(dir / "summary.json"));
      md += "\n## Integrity\n\n";
      md += "- graphs: " + std::to_string(s.value("graphs", 0)) + "\n";
      md += "- test-label reads during querying: " + std::to_string(s.value("test_reads_during_query", 0)) + "\n";
      md += "- reads of unrevealed labels: " + std::to_string(s.value("unrevealed_reads", 0)) + "\n";
      md += std::string("- L, U, T consistent: ") + (s.value("sets_consistent", true) ? "yes" : "no") + "\n";
      const auto& failed = s.at("failed_cells");
      if (!failed.empty()) {
        md += "\n## Failed cells\n\n| embedding | strategy | seed | error |\n|---|---|---|---|\n";
        for (const auto& f : failed)
          md += "| " + f.at("embedding").get<std::string>() + " | " + f.at("strategy").get<std::string>() + " | " +
                std::to_string(f.at("seed").get<std::uint64_t>()) + " | " + f.at("error").get<std::string>() + " |\n";
      }
    } catch (const nlohmann::json::exception&) {
    }
  }
  return md;
}

}  // namespace perfal::harness
