#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "perfal/fa_ast.hpp"
#include "perfal/harness.hpp"
#include "perfal/parallel.hpp"

namespace perfal::harness {

namespace detail {
void cache_store(const fs::path& p, const std::string& bytes);
std::string cache_load(const fs::path& p);
}  // namespace detail

namespace {

using ojson = nlohmann::ordered_json;

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + p.string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

// Parsed corpus, cached by the bytes of every source and the parse depth.
Corpus parse_cached(const fs::path& dir, fa_ast::ParseDepth depth, const Cache& cache) {
  std::uint64_t key = fnv1a(fa_ast::depth_name(depth));
  for (const auto& rel : list_sources(dir)) {
    key = fnv1a(rel, key);
    std::ifstream in(dir / rel, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    key = fnv1a(ss.str(), key);
  }
  if (auto hit = cache.find("graphs", key)) {
    const auto j = nlohmann::json::parse(detail::cache_load(*hit));
    Corpus c;
    c.depth = depth;
    c.ids = j.at("ids").get<std::vector<std::string>>();
    c.report.parse_failed = j.at("failed").get<std::vector<std::string>>();
    for (const auto& g : j.at("graphs")) c.graphs.push_back(fa_ast::graph_from_json(g.dump()));
    return c;
  }
  Corpus c = parse_directory(dir, depth);
  if (cache.enabled()) {
    std::string text = "{\"ids\":" + nlohmann::json(c.ids).dump() + ",\"failed\":" +
                       nlohmann::json(c.report.parse_failed).dump() + ",\"graphs\":[";
    for (std::size_t i = 0; i < c.graphs.size(); ++i) text += (i ? "," : "") + fa_ast::to_json(c.graphs[i]);
    text += "]}";
    detail::cache_store(cache.slot("graphs", key), text);
  }
  return c;
}

Corpus ingest_cached(const ExperimentConfig& cfg, const Cache& cache) {
  const auto labels = aggregate_labels(read_labels(cfg.labels_file), cfg.label_aggregation);
  Corpus parsed = parse_cached(cfg.corpus_dir, cfg.depth, cache);
  std::set<std::string> sources;
  for (const auto& s : list_sources(cfg.corpus_dir)) sources.insert(s);
  Corpus c;
  c.depth = cfg.depth;
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
  if (c.ids.empty()) throw ConfigError("no source file under " + cfg.corpus_dir + " has a label");
  return c;
}

bool split_dependent(const embed::EmbeddingConfig& e) {
  return e.method != embed::Method::Manual && e.scope != embed::Scope::TrainUnlabeledTest;
}

bool seed_dependent(const embed::EmbeddingConfig& e) { return e.method != embed::Method::Manual; }

embed::Split to_embed_split(const al::DatasetSplit& s) { return {s.labeled, s.unlabeled, s.test}; }

// One embedding task: either shared by all seeds or tied to one seed.
struct EmbeddingJob {
  std::size_t embedding = 0;
  std::optional<std::size_t> seed_index;
};

Eigen::MatrixXd compute_embedding(const Corpus& corpus, std::uint64_t corpus_key, embed::EmbeddingConfig cfg,
                                  const std::optional<al::DatasetSplit>& split, const Cache& cache) {
  std::uint64_t key = hash_combine(corpus_key, fnv1a(embed::config_to_json(cfg)));
  if (split)
    for (const auto* part : {&split->labeled, &split->unlabeled, &split->test}) {
      key = hash_combine(key, part->size());
      for (int id : *part) key = hash_combine(key, static_cast<std::uint64_t>(id));
    }
  if (auto hit = cache.find("embeddings", key)) return embed::load_embedding(hit->string()).rows;
  const auto m = embed::embed_corpus(corpus.graphs, split ? to_embed_split(*split) : embed::Split{}, cfg);
  if (cache.enabled()) {
    const auto slot = cache.slot("embeddings", key);
    fs::create_directories(slot.parent_path());
    auto tmp = slot;
    tmp += ".tmp";
    embed::save_embedding(m, corpus.ids, tmp.string());
    fs::rename(tmp.string() + ".json", slot.string() + ".json");
    fs::rename(tmp, slot);
  }
  return m.rows;
}

std::string run_json(const al::AlRun& run, const std::string& embedding, const ExperimentConfig& cfg) {
  ojson j;
  j["embedding"] = embedding;
  j["strategy"] = al::strategy_name(run.strategy);
  j["seed"] = run.seed;
  j["batch_size"] = run.batch;
  j["budget"] = run.budget;
  j["l0_size"] = cfg.l0_size;
  j["test_frac"] = cfg.test_frac;
  j["test_reads_during_query"] = run.test_reads_during_query;
  j["unrevealed_reads"] = run.unrevealed_reads;
  j["sets_consistent"] = run.sets_consistent;
  j["warnings"] = run.warnings;
  j["error"] = run.error ? ojson(*run.error) : ojson(nullptr);
  return j.dump(2) + "\n";
}

struct Prepared {
  Corpus corpus;
  std::vector<al::DatasetSplit> splits;  // per seed index
  // features[embedding][seed index]; shared embeddings repeat the same matrix
  std::vector<std::vector<std::shared_ptr<const Eigen::MatrixXd>>> features;
  std::vector<std::vector<std::optional<std::string>>> feature_errors;
};

Prepared prepare(const ExperimentConfig& cfg, const Cache& cache, const Progress& progress, unsigned threads) {
  Prepared p;
  if (progress) progress("ingesting " + cfg.corpus_dir);
  p.corpus = ingest_cached(cfg, cache);
  if (progress) {
    progress("kept " + std::to_string(p.corpus.ids.size()) + " labelled graphs (" +
             std::to_string(p.corpus.report.missing_label.size()) + " without label, " +
             std::to_string(p.corpus.report.missing_file.size()) + " labels without source, " +
             std::to_string(p.corpus.report.parse_failed.size()) + " parse failures)");
  }
  const int n = static_cast<int>(p.corpus.ids.size());
  for (auto seed : cfg.seeds) p.splits.push_back(al::make_splits(n, cfg.test_frac, cfg.l0_size, seed));

  const auto corpus_key = corpus_hash(p.corpus);
  const auto ns = cfg.seeds.size();
  p.features.assign(cfg.embeddings.size(), std::vector<std::shared_ptr<const Eigen::MatrixXd>>(ns));
  p.feature_errors.assign(cfg.embeddings.size(), std::vector<std::optional<std::string>>(ns));

  std::vector<EmbeddingJob> jobs;
  for (std::size_t e = 0; e < cfg.embeddings.size(); ++e) {
    const auto& ec = cfg.embeddings[e].config;
    const bool per_seed = split_dependent(ec) || (cfg.embedding_per_seed && seed_dependent(ec));
    if (per_seed)
      for (std::size_t s = 0; s < ns; ++s) jobs.push_back({e, s});
    else
      jobs.push_back({e, std::nullopt});
  }
  std::mutex log;
  parallel_for(
      jobs.size(),
      [&](std::size_t j) {
        const auto& job = jobs[j];
        auto ec = cfg.embeddings[job.embedding].config;
        std::optional<al::DatasetSplit> split;
        if (job.seed_index) {
          if (cfg.embedding_per_seed && seed_dependent(ec)) ec.seed = derive_seed(ec.seed, cfg.seeds[*job.seed_index]);
          if (split_dependent(ec)) split = p.splits[*job.seed_index];
        }
        std::shared_ptr<const Eigen::MatrixXd> m;
        std::optional<std::string> err;
        try {
          m = std::make_shared<const Eigen::MatrixXd>(compute_embedding(p.corpus, corpus_key, ec, split, cache));
        } catch (const Error& ex) {
          err = ex.what();
        }
        if (job.seed_index) {
          p.features[job.embedding][*job.seed_index] = m;
          p.feature_errors[job.embedding][*job.seed_index] = err;
        } else {
          for (std::size_t s = 0; s < ns; ++s) {
            p.features[job.embedding][s] = m;
            p.feature_errors[job.embedding][s] = err;
          }
        }
        if (progress) {
          std::lock_guard lock(log);
          progress("embedding " + cfg.embeddings[job.embedding].name +
                   (job.seed_index ? " seed " + std::to_string(cfg.seeds[*job.seed_index]) : std::string()) +
                   (err ? " failed: " + *err : " ready"));
        }
      },
      threads);
  return p;
}

void write_passive(const ExperimentConfig& cfg, const std::vector<PassiveScore>& scores, const fs::path& out) {
  std::string csv = "embedding,seed,pearson,degenerate\n";
  for (const auto& s : scores)
    csv += s.embedding + "," + std::to_string(s.seed) + "," + fmt(s.pearson) + "," + (s.degenerate ? "1" : "0") + "\n";
  write_text(out / "passive.csv", csv);

  std::string md = "| embedding | passive Pearson (mean ± std) | runs |\n|---|---|---|\n";
  for (const auto& e : cfg.embeddings) {
    std::vector<double> v;
    for (const auto& s : scores)
      if (s.embedding == e.name) v.push_back(s.pearson);
    if (v.empty()) continue;
    double mean = 0, var = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", mean, std::sqrt(var));
    md += "| " + e.name + " | " + buf + " | " + std::to_string(v.size()) + " |\n";
  }
  write_text(out / "passive_table.md", md);
}

std::vector<PassiveScore> passive_scores(const ExperimentConfig& cfg, const Prepared& p,
                                         std::vector<CellFailure>& failures, unsigned threads) {
  const auto ns = cfg.seeds.size();
  std::vector<std::optional<PassiveScore>> out(cfg.embeddings.size() * ns);
  std::vector<std::optional<CellFailure>> fails(out.size());
  parallel_for(
      out.size(),
      [&](std::size_t k) {
        const auto e = k / ns, s = k % ns;
        const auto& name = cfg.embeddings[e].name;
        if (p.feature_errors[e][s]) {
          fails[k] = CellFailure{name, "passive", cfg.seeds[s], *p.feature_errors[e][s]};
          return;
        }
        try {
          auto opt = cfg.al;
          opt.threads = 1;
          const auto r = al::run_passive(*p.features[e][s], p.corpus.labels, p.splits[s], cfg.seeds[s], opt);
          out[k] = PassiveScore{name, cfg.seeds[s], r.r, r.degenerate};
        } catch (const Error& ex) {
          fails[k] = CellFailure{name, "passive", cfg.seeds[s], ex.what()};
        }
      },
      threads);
  std::vector<PassiveScore> scores;
  for (auto& o : out)
    if (o) scores.push_back(*o);
  for (auto& f : fails)
    if (f) failures.push_back(*f);
  return scores;
}

void write_snapshot(const ExperimentConfig& cfg, const Prepared& p, const fs::path& out) {
  write_text(out / "config.json", experiment_to_json(cfg) + "\n");
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    ojson j;
    const auto names = [&](const std::vector<int>& ids) {
      ojson a = ojson::array();
      for (int i : ids) a.push_back(p.corpus.ids[static_cast<std::size_t>(i)]);
      return a;
    };
    j["labeled"] = names(p.splits[s].labeled);
    j["unlabeled"] = names(p.splits[s].unlabeled);
    j["test"] = names(p.splits[s].test);
    write_text(out / "splits" / ("seed_" + std::to_string(cfg.seeds[s]) + ".json"), j.dump(2) + "\n");
  }
}

void write_summary(const ExperimentResult& r, const Corpus& corpus, const fs::path& out) {
  ojson j;
  j["graphs"] = corpus.ids.size();
  j["missing_label"] = corpus.report.missing_label;
  j["missing_file"] = corpus.report.missing_file;
  j["parse_failed"] = corpus.report.parse_failed;
  j["test_reads_during_query"] = r.test_reads_during_query;
  j["unrevealed_reads"] = r.unrevealed_reads;
  j["sets_consistent"] = r.sets_consistent;
  j["failed_cells"] = ojson::array();
  for (const auto& f : r.failures)
    j["failed_cells"].push_back(
        {{"embedding", f.embedding}, {"strategy", f.strategy}, {"seed", f.seed}, {"error", f.message}});
  write_text(out / "summary.json", j.dump(2) + "\n");
}

unsigned resolve_threads(unsigned t) { return t == 0 ? default_threads() : t; }

}  // namespace

std::string slug(std::string_view s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out.empty() ? "_" : out;
}

// ---- config ------------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (corpus_dir.empty()) throw ConfigError("corpus_dir is required");
  if (labels_file.empty()) throw ConfigError("labels_file is required");
  if (output_dir.empty()) throw ConfigError("output_dir is required");
  if (embeddings.empty()) throw ConfigError("at least one embedding is required");
  if (strategies.empty()) throw ConfigError("at least one strategy is required");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw ConfigError("seeds must be distinct");
  std::set<std::string> names;
  for (const auto& e : embeddings) {
    if (!names.insert(slug(e.name)).second) throw ConfigError("duplicate embedding name '" + e.name + "'");
    e.config.validate();
  }
  if (std::set<al::Strategy>(strategies.begin(), strategies.end()).size() != strategies.size())
    throw ConfigError("duplicate strategy");
  if (l0_size < 2) throw ConfigError("l0_size must be at least 2");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (budget < 0) throw ConfigError("budget must be >= 0");
  if (!(test_frac > 0 && test_frac < 1)) throw ConfigError("test_frac must lie in (0, 1)");
  if (al.nu != 0.5 && al.nu != 1.5 && al.nu != 2.5) throw ConfigError("nu must be 0.5, 1.5 or 2.5");
  if (al.committee < 2) throw ConfigError("committee must have at least two members");
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  embed::EmbeddingConfig g2v;
  embed::EmbeddingConfig manual;
  manual.method = embed::Method::Manual;
  manual.aggregation = embed::Aggregation::None;
  manual.dim = 12;
  c.embeddings = {{"graph2vec", g2v}, {"manual", manual}};
  c.strategies = {al::Strategy::Random, al::Strategy::Coreset, al::Strategy::Variance, al::Strategy::Qbc};
  for (std::uint64_t s = 0; s < 15; ++s) c.seeds.push_back(s);
  return c;
}

std::string experiment_to_json(const ExperimentConfig& c) {
  ojson j;
  j["corpus_dir"] = c.corpus_dir;
  j["labels_file"] = c.labels_file;
  j["parse_depth"] = fa_ast::depth_name(c.depth);
  j["label_aggregation"] = label_aggregation_name(c.label_aggregation);
  j["embeddings"] = ojson::array();
  for (const auto& e : c.embeddings)
    j["embeddings"].push_back({{"name", e.name}, {"config", ojson::parse(embed::config_to_json(e.config))}});
  j["strategies"] = ojson::array();
  for (auto s : c.strategies) j["strategies"].push_back(al::strategy_name(s));
  j["l0_size"] = c.l0_size;
  j["batch_size"] = c.batch_size;
  j["budget"] = c.budget;
  j["test_frac"] = c.test_frac;
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  j["embedding_per_seed"] = c.embedding_per_seed;
  j["gp"] = {{"nu", c.al.nu},
             {"tune", c.al.tune},
             {"committee", c.al.committee},
             {"log_targets", c.al.log_targets},
             {"standardize_features", c.al.standardize_features}};
  return j.dump(2);
}

ExperimentConfig experiment_from_json(std::string_view text, const ExperimentConfig& base) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c = base;
  try {
    c.corpus_dir = j.value("corpus_dir", c.corpus_dir);
    c.labels_file = j.value("labels_file", c.labels_file);
    if (j.contains("parse_depth")) c.depth = fa_ast::parse_depth(j["parse_depth"].get<std::string>());
    if (j.contains("label_aggregation"))
      c.label_aggregation = parse_label_aggregation(j["label_aggregation"].get<std::string>());
    if (j.contains("embeddings")) {
      c.embeddings.clear();
      for (const auto& e : j["embeddings"]) {
        const auto cfg = embed::config_from_json(e.contains("config") ? e["config"].dump() : e.dump());
        const std::string name = e.value("name", std::string(embed::method_name(cfg.method)));
        c.embeddings.push_back({name, cfg});
      }
    }
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j["strategies"]) c.strategies.push_back(al::parse_strategy(s.get<std::string>()));
    }
    c.l0_size = j.value("l0_size", c.l0_size);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.budget = j.value("budget", c.budget);
    c.test_frac = j.value("test_frac", c.test_frac);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    c.output_dir = j.value("output_dir", c.output_dir);
    c.embedding_per_seed = j.value("embedding_per_seed", c.embedding_per_seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("gp")) {
      const auto& g = j["gp"];
      c.al.nu = g.value("nu", c.al.nu);
      c.al.tune = g.value("tune", c.al.tune);
      c.al.committee = g.value("committee", c.al.committee);
      c.al.log_targets = g.value("log_targets", c.al.log_targets);
      c.al.standardize_features = g.value("standardize_features", c.al.standardize_features);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_experiment(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return experiment_from_json(ss.str());
}

// ---- aggregation ------------------------------------------------------------------------

std::vector<AggregatePoint> aggregate_runs(const std::vector<std::vector<al::IterationRecord>>& runs) {
  std::map<int, std::vector<double>> by_labels;
  for (const auto& run : runs)
    for (const auto& r : run) by_labels[r.labels_used].push_back(r.pearson);
  std::vector<AggregatePoint> out;
  for (const auto& [labels, v] : by_labels) {
    AggregatePoint p;
    p.labels_used = labels;
    p.runs = static_cast<int>(v.size());
    for (double x : v) p.mean += x;
    p.mean /= static_cast<double>(v.size());
    for (double x : v) p.std += (x - p.mean) * (x - p.mean);
    p.std = std::sqrt(p.std / static_cast<double>(v.size()));
    out.push_back(p);
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregatePoint>& points) {
  std::string out = "labels_used,mean,std,runs\n";
  for (const auto& p : points)
    out += std::to_string(p.labels_used) + "," + fmt(p.mean) + "," + fmt(p.std) + "," + std::to_string(p.runs) + "\n";
  return out;
}

std::vector<AggregatePoint> parse_aggregate_csv(std::string_view text) {
  std::vector<AggregatePoint> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    AggregatePoint p;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%d", &p.labels_used, &p.mean, &p.std, &p.runs) != 4)
      throw Error("malformed aggregate row: " + line);
    out.push_back(p);
  }
  return out;
}

std::string curves_csv(const std::vector<Series>& series) {
  std::string out = "series,labels_used,mean,std,runs\n";
  for (const auto& s : series)
    for (const auto& p : s.points)
      out += s.name + "," + std::to_string(p.labels_used) + "," + fmt(p.mean) + "," + fmt(p.std) + "," +
             std::to_string(p.runs) + "\n";
  return out;
}

// ---- experiment -----------------------------------------------------------------------------

ExperimentResult run_passive_experiment(const ExperimentConfig& cfg, const Cache& cache, const Progress& progress) {
  cfg.validate();
  const auto threads = resolve_threads(cfg.threads);
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  const auto p = prepare(cfg, cache, progress, threads);
  ExperimentResult r;
  r.output_dir = out;
  r.passive = passive_scores(cfg, p, r.failures, threads);
  write_snapshot(cfg, p, out);
  write_passive(cfg, r.passive, out);
  write_summary(r, p.corpus, out);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Cache& cache, const Progress& progress) {
  cfg.validate();
  const auto threads = resolve_threads(cfg.threads);
  const fs::path out(cfg.output_dir);
  fs::create_directories(out);
  const auto p = prepare(cfg, cache, progress, threads);

  ExperimentResult r;
  r.output_dir = out;
  r.passive = passive_scores(cfg, p, r.failures, threads);
  if (progress) progress("passive baselines done");

  const auto ne = cfg.embeddings.size(), nst = cfg.strategies.size(), ns = cfg.seeds.size();
  std::vector<std::optional<al::AlRun>> runs(ne * nst * ns);
  std::vector<std::optional<std::string>> errors(runs.size());
  std::mutex log;
  std::size_t done = 0;
  parallel_for(
      runs.size(),
      [&](std::size_t k) {
        const auto e = k / (nst * ns), st = (k / ns) % nst, s = k % ns;
        if (p.feature_errors[e][s]) {
          errors[k] = "embedding failed: " + *p.feature_errors[e][s];
        } else {
          try {
            auto opt = cfg.al;
            opt.threads = threads > 1 ? 1 : opt.threads;
            al::LabelAccess access(p.corpus.labels, p.splits[s]);
            runs[k] = al::run_active(*p.features[e][s], access, p.splits[s], cfg.strategies[st], cfg.batch_size,
                                     cfg.budget, cfg.seeds[s], opt);
            if (runs[k]->error) errors[k] = *runs[k]->error;
          } catch (const Error& ex) {
            errors[k] = ex.what();
          }
        }
        if (progress) {
          std::lock_guard lock(log);
          ++done;
          progress("cell " + std::to_string(done) + "/" + std::to_string(runs.size()) + " " + cfg.embeddings[e].name +
                   " " + std::string(al::strategy_name(cfg.strategies[st])) + " seed " +
                   std::to_string(cfg.seeds[s]) + (errors[k] ? " FAILED: " + *errors[k] : ""));
        }
      },
      threads);

  std::map<std::size_t, std::vector<Series>> by_strategy;
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& ename = cfg.embeddings[e].name;
    std::vector<Series> strategy_series;
    for (std::size_t st = 0; st < nst; ++st) {
      const std::string sname(al::strategy_name(cfg.strategies[st]));
      std::vector<std::vector<al::IterationRecord>> curves;
      for (std::size_t s = 0; s < ns; ++s) {
        const auto k = (e * nst + st) * ns + s;
        if (errors[k]) r.failures.push_back({ename, sname, cfg.seeds[s], *errors[k]});
        if (!runs[k]) continue;
        const auto& run = *runs[k];
        r.test_reads_during_query += run.test_reads_during_query;
        r.unrevealed_reads += run.unrevealed_reads;
        r.sets_consistent = r.sets_consistent && run.sets_consistent;
        const auto base = out / "runs" / slug(ename) / sname / ("seed_" + std::to_string(cfg.seeds[s]));
        write_text(base.string() + ".csv", al::run_csv(run, &p.corpus.ids));
        write_text(base.string() + ".json", run_json(run, ename, cfg));
        curves.push_back(run.records);
      }
      if (curves.empty()) continue;
      const auto agg = aggregate_runs(curves);
      write_text(out / "aggregates" / (slug(ename) + "__" + sname + ".csv"), aggregate_csv(agg));
      strategy_series.push_back({sname, agg});
      by_strategy[st].push_back({ename, agg});
    }
    if (!strategy_series.empty()) {
      const auto base = out / "plots" / ("embedding_" + slug(ename));
      write_text(base.string() + ".svg", curves_svg(ename + ": query strategies", strategy_series));
      write_text(base.string() + ".csv", curves_csv(strategy_series));
    }
  }
  for (const auto& [st, series] : by_strategy) {
    const std::string sname(al::strategy_name(cfg.strategies[st]));
    const auto base = out / "plots" / ("strategy_" + sname);
    write_text(base.string() + ".svg", curves_svg(sname + ": embeddings", series));
    write_text(base.string() + ".csv", curves_csv(series));
  }

  write_snapshot(cfg, p, out);
  write_passive(cfg, r.passive, out);
  write_summary(r, p.corpus, out);
  write_text(out / "report.md", report(out));
  return r;
}

}  // namespace perfal::harness
