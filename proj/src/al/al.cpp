#include "perfal/al.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "perfal/parallel.hpp"

namespace perfal::al {

namespace {

constexpr std::uint64_t kRandomTag = 0x72616e64ULL;
constexpr std::uint64_t kQbcTag = 0x716263ULL;
constexpr std::uint64_t kTuneTag = 0x74756e65ULL;

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

void check_batch(int b, std::size_t pool) {
  if (b < 0 || static_cast<std::size_t>(b) > pool) throw ConfigError("batch size must lie in [0, |U|]");
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Coreset: return "coreset";
    case Strategy::Variance: return "variance";
    case Strategy::Qbc: return "qbc";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  for (auto v : {Strategy::Random, Strategy::Coreset, Strategy::Variance, Strategy::Qbc})
    if (strategy_name(v) == s) return v;
  throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

DatasetSplit make_splits(int corpus_size, double test_frac, int l0_size, std::uint64_t seed) {
  if (corpus_size <= 0) throw ConfigError("corpus is empty");
  if (!(test_frac >= 0.0 && test_frac < 1.0)) throw ConfigError("test fraction must lie in [0, 1)");
  if (l0_size < 1) throw ConfigError("|L_0| must be positive");
  const int n_test = static_cast<int>(std::lround(test_frac * corpus_size));
  if (l0_size + 1 > corpus_size - n_test)
    throw ConfigError("|L_0| = " + std::to_string(l0_size) + " leaves no unlabelled ids in a train pool of " +
                      std::to_string(corpus_size - n_test));
  std::vector<int> ids(static_cast<std::size_t>(corpus_size));
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(seed);
  rng.shuffle(ids);
  DatasetSplit s;
  const auto t_end = ids.begin() + n_test, l_end = t_end + l0_size;
  s.test.assign(ids.begin(), t_end);
  s.labeled.assign(t_end, l_end);
  s.unlabeled.assign(l_end, ids.end());
  for (auto* v : {&s.test, &s.labeled, &s.unlabeled}) std::sort(v->begin(), v->end());
  return s;
}

std::vector<int> select_random(const std::vector<int>& unlabeled, int b, std::uint64_t seed) {
  check_batch(b, unlabeled.size());
  std::vector<int> pool = unlabeled;
  std::sort(pool.begin(), pool.end());
  Rng rng(seed);
  // Partial Fisher-Yates: the first b slots are a uniform sample without replacement.
  for (int i = 0; i < b; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(b));
  return pool;
}

std::vector<int> select_coreset(const Eigen::MatrixXd& features, const std::vector<int>& labeled,
                                const std::vector<int>& unlabeled, int b) {
  check_batch(b, unlabeled.size());
  std::vector<int> pool = unlabeled;
  std::sort(pool.begin(), pool.end());
  const auto inf = std::numeric_limits<double>::infinity();
  std::vector<double> nearest(pool.size(), inf);
  auto relax = [&](int center) {
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (pool[i] >= 0) nearest[i] = std::min(nearest[i], (features.row(pool[i]) - features.row(center)).squaredNorm());
  };
  for (int l : labeled) relax(l);
  std::vector<int> picked;
  for (int k = 0; k < b; ++k) {
    std::size_t best = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i] < 0) continue;
      // Strict comparison keeps the lowest id among equals since the pool is sorted.
      if (best == pool.size() || nearest[i] > nearest[best]) best = i;
    }
    const int id = pool[best];
    picked.push_back(id);
    pool[best] = -1;
    relax(id);
  }
  return picked;
}

std::vector<int> top_b(const std::vector<int>& ids, const Eigen::VectorXd& scores, int b) {
  if (static_cast<std::size_t>(scores.size()) != ids.size()) throw ShapeError("one score per id expected");
  check_batch(b, ids.size());
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  auto before = [&](std::size_t a, std::size_t c) {
    const double sa = scores(static_cast<Eigen::Index>(a)), sc = scores(static_cast<Eigen::Index>(c));
    if (sa != sc) return sa > sc;
    return ids[a] < ids[c];
  };
  std::partial_sort(order.begin(), order.begin() + b, order.end(), before);
  std::vector<int> out;
  for (int i = 0; i < b; ++i) out.push_back(ids[order[static_cast<std::size_t>(i)]]);
  return out;
}

std::vector<int> select_variance(const gpr::GprModel& model, const Eigen::MatrixXd& features,
                                 const std::vector<int>& unlabeled, int b) {
  check_batch(b, unlabeled.size());
  if (b == 0) return {};
  return top_b(unlabeled, model.predict(gather(features, unlabeled)).variance, b);
}

Committee qbc_committee(const Eigen::MatrixXd& features, const std::vector<int>& labeled,
                        const Eigen::VectorXd& labeled_targets, const std::vector<int>& unlabeled, int size,
                        std::uint64_t seed, const gpr::MaternKernel& kernel, unsigned threads) {
  if (size < 2) throw ConfigError("a committee needs at least two members");
  if (static_cast<std::size_t>(labeled_targets.size()) != labeled.size())
    throw ShapeError("one target per labelled id expected");
  const Eigen::MatrixXd xl = gather(features, labeled);
  const Eigen::MatrixXd xu = gather(features, unlabeled);
  const auto n = labeled.size();
  std::vector<std::optional<Eigen::VectorXd>> out(static_cast<std::size_t>(size));
  parallel_for(
      static_cast<std::size_t>(size),
      [&](std::size_t m) {
        Rng rng(derive_seed(seed, m));
        std::vector<int> draw(n);
        for (auto& d : draw) d = static_cast<int>(rng.below(n));
        if (std::set<int>(draw.begin(), draw.end()).size() < 2) return;
        Eigen::MatrixXd x(static_cast<Eigen::Index>(n), xl.cols());
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
          x.row(static_cast<Eigen::Index>(i)) = xl.row(draw[i]);
          y(static_cast<Eigen::Index>(i)) = labeled_targets(draw[i]);
        }
        gpr::FitOptions opt;
        opt.tune = false;
        opt.kernel = kernel;
        out[m] = gpr::fit(x, y, opt).predict(xu).mean;
      },
      threads);
  Committee c;
  int rows = 0;
  for (const auto& o : out) rows += o ? 1 : 0;
  c.skipped = size - rows;
  c.means.resize(rows, static_cast<Eigen::Index>(unlabeled.size()));
  int r = 0;
  for (const auto& o : out)
    if (o) c.means.row(r++) = o->transpose();
  return c;
}

Eigen::VectorXd qbc_disagreement(const Committee& c) {
  if (c.means.rows() == 0) return Eigen::VectorXd::Zero(c.means.cols());
  const Eigen::RowVectorXd mean = c.means.colwise().mean();
  return (c.means.rowwise() - mean).array().square().colwise().mean().transpose();
}

QbcSelection select_qbc(const gpr::GprModel& model, const Eigen::MatrixXd& features, const std::vector<int>& labeled,
                        const Eigen::VectorXd& labeled_targets, const std::vector<int>& unlabeled, int b,
                        int committee, std::uint64_t seed, unsigned threads) {
  check_batch(b, unlabeled.size());
  if (labeled.size() < 2) throw ConfigError("QBC needs at least two labelled points");
  QbcSelection s;
  const auto c = qbc_committee(features, labeled, labeled_targets, unlabeled, committee, seed, model.kernel(), threads);
  s.members = static_cast<int>(c.means.rows());
  if (s.members < 2) {
    s.fell_back = true;
    s.ids = select_variance(model, features, unlabeled, b);
    return s;
  }
  s.disagreement = qbc_disagreement(c);
  s.ids = top_b(unlabeled, s.disagreement, b);
  return s;
}

// ---- label access ------------------------------------------------------------

LabelAccess::LabelAccess(std::vector<double> labels, const DatasetSplit& split)
    : labels_(std::move(labels)), is_test_(labels_.size(), 0), revealed_(labels_.size(), 0) {
  for (auto* part : {&split.test, &split.labeled, &split.unlabeled})
    for (int id : *part)
      if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) throw ShapeError("split id without a label");
  for (int id : split.test) is_test_[static_cast<std::size_t>(id)] = 1;
  reveal(split.labeled);
}

void LabelAccess::reveal(const std::vector<int>& ids) {
  for (int id : ids) {
    if (is_test_.at(static_cast<std::size_t>(id))) throw Error("test ids cannot be revealed for training");
    revealed_[static_cast<std::size_t>(id)] = 1;
  }
}

double LabelAccess::train(int id) {
  const auto i = static_cast<std::size_t>(id);
  if (is_test_.at(i)) {
    ++test_reads_;
    if (phase_ != Phase::Score) ++test_outside_;
  } else if (!revealed_[i]) {
    ++unrevealed_;
  }
  return labels_[i];
}

double LabelAccess::test(int id) {
  const auto i = static_cast<std::size_t>(id);
  ++test_reads_;
  if (phase_ != Phase::Score || !is_test_.at(i)) ++test_outside_;
  return labels_[i];
}

// ---- loop ----------------------------------------------------------------------

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& features, const std::vector<int>& rows) {
  if (rows.empty()) return features;
  const Eigen::MatrixXd sub = gather(features, rows);
  const Eigen::RowVectorXd mean = sub.colwise().mean();
  Eigen::RowVectorXd sd = ((sub.rowwise() - mean).array().square().colwise().mean()).sqrt();
  for (Eigen::Index c = 0; c < sd.size(); ++c)
    if (!(sd(c) > 1e-12 * std::max(1.0, std::abs(mean(c))))) sd(c) = 1.0;
  return (features.rowwise() - mean).array().rowwise() / sd.array();
}

AlRun run_active(const Eigen::MatrixXd& features, LabelAccess& labels, const DatasetSplit& split, Strategy strategy,
                 int batch, int budget, std::uint64_t seed, const AlOptions& options) {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw ShapeError("one feature row per label expected");
  if (split.test.size() < 2) throw ConfigError("the test set needs at least two ids");
  if (split.labeled.size() < 2) throw ConfigError("|L_0| must be at least 2 to fit a GP");
  if (batch < 1) throw ConfigError("batch size must be positive");
  const int pool = static_cast<int>(split.labeled.size() + split.unlabeled.size());
  if (budget <= 0) budget = pool;
  if (budget < static_cast<int>(split.labeled.size()) || budget > pool)
    throw ConfigError("budget must lie in [|L_0|, |L_0| + |U_0|]");
  if (strategy == Strategy::Qbc && options.committee < 2) throw ConfigError("QBC committee must have >= 2 members");

  AlRun run;
  run.strategy = strategy;
  run.batch = batch;
  run.budget = budget;
  run.seed = seed;

  std::vector<int> l = split.labeled, u = split.unlabeled;
  std::sort(l.begin(), l.end());
  std::sort(u.begin(), u.end());
  const std::set<int> pool_ids = [&] {
    std::set<int> s(l.begin(), l.end());
    s.insert(u.begin(), u.end());
    return s;
  }();

  auto transform = [&](double y) {
    if (!options.log_targets) return y;
    if (!(y > 0)) throw ConfigError("log targets need positive labels");
    return std::log(y);
  };

  for (int it = 0;; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.labels_used = static_cast<int>(l.size());
    try {
      const Eigen::MatrixXd x = options.standardize_features ? standardize_columns(features, l) : features;

      labels.set_phase(LabelAccess::Phase::Fit);
      Eigen::VectorXd yl(static_cast<Eigen::Index>(l.size()));
      for (std::size_t i = 0; i < l.size(); ++i) yl(static_cast<Eigen::Index>(i)) = transform(labels.train(l[i]));
      gpr::FitOptions fo;
      fo.tune = options.tune;
      fo.kernel.nu = options.nu;
      fo.seed = derive_seed(derive_seed(seed, kTuneTag), l.size());
      const auto model = gpr::fit(gather(x, l), yl, fo);

      labels.set_phase(LabelAccess::Phase::Score);
      Eigen::VectorXd yt(static_cast<Eigen::Index>(split.test.size()));
      for (std::size_t i = 0; i < split.test.size(); ++i) yt(static_cast<Eigen::Index>(i)) = labels.test(split.test[i]);
      Eigen::VectorXd pred = model.predict(gather(x, split.test)).mean;
      if (options.log_targets) pred = pred.array().exp();
      const auto score = gpr::pearson(yt, pred);
      rec.pearson = score.r;
      rec.degenerate = score.degenerate;
      if (score.degenerate) run.warnings.push_back("iteration " + std::to_string(it) + ": degenerate Pearson");

      const int room = budget - static_cast<int>(l.size());
      if (room <= 0 || u.empty()) {
        run.records.push_back(rec);
        break;
      }
      const int b = std::min({batch, room, static_cast<int>(u.size())});

      labels.set_phase(LabelAccess::Phase::Query);
      const auto before = labels.test_reads_outside_scoring();
      std::vector<int> picked;
      switch (strategy) {
        case Strategy::Random:
          picked = select_random(u, b, derive_seed(derive_seed(seed, kRandomTag), static_cast<std::uint64_t>(it)));
          break;
        case Strategy::Coreset: picked = select_coreset(x, l, u, b); break;
        case Strategy::Variance: picked = select_variance(model, x, u, b); break;
        case Strategy::Qbc: {
          Eigen::VectorXd yq(static_cast<Eigen::Index>(l.size()));
          for (std::size_t i = 0; i < l.size(); ++i) yq(static_cast<Eigen::Index>(i)) = transform(labels.train(l[i]));
          auto q = select_qbc(model, x, l, yq, u, b, options.committee,
                              derive_seed(derive_seed(seed, kQbcTag), static_cast<std::uint64_t>(it)), options.threads);
          if (q.fell_back)
            run.warnings.push_back("iteration " + std::to_string(it) + ": QBC fell back to variance");
          picked = std::move(q.ids);
          break;
        }
      }
      run.test_reads_during_query += labels.test_reads_outside_scoring() - before;

      const std::set<int> uset(u.begin(), u.end());
      const std::set<int> pset(picked.begin(), picked.end());
      if (pset.size() != picked.size() || static_cast<int>(picked.size()) != b) run.sets_consistent = false;
      for (int id : picked)
        if (!uset.count(id)) run.sets_consistent = false;

      labels.reveal(picked);
      l.insert(l.end(), picked.begin(), picked.end());
      std::sort(l.begin(), l.end());
      u.erase(std::remove_if(u.begin(), u.end(), [&](int id) { return pset.count(id) > 0; }), u.end());

      std::set<int> now(l.begin(), l.end());
      const auto l_distinct = now.size();
      now.insert(u.begin(), u.end());
      if (l_distinct != l.size() || now.size() != l.size() + u.size() || now != pool_ids) run.sets_consistent = false;

      rec.queried = std::move(picked);
      run.records.push_back(std::move(rec));
    } catch (const Error& e) {
      run.error = "iteration " + std::to_string(it) + ": " + e.what();
      break;
    }
  }
  run.unrevealed_reads = labels.unrevealed_reads();
  return run;
}

AlRun run_active(const Eigen::MatrixXd& features, const std::vector<double>& labels, const DatasetSplit& split,
                 Strategy strategy, int batch, int budget, std::uint64_t seed, const AlOptions& options) {
  LabelAccess access(labels, split);
  return run_active(features, access, split, strategy, batch, budget, seed, options);
}

gpr::PearsonResult run_passive(const Eigen::MatrixXd& features, const std::vector<double>& labels,
                               const DatasetSplit& split, std::uint64_t seed, const AlOptions& options) {
  const auto run = run_active(features, labels, split, Strategy::Random, 1, static_cast<int>(split.labeled.size()), seed,
                              options);
  if (run.error) throw Error("passive fit failed: " + *run.error);
  return {run.records.front().pearson, run.records.front().degenerate};
}

std::string run_csv(const AlRun& run, const std::vector<std::string>* names) {
  std::string out = "iteration,labels_used,pearson,queried_ids\n";
  char buf[64];
  for (const auto& r : run.records) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10f,", r.iteration, r.labels_used, r.pearson);
    out += buf;
    for (std::size_t i = 0; i < r.queried.size(); ++i) {
      if (i) out += ';';
      out += names ? (*names).at(static_cast<std::size_t>(r.queried[i])) : std::to_string(r.queried[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace perfal::al
