#include <nlohmann/json.hpp>

#include "perfal/embed.hpp"

namespace perfal::embed {

namespace {

template <class E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table, std::string_view what) {
  for (const auto& [name, value] : table)
    if (name == s) return value;
  std::string options;
  for (const auto& [name, value] : table) options += (options.empty() ? "" : ", ") + std::string(name);
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "' (expected one of: " + options + ")");
}

template <class E, std::size_t N>
std::string_view enum_name(E v, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, value] : table)
    if (value == v) return name;
  return "unknown";
}

constexpr std::array<std::pair<std::string_view, Method>, 6> kMethods = {{{"graph2vec", Method::Graph2Vec},
                                                                          {"deepwalk", Method::DeepWalk},
                                                                          {"node2vec", Method::Node2Vec},
                                                                          {"hope", Method::Hope},
                                                                          {"grarep", Method::GraRep},
                                                                          {"manual", Method::Manual}}};
constexpr std::array<std::pair<std::string_view, Aggregation>, 3> kAggregations = {
    {{"mean", Aggregation::Mean}, {"sum", Aggregation::Sum}, {"none", Aggregation::None}}};
constexpr std::array<std::pair<std::string_view, Scope>, 3> kScopes = {{{"train-unlabeled-test", Scope::TrainUnlabeledTest},
                                                                        {"train-unlabeled", Scope::TrainUnlabeled},
                                                                        {"split-space", Scope::SplitSpace}}};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

std::string_view method_name(Method m) { return enum_name(m, kMethods); }
Method parse_method(std::string_view s) { return parse_enum(s, kMethods, "embedding method"); }
std::string_view aggregation_name(Aggregation a) { return enum_name(a, kAggregations); }
Aggregation parse_aggregation(std::string_view s) { return parse_enum(s, kAggregations, "aggregation"); }
std::string_view scope_name(Scope s) { return enum_name(s, kScopes); }
Scope parse_scope(std::string_view s) { return parse_enum(s, kScopes, "scope"); }

bool is_graph_level(Method m) { return m == Method::Graph2Vec || m == Method::Manual; }

Aggregation default_aggregation(Method m) { return is_graph_level(m) ? Aggregation::None : Aggregation::Mean; }

void EmbeddingConfig::validate() const {
  require(dim > 0, "dim must be positive");
  if (is_graph_level(method))
    require(aggregation == Aggregation::None, std::string(method_name(method)) + " is graph-level; aggregation must be none");
  else
    require(aggregation != Aggregation::None, std::string(method_name(method)) + " embeds nodes; aggregation must be mean or sum");
  if (method != Method::Manual) {
    require(scope != Scope::TrainUnlabeled,
            "scope train-unlabeled needs an inductive embedding; shallow methods cannot project unseen graphs "
            "(use split-space)");
  }
  require(wl_iterations >= 0, "wl_iterations must be non-negative");
  require(min_count >= 1, "min_count must be at least 1");
  require(g2v_epochs >= 0 && walk_epochs >= 0, "epochs must be non-negative");
  require(negatives >= 0, "negatives must be non-negative");
  require(learning_rate > 0, "learning_rate must be positive");
  require(walks_per_node >= 1 && walk_length >= 1, "walks_per_node and walk_length must be at least 1");
  require(window >= 1, "window must be at least 1");
  require(p > 0 && q > 0, "p and q must be positive");
  if (beta) require(*beta > 0, "beta must be positive");
  require(grarep_steps >= 1, "grarep_steps must be at least 1");
  if (method == Method::Hope) require(dim % 2 == 0, "hope needs an even dim");
  if (method == Method::GraRep) require(dim % grarep_steps == 0, "grarep dim must be divisible by grarep_steps");
}

std::string config_to_json(const EmbeddingConfig& c) {
  nlohmann::ordered_json j;
  j["method"] = method_name(c.method);
  j["dim"] = c.dim;
  j["aggregation"] = aggregation_name(c.aggregation);
  j["scope"] = scope_name(c.scope);
  j["seed"] = c.seed;
  j["wl_iterations"] = c.wl_iterations;
  j["min_count"] = c.min_count;
  j["g2v_epochs"] = c.g2v_epochs;
  j["negatives"] = c.negatives;
  j["learning_rate"] = c.learning_rate;
  j["walks_per_node"] = c.walks_per_node;
  j["walk_length"] = c.walk_length;
  j["window"] = c.window;
  j["walk_epochs"] = c.walk_epochs;
  j["p"] = c.p;
  j["q"] = c.q;
  j["beta"] = c.beta ? nlohmann::ordered_json(*c.beta) : nlohmann::ordered_json(nullptr);
  j["grarep_steps"] = c.grarep_steps;
  return j.dump(2);
}

EmbeddingConfig config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("embedding config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("embedding config must be a JSON object");
  EmbeddingConfig c;
  try {
    if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
    c.aggregation = default_aggregation(c.method);
    if (j.contains("aggregation")) c.aggregation = parse_aggregation(j["aggregation"].get<std::string>());
    if (j.contains("scope")) c.scope = parse_scope(j["scope"].get<std::string>());
    c.dim = j.value("dim", c.dim);
    c.seed = j.value("seed", c.seed);
    c.wl_iterations = j.value("wl_iterations", c.wl_iterations);
    c.min_count = j.value("min_count", c.min_count);
    c.g2v_epochs = j.value("g2v_epochs", c.g2v_epochs);
    c.negatives = j.value("negatives", c.negatives);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.walks_per_node = j.value("walks_per_node", c.walks_per_node);
    c.walk_length = j.value("walk_length", c.walk_length);
    c.window = j.value("window", c.window);
    c.walk_epochs = j.value("walk_epochs", c.walk_epochs);
    c.p = j.value("p", c.p);
    c.q = j.value("q", c.q);
    if (j.contains("beta") && !j["beta"].is_null()) c.beta = j["beta"].get<double>();
    c.grarep_steps = j.value("grarep_steps", c.grarep_steps);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("embedding config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace perfal::embed
