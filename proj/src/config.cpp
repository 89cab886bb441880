#include "andnmf/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "andnmf/errors.hpp"
#include "andnmf/io.hpp"
#include "andnmf/rng.hpp"

namespace andnmf {

namespace {

using nlohmann::json;

// Maps JSON pointers ("/solvers/0/schedule/kind") to the 1-based line where the
// key or array element starts. Assumes the text already parsed successfully.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) : text_(text) {
    skip_ws();
    value("");
  }

  std::size_t line_of(const std::string& pointer) const {
    std::string p = pointer;
    for (;;) {
      auto it = lines_.find(p);
      if (it != lines_.end()) return it->second;
      const auto slash = p.rfind('/');
      if (slash == std::string::npos || p.empty()) return 1;
      p.erase(slash);
    }
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') ++line_;
      if (c != ' ' && c != '\t' && c != '\r' && c != '\n') break;
      ++pos_;
    }
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\') {
        out.push_back(text_[pos_++]);
      }
      out.push_back(text_[pos_++]);
    }
    ++pos_;  // closing quote
    return out;
  }

  void value(const std::string& path) {
    if (pos_ >= text_.size()) return;
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] != '}') {
        const std::size_t key_line = line_;
        const std::string key = path + "/" + string_token();
        lines_.emplace(key, key_line);
        skip_ws();
        ++pos_;  // colon
        skip_ws();
        value(key);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_ws();
        }
      }
      ++pos_;
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      std::size_t i = 0;
      while (pos_ < text_.size() && text_[pos_] != ']') {
        const std::string elem = path + "/" + std::to_string(i++);
        lines_.emplace(elem, line_);
        value(elem);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          skip_ws();
        }
      }
      ++pos_;
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() && std::string_view(",]} \t\r\n").find(text_[pos_]) == std::string_view::npos) ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::map<std::string, std::size_t> lines_;
};

struct Context {
  std::string_view source;
  const LineIndex* index;
};

class Node {
 public:
  Node(const json& value, std::string path, const Context& ctx) : value_(value), path_(std::move(path)), ctx_(ctx) {}

  [[noreturn]] void fail(const std::string& message) const {
    std::ostringstream os;
    os << ctx_.source << ":" << ctx_.index->line_of(path_) << ": " << (path_.empty() ? "/" : path_) << ": "
       << message;
    throw ValidationError(os.str());
  }

  const json& raw() const { return value_; }
  const std::string& path() const { return path_; }

  void require_object() const {
    if (!value_.is_object()) fail("expected an object");
  }

  void allow_keys(std::initializer_list<std::string_view> allowed) const {
    require_object();
    for (const auto& [key, unused] : value_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        std::string list;
        for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
        Node(unused, path_ + "/" + key, ctx_).fail("unknown key \"" + key + "\" (allowed: " + list + ")");
      }
    }
  }

  std::optional<Node> child(std::string_view key) const {
    auto it = value_.find(std::string(key));
    if (it == value_.end()) return std::nullopt;
    return Node(*it, path_ + "/" + std::string(key), ctx_);
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  Index integer() const {
    if (value_.is_number_integer()) return value_.get<Index>();
    if (value_.is_number_float()) {
      const double v = value_.get<double>();
      if (std::floor(v) == v && std::abs(v) < 9e15) return static_cast<Index>(v);
    }
    fail("expected an integer");
  }

  std::uint64_t seed() const {
    if (value_.is_number_unsigned()) return value_.get<std::uint64_t>();
    if (value_.is_number_integer() && value_.get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(value_.get<std::int64_t>());
    fail("expected a non-negative integer seed");
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }

  std::string str() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  template <class F>
  void each(F&& f) const {
    if (!value_.is_array()) fail("expected an array");
    for (std::size_t i = 0; i < value_.size(); ++i) f(Node(value_[i], path_ + "/" + std::to_string(i), ctx_));
  }

 private:
  const json& value_;
  std::string path_;
  const Context& ctx_;
};

template <class T, class F>
void set_if(const Node& parent, std::string_view key, T& target, F&& convert) {
  if (auto c = parent.child(key)) target = convert(*c);
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string canonical_preset(std::string_view name) {
  for (const auto& p : preset_names())
    if (upper(p) == upper(std::string(name))) return p;
  std::string list;
  for (const auto& p : preset_names()) list += (list.empty() ? "" : ", ") + p;
  throw ValidationError("unknown preset \"" + std::string(name) + "\" (known: " + list + ")");
}

ThresholdSchedule parse_schedule(const Node& node) {
  node.require_object();
  auto kind = node.child("kind");
  if (!kind) node.fail("schedule needs a \"kind\" (constant, geometric or theory)");
  const std::string k = kind->str();
  if (k == "constant") {
    node.allow_keys({"kind", "value"});
    ConstantThreshold s;
    set_if(node, "value", s.value, [](const Node& n) { return n.number(); });
    return s;
  }
  if (k == "geometric") {
    node.allow_keys({"kind", "start", "ratio"});
    GeometricThreshold s;
    set_if(node, "start", s.start, [](const Node& n) { return n.number(); });
    set_if(node, "ratio", s.ratio, [](const Node& n) { return n.number(); });
    return s;
  }
  if (k == "theory") {
    node.allow_keys({"kind", "lambda", "r", "q"});
    TheoryThreshold s;
    set_if(node, "lambda", s.lambda, [](const Node& n) { return n.number(); });
    set_if(node, "r", s.r, [](const Node& n) { return n.number(); });
    set_if(node, "q", s.q, [](const Node& n) { return n.number(); });
    return s;
  }
  kind->fail("unknown schedule kind \"" + k + "\" (constant, geometric or theory)");
}

json schedule_json(const ThresholdSchedule& schedule) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantThreshold>) return {{"kind", "constant"}, {"value", s.value}};
        if constexpr (std::is_same_v<T, GeometricThreshold>)
          return {{"kind", "geometric"}, {"start", s.start}, {"ratio", s.ratio}};
        if constexpr (std::is_same_v<T, TheoryThreshold>)
          return {{"kind", "theory"}, {"lambda", s.lambda}, {"r", s.r}, {"q", s.q}};
      },
      schedule);
}

void parse_weights(const Node& node, WeightsConfig& w) {
  node.allow_keys({"family", "alpha_total", "concentration", "rho", "support", "floor", "ceiling"});
  set_if(node, "family", w.family, [](const Node& n) { return n.str(); });
  if (w.family != "dirichlet" && w.family != "logistic_normal" && w.family != "sparse_binary" &&
      w.family != "sparse_uniform")
    node.child("family")->fail("unknown weight family \"" + w.family +
                               "\" (dirichlet, logistic_normal, sparse_binary or sparse_uniform)");
  set_if(node, "alpha_total", w.alpha_total, [](const Node& n) { return n.number(); });
  if (auto c = node.child("concentration")) {
    if (c->raw().is_null())
      w.concentration.reset();
    else
      w.concentration = c->number();
  }
  set_if(node, "rho", w.rho, [](const Node& n) { return n.number(); });
  set_if(node, "support", w.support, [](const Node& n) { return n.integer(); });
  set_if(node, "floor", w.floor, [](const Node& n) { return n.number(); });
  set_if(node, "ceiling", w.ceiling, [](const Node& n) { return n.number(); });
}

SolverEntry default_solver(const std::string& name, const ExperimentConfig& base) {
  SolverEntry e;
  e.name = name;
  for (const auto& s : base.solvers) {
    if (s.name == "and") {
      e.and_config = s.and_config;
      break;
    }
  }
  // Baselines get the same iteration budget as the default AND run.
  e.baseline.outer_iters = e.and_config.stages * e.and_config.iters_per_stage;
  if (name == "mu") e.baseline.algorithm = BaselineAlgorithm::kMu;
  if (name == "hals") e.baseline.algorithm = BaselineAlgorithm::kHals;
  if (name == "anls") e.baseline.algorithm = BaselineAlgorithm::kAnls;
  return e;
}

SolverEntry parse_solver(const Node& node, const ExperimentConfig& base,
                         const std::optional<ThresholdSchedule>& schedule_override) {
  node.require_object();
  auto name_node = node.child("name");
  if (!name_node) node.fail("solver needs a \"name\" (and, mu, hals or anls)");
  const std::string name = name_node->str();
  if (name != "and" && name != "mu" && name != "hals" && name != "anls")
    name_node->fail("unknown solver \"" + name + "\" (and, mu, hals or anls)");
  SolverEntry e = default_solver(name, base);
  if (schedule_override) e.and_config.schedule = *schedule_override;
  set_if(node, "label", e.label, [](const Node& n) { return n.str(); });
  if (name == "and") {
    node.allow_keys({"name", "label", "stages", "iters_per_stage", "eta", "schedule", "minibatch", "pinv_rel_tol"});
    AndConfig& c = e.and_config;
    set_if(node, "stages", c.stages, [](const Node& n) { return n.integer(); });
    set_if(node, "iters_per_stage", c.iters_per_stage, [](const Node& n) { return n.integer(); });
    if (auto eta = node.child("eta")) {
      if (eta->raw().is_null())
        c.eta.reset();
      else
        c.eta = eta->number();
    }
    if (auto s = node.child("schedule")) c.schedule = parse_schedule(*s);
    set_if(node, "minibatch", c.minibatch, [](const Node& n) { return n.integer(); });
    set_if(node, "pinv_rel_tol", c.pinv_rel_tol, [](const Node& n) { return n.number(); });
    try {
      validate(c);
    } catch (const ValidationError& ex) {
      node.fail(ex.what());
    }
  } else {
    node.allow_keys({"name", "label", "outer_iters", "inner_iters", "epsilon_floor"});
    BaselineConfig& c = e.baseline;
    set_if(node, "outer_iters", c.outer_iters, [](const Node& n) { return n.integer(); });
    set_if(node, "inner_iters", c.inner_iters, [](const Node& n) { return n.integer(); });
    set_if(node, "epsilon_floor", c.epsilon_floor, [](const Node& n) { return n.number(); });
    try {
      validate(c);
    } catch (const ValidationError& ex) {
      node.fail(ex.what());
    }
  }
  return e;
}

void assign_labels(std::vector<SolverEntry>& solvers) {
  std::map<std::string, int> seen;
  for (const auto& s : solvers)
    if (!s.label.empty()) ++seen[s.label];
  for (auto& s : solvers) {
    if (!s.label.empty()) continue;
    std::string label = s.name;
    for (int k = 2; seen.count(label); ++k) label = s.name + "_" + std::to_string(k);
    ++seen[label];
    s.label = label;
  }
}

}  // namespace

Index ExperimentConfig::effective_eval_every() const {
  if (eval_every) return *eval_every;
  return dataset.d <= 50 ? 1 : 10;
}

std::uint64_t ExperimentConfig::truth_seed() const { return derive_seed(seed, 1); }
std::uint64_t ExperimentConfig::weights_seed() const { return derive_seed(seed, 2); }
std::uint64_t ExperimentConfig::noise_seed() const { return derive_seed(seed, 3); }
std::uint64_t ExperimentConfig::init_seed() const { return derive_seed(seed, 4); }
std::uint64_t ExperimentConfig::solver_seed(std::size_t index) const { return derive_seed(seed, 100 + index); }

WeightSpec ExperimentConfig::weight_spec() const {
  const WeightsConfig& w = dataset.weights;
  const Index d = dataset.d;
  if (w.family == "dirichlet")
    return WeightSpec::dirichlet(d, w.concentration.value_or(w.alpha_total / static_cast<double>(d)),
                                 weights_seed());
  if (w.family == "logistic_normal") return WeightSpec::logistic_normal(d, w.rho, weights_seed());
  if (w.family == "sparse_binary") return WeightSpec::sparse_binary(d, w.support, weights_seed());
  if (w.family == "sparse_uniform") return WeightSpec::sparse_uniform(d, w.support, w.floor, w.ceiling, weights_seed());
  throw ValidationError("unknown weight family \"" + w.family + "\"");
}

NoiseSpec ExperimentConfig::noise_spec() const { return NoiseSpec{dataset.gamma, noise_seed()}; }

InitSpec ExperimentConfig::init_spec() const {
  InitSpec s = init;
  s.seed = init_seed();
  return s;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"DIR", "CTM", "NEG", "NOISE", "BINARY", "paper-scale"};
  return names;
}

ExperimentConfig preset_config(std::string_view name) {
  ExperimentConfig cfg;
  cfg.preset = canonical_preset(name);
  cfg.solvers.push_back(SolverEntry{});
  AndConfig& and_cfg = cfg.solvers.front().and_config;
  WeightsConfig& w = cfg.dataset.weights;

  if (cfg.preset == "CTM" || cfg.preset == "NEG" || cfg.preset == "NOISE") w.family = "logistic_normal";
  if (cfg.preset == "NEG") cfg.dataset.truth_kind = GroundTruthKind::kSigned;
  if (cfg.preset == "NOISE") {
    cfg.dataset.gamma = 0.01;
    and_cfg.iters_per_stage = 100;
  }
  if (cfg.preset == "BINARY") {
    w.family = "sparse_binary";
    w.support = 3;
    and_cfg.schedule = ConstantThreshold{0.25};
  }
  if (cfg.preset == "paper-scale") {
    cfg.dataset.w = 1000;
    cfg.dataset.d = 100;
    cfg.dataset.n = 5000;
  }
  assign_labels(cfg.solvers);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  const DatasetConfig& d = cfg.dataset;
  if (d.w < 1 || d.d < 1 || d.n < 1) throw ValidationError("dataset: W, D and n must be >= 1");
  if (d.w < d.d) throw ValidationError("dataset: W must be >= D so the ground truth has a left inverse");
  if (!(d.gamma >= 0.0)) throw ValidationError("dataset: gamma must be >= 0");
  if (d.truth_kind == GroundTruthKind::kLoaded) throw ValidationError("dataset: ground_truth must be nonneg or signed");
  if (!(cfg.init.in_span_level >= 0.0) || !(cfg.init.out_span_level >= 0.0))
    throw ValidationError("init: r_l and r_n must be >= 0");
  if (cfg.solvers.empty()) throw ValidationError("at least one solver is required");
  if (cfg.eval_every && *cfg.eval_every < 1) throw ValidationError("eval_every must be >= 1");
  validate(cfg.weight_spec());
  std::map<std::string, int> labels;
  for (const auto& s : cfg.solvers) {
    if (s.name == "and")
      validate(s.and_config);
    else
      validate(s.baseline);
    if (s.label.empty() || s.label.find_first_of("/\\") != std::string::npos)
      throw ValidationError("solver label \"" + s.label + "\" is not a valid file stem");
    if (++labels[s.label] > 1) throw ValidationError("duplicate solver label \"" + s.label + "\"");
  }
}

ExperimentConfig parse_config(std::string_view text, std::string_view source,
                              std::optional<std::string> preset_override) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
    std::ostringstream os;
    os << source << ":" << line << ": invalid JSON: " << e.what();
    throw ValidationError(os.str());
  }

  const LineIndex index(text);
  const Context ctx{source, &index};
  const Node root(doc, "", ctx);
  root.allow_keys({"preset", "seed", "dataset", "init", "schedule", "solvers", "eval_every", "output"});

  std::string preset = "DIR";
  if (auto p = root.child("preset")) preset = p->str();
  if (preset_override) preset = *preset_override;
  ExperimentConfig cfg;
  try {
    cfg = preset_config(preset);
  } catch (const ValidationError& ex) {
    if (auto p = root.child("preset"); p && !preset_override) p->fail(ex.what());
    throw;
  }

  set_if(root, "seed", cfg.seed, [](const Node& n) { return n.seed(); });

  if (auto ds = root.child("dataset")) {
    ds->allow_keys({"W", "D", "n", "gamma", "ground_truth", "weights"});
    set_if(*ds, "W", cfg.dataset.w, [](const Node& n) { return n.integer(); });
    set_if(*ds, "D", cfg.dataset.d, [](const Node& n) { return n.integer(); });
    set_if(*ds, "n", cfg.dataset.n, [](const Node& n) { return n.integer(); });
    set_if(*ds, "gamma", cfg.dataset.gamma, [](const Node& n) { return n.number(); });
    if (auto gt = ds->child("ground_truth")) {
      const std::string kind = gt->str();
      if (kind == "nonneg")
        cfg.dataset.truth_kind = GroundTruthKind::kNonnegative;
      else if (kind == "signed")
        cfg.dataset.truth_kind = GroundTruthKind::kSigned;
      else
        gt->fail("ground_truth must be \"nonneg\" or \"signed\"");
    }
    if (auto w = ds->child("weights")) parse_weights(*w, cfg.dataset.weights);
    if (cfg.dataset.w < 1 || cfg.dataset.d < 1 || cfg.dataset.n < 1) ds->fail("W, D and n must be >= 1");
    if (cfg.dataset.w < cfg.dataset.d) ds->fail("W must be >= D");
    if (cfg.dataset.gamma < 0.0) ds->child("gamma")->fail("gamma must be >= 0");
  }

  if (auto in = root.child("init")) {
    in->allow_keys({"r_l", "r_n", "zero_diagonal"});
    set_if(*in, "r_l", cfg.init.in_span_level, [](const Node& n) { return n.number(); });
    set_if(*in, "r_n", cfg.init.out_span_level, [](const Node& n) { return n.number(); });
    set_if(*in, "zero_diagonal", cfg.init.zero_diagonal, [](const Node& n) { return n.boolean(); });
    if (cfg.init.in_span_level < 0.0 || cfg.init.out_span_level < 0.0) in->fail("r_l and r_n must be >= 0");
  }

  std::optional<ThresholdSchedule> schedule_override;
  if (auto s = root.child("schedule")) {
    schedule_override = parse_schedule(*s);
    try {
      validate(*schedule_override);
    } catch (const ValidationError& ex) {
      s->fail(ex.what());
    }
    for (auto& solver : cfg.solvers)
      if (solver.name == "and") solver.and_config.schedule = *schedule_override;
  }

  if (auto list = root.child("solvers")) {
    const ExperimentConfig base = cfg;
    std::vector<SolverEntry> solvers;
    list->each([&](const Node& n) { solvers.push_back(parse_solver(n, base, schedule_override)); });
    if (solvers.empty()) list->fail("at least one solver is required");
    std::map<std::string, int> labels;
    for (std::size_t i = 0; i < solvers.size(); ++i) {
      const auto& l = solvers[i].label;
      if (!l.empty() && ++labels[l] > 1) {
        list->fail("duplicate solver label \"" + l + "\"");
      }
    }
    cfg.solvers = std::move(solvers);
    assign_labels(cfg.solvers);
  }

  if (auto e = root.child("eval_every")) {
    if (e->raw().is_null()) {
      cfg.eval_every.reset();
    } else {
      cfg.eval_every = e->integer();
      if (*cfg.eval_every < 1) e->fail("eval_every must be >= 1");
    }
  }
  if (auto o = root.child("output")) cfg.output = o->str();

  try {
    validate(cfg);
  } catch (const ValidationError& ex) {
    std::ostringstream os;
    os << source << ": " << ex.what();
    throw ValidationError(os.str());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::string> preset_override) {
  return parse_config(io::read_text(path), path.string(), std::move(preset_override));
}

json to_json(const ExperimentConfig& cfg) {
  const WeightsConfig& w = cfg.dataset.weights;
  json weights = {{"family", w.family},
                  {"alpha_total", w.alpha_total},
                  {"concentration", w.concentration ? json(*w.concentration) : json(nullptr)},
                  {"rho", w.rho},
                  {"support", w.support},
                  {"floor", w.floor},
                  {"ceiling", w.ceiling}};
  json solvers = json::array();
  for (const auto& s : cfg.solvers) {
    if (s.name == "and") {
      const AndConfig& c = s.and_config;
      solvers.push_back({{"name", s.name},
                         {"label", s.label},
                         {"stages", c.stages},
                         {"iters_per_stage", c.iters_per_stage},
                         {"eta", c.eta ? json(*c.eta) : json(nullptr)},
                         {"schedule", schedule_json(c.schedule)},
                         {"minibatch", c.minibatch},
                         {"pinv_rel_tol", c.pinv_rel_tol}});
    } else {
      solvers.push_back({{"name", s.name},
                         {"label", s.label},
                         {"outer_iters", s.baseline.outer_iters},
                         {"inner_iters", s.baseline.inner_iters},
                         {"epsilon_floor", s.baseline.epsilon_floor}});
    }
  }
  return {{"preset", cfg.preset},
          {"seed", cfg.seed},
          {"dataset",
           {{"W", cfg.dataset.w},
            {"D", cfg.dataset.d},
            {"n", cfg.dataset.n},
            {"gamma", cfg.dataset.gamma},
            {"ground_truth", cfg.dataset.truth_kind == GroundTruthKind::kSigned ? "signed" : "nonneg"},
            {"weights", weights}}},
          {"init",
           {{"r_l", cfg.init.in_span_level}, {"r_n", cfg.init.out_span_level}, {"zero_diagonal", cfg.init.zero_diagonal}}},
          {"solvers", solvers},
          {"eval_every", cfg.eval_every ? json(*cfg.eval_every) : json(nullptr)},
          {"output", cfg.output.string()}};
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  json canonical = to_json(cfg);
  canonical.erase("output");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_string(const ThresholdSchedule& schedule) { return schedule_json(schedule).dump(); }

}  // namespace andnmf
