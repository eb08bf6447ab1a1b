#include "tkgc/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace tkgc {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ValidationError("config: invalid value '" + std::string(value) + "' for key '" +
                        std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

double parse_double(std::string_view key, std::string_view value) {
  std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) bad_value(key, value);
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

using Entries = std::vector<std::pair<std::string, std::string>>;

Entries entries_of(const RunConfig& c) {
  return {
      {"embedding_size", std::to_string(c.embedding_size)},
      {"time_dim", std::to_string(c.time_dim)},
      {"agg_steps", std::to_string(c.agg_steps)},
      {"activation", to_string(c.activation)},
      {"search_range", c.search_range ? std::to_string(*c.search_range) : "all"},
      {"max_neighbors", std::to_string(c.max_neighbors)},
      {"include_same_time", c.include_same_time ? "true" : "false"},
      {"score_fn", to_string(c.score_fn)},
      {"sampler_variant", to_string(c.sampler_variant)},
      {"time_encoder_variant", to_string(c.time_encoder_variant)},
      {"learning_rate", format_double(c.learning_rate)},
      {"adam_beta1", format_double(c.adam_beta1)},
      {"adam_beta2", format_double(c.adam_beta2)},
      {"adam_eps", format_double(c.adam_eps)},
      {"weight_decay", format_double(c.weight_decay)},
      {"batch_size", std::to_string(c.batch_size)},
      {"epochs", std::to_string(c.epochs)},
      {"seed", std::to_string(c.seed)},
      {"threads", std::to_string(c.threads)},
      {"eval_threads", std::to_string(c.eval_threads)},
      {"eval_every", std::to_string(c.eval_every)},
      {"log_wall_seconds", c.log_wall_seconds ? "true" : "false"},
      {"tie_mode", to_string(c.tie_mode)},
      {"filter_mode", to_string(c.filter_mode)},
  };
}

}  // namespace

std::string to_string(Activation v) { return v == Activation::kTanh ? "tanh" : "relu"; }
std::string to_string(ScoreFn v) { return v == ScoreFn::kDistmult ? "distmult" : "complex"; }
std::string to_string(SamplerVariant v) {
  switch (v) {
    case SamplerVariant::kWeighted: return "weighted";
    case SamplerVariant::kUniform: return "uniform";
    case SamplerVariant::kAll: return "all";
  }
  return "?";
}
std::string to_string(TimeEncoderVariant v) {
  return v == TimeEncoderVariant::kDifference ? "difference" : "absolute";
}
std::string to_string(TieMode v) { return v == TieMode::kPessimistic ? "pessimistic" : "mean"; }
std::string to_string(FilterMode v) { return v == FilterMode::kTimeAware ? "time-aware" : "static"; }

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "embedding_size") {
    embedding_size = parse_number<std::size_t>(key, value);
  } else if (key == "time_dim") {
    time_dim = parse_number<std::size_t>(key, value);
  } else if (key == "agg_steps") {
    agg_steps = parse_number<int>(key, value);
  } else if (key == "activation") {
    if (value == "tanh") activation = Activation::kTanh;
    else if (value == "relu") activation = Activation::kRelu;
    else bad_value(key, value);
  } else if (key == "search_range") {
    if (value == "all" || value == "unbounded") search_range = kUnbounded;
    else search_range = parse_number<TimeIndex>(key, value);
  } else if (key == "max_neighbors") {
    max_neighbors = parse_number<std::size_t>(key, value);
  } else if (key == "include_same_time") {
    include_same_time = parse_bool(key, value);
  } else if (key == "score_fn") {
    if (value == "distmult") score_fn = ScoreFn::kDistmult;
    else if (value == "complex") score_fn = ScoreFn::kComplex;
    else bad_value(key, value);
  } else if (key == "sampler_variant") {
    if (value == "weighted") sampler_variant = SamplerVariant::kWeighted;
    else if (value == "uniform") sampler_variant = SamplerVariant::kUniform;
    else if (value == "all") sampler_variant = SamplerVariant::kAll;
    else bad_value(key, value);
  } else if (key == "time_encoder_variant") {
    if (value == "difference") time_encoder_variant = TimeEncoderVariant::kDifference;
    else if (value == "absolute") time_encoder_variant = TimeEncoderVariant::kAbsolute;
    else bad_value(key, value);
  } else if (key == "learning_rate") {
    learning_rate = parse_double(key, value);
  } else if (key == "adam_beta1") {
    adam_beta1 = parse_double(key, value);
  } else if (key == "adam_beta2") {
    adam_beta2 = parse_double(key, value);
  } else if (key == "adam_eps") {
    adam_eps = parse_double(key, value);
  } else if (key == "weight_decay") {
    weight_decay = parse_double(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "epochs") {
    epochs = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "threads") {
    threads = parse_number<int>(key, value);
  } else if (key == "eval_threads") {
    eval_threads = parse_number<int>(key, value);
  } else if (key == "eval_every") {
    eval_every = parse_number<std::size_t>(key, value);
  } else if (key == "log_wall_seconds") {
    log_wall_seconds = parse_bool(key, value);
  } else if (key == "tie_mode") {
    if (value == "pessimistic") tie_mode = TieMode::kPessimistic;
    else if (value == "mean") tie_mode = TieMode::kMean;
    else bad_value(key, value);
  } else if (key == "filter_mode") {
    if (value == "time-aware") filter_mode = FilterMode::kTimeAware;
    else if (value == "static") filter_mode = FilterMode::kStatic;
    else bad_value(key, value);
  } else {
    throw ValidationError("config: unknown key '" + std::string(key) + "'");
  }
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("config: ") + what);
  };
  require(embedding_size > 0, "embedding_size must be positive");
  require(agg_steps == 1 || agg_steps == 2, "agg_steps must be 1 or 2");
  require(!search_range || *search_range >= 0, "search_range must be >= 0 or 'all'");
  require(max_neighbors >= 1, "max_neighbors must be >= 1");
  require(score_fn != ScoreFn::kComplex || embedding_size % 2 == 0,
          "complex scoring needs an even embedding_size");
  require(learning_rate >= 0.0, "learning_rate must be >= 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must be in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must be in [0, 1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(weight_decay >= 0.0, "weight_decay must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(threads >= 1, "threads must be >= 1");
  require(eval_threads >= 0, "eval_threads must be >= 0");
  require(eval_every >= 1, "eval_every must be >= 1");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries_of(*this)) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a64(to_text()); }

RunConfig RunConfig::from_text(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

RunConfig RunConfig::for_dataset(std::string_view name) {
  RunConfig cfg;
  if (name == "icews14") cfg.embedding_size = 300;
  else if (name == "icews05-15" || name == "gdelt") cfg.embedding_size = 200;
  else throw ValidationError("unknown dataset preset '" + std::string(name) + "'");
  return cfg;
}

std::vector<std::string> config_diff(const RunConfig& a, const RunConfig& b) {
  const auto ea = entries_of(a);
  const auto eb = entries_of(b);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    if (ea[i].second != eb[i].second) out.push_back(ea[i].first);
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace tkgc
