#include "ssan/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "ssan/error.hpp"

namespace ssan {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string snake_case(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ConfigError("invalid value '" + std::string(text) + "' for " +
                      std::string(key));
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for " +
                    std::string(key));
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Field {
  std::string name;
  std::function<void(ModelConfig&, std::string_view)> set;
  std::function<std::string(const ModelConfig&)> get;
};

template <typename T>
Field size_field(std::string name, T ModelConfig::*member) {
  return {name,
          [name, member](ModelConfig& c, std::string_view v) {
            c.*member = parse_number<T>(name, v);
          },
          [member](const ModelConfig& c) { return std::to_string(c.*member); }};
}

Field double_field(std::string name, double ModelConfig::*member) {
  return {name,
          [name, member](ModelConfig& c, std::string_view v) {
            c.*member = parse_number<double>(name, v);
          },
          [member](const ModelConfig& c) { return format_double(c.*member); }};
}

Field bool_field(std::string name, bool ModelConfig::*member) {
  return {name,
          [name, member](ModelConfig& c, std::string_view v) {
            c.*member = parse_bool(name, v);
          },
          [member](const ModelConfig& c) {
            return std::string(c.*member ? "true" : "false");
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back(size_field("layers", &ModelConfig::layers));
    f.push_back(size_field("heads", &ModelConfig::heads));
    f.push_back(size_field("d_model", &ModelConfig::d_model));
    f.push_back(size_field("ffn_multiplier", &ModelConfig::ffn_multiplier));
    f.push_back(size_field("d_distance", &ModelConfig::d_distance));
    f.push_back(size_field("max_len", &ModelConfig::max_len));
    f.push_back(double_field("layer_norm_eps", &ModelConfig::layer_norm_eps));
    f.push_back(bool_field("type_embedding", &ModelConfig::type_embedding));
    f.push_back(bool_field("coref_embedding", &ModelConfig::coref_embedding));
    f.push_back(size_field("coref_capacity", &ModelConfig::coref_capacity));
    f.push_back({"mode",
                 [](ModelConfig& c, std::string_view v) {
                   const auto m = parse_mode(v);
                   if (!m) throw ConfigError("unknown mode '" + std::string(v) + "'");
                   c.mode = *m;
                 },
                 [](const ModelConfig& c) { return std::string(mode_name(c.mode)); }});
    f.push_back({"terms",
                 [](ModelConfig& c, std::string_view v) {
                   if (v == "default")
                     c.terms.reset();
                   else
                     c.terms = parse_bias_terms(v);
                 },
                 [](const ModelConfig& c) {
                   return c.terms ? format_bias_terms(*c.terms) : std::string("default");
                 }});
    f.push_back({"exclude",
                 [](ModelConfig& c, std::string_view v) {
                   c.exclude = parse_dependency_set(v);
                 },
                 [](const ModelConfig& c) { return format_dependency_set(c.exclude); }});
    f.push_back({"structured_layers",
                 [](ModelConfig& c, std::string_view v) { c.structured_layers = v; },
                 [](const ModelConfig& c) { return c.structured_layers; }});
    f.push_back({"schema",
                 [](ModelConfig& c, std::string_view v) { c.schema = v; },
                 [](const ModelConfig& c) { return c.schema; }});
    f.push_back(size_field("min_count", &ModelConfig::min_count));
    f.push_back(double_field("threshold", &ModelConfig::threshold));
    f.push_back(bool_field("auto_threshold", &ModelConfig::auto_threshold));
    f.push_back(size_field("seed", &ModelConfig::seed));
    f.push_back(double_field("lr", &ModelConfig::lr));
    f.push_back(double_field("beta1", &ModelConfig::beta1));
    f.push_back(double_field("beta2", &ModelConfig::beta2));
    f.push_back(double_field("eps", &ModelConfig::eps));
    f.push_back(size_field("epochs", &ModelConfig::epochs));
    f.push_back(size_field("batch_size", &ModelConfig::batch_size));
    return f;
  }();
  return table;
}

const Field& field(std::string_view key) {
  const auto name = snake_case(trim(key));
  for (const auto& f : fields())
    if (f.name == name) return f;
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

}  // namespace

std::string kebab_case(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

Transformation ModelConfig::transformation() const {
  auto t = Transformation::make(mode);
  if (terms) t.terms = *terms;
  return t;
}

EncoderConfig ModelConfig::encoder_config() const {
  EncoderConfig e;
  e.layers = layers;
  e.heads = heads;
  e.d_model = d_model;
  e.ffn_multiplier = ffn_multiplier;
  e.transform = transformation();
  e.structured_layers = parse_layer_range(structured_layers, layers);
  e.layer_norm_eps = layer_norm_eps;
  return e;
}

AdamConfig ModelConfig::adam_config() const { return {lr, beta1, beta2, eps}; }

void ModelConfig::validate() const {
  const auto e = encoder_config();
  e.validate();
  e.transform.validate();
  if (max_len == 0) throw ConfigError("max_len must be positive");
  if (coref_capacity == 0) throw ConfigError("coref_capacity must be positive");
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ConfigError("threshold must lie in (0, 1)");
  if (lr < 0.0) throw ConfigError("lr must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("betas must lie in [0, 1)");
  if (eps <= 0.0) throw ConfigError("eps must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (exclude.contains(DependencyType::NA))
    throw ConfigError("NA cannot be excluded");
}

void ModelConfig::set(std::string_view key, std::string_view value) {
  field(key).set(*this, trim(value));
}

std::string ModelConfig::get(std::string_view key) const { return field(key).get(*this); }

const std::vector<std::string>& ModelConfig::keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.name);
    return out;
  }();
  return names;
}

std::string ModelConfig::to_text() const {
  std::string out;
  for (const auto& f : fields()) out += f.name + " = " + f.get(*this) + "\n";
  return out;
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  ModelConfig c;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    c.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return c;
}

ModelConfig ModelConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return from_text(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void ModelConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << to_text();
}

}  // namespace ssan
