#include "rsf/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "rsf/error.hpp"

namespace rsf {

std::string_view controller_kind_name(ControllerKind kind) noexcept {
  switch (kind) {
    case ControllerKind::Switching: return "switching";
    case ControllerKind::Centralized: return "centralized";
    case ControllerKind::Nominal: return "nominal";
  }
  return "switching";
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

ExperimentConfig default_config(Preset preset) {
  ExperimentConfig c;
  c.preset = preset;
  if (preset == Preset::Collision) {
    c.agents = 2;
    c.rollouts = 10;
    c.model.noise_scale = 0.1;
    c.initial.random = true;
    c.value.position_min = -4.0;
    c.value.position_max = 4.0;
    c.value.velocity_min = -30.0;
    c.value.velocity_max = 30.0;
    c.policy.nominal = AgentGains{1.0, 0.5};
    c.policy.safe = AgentGains{0.0, 0.5};
    c.policy.safe_velocity_spread = 25.0;
  }
  return c;
}

MasModel ExperimentConfig::make_model() const {
  ModelParams p;
  p.agents = agents;
  p.noise_scale = model.noise_scale;
  p.gamma = model.gamma;
  p.box = ActionBox{model.action_min, model.action_max};
  return rsf::make_model(preset, p);
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(ConfigErrorKind::Invalid, msg); };
  if (preset == Preset::Custom) fail("preset must be spring or collision");
  if (preset == Preset::Spring && agents != 3) fail("agents: spring preset has exactly 3 agents");
  if (preset == Preset::Collision && agents < 2) fail("agents: collision preset requires at least 2 agents");
  if (rollouts < 1) fail("rollouts must be >= 1");
  if (!(model.noise_scale >= 0.0 && std::isfinite(model.noise_scale))) fail("model.noise_scale must be >= 0");
  if (!(model.gamma > 0.0 && model.gamma < 1.0)) fail("model.gamma must lie in (0, 1)");
  if (!(model.action_min < model.action_max)) fail("model.action_min must be < model.action_max");
  if (!(initial.position_min <= initial.position_max) || !(initial.velocity_min <= initial.velocity_max)) {
    fail("initial: box bounds are inverted");
  }
  filter.validate();
  if (!std::isfinite(xi)) fail("filter.xi must be finite");
  if (value.states < 1) fail("value.states must be >= 1");
  if (value.samples < 1) fail("value.samples must be >= 1");
  if (!(value.learning_rate > 0.0)) fail("value.learning_rate must be > 0");
  for (std::size_t h : value.hidden) {
    if (h < 1) fail("value.hidden layer sizes must be >= 1");
  }
  if (!(value.position_min <= value.position_max) || !(value.velocity_min <= value.velocity_max)) {
    fail("value: sampler box bounds are inverted");
  }
  for (const AgentGains& g : {policy.nominal, policy.safe}) {
    if (!(g.kp >= 0.0 && g.kd >= 0.0 && std::isfinite(g.kp) && std::isfinite(g.kd))) {
      fail("policy gains must be finite and >= 0");
    }
  }
  if (!std::isfinite(policy.safe_velocity_spread)) fail("policy.safe_velocity_spread must be finite");
  if (policy.cem_population < 2) fail("policy.cem_population must be >= 2");
  if (!(policy.cem_elite_fraction > 0.0 && policy.cem_elite_fraction <= 1.0)) {
    fail("policy.cem_elite_fraction must lie in (0, 1]");
  }
  if (sweep.beta.empty() || sweep.xi.empty()) fail("sweep axes must be nonempty");
  for (double b : sweep.beta) {
    if (!(b > 0.0 && std::isfinite(b))) fail("sweep.beta values must be > 0");
  }
  for (double x : sweep.xi) {
    if (!std::isfinite(x)) fail("sweep.xi values must be finite");
  }
  if (certify.states < 1 || certify.oracle_samples < 1 || certify.k < 1) {
    fail("certify.states, certify.oracle_samples and certify.k must be >= 1");
  }
}

namespace {

struct RawValue {
  bool is_list = false;
  bool quoted = false;
  std::string text;
  std::vector<std::string> items;
  int line = 0;
};

[[noreturn]] void syntax_error(int line, const std::string& msg) {
  throw ConfigError(ConfigErrorKind::Syntax, "line " + std::to_string(line) + ": " + msg);
}

[[noreturn]] void value_error(const std::string& key, const RawValue& v, const std::string& msg) {
  throw ConfigError(ConfigErrorKind::Invalid, "line " + std::to_string(v.line) + ": " + key + ": " + msg);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return s.front() != '.' && s.back() != '.';
}

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && in_quotes) {
      ++i;
    } else if (c == '"') {
      in_quotes = !in_quotes;
    } else if (c == '#' && !in_quotes) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(std::string_view s, int line) {
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c == '\\') {
      if (i + 2 >= s.size()) syntax_error(line, "dangling escape in string");
      c = s[++i];
      if (c != '"' && c != '\\') syntax_error(line, "unsupported escape sequence");
    } else if (c == '"') {
      syntax_error(line, "unescaped quote inside string");
    }
    out.push_back(c);
  }
  return out;
}

RawValue parse_value(std::string_view text, int line) {
  RawValue v;
  v.line = line;
  if (text.empty()) syntax_error(line, "missing value");
  if (text.front() == '[') {
    if (text.back() != ']') syntax_error(line, "unterminated list");
    v.is_list = true;
    const auto body = trim(text.substr(1, text.size() - 2));
    if (body.empty()) return v;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      const auto item = trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (item.empty()) syntax_error(line, "empty list element");
      if (item.front() == '"' || item.front() == '[') syntax_error(line, "lists hold numbers only");
      v.items.emplace_back(item);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return v;
  }
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') syntax_error(line, "unterminated string");
    v.quoted = true;
    v.text = unquote(text, line);
    return v;
  }
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '"' || c == '[' || c == ']' || c == '=') {
      syntax_error(line, "bare values may not contain spaces, quotes, brackets or '='");
    }
  }
  v.text = std::string(text);
  return v;
}

std::map<std::string, RawValue> tokenize(std::string_view text) {
  std::map<std::string, RawValue> entries;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') syntax_error(line_no, "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_identifier(name) || name.find('.') != std::string_view::npos) {
        syntax_error(line_no, "invalid section name");
      }
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) syntax_error(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (!valid_identifier(key)) syntax_error(line_no, "invalid key '" + std::string(key) + "'");
    std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    RawValue value = parse_value(trim(line.substr(eq + 1)), line_no);
    if (!entries.emplace(full, std::move(value)).second) syntax_error(line_no, "duplicate key '" + full + "'");
  }
  return entries;
}

double to_double(const std::string& key, const RawValue& v, std::string_view text) {
  double out = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(out)) value_error(key, v, "expected a finite number");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const RawValue& v, std::string_view text) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    value_error(key, v, "expected a nonnegative integer");
  }
  return out;
}

class Binder {
 public:
  using Handler = std::function<void(const std::string&, const RawValue&)>;

  void number(const std::string& key, double& target) {
    handlers_[key] = [&target](const std::string& k, const RawValue& v) {
      scalar_only(k, v);
      target = to_double(k, v, v.text);
    };
  }
  template <typename T>
  void integer(const std::string& key, T& target) {
    handlers_[key] = [&target](const std::string& k, const RawValue& v) {
      scalar_only(k, v);
      target = static_cast<T>(to_unsigned(k, v, v.text));
    };
  }
  void boolean(const std::string& key, bool& target) {
    handlers_[key] = [&target](const std::string& k, const RawValue& v) {
      scalar_only(k, v);
      if (v.text == "true") target = true;
      else if (v.text == "false") target = false;
      else value_error(k, v, "expected true or false");
    };
  }
  void string(const std::string& key, std::string& target) {
    handlers_[key] = [&target](const std::string& k, const RawValue& v) {
      scalar_only(k, v);
      target = v.text;
    };
  }
  void numbers(const std::string& key, std::vector<double>& target) {
    handlers_[key] = [&target](const std::string& k, const RawValue& v) {
      if (!v.is_list) value_error(k, v, "expected a list");
      target.clear();
      for (const auto& item : v.items) target.push_back(to_double(k, v, item));
    };
  }
  void sizes(const std::string& key, std::vector<std::size_t>& target) {
    handlers_[key] = [&target](const std::string& k, const RawValue& v) {
      if (!v.is_list) value_error(k, v, "expected a list");
      target.clear();
      for (const auto& item : v.items) target.push_back(static_cast<std::size_t>(to_unsigned(k, v, item)));
    };
  }
  void custom(const std::string& key, Handler h) { handlers_[key] = std::move(h); }

  void apply(const std::map<std::string, RawValue>& entries) const {
    for (const auto& [key, value] : entries) {
      const auto it = handlers_.find(key);
      if (it == handlers_.end()) {
        throw ConfigError(ConfigErrorKind::UnknownKey, "line " + std::to_string(value.line) + ": unknown key '" + key + "'");
      }
      it->second(key, value);
    }
  }

 private:
  static void scalar_only(const std::string& k, const RawValue& v) {
    if (v.is_list) value_error(k, v, "expected a scalar, got a list");
  }

  std::map<std::string, Handler> handlers_;
};

void bind_all(Binder& b, ExperimentConfig& c) {
  b.custom("preset", [](const std::string&, const RawValue&) {});  // consumed before binding
  b.integer("agents", c.agents);
  b.integer("steps", c.steps);
  b.integer("rollouts", c.rollouts);
  b.integer("seed", c.seed);
  b.custom("controller", [&c](const std::string& k, const RawValue& v) {
    if (v.is_list) value_error(k, v, "expected a scalar");
    if (v.text == "switching") c.controller = ControllerKind::Switching;
    else if (v.text == "centralized") c.controller = ControllerKind::Centralized;
    else if (v.text == "nominal") c.controller = ControllerKind::Nominal;
    else value_error(k, v, "expected switching, centralized or nominal");
  });

  b.number("model.noise_scale", c.model.noise_scale);
  b.number("model.gamma", c.model.gamma);
  b.number("model.action_min", c.model.action_min);
  b.number("model.action_max", c.model.action_max);

  b.boolean("initial.random", c.initial.random);
  b.number("initial.position_min", c.initial.position_min);
  b.number("initial.position_max", c.initial.position_max);
  b.number("initial.velocity_min", c.initial.velocity_min);
  b.number("initial.velocity_max", c.initial.velocity_max);

  b.number("filter.alpha", c.filter.alpha);
  b.number("filter.epsilon", c.filter.epsilon);
  b.number("filter.alpha_bar", c.filter.alpha_bar);
  b.number("filter.epsilon_bar", c.filter.epsilon_bar);
  b.number("filter.beta", c.filter.beta);
  b.number("filter.xi", c.xi);
  b.integer("filter.samples", c.filter.samples);
  b.integer("filter.grid", c.filter.grid);
  b.custom("filter.radius_mode", [&c](const std::string& k, const RawValue& v) {
    if (v.is_list) value_error(k, v, "expected a scalar");
    if (v.text == "fixed") c.filter.radius_mode = RadiusMode::Fixed;
    else if (v.text == "margin") c.filter.radius_mode = RadiusMode::Margin;
    else value_error(k, v, "expected fixed or margin");
  });
  b.number("filter.radius", c.filter.radius);
  b.number("filter.lipschitz_h", c.filter.lipschitz_h);
  b.number("filter.lipschitz_fu", c.filter.lipschitz_fu);
  b.number("filter.tolerance", c.filter.tolerance);
  b.boolean("filter.clip_to_box", c.filter.clip_to_box);

  b.integer("value.states", c.value.states);
  b.integer("value.horizon", c.value.horizon);
  b.integer("value.samples", c.value.samples);
  b.sizes("value.hidden", c.value.hidden);
  b.integer("value.epochs", c.value.epochs);
  b.number("value.learning_rate", c.value.learning_rate);
  b.number("value.position_min", c.value.position_min);
  b.number("value.position_max", c.value.position_max);
  b.number("value.velocity_min", c.value.velocity_min);
  b.number("value.velocity_max", c.value.velocity_max);
  b.string("value.model_path", c.value.model_path);

  b.number("policy.nominal_kp", c.policy.nominal.kp);
  b.number("policy.nominal_kd", c.policy.nominal.kd);
  b.number("policy.safe_kp", c.policy.safe.kp);
  b.number("policy.safe_kd", c.policy.safe.kd);
  b.number("policy.safe_velocity_spread", c.policy.safe_velocity_spread);
  b.integer("policy.cem_iterations", c.policy.cem_iterations);
  b.integer("policy.cem_population", c.policy.cem_population);
  b.number("policy.cem_elite_fraction", c.policy.cem_elite_fraction);

  b.numbers("sweep.beta", c.sweep.beta);
  b.numbers("sweep.xi", c.sweep.xi);

  b.integer("certify.states", c.certify.states);
  b.integer("certify.oracle_samples", c.certify.oracle_samples);
  b.integer("certify.k", c.certify.k);

  b.string("output.dir", c.output_dir);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <typename T>
std::string list_of(const std::vector<T>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) out += format_double(xs[i]);
    else out += std::to_string(xs[i]);
  }
  return out + "]";
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  const auto entries = tokenize(text);
  Preset preset = Preset::Spring;
  if (const auto it = entries.find("preset"); it != entries.end()) {
    const auto parsed = it->second.is_list ? std::nullopt : parse_preset(it->second.text);
    if (!parsed) value_error("preset", it->second, "expected spring or collision");
    preset = *parsed;
  }
  ExperimentConfig config = default_config(preset);
  Binder binder;
  bind_all(binder, config);
  binder.apply(entries);
  config.validate();
  return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigErrorKind::MissingFile, "cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return format_double(v); };
  auto flag = [](bool b) { return b ? "true" : "false"; };
  o << "preset = " << preset_name(c.preset) << "\n"
    << "agents = " << c.agents << "\n"
    << "steps = " << c.steps << "\n"
    << "rollouts = " << c.rollouts << "\n"
    << "seed = " << c.seed << "\n"
    << "controller = " << controller_kind_name(c.controller) << "\n"
    << "\n[model]\n"
    << "noise_scale = " << num(c.model.noise_scale) << "\n"
    << "gamma = " << num(c.model.gamma) << "\n"
    << "action_min = " << num(c.model.action_min) << "\n"
    << "action_max = " << num(c.model.action_max) << "\n"
    << "\n[initial]\n"
    << "random = " << flag(c.initial.random) << "\n"
    << "position_min = " << num(c.initial.position_min) << "\n"
    << "position_max = " << num(c.initial.position_max) << "\n"
    << "velocity_min = " << num(c.initial.velocity_min) << "\n"
    << "velocity_max = " << num(c.initial.velocity_max) << "\n"
    << "\n[filter]\n"
    << "alpha = " << num(c.filter.alpha) << "\n"
    << "epsilon = " << num(c.filter.epsilon) << "\n"
    << "alpha_bar = " << num(c.filter.alpha_bar) << "\n"
    << "epsilon_bar = " << num(c.filter.epsilon_bar) << "\n"
    << "beta = " << num(c.filter.beta) << "\n"
    << "xi = " << num(c.xi) << "\n"
    << "samples = " << c.filter.samples << "\n"
    << "grid = " << c.filter.grid << "\n"
    << "radius_mode = " << radius_mode_name(c.filter.radius_mode) << "\n"
    << "radius = " << num(c.filter.radius) << "\n"
    << "lipschitz_h = " << num(c.filter.lipschitz_h) << "\n"
    << "lipschitz_fu = " << num(c.filter.lipschitz_fu) << "\n"
    << "tolerance = " << num(c.filter.tolerance) << "\n"
    << "clip_to_box = " << flag(c.filter.clip_to_box) << "\n"
    << "\n[value]\n"
    << "states = " << c.value.states << "\n"
    << "horizon = " << c.value.horizon << "\n"
    << "samples = " << c.value.samples << "\n"
    << "hidden = " << list_of(c.value.hidden) << "\n"
    << "epochs = " << c.value.epochs << "\n"
    << "learning_rate = " << num(c.value.learning_rate) << "\n"
    << "position_min = " << num(c.value.position_min) << "\n"
    << "position_max = " << num(c.value.position_max) << "\n"
    << "velocity_min = " << num(c.value.velocity_min) << "\n"
    << "velocity_max = " << num(c.value.velocity_max) << "\n"
    << "model_path = " << quote(c.value.model_path) << "\n"
    << "\n[policy]\n"
    << "nominal_kp = " << num(c.policy.nominal.kp) << "\n"
    << "nominal_kd = " << num(c.policy.nominal.kd) << "\n"
    << "safe_kp = " << num(c.policy.safe.kp) << "\n"
    << "safe_kd = " << num(c.policy.safe.kd) << "\n"
    << "safe_velocity_spread = " << num(c.policy.safe_velocity_spread) << "\n"
    << "cem_iterations = " << c.policy.cem_iterations << "\n"
    << "cem_population = " << c.policy.cem_population << "\n"
    << "cem_elite_fraction = " << num(c.policy.cem_elite_fraction) << "\n"
    << "\n[sweep]\n"
    << "beta = " << list_of(c.sweep.beta) << "\n"
    << "xi = " << list_of(c.sweep.xi) << "\n"
    << "\n[certify]\n"
    << "states = " << c.certify.states << "\n"
    << "oracle_samples = " << c.certify.oracle_samples << "\n"
    << "k = " << c.certify.k << "\n"
    << "\n[output]\n"
    << "dir = " << quote(c.output_dir) << "\n";
  return o.str();
}

}  // namespace rsf
