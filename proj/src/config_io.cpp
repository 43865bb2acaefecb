#include "facet/config_io.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "facet/error.hpp"

namespace facet {

using nlohmann::json;

namespace {

// A key path such as {"scenario", "distance_range", "1"}; numeric parts are array indices.
using Path = std::vector<std::string>;

std::string join(const Path& path) {
  std::string out;
  for (const auto& part : path) {
    const bool index = !part.empty() && std::isdigit(static_cast<unsigned char>(part[0]));
    if (index) {
      out += "[" + part + "]";
    } else {
      if (!out.empty()) out += ".";
      out += part;
    }
  }
  return out.empty() ? "<root>" : out;
}

int line_at(const std::string& text, std::size_t pos) {
  int line = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

// Best effort: follows the quoted key names down the document. Array indices are skipped,
// so errors inside an array point at the array's key.
int locate(const std::string& text, const Path& path) {
  std::size_t pos = 0;
  bool found = false;
  for (const auto& part : path) {
    if (part.empty() || std::isdigit(static_cast<unsigned char>(part[0]))) continue;
    const std::string needle = "\"" + part + "\"";
    std::size_t at = text.find(needle, pos);
    while (at != std::string::npos) {
      std::size_t k = at + needle.size();
      while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
      if (k < text.size() && text[k] == ':') break;
      at = text.find(needle, at + 1);
    }
    if (at == std::string::npos) break;
    pos = at;
    found = true;
  }
  return found ? line_at(text, pos) : 1;
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const Path& path, const std::string& message) const {
    throw ConfigError(source_ + ":" + std::to_string(locate(text_, path)) + ": " + join(path) + ": " + message);
  }

  std::string where(const Path& path) const {
    return source_ + ":" + std::to_string(locate(text_, path)) + ": " + join(path);
  }

  void require_object(const json& j, const Path& path) const {
    if (!j.is_object()) fail(path, "expected an object");
  }

  void only_keys(const json& j, const Path& path, std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(child(path, key), "unknown key");
    }
  }

  const json* get(const json& j, const Path& path, const char* key, bool required) const {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path, std::string("missing required key \"") + key + "\"");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& v, const Path& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  int integer(const json& v, const Path& path) const {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
      fail(path, "integer out of range");
    }
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(path, "integer out of range");
    return static_cast<int>(x);
  }

  std::uint64_t unsigned64(const json& v, const Path& path) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) fail(path, "expected a non-negative integer");
    fail(path, "expected an integer");
  }

  std::string string(const json& v, const Path& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  bool boolean(const json& v, const Path& path) const {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const json& v, const Path& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], child(path, std::to_string(i))));
    return out;
  }

  static Path child(Path path, const std::string& key) {
    path.push_back(key);
    return path;
  }

  // Validation messages look like "field: text" or "solver.field: text"; the field part is
  // turned into a path under `base` so the line can be found.
  [[noreturn]] void fail_all(const Path& base, const std::vector<std::string>& errors) const {
    std::string message;
    for (const auto& e : errors) {
      const auto colon = e.find(':');
      Path path = base;
      std::string text = e;
      if (colon != std::string::npos) {
        std::string field = e.substr(0, colon);
        text = e.substr(colon + 1);
        while (!text.empty() && text.front() == ' ') text.erase(text.begin());
        std::stringstream parts(field);
        std::string part;
        while (std::getline(parts, part, '.')) {
          if (!base.empty() && part == base.back() && path.size() == base.size()) continue;
          path.push_back(part);
        }
      }
      if (!message.empty()) message += "\n";
      message += where(path) + ": " + text;
    }
    throw ConfigError(message);
  }

 private:
  const std::string& text_;
  std::string source_;
};

json parse_strict(const std::string& text, const std::string& source) {
  // Duplicate keys are silently merged by the parser, so they are caught in the callback.
  std::vector<std::set<std::string>> seen;
  std::string duplicate;
  auto callback = [&](int, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start: seen.emplace_back(); break;
      case json::parse_event_t::object_end: seen.pop_back(); break;
      case json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        if (!seen.back().insert(key).second && duplicate.empty()) duplicate = key;
        break;
      }
      default: break;
    }
    return true;
  };
  json j;
  try {
    j = json::parse(text, callback, true, false);
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points just past the offending character.
    const std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
    std::size_t line_start = text.rfind('\n', pos == 0 ? 0 : pos - 1);
    const std::size_t column = line_start == std::string::npos ? pos + 1 : pos - line_start;
    std::string what = e.what();
    const auto cut = what.find("syntax error");
    if (cut != std::string::npos) what = what.substr(cut);
    throw ConfigError(source + ":" + std::to_string(line_at(text, pos)) + ":" + std::to_string(column) +
                      ": " + what);
  }
  if (!duplicate.empty()) {
    throw ConfigError(source + ":" + std::to_string(locate(text, {duplicate})) + ": duplicate key \"" +
                      duplicate + "\"");
  }
  return j;
}

ScenarioConfig read_scenario(const Reader& rd, const json& j, const Path& path) {
  rd.require_object(j, path);
  rd.only_keys(j, path,
               {"num_devices", "num_subcarriers", "num_antennas", "pathloss_exponent", "distance_range",
                "uplink_noise", "downlink_noise", "total_feedback_power", "harvest_efficiency", "fading_model",
                "seed"});
  ScenarioConfig c;
  auto at = [&](const char* key) { return Reader::child(path, key); };
  if (auto v = rd.get(j, path, "num_devices", false)) c.num_devices = rd.integer(*v, at("num_devices"));
  if (auto v = rd.get(j, path, "num_subcarriers", false)) c.num_subcarriers = rd.integer(*v, at("num_subcarriers"));
  if (auto v = rd.get(j, path, "num_antennas", false)) c.num_antennas = rd.integer(*v, at("num_antennas"));
  if (auto v = rd.get(j, path, "pathloss_exponent", false)) {
    c.pathloss_exponent = rd.number(*v, at("pathloss_exponent"));
  }
  if (auto v = rd.get(j, path, "distance_range", false)) {
    const auto range = rd.numbers(*v, at("distance_range"));
    if (range.size() != 2) rd.fail(at("distance_range"), "expected [d_min, d_max]");
    c.distance_range = {range[0], range[1]};
  }
  if (auto v = rd.get(j, path, "uplink_noise", false)) c.uplink_noise = rd.number(*v, at("uplink_noise"));
  if (auto v = rd.get(j, path, "downlink_noise", false)) c.downlink_noise = rd.number(*v, at("downlink_noise"));
  if (auto v = rd.get(j, path, "total_feedback_power", false)) {
    c.total_feedback_power = rd.number(*v, at("total_feedback_power"));
  }
  if (auto v = rd.get(j, path, "harvest_efficiency", false)) {
    c.harvest_efficiency = rd.number(*v, at("harvest_efficiency"));
  }
  if (auto v = rd.get(j, path, "fading_model", false)) {
    try {
      c.fading_model = fading_model_from_string(rd.string(*v, at("fading_model")));
    } catch (const ConfigError& e) {
      rd.fail(at("fading_model"), e.what());
    }
  }
  if (auto v = rd.get(j, path, "seed", false)) c.seed = rd.unsigned64(*v, at("seed"));
  if (auto errors = validate(c); !errors.empty()) rd.fail_all(path, errors);
  return c;
}

CodeParams read_code(const Reader& rd, const json& j, const Path& path) {
  rd.require_object(j, path);
  rd.only_keys(j, path,
               {"u0", "u1", "u2", "u3", "target_bler", "info_bits", "channel_symbols", "frame_symbols", "frames"});
  CodeParams p;
  auto at = [&](const char* key) { return Reader::child(path, key); };
  auto num = [&](const char* key, double& out) {
    if (auto v = rd.get(j, path, key, false)) out = rd.number(*v, at(key));
  };
  auto whole = [&](const char* key, int& out) {
    if (auto v = rd.get(j, path, key, false)) out = rd.integer(*v, at(key));
  };
  num("u0", p.u0);
  num("u1", p.u1);
  num("u2", p.u2);
  num("u3", p.u3);
  num("target_bler", p.target_bler);
  whole("info_bits", p.info_bits);
  whole("channel_symbols", p.channel_symbols);
  whole("frame_symbols", p.frame_symbols);
  whole("frames", p.frames);
  if (auto errors = validate(p); !errors.empty()) rd.fail_all(path, errors);
  return p;
}

SolverConfig read_solver(const Reader& rd, const json& j, const Path& path) {
  rd.require_object(j, path);
  rd.only_keys(j, path,
               {"max_outer_iters", "step_a0", "step_decay", "tolerance", "patience", "t_guard_db", "init_rho",
                "init_multiplier", "power_cap_w", "power_numerator", "record_trace"});
  SolverConfig c;
  auto at = [&](const char* key) { return Reader::child(path, key); };
  auto num = [&](const char* key, double& out) {
    if (auto v = rd.get(j, path, key, false)) out = rd.number(*v, at(key));
  };
  if (auto v = rd.get(j, path, "max_outer_iters", false)) c.max_outer_iters = rd.integer(*v, at("max_outer_iters"));
  num("step_a0", c.step_a0);
  num("step_decay", c.step_decay);
  num("tolerance", c.tolerance);
  if (auto v = rd.get(j, path, "patience", false)) c.patience = rd.integer(*v, at("patience"));
  num("t_guard_db", c.t_guard_db);
  num("init_rho", c.init_rho);
  num("init_multiplier", c.init_multiplier);
  num("power_cap_w", c.power_cap_w);
  if (auto v = rd.get(j, path, "power_numerator", false)) {
    const auto name = rd.string(*v, at("power_numerator"));
    if (name == "assigned_device") {
      c.power_numerator = PowerNumerator::assigned_device;
    } else if (name == "all_devices") {
      c.power_numerator = PowerNumerator::all_devices;
    } else {
      rd.fail(at("power_numerator"), "expected assigned_device or all_devices");
    }
  }
  if (auto v = rd.get(j, path, "record_trace", false)) c.record_trace = rd.boolean(*v, at("record_trace"));
  if (auto errors = validate(c); !errors.empty()) rd.fail_all(path, errors);
  return c;
}

std::map<std::string, BaselineSpec> read_baselines(const Reader& rd, const json& j, const Path& path) {
  rd.require_object(j, path);
  rd.only_keys(j, path, {"polar_wpt", "turbo_wpt"});
  std::map<std::string, BaselineSpec> out;
  for (const auto& [name, body] : j.items()) {
    const Path here = Reader::child(path, name);
    rd.require_object(body, here);
    rd.only_keys(body, here, {"forward_snr_threshold_db", "fixed_rho"});
    BaselineSpec spec;
    spec.name = name;
    spec.forward_snr_threshold_db =
        rd.number(*rd.get(body, here, "forward_snr_threshold_db", true), Reader::child(here, "forward_snr_threshold_db"));
    spec.fixed_rho = 1.0;
    if (auto v = rd.get(body, here, "fixed_rho", false)) spec.fixed_rho = rd.number(*v, Reader::child(here, "fixed_rho"));
    if (auto errors = validate(spec); !errors.empty()) rd.fail_all(here, errors);
    out[name] = spec;
  }
  return out;
}

SweepConfig read_sweep(const Reader& rd, const json& j) {
  const Path root;
  rd.require_object(j, root);
  rd.only_keys(j, root,
               {"scenario", "code_params", "solver", "baselines", "p_total_grid_dbm", "kappa_grid", "schemes",
                "num_seeds", "threads", "output", "oracle"});
  SweepConfig c;
  auto at = [](const char* key) { return Path{key}; };
  c.scenario = read_scenario(rd, *rd.get(j, root, "scenario", true), at("scenario"));
  if (auto v = rd.get(j, root, "code_params", false)) c.code = read_code(rd, *v, at("code_params"));
  if (auto v = rd.get(j, root, "solver", false)) c.solver = read_solver(rd, *v, at("solver"));
  if (auto v = rd.get(j, root, "baselines", false)) c.baselines = read_baselines(rd, *v, at("baselines"));
  c.p_total_grid_dbm = rd.numbers(*rd.get(j, root, "p_total_grid_dbm", true), at("p_total_grid_dbm"));
  c.kappa_grid = rd.numbers(*rd.get(j, root, "kappa_grid", true), at("kappa_grid"));
  {
    const json& v = *rd.get(j, root, "schemes", true);
    if (!v.is_array()) rd.fail(at("schemes"), "expected an array of scheme names");
    for (std::size_t i = 0; i < v.size(); ++i) {
      c.schemes.push_back(rd.string(v[i], {"schemes", std::to_string(i)}));
    }
  }
  c.num_seeds = rd.integer(*rd.get(j, root, "num_seeds", true), at("num_seeds"));
  if (auto v = rd.get(j, root, "threads", false)) c.threads = rd.integer(*v, at("threads"));
  if (auto v = rd.get(j, root, "output", false)) {
    const Path here = at("output");
    rd.require_object(*v, here);
    rd.only_keys(*v, here, {"csv", "trials"});
    if (auto s = rd.get(*v, here, "csv", false)) c.output.csv = rd.string(*s, {"output", "csv"});
    if (auto s = rd.get(*v, here, "trials", false)) c.output.trials = rd.string(*s, {"output", "trials"});
  }
  if (auto v = rd.get(j, root, "oracle", false)) {
    const Path here = at("oracle");
    rd.require_object(*v, here);
    rd.only_keys(*v, here, {"instances", "power_points", "rho_points", "seed", "tolerance"});
    auto& o = c.oracle;
    if (auto s = rd.get(*v, here, "instances", false)) o.instances = rd.integer(*s, {"oracle", "instances"});
    if (auto s = rd.get(*v, here, "power_points", false)) o.power_points = rd.integer(*s, {"oracle", "power_points"});
    if (auto s = rd.get(*v, here, "rho_points", false)) o.rho_points = rd.integer(*s, {"oracle", "rho_points"});
    if (auto s = rd.get(*v, here, "seed", false)) o.seed = rd.unsigned64(*s, {"oracle", "seed"});
    if (auto s = rd.get(*v, here, "tolerance", false)) o.tolerance = rd.number(*s, {"oracle", "tolerance"});
  }
  if (auto errors = validate(c); !errors.empty()) rd.fail_all(root, errors);
  return c;
}

}  // namespace

json to_json(const ScenarioConfig& c) {
  return json{{"num_devices", c.num_devices},
              {"num_subcarriers", c.num_subcarriers},
              {"num_antennas", c.num_antennas},
              {"pathloss_exponent", c.pathloss_exponent},
              {"distance_range", {c.distance_range[0], c.distance_range[1]}},
              {"uplink_noise", c.uplink_noise},
              {"downlink_noise", c.downlink_noise},
              {"total_feedback_power", c.total_feedback_power},
              {"harvest_efficiency", c.harvest_efficiency},
              {"fading_model", to_string(c.fading_model)},
              {"seed", c.seed}};
}

json to_json(const CodeParams& p) {
  return json{{"u0", p.u0},
              {"u1", p.u1},
              {"u2", p.u2},
              {"u3", p.u3},
              {"target_bler", p.target_bler},
              {"info_bits", p.info_bits},
              {"channel_symbols", p.channel_symbols},
              {"frame_symbols", p.frame_symbols},
              {"frames", p.frames}};
}

json to_json(const SolverConfig& c) {
  return json{{"max_outer_iters", c.max_outer_iters},
              {"step_a0", c.step_a0},
              {"step_decay", c.step_decay},
              {"tolerance", c.tolerance},
              {"patience", c.patience},
              {"t_guard_db", c.t_guard_db},
              {"init_rho", c.init_rho},
              {"init_multiplier", c.init_multiplier},
              {"power_cap_w", c.power_cap_w},
              {"power_numerator",
               c.power_numerator == PowerNumerator::assigned_device ? "assigned_device" : "all_devices"},
              {"record_trace", c.record_trace}};
}

json to_json(const BaselineSpec& spec) {
  json j{{"fixed_rho", spec.fixed_rho}};
  if (spec.forward_snr_threshold_db) j["forward_snr_threshold_db"] = *spec.forward_snr_threshold_db;
  return j;
}

json to_json(const SweepConfig& c) {
  json baselines = json::object();
  for (const auto& [name, spec] : c.baselines) baselines[name] = to_json(spec);
  return json{{"scenario", to_json(c.scenario)},
              {"code_params", to_json(c.code)},
              {"solver", to_json(c.solver)},
              {"baselines", baselines},
              {"p_total_grid_dbm", c.p_total_grid_dbm},
              {"kappa_grid", c.kappa_grid},
              {"schemes", c.schemes},
              {"num_seeds", c.num_seeds},
              {"threads", c.threads},
              {"output", {{"csv", c.output.csv}, {"trials", c.output.trials}}},
              {"oracle",
               {{"instances", c.oracle.instances},
                {"power_points", c.oracle.power_points},
                {"rho_points", c.oracle.rho_points},
                {"seed", c.oracle.seed},
                {"tolerance", c.oracle.tolerance}}}};
}

SweepConfig parse_sweep_config(const std::string& text, const std::string& source) {
  const json j = parse_strict(text, source);
  return read_sweep(Reader(text, source), j);
}

ScenarioConfig parse_scenario_config(const std::string& text, const std::string& source) {
  const json j = parse_strict(text, source);
  return read_scenario(Reader(text, source), j, {});
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_sweep_config(buffer.str(), path);
}

std::string dump_config(const SweepConfig& config) { return to_json(config).dump(2) + "\n"; }

}  // namespace facet
