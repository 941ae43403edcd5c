#include "uavq/scenario.hpp"

#include "uavq/errors.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace uavq {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scenario

std::size_t Scenario::source_index() const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].role == NodeRole::Source) return i;
  throw ValidationError("nodes", "exactly one node must have role \"source\"");
}

std::size_t Scenario::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  throw ValidationError("nodes", "no node with id '" + std::string(id) + "'");
}

LinkChannel Scenario::link(std::size_t i) const {
  const Node &node = nodes.at(i);
  return make_link(node.position, destination, environment, node.fading_override);
}

void Scenario::set_slot_duration(double seconds) {
  slot_duration = seconds;
  for (auto &node : nodes) node.queue.slot_duration = seconds;
}

void Scenario::validate() const {
  if (schema_version != kScenarioSchemaVersion)
    throw ValidationError("schema_version", "must be " + std::to_string(kScenarioSchemaVersion));
  environment.validate();
  noise.validate();
  if (num_channels < 1) throw ValidationError("num_channels", "must be >= 1");
  if (!(gamma_th > 0.0) || !std::isfinite(gamma_th))
    throw ValidationError("gamma_th", "must be a finite number > 0");
  if (!(slot_duration > 0.0) || !std::isfinite(slot_duration))
    throw ValidationError("slot_duration", "must be a finite number > 0");
  if (!(area.width > 0.0) || !(area.height > 0.0))
    throw ValidationError("area", "width and height must be > 0");
  if (!(uav_altitude >= 0.0)) throw ValidationError("uav_altitude", "must be >= 0");
  if (!(destination.z >= 0.0)) throw ValidationError("destination.z", "must be >= 0");

  int sources = 0;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node &node = nodes[i];
    const std::string field = "nodes[" + std::to_string(i) + "]";
    if (node.id.empty()) throw ValidationError(field + ".id", "must be a non-empty string");
    if (!ids.insert(node.id).second)
      throw ValidationError(field + ".id", "duplicate id '" + node.id + "'");
    if (node.role == NodeRole::Source) ++sources;
    if (!(node.transmit_power > 0.0) || !std::isfinite(node.transmit_power))
      throw ValidationError(field + ".transmit_power", "must be a finite number > 0");
    if (!std::isfinite(node.position.x) || !std::isfinite(node.position.y) ||
        !(node.position.z >= 0.0) || !std::isfinite(node.position.z))
      throw ValidationError(field + ".position", "coordinates must be finite with z >= 0");
    if (std::isnan(node.beta) || node.beta < 0.0 || std::isinf(node.beta))
      throw ValidationError(field + ".beta", "must be a finite number >= 0");
    try {
      node.queue.validate();
    } catch (const ValidationError &e) {
      // Report the key as it appears in the document ("arrival_rate", not "queue.arrival_rate").
      const std::string key = e.field().substr(e.field().find('.') + 1);
      throw ValidationError(field + "." + key, std::string(e.what()).substr(e.field().size() + 2));
    }
    if (node.queue.slot_duration != slot_duration)
      throw ValidationError(field + ".queue.slot_duration", "must equal the scenario slot_duration");
    if (!(distance(node.position, destination) >= environment.d0))
      throw ValidationError(field + ".position",
                            "distance to the destination must be >= d0 (" +
                                format_number(environment.d0) + " m)");
  }
  if (sources != 1)
    throw ValidationError("nodes", "exactly one node must have role \"source\", found " +
                                       std::to_string(sources));
}

PolicyVector policy_of(const Scenario &scenario) {
  PolicyVector policy;
  for (const auto &node : scenario.nodes) policy.betas.push_back(node.beta);
  return policy;
}

// ---------------------------------------------------------------------------
// Sampler

NodeSampler::NodeSampler(std::uint64_t seed, Area area) : state_(seed), area_(area) {}

std::uint64_t NodeSampler::next_raw() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double NodeSampler::uniform(double lo, double hi) {
  const double u = static_cast<double>(next_raw() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

NodeSample NodeSampler::next() {
  static constexpr std::array<double, 4> kRates{60.0, 80.0, 100.0, 120.0};
  static constexpr std::array<double, 5> kBuffers{50.0, 75.0, 100.0, 125.0, 150.0};
  NodeSample s;
  s.position.x = uniform(0.0, area_.width);
  s.position.y = uniform(0.0, area_.height);
  s.position.z = 0.0;
  s.transmit_power = uniform(0.5, 1.0);
  s.arrival_rate = kRates[next_raw() % kRates.size()];
  s.delay_threshold = uniform(0.03, 0.06);
  s.buffer_capacity = kBuffers[next_raw() % kBuffers.size()];
  return s;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

[[noreturn]] void fail(const std::string &field, const std::string &constraint) {
  throw ValidationError(field, constraint);
}

void reject_unknown(const json &obj, const std::string &where,
                    std::initializer_list<const char *> allowed) {
  if (!obj.is_object()) fail(where.empty() ? "document" : where, "must be an object");
  for (const auto &item : obj.items()) {
    bool known = false;
    for (const char *key : allowed) known = known || item.key() == key;
    if (!known)
      fail(where.empty() ? item.key() : where + "." + item.key(), "unknown key");
  }
}

double get_number(const json &obj, const char *key, const std::string &where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto &v = obj.at(key);
  if (!v.is_number()) fail(where + key, "must be a number");
  return v.get<double>();
}

int get_int(const json &obj, const char *key, const std::string &where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto &v = obj.at(key);
  if (!v.is_number_integer()) fail(where + key, "must be an integer");
  return v.get<int>();
}

bool is_sampled(const json &v) { return v.is_string() && v.get<std::string>() == "sampled"; }

// A per-node number that may be declared "sampled" (the default when absent).
double sampled_number(const json &node, const char *key, const std::string &where, double drawn) {
  if (!node.contains(key) || is_sampled(node.at(key))) return drawn;
  const auto &v = node.at(key);
  if (!v.is_number()) fail(where + key, "must be a number or \"sampled\"");
  return v.get<double>();
}

Position parse_position(const json &v, const std::string &field) {
  if (!v.is_object()) fail(field, "must be an object {x, y, z} or \"sampled\"");
  reject_unknown(v, field, {"x", "y", "z"});
  const std::string prefix = field + ".";
  if (!v.contains("x") || !v.contains("y")) fail(field, "requires x and y");
  return {get_number(v, "x", prefix, 0.0), get_number(v, "y", prefix, 0.0),
          get_number(v, "z", prefix, 0.0)};
}

Node parse_node(const json &v, const std::string &field, NodeSampler &sampler, double slot,
                bool needs_id) {
  reject_unknown(v, field,
                 {"id", "role", "position", "transmit_power", "arrival_rate", "delay_threshold",
                  "buffer_capacity", "fading", "beta"});
  const std::string prefix = field + ".";
  const NodeSample drawn = sampler.next();
  Node node;

  if (needs_id) {
    if (!v.contains("id") || !v.at("id").is_string()) fail(prefix + "id", "must be a string");
    node.id = v.at("id").get<std::string>();
  } else if (v.contains("id")) {
    fail(prefix + "id", "not allowed in an interferer template");
  }

  if (v.contains("role")) {
    if (!needs_id) fail(prefix + "role", "not allowed in an interferer template");
    const auto &r = v.at("role");
    if (!r.is_string()) fail(prefix + "role", "must be \"source\" or \"interferer\"");
    const auto role = r.get<std::string>();
    if (role == "source")
      node.role = NodeRole::Source;
    else if (role == "interferer")
      node.role = NodeRole::Interferer;
    else
      fail(prefix + "role", "must be \"source\" or \"interferer\"");
  }

  if (!v.contains("position") || is_sampled(v.at("position")))
    node.position = drawn.position;
  else
    node.position = parse_position(v.at("position"), prefix + "position");

  node.transmit_power = sampled_number(v, "transmit_power", prefix, drawn.transmit_power);
  node.queue.arrival_rate = sampled_number(v, "arrival_rate", prefix, drawn.arrival_rate);
  node.queue.delay_threshold = sampled_number(v, "delay_threshold", prefix, drawn.delay_threshold);
  node.queue.buffer_capacity = sampled_number(v, "buffer_capacity", prefix, drawn.buffer_capacity);
  node.queue.slot_duration = slot;

  if (v.contains("fading")) {
    const auto &f = v.at("fading");
    if (!f.is_string()) fail(prefix + "fading", "must be \"auto\", \"rayleigh\" or \"rician\"");
    const auto text = f.get<std::string>();
    if (text != "auto") {
      node.fading_override = parse_fading_kind(text);
      if (!node.fading_override) fail(prefix + "fading", "must be \"auto\", \"rayleigh\" or \"rician\"");
    }
  }
  node.beta = get_number(v, "beta", prefix, 0.0);
  return node;
}

} // namespace

Scenario load_scenario(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error &e) {
    fail("document", std::string("malformed JSON: ") + e.what());
  }
  reject_unknown(doc, "",
                 {"schema_version", "environment", "noise", "num_channels", "gamma_th",
                  "slot_duration", "error_mode", "area", "uav_altitude", "destination",
                  "placement_seed", "nodes", "interferers"});

  Scenario s;
  if (!doc.contains("schema_version")) fail("schema_version", "is required");
  s.schema_version = get_int(doc, "schema_version", "", 0);
  if (s.schema_version != kScenarioSchemaVersion)
    fail("schema_version", "must be " + std::to_string(kScenarioSchemaVersion));

  if (doc.contains("environment")) {
    const auto &e = doc.at("environment");
    reject_unknown(e, "environment",
                   {"a1", "b1", "k0", "k_pi2", "alpha0", "alpha_pi2", "omega", "d0",
                    "carrier_frequency"});
    auto &env = s.environment;
    const std::string p = "environment.";
    env.a1 = get_number(e, "a1", p, env.a1);
    env.b1 = get_number(e, "b1", p, env.b1);
    env.k0 = get_number(e, "k0", p, env.k0);
    env.k_pi2 = get_number(e, "k_pi2", p, env.k_pi2);
    env.alpha0 = get_number(e, "alpha0", p, env.alpha0);
    env.alpha_pi2 = get_number(e, "alpha_pi2", p, env.alpha_pi2);
    env.omega = get_number(e, "omega", p, env.omega);
    env.d0 = get_number(e, "d0", p, env.d0);
    env.carrier_frequency = get_number(e, "carrier_frequency", p, env.carrier_frequency);
  }
  if (doc.contains("noise")) {
    const auto &n = doc.at("noise");
    reject_unknown(n, "noise", {"boltzmann", "temperature", "bandwidth"});
    s.noise.boltzmann = get_number(n, "boltzmann", "noise.", s.noise.boltzmann);
    s.noise.temperature = get_number(n, "temperature", "noise.", s.noise.temperature);
    s.noise.bandwidth = get_number(n, "bandwidth", "noise.", s.noise.bandwidth);
  }
  s.num_channels = get_int(doc, "num_channels", "", s.num_channels);
  s.gamma_th = get_number(doc, "gamma_th", "", s.gamma_th);
  s.slot_duration = get_number(doc, "slot_duration", "", s.slot_duration);
  if (doc.contains("error_mode")) {
    const auto &m = doc.at("error_mode");
    const std::string text = m.is_string() ? m.get<std::string>() : "";
    if (text == "conditional")
      s.error_mode = ErrorMode::Conditional;
    else if (text == "raw")
      s.error_mode = ErrorMode::Raw;
    else
      fail("error_mode", "must be \"conditional\" or \"raw\"");
  }
  if (doc.contains("area")) {
    const auto &a = doc.at("area");
    reject_unknown(a, "area", {"width", "height"});
    s.area.width = get_number(a, "width", "area.", s.area.width);
    s.area.height = get_number(a, "height", "area.", s.area.height);
  }
  s.uav_altitude = get_number(doc, "uav_altitude", "", s.uav_altitude);
  if (doc.contains("destination"))
    s.destination = parse_position(doc.at("destination"), "destination");
  else
    s.destination = {s.area.width / 2.0, s.area.height / 2.0, s.uav_altitude};

  if (doc.contains("placement_seed")) {
    const auto &v = doc.at("placement_seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail("placement_seed", "must be a non-negative integer");
    s.placement_seed = v.get<std::uint64_t>();
  }

  NodeSampler sampler(s.placement_seed.value_or(kDefaultPlacementSeed), s.area);
  if (!doc.contains("nodes") || !doc.at("nodes").is_array())
    fail("nodes", "must be an array containing the source node");
  const auto &nodes = doc.at("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i)
    s.nodes.push_back(
        parse_node(nodes[i], "nodes[" + std::to_string(i) + "]", sampler, s.slot_duration, true));

  if (doc.contains("interferers")) {
    const auto &gen = doc.at("interferers");
    reject_unknown(gen, "interferers", {"count", "template"});
    const int count = get_int(gen, "count", "interferers.", 0);
    if (count < 0) fail("interferers.count", "must be >= 0");
    const json tmpl = gen.contains("template") ? gen.at("template") : json::object();
    for (int k = 1; k <= count; ++k) {
      Node node = parse_node(tmpl, "interferers.template", sampler, s.slot_duration, false);
      node.id = "i" + std::to_string(k);
      node.role = NodeRole::Interferer;
      s.nodes.push_back(std::move(node));
    }
  }

  s.validate();
  return s;
}

Scenario load_scenario_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_scenario(buffer.str());
}

std::string dump_scenario(const Scenario &s) {
  json doc;
  doc["schema_version"] = s.schema_version;
  const auto &e = s.environment;
  doc["environment"] = {{"a1", e.a1},         {"b1", e.b1},         {"k0", e.k0},
                        {"k_pi2", e.k_pi2},   {"alpha0", e.alpha0}, {"alpha_pi2", e.alpha_pi2},
                        {"omega", e.omega},   {"d0", e.d0},
                        {"carrier_frequency", e.carrier_frequency}};
  doc["noise"] = {{"boltzmann", s.noise.boltzmann},
                  {"temperature", s.noise.temperature},
                  {"bandwidth", s.noise.bandwidth}};
  doc["num_channels"] = s.num_channels;
  doc["gamma_th"] = s.gamma_th;
  doc["slot_duration"] = s.slot_duration;
  doc["error_mode"] = s.error_mode == ErrorMode::Raw ? "raw" : "conditional";
  doc["area"] = {{"width", s.area.width}, {"height", s.area.height}};
  doc["uav_altitude"] = s.uav_altitude;
  doc["destination"] = {{"x", s.destination.x}, {"y", s.destination.y}, {"z", s.destination.z}};
  if (s.placement_seed) doc["placement_seed"] = *s.placement_seed;
  json nodes = json::array();
  for (const auto &n : s.nodes) {
    json node = {{"id", n.id},
                 {"role", n.role == NodeRole::Source ? "source" : "interferer"},
                 {"position", {{"x", n.position.x}, {"y", n.position.y}, {"z", n.position.z}}},
                 {"transmit_power", n.transmit_power},
                 {"arrival_rate", n.queue.arrival_rate},
                 {"delay_threshold", n.queue.delay_threshold},
                 {"buffer_capacity", n.queue.buffer_capacity},
                 {"fading", n.fading_override ? std::string(to_string(*n.fading_override)) : "auto"},
                 {"beta", n.beta}};
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Results

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw DomainError("ResultTable::add_row: row has " + std::to_string(row.size()) +
                      " cells, expected " + std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column_index(std::string_view column) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == column) return i;
  throw DomainError("ResultTable: no column '" + std::string(column) + "'");
}

double ResultTable::number(std::size_t r, std::string_view column) const {
  const auto &cell = rows.at(r).at(column_index(column));
  if (const auto *d = std::get_if<double>(&cell)) return *d;
  throw DomainError("ResultTable: column '" + std::string(column) + "' is not numeric");
}

namespace {

std::string quote_if_needed(const std::string &text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render(const Cell &cell) {
  if (const auto *d = std::get_if<double>(&cell)) return format_number(*d);
  return quote_if_needed(std::get<std::string>(cell));
}

std::vector<std::string> split_line(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

Cell parse_cell(const std::string &text) {
  if (text.empty()) return text;
  char *end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() + text.size()) return value;
  return text;
}

} // namespace

void write_results(const ResultTable &table, std::ostream &out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << quote_if_needed(table.columns[i]);
  out << '\n';
  for (const auto &row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render(row[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_results: output stream failed");
}

void write_results(const ResultTable &table, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_results(table, out);
}

ResultTable read_results(std::istream &in) {
  ResultTable table;
  std::string line;
  if (!std::getline(in, line)) return table;
  table.columns = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<Cell> row;
    for (const auto &field : split_line(line)) row.push_back(parse_cell(field));
    table.add_row(std::move(row));
  }
  return table;
}

} // namespace uavq
