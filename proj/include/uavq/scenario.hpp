#pragma once

// Scenario description (nodes, environment, channel set) plus the JSON
// document loader and the delimiter-separated results writer.

#include "uavq/channel.hpp"
#include "uavq/interference.hpp"
#include "uavq/queueing.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace uavq {

enum class NodeRole { Source, Interferer };

struct Node {
  std::string id;
  NodeRole role = NodeRole::Interferer;
  Position position;
  double transmit_power = 1.0;
  QueueParams queue;
  std::optional<FadingKind> fading_override;
  double beta = 0.0;
};

struct Area {
  double width = 40.0;
  double height = 40.0;
};

struct Scenario {
  int schema_version = 1;
  EnvironmentParams environment;
  NoiseModel noise;
  int num_channels = 15;
  double gamma_th = 8.0;
  double slot_duration = 2e-3;
  ErrorMode error_mode = ErrorMode::Conditional;
  Area area;
  double uav_altitude = 50.0;
  Position destination{20.0, 20.0, 50.0};
  std::optional<std::uint64_t> placement_seed;
  std::vector<Node> nodes;

  std::size_t source_index() const;
  std::size_t index_of(std::string_view id) const;
  /// Link from node i to the destination.
  LinkChannel link(std::size_t i) const;
  /// Throws ValidationError naming the first violated constraint.
  void validate() const;
  /// Change the slot duration of the scenario and of every node queue.
  void set_slot_duration(double seconds);
};

/// One threshold per node, aligned with Scenario::nodes.
struct PolicyVector {
  std::vector<double> betas;
};

PolicyVector policy_of(const Scenario &scenario);

inline constexpr std::uint64_t kDefaultPlacementSeed = 20240521;
inline constexpr int kScenarioSchemaVersion = 1;

/// Parse and validate a scenario document (JSON). Omitted fields take the
/// published defaults; node quantities declared "sampled" are drawn from their
/// default ranges with the scenario's placement_seed.
Scenario load_scenario(std::string_view document);
Scenario load_scenario_file(const std::filesystem::path &path);

/// Serialise a fully resolved scenario (no sampled fields remain).
std::string dump_scenario(const Scenario &scenario);

/// Draw the sampled per-node quantities the same way the loader does.
struct NodeSample {
  Position position;
  double transmit_power = 0.0;
  double arrival_rate = 0.0;
  double delay_threshold = 0.0;
  double buffer_capacity = 0.0;
};

class NodeSampler {
public:
  NodeSampler(std::uint64_t seed, Area area);
  /// Always consumes the same number of draws, whatever is kept.
  NodeSample next();
  double uniform(double lo, double hi);

private:
  std::uint64_t state_;
  Area area_;
  std::uint64_t next_raw();
};

using Cell = std::variant<double, std::string>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  /// Numeric value of the named column in row r.
  double number(std::size_t r, std::string_view column) const;
  std::size_t column_index(std::string_view column) const;
};

/// Comma-separated, header row first, LF line endings, 12 significant digits.
void write_results(const ResultTable &table, std::ostream &out);
void write_results(const ResultTable &table, const std::filesystem::path &path);
/// Parses what write_results produces; numeric-looking cells become doubles.
ResultTable read_results(std::istream &in);

std::string format_number(double value);

} // namespace uavq
