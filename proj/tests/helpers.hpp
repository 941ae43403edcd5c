#pragma once

// Small scenarios built directly in code, shared by several test files.

#include "uavq/scenario.hpp"

#include <string>
#include <utility>
#include <vector>

namespace testing_support {

inline uavq::Node make_node(std::string id, uavq::NodeRole role, uavq::Position pos,
                            double power = 1.0, double lambda = 80.0, double beta = 0.0) {
  uavq::Node n;
  n.id = std::move(id);
  n.role = role;
  n.position = pos;
  n.transmit_power = power;
  n.queue.arrival_rate = lambda;
  n.queue.slot_duration = 2e-3;
  n.queue.delay_threshold = 0.04;
  n.queue.buffer_capacity = 100.0;
  n.beta = beta;
  return n;
}

/// Source alone under the UAV at (20, 20, 50), 30 m horizontal offset.
inline uavq::Scenario lone_source(std::optional<uavq::FadingKind> fading = std::nullopt) {
  uavq::Scenario s;
  auto n = make_node("n", uavq::NodeRole::Source, {20, 50, 0});
  n.fading_override = fading;
  s.nodes.push_back(n);
  return s;
}

/// Two mirror-image nodes around the destination; each is the other's only interferer.
inline uavq::Scenario symmetric_pair(uavq::FadingKind fading = uavq::FadingKind::Rician) {
  uavq::Scenario s;
  s.num_channels = 4;
  s.gamma_th = 4.0;
  auto a = make_node("a", uavq::NodeRole::Source, {5, 20, 0}, 1.0, 100.0, 1.0);
  auto b = make_node("b", uavq::NodeRole::Interferer, {35, 20, 0}, 1.0, 100.0, 1.0);
  a.fading_override = b.fading_override = fading;
  s.nodes = {a, b};
  return s;
}

/// Source plus three Rayleigh interferers at fixed positions.
inline uavq::Scenario three_rayleigh(int channels = 1) {
  uavq::Scenario s;
  s.num_channels = channels;
  s.gamma_th = 1.0;
  auto src = make_node("n", uavq::NodeRole::Source, {20, 20, 0}, 1.0, 80.0, 1.0);
  auto i1 = make_node("i1", uavq::NodeRole::Interferer, {0, 0, 0}, 0.6);
  auto i2 = make_node("i2", uavq::NodeRole::Interferer, {40, 10, 0}, 0.8);
  auto i3 = make_node("i3", uavq::NodeRole::Interferer, {30, 40, 0}, 1.0);
  for (auto *n : {&src, &i1, &i2, &i3}) n->fading_override = uavq::FadingKind::Rayleigh;
  s.nodes = {src, i1, i2, i3};
  return s;
}

} // namespace testing_support
