#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "optcon/errors.hpp"
#include "optcon/switching.hpp"

namespace optcon {
namespace {

WeightedDigraph arcs3(std::vector<Arc> arcs) { return WeightedDigraph(3, std::move(arcs)); }

SwitchingSignal alternating() {
  return SwitchingSignal::periodic(
      {{0.0, arcs3({{0, 1, 1.0}, {1, 2, 1.0}})}, {0.5, arcs3({{2, 0, 1.0}})}}, 0.5, 1.0);
}

// Reachability by repeated relaxation on a dense boolean matrix.
bool strongly_connected_oracle(const std::vector<std::vector<bool>>& adj) {
  const std::size_t n = adj.size();
  auto reach = adj;
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  for (const auto& row : reach)
    for (bool r : row)
      if (!r) return false;
  return true;
}

TEST(Switching, GraphAtIsRightContinuousAndPeriodic) {
  const auto sig = alternating();
  EXPECT_TRUE(sig.graph_at(0.0).has_arc(0, 1));
  EXPECT_TRUE(sig.graph_at(0.5).has_arc(2, 0));
  EXPECT_TRUE(sig.graph_at(0.4999).has_arc(1, 2));
  EXPECT_TRUE(sig.graph_at(7.25).has_arc(0, 1));
  EXPECT_TRUE(sig.graph_at(7.75).has_arc(2, 0));
  EXPECT_THROW(sig.graph_at(-0.1), RangeError);
}

TEST(Switching, DwellViolationsRejected) {
  EXPECT_THROW(SwitchingSignal::finite({{0.0, arcs3({{0, 1, 1.0}})}, {0.2, arcs3({{1, 2, 1.0}})}},
                                       0.5, 2.0),
               PreconditionError);
  // Wrap-around gap 1.0 - 0.8 = 0.2 is below the dwell.
  EXPECT_THROW(SwitchingSignal::periodic(
                   {{0.0, arcs3({{0, 1, 1.0}})}, {0.8, arcs3({{1, 2, 1.0}})}}, 0.5, 1.0),
               PreconditionError);
  EXPECT_THROW(SwitchingSignal::finite({{0.0, arcs3({{0, 1, 1.0}})}, {1.0, WeightedDigraph(4)}},
                                       0.5, 2.0),
               PreconditionError);
}

TEST(Switching, ActivationsClipToWindow) {
  const auto acts = alternating().activations(0.25, 1.75);
  ASSERT_EQ(acts.size(), 4u);
  EXPECT_DOUBLE_EQ(acts.front().start, 0.25);
  EXPECT_DOUBLE_EQ(acts.front().end, 0.5);
  EXPECT_EQ(acts[1].index, 1u);
  EXPECT_DOUBLE_EQ(acts.back().end, 1.75);
}

TEST(Switching, JointGraphAndUjsc) {
  const auto sig = alternating();
  const auto joint = joint_graph(sig, 0.0, 1.0);
  EXPECT_TRUE(joint.has_arc(0, 1) && joint.has_arc(1, 2) && joint.has_arc(2, 0));
  EXPECT_EQ(joint_graph(sig, 0.0, 0.5).arcs().size(), 2u);
  EXPECT_TRUE(check_ujsc(sig, 1.0));
  EXPECT_FALSE(check_ujsc(sig, 0.5));
  EXPECT_TRUE(check_ujsc(sig, 0.51));
  EXPECT_FALSE(check_ujqsc(sig, 0.5));

  const auto chain = SwitchingSignal::periodic(
      {{0.0, arcs3({{0, 1, 1.0}})}, {0.5, arcs3({{1, 2, 1.0}})}}, 0.5, 1.0);
  EXPECT_TRUE(check_ujqsc(chain, 1.0));
  EXPECT_FALSE(check_ujsc(chain, 5.0));
}

TEST(Switching, RepeatedArcKeepsLatestWeight) {
  const auto sig = SwitchingSignal::finite(
      {{0.0, arcs3({{0, 1, 1.0}})}, {1.0, arcs3({{0, 1, 3.0}})}}, 0.5, 2.0);
  EXPECT_DOUBLE_EQ(*joint_graph(sig, 0.0, 2.0).weight(0, 1), 3.0);
}

SwitchingSignal random_periodic(std::mt19937_64& rng) {
  // Switch instants on a 0.25 grid, period 2, random arcs per interval.
  std::bernoulli_distribution keep(0.3);
  std::vector<SwitchInterval> ivs;
  for (int k = 0; k < 8; k += 1 + static_cast<int>(rng() % 2)) {
    std::vector<Arc> arcs;
    for (NodeId a = 0; a < 4; ++a)
      for (NodeId b = 0; b < 4; ++b)
        if (a != b && keep(rng)) arcs.push_back({a, b, 1.0});
    ivs.push_back({k / 4.0, WeightedDigraph(4, arcs)});
  }
  return SwitchingSignal::periodic(std::move(ivs), 0.25, 2.0);
}

bool ujsc_brute_force(const SwitchingSignal& sig, double window) {
  // Starts on a 1/20 grid over two periods; graphs sampled on the same grid.
  const int span = static_cast<int>(std::lround(window * 20.0));
  for (int s = 0; s < 80; ++s) {
    std::vector<std::vector<bool>> adj(4, std::vector<bool>(4, false));
    for (int k = s; k < s + span; ++k) {
      for (const Arc& a : sig.graph_at(k / 20.0).arcs()) adj[a.from][a.to] = true;
    }
    if (!strongly_connected_oracle(adj)) return false;
  }
  return true;
}

TEST(SwitchingProperty, UjscMatchesBruteForceAndIsMonotoneInWindow) {
  std::mt19937_64 rng(7);
  int positives = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const auto sig = random_periodic(rng);
    bool previous = false;
    for (double window : {0.5, 1.0, 1.5, 2.0, 3.0}) {
      const bool fast = check_ujsc(sig, window);
      EXPECT_EQ(fast, ujsc_brute_force(sig, window)) << "trial " << trial << " T=" << window;
      if (previous) {
        EXPECT_TRUE(fast) << "UJSC lost when the window grew";
      }
      previous = fast;
      positives += fast;
    }
  }
  EXPECT_GT(positives, 0);
}

TEST(SwitchingProperty, JointGraphGrowsWithInterval) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto sig = random_periodic(rng);
    const double t1 = (rng() % 16) / 8.0;
    const auto small = joint_graph(sig, t1, t1 + 0.75);
    const auto large = joint_graph(sig, t1, t1 + 1.5);
    for (const Arc& a : small.arcs()) EXPECT_TRUE(large.has_arc(a.from, a.to));
  }
}

}  // namespace
}  // namespace optcon
