#include <gtest/gtest.h>

#include <sstream>

#include "balarm/alarm.hpp"
#include "balarm/error.hpp"
#include "balarm/ingest.hpp"

using namespace balarm;

namespace {

ContactLog parse(const std::string& text) {
  std::istringstream in(text);
  return parse_contacts(in);
}

}  // namespace

TEST(ParseContacts, SingleLineWithStatuses) {
  const auto log = parse("120 7 12 NUR PAT\n");
  ASSERT_EQ(log.events.size(), 1u);
  EXPECT_EQ(log.events[0].time, 120);
  EXPECT_EQ(log.nodes.ids()[static_cast<std::size_t>(log.events[0].node_a)], "7");
  EXPECT_EQ(log.nodes.ids()[static_cast<std::size_t>(log.events[0].node_b)], "12");
  EXPECT_EQ(log.nodes.status(log.events[0].node_a), "NUR");
  EXPECT_EQ(log.nodes.status(log.events[0].node_b), "PAT");
  const auto counts = log.nodes.status_counts();
  EXPECT_EQ(counts.at("NUR"), 1);
  EXPECT_EQ(counts.at("PAT"), 1);
}

TEST(ParseContacts, EmptyInputAndComments) {
  const auto empty = parse("");
  EXPECT_TRUE(empty.events.empty());
  EXPECT_EQ(empty.nodes.size(), 0);
  const auto c = parse("# header\n\n40 1 2\n20 2 3\n");
  ASSERT_EQ(c.events.size(), 2u);
  EXPECT_EQ(c.events[0].time, 20);
  EXPECT_EQ(c.nodes.size(), 3);
}

TEST(ParseContacts, Errors) {
  EXPECT_THROW(parse("120 7\n"), ValidationError);
  EXPECT_THROW(parse("abc 7 8\n"), ValidationError);
  EXPECT_THROW(parse("120 7 7\n"), ValidationError);
  EXPECT_THROW(parse("120 7 8 NUR\n"), ValidationError);
  EXPECT_THROW(parse("120 7 8 NUR PAT\n140 7 9 MED PAT\n"), ValidationError);
  try {
    parse("1 2 3\n2 4\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Aggregate, SingleEvent) {
  const auto log = parse("130 a b\n");
  AggregateOptions opt;
  opt.window_seconds = 300;
  opt.t_start = 0;
  opt.t_end = 1200;
  const auto panel = aggregate(log, opt);
  ASSERT_EQ(panel.n_edges(), 1u);
  ASSERT_EQ(panel.length(), 4u);
  EXPECT_EQ(panel.value(0, 0), 1);
  for (std::size_t l = 1; l < 4; ++l) EXPECT_EQ(panel.value(0, l), 0);
}

TEST(Aggregate, WindowBoundaries) {
  const auto log = parse("0 a b\n300 a c\n301 b c\n");
  AggregateOptions opt;
  opt.window_seconds = 300;
  opt.t_start = 0;
  AggregateReport report;
  const auto panel = aggregate(log, opt, &report);
  EXPECT_EQ(panel.length(), 2u);
  EXPECT_EQ(report.n_events_used, 3u);
  EXPECT_EQ(panel.value(0, 0), 1);  // t = t_start goes to snapshot 1
  EXPECT_EQ(panel.value(1, 0), 1);  // (0, 300]
  EXPECT_EQ(panel.value(2, 1), 1);  // (300, 600]
  opt.t_end = 300;
  const auto cut = aggregate(log, opt, &report);
  EXPECT_EQ(cut.length(), 1u);
  EXPECT_EQ(report.n_events_dropped, 1u);
}

TEST(Aggregate, LexicographicEdgeMap) {
  const auto panel = aggregate(parse("20 x y\n40 y z\n"), {});
  ASSERT_EQ(panel.n_edges(), 3u);
  EXPECT_EQ(panel.edge_pair(0), (NodePair{0, 1}));
  EXPECT_EQ(panel.edge_pair(1), (NodePair{0, 2}));
  EXPECT_EQ(panel.edge_pair(2), (NodePair{1, 2}));
  EXPECT_EQ(panel.node_labels(), (std::vector<std::string>{"x", "y", "z"}));
}

TEST(Aggregate, PhaseOffset) {
  AggregateOptions opt;
  opt.window_seconds = 300;
  opt.t_start = 3600;
  opt.phase_origin = 0;
  const auto panel = aggregate(parse("3700 a b\n"), opt);
  EXPECT_EQ(panel.metadata().phase_offset, 12);
  EXPECT_EQ(panel.metadata().t_start, 3600);
  EXPECT_EQ(panel.metadata().window_seconds, 300);
}

TEST(Aggregate, Idempotent) {
  const ModelSpec spec{2, 1, 0, 288};
  const BalarmModel m{spec, {0.5, 0.5}, {{{}, {2.89}, -1.0}, {{}, {4.48}, -4.0}}};
  // Six nodes give 15 edges, a complete edge map.
  const auto s = simulate_balarm(m, 15, 50, 2);
  const auto base = s.panel;
  const auto log = events_from_panel(base);
  AggregateOptions opt;
  opt.window_seconds = 1;
  opt.t_start = base.timestamps()[0] - 1;
  opt.t_end = opt.t_start.value() + 50;
  const auto again = aggregate(log, opt);
  ASSERT_EQ(again.n_edges(), 15u);
  ASSERT_EQ(again.length(), 50u);
  std::vector<std::uint8_t> a(base.values().begin(), base.values().end());
  std::vector<std::uint8_t> b(again.values().begin(), again.values().end());
  EXPECT_EQ(a, b);
}

TEST(ParseClock, Formats) {
  EXPECT_EQ(parse_clock("00:00"), 0);
  EXPECT_EQ(parse_clock("13:05"), 13 * 3600 + 5 * 60);
  EXPECT_EQ(parse_clock("01:02:03"), 3723);
  EXPECT_THROW(parse_clock("25:00"), ValidationError);
  EXPECT_THROW(parse_clock("1:2:3:4"), ValidationError);
  EXPECT_THROW(parse_clock("noon"), ValidationError);
}
