#include <gtest/gtest.h>

#include <cmath>

#include "config.hpp"
#include "plot.hpp"

using metastab::cli::Config;
using metastab::cli::ConfigError;
using metastab::cli::Field;
using metastab::cli::sweep_charts;

namespace {

Config sample_config() {
  return Config({{"m", "tasks", "", false},
                 {"t-max", "rounds", "1000", false},
                 {"radius", "ball radius", "10", false},
                 {"ms", "grid", "1,5", false},
                 {"verbose", "", "false", true}});
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, FileValuesDefaultsAndOverrides) {
  Config c = sample_config();
  c.load_text("# comment\nm = 4\n\nt_max = 50  # trailing\n", "run.cfg");
  EXPECT_EQ(c.size("m"), 4u);
  EXPECT_EQ(c.size("t_max"), 50u);
  c.set_override("t-max", "70");
  EXPECT_EQ(c.size("t_max"), 70u);
  EXPECT_DOUBLE_EQ(c.real("radius"), 10.0);
  EXPECT_EQ(c.sizes("ms"), (std::vector<std::size_t>{1, 5}));
  EXPECT_FALSE(c.boolean("verbose"));
  c.set_override("radius", "inf");
  EXPECT_TRUE(std::isinf(c.real("radius")));
  EXPECT_EQ(c.echo().at("t_max"), "70");
  EXPECT_NE(c.echo_text().find("m = 4\n"), std::string::npos);
}

TEST(Config, ErrorsNameTheProblem) {
  Config c = sample_config();
  EXPECT_NE(error_of([&] { c.text("m"); }).find("missing required field 'm'"), std::string::npos);
  EXPECT_NE(error_of([&] { c.load_text("m = 1\nbogus = 2\n", "x.cfg"); }).find("x.cfg:2: unknown field 'bogus'"),
            std::string::npos);
  EXPECT_NE(error_of([&] { c.load_text("just words\n", "y.cfg"); }).find("y.cfg:1:"), std::string::npos);
  c.set_override("m", "-3");
  EXPECT_NE(error_of([&] { c.size("m"); }), "");
  c.set_override("m", "2.5");
  EXPECT_NE(error_of([&] { c.size("m"); }), "");
  c.set_override("radius", "nan");
  EXPECT_NE(error_of([&] { c.real("radius"); }), "");
  c.set_override("ms", "1,x");
  EXPECT_NE(error_of([&] { c.sizes("ms"); }), "");
  EXPECT_NE(error_of([&] { c.set_override("nope", "1"); }), "");
}

TEST(Plot, ChartsArePureAndNamedPerFigure) {
  const std::string csv =
      "figure,m,n,error_mean,error_se\n"
      "recurring,1,10,0.5,0.05\nrecurring,1,20,0.3,0.04\n"
      "recurring,5,10,0.2,0.02\nrecurring,5,20,0.1,0.01\n"
      "new_similar,1,10,0.6,0.05\nnew_similar,1,20,0.4,0.04\n"
      "new_similar,5,10,0.25,0.02\nnew_similar,5,20,0.15,0.01\n";
  const auto a = sweep_charts(csv), b = sweep_charts(csv);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 4u);
  for (const char* name : {"recurring_vs_n.svg", "recurring_vs_m.svg", "new_similar_vs_n.svg", "new_similar_vs_m.svg"}) {
    ASSERT_TRUE(a.count(name)) << name;
    EXPECT_EQ(a.at(name).rfind("<svg", 0), 0u);
    EXPECT_NE(a.at(name).find("</svg>"), std::string::npos);
  }
  EXPECT_THROW(sweep_charts("wrong,header\n1,2\n"), std::exception);
}
