#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>

#include "core/errors.hpp"
#include "core/serialize.hpp"
#include "support.hpp"

using namespace metastab;
using metastab::testing::small_collection;

namespace {

std::optional<ErrorCode> parse_error_code(const std::string& text, std::string* message = nullptr) {
  try {
    collection_from_text(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  Stream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(rng.normal(), static_cast<int>(rng.below(200)) - 100);
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(std::strtod(format_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr),
            std::numeric_limits<double>::denorm_min());
}

TEST(CollectionText, RoundTripIsBitExact) {
  const TaskCollection c = small_collection(3, 7, 4);
  const std::string text = collection_to_text(c);
  const TaskCollection back = collection_from_text(text);
  ASSERT_EQ(back.m(), 3u);
  ASSERT_EQ(back.n(), 7u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(back.datasets[i] == c.datasets[i]);
  EXPECT_FALSE(back.has_specs());
  EXPECT_EQ(collection_to_text(back), text);
  EXPECT_EQ(collection_hash(back), collection_hash(c));
}

TEST(CollectionText, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "metastab_serialize_test.txt";
  const TaskCollection c = small_collection(2, 4);
  save_collection(c, path.string());
  EXPECT_EQ(collection_hash(load_collection(path.string())), collection_hash(c));
  std::filesystem::remove(path);
  EXPECT_THROW(load_collection(path.string()), Error);
}

TEST(CollectionText, ParseErrorsNameTheLine) {
  std::string message;
  EXPECT_EQ(parse_error_code("", &message), ErrorCode::Parse);
  EXPECT_EQ(parse_error_code("2 1\n"), ErrorCode::Parse);
  EXPECT_EQ(parse_error_code("1 1 1\n0 in 1.0 2.0\n0 out 1.0\n", &message), ErrorCode::Parse);
  EXPECT_NE(message.find("line 3"), std::string::npos) << message;
  EXPECT_EQ(parse_error_code("1 1 1\n0 in 1.0 2.0\n0 sideways 1.0 2.0\n", &message), ErrorCode::Parse);
  EXPECT_NE(message.find("line 3"), std::string::npos) << message;
  EXPECT_EQ(parse_error_code("1 1 1\n5 in 1.0 2.0\n", &message), ErrorCode::Parse);
  EXPECT_NE(message.find("line 2"), std::string::npos) << message;
  EXPECT_EQ(parse_error_code("1 1 1\n0 in abc 2.0\n0 out 1.0 2.0\n", &message), ErrorCode::Parse);
  EXPECT_NE(message.find("line 2"), std::string::npos) << message;
  EXPECT_TRUE(parse_error_code("1 2 1\n0 in 1.0 2.0\n0 out 1.0 2.0\n").has_value());
  EXPECT_FALSE(parse_error_code("1 1 1\n0 in 1.0 2.0\n0 out 1.0 2.0\n").has_value());
}

TEST(Hashing, MatchesGitBlobIds) {
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello world\n"), "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST(Hashing, OutputHashTracksEveryBit) {
  TrainerOutput a;
  a.last_iterate = Vector::Constant(3, 0.1);
  a.averaged_iterate = Vector::Constant(3, 0.2);
  TrainerOutput b = a;
  EXPECT_EQ(output_hash(a), output_hash(b));
  b.last_iterate[1] = std::nextafter(b.last_iterate[1], 1.0);
  EXPECT_NE(output_hash(a), output_hash(b));
}

TEST(Csv, TraceAndLocalRows) {
  TrainerOutput out;
  out.loss_trace = {{0, 0.5, 2.0}, {1, 0.5, 1.5}};
  out.overlap_trace = {{0, 1, 0}, {1, 0, 2}};
  out.overlap_target = PerturbationTarget{};
  out.rounds = 2;
  out.beta_cap = 0.5;
  out.mu = 0.02;
  const std::string csv = trace_csv(out);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,beta_t,fhat,u_t,v_t");
  EXPECT_NE(csv.find("0,0.5,2,1,0"), std::string::npos) << csv;
  const std::string local = local_trace_csv({{3, 1, 2, 0.25, 1.5}});
  EXPECT_EQ(local, "round,user,local_step,beta_t,norm\n3,1,2,0.25,1.5\n");
}

TEST(Csv, SummariesCarryTheInputHash) {
  StabilityReport s;
  s.grid.push_back({2, 10, 0.5, 0.1, 0.01, 3.0});
  s.gamma_hat = 0.5;
  s.fitted_slope = -0.9;
  const std::string st = stability_csv(s, "abc123");
  EXPECT_NE(st.find("fitted_slope=-0.9"), std::string::npos);
  EXPECT_NE(st.find("input_hash=abc123"), std::string::npos);
  ShiftReport r;
  r.tv_pairwise = {{0.0, 0.0}};
  const std::string sh = shift_csv(r, "def");
  EXPECT_NE(sh.find("d_bound=0,"), std::string::npos) << sh;
  EXPECT_NE(sh.find("input_hash=def"), std::string::npos);
}

TEST(ErrorReportCsv, HeaderAndRowAgree) {
  ErrorReport r;
  const auto count = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  EXPECT_EQ(count(error_report_header()), count(error_report_row(r)));
}
