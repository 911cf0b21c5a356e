#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "metastab/metastab.h"

namespace {

struct Collection {
  ms_collection* ptr = nullptr;
  ~Collection() { ms_collection_free(ptr); }
};

struct Output {
  ms_output* ptr = nullptr;
  ~Output() { ms_output_free(ptr); }
};

struct Report {
  ms_report* ptr = nullptr;
  ~Report() { ms_report_free(ptr); }
};

std::string take(char* s) {
  std::string out(s);
  ms_string_free(s);
  return out;
}

std::string hash_of(const ms_output* out) {
  char buffer[41];
  EXPECT_EQ(ms_output_hash(out, buffer, sizeof buffer), MS_OK);
  return buffer;
}

Collection generated(size_t m, size_t n, uint64_t seed = 3) {
  ms_family_params family;
  ms_family_params_default(&family);
  family.dim = 3;
  family.seed = seed;
  Collection c;
  EXPECT_EQ(ms_collection_generate(&family, m, n, &c.ptr), MS_OK);
  return c;
}

ms_train_params small_train() {
  ms_train_params p;
  ms_train_params_default(&p);
  p.k = 3;
  p.b = 2;
  p.t_max = 200;
  p.alpha = 0.01;
  p.beta_cap = 0.05;
  p.radius = INFINITY;
  return p;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(ms_version(), "");
  EXPECT_STREQ(ms_status_name(MS_OK), "ok");
  EXPECT_STRNE(ms_status_name(MS_ERR_PREMISE), ms_status_name(MS_ERR_PARSE));
}

TEST(CApi, ContentHashMatchesGit) {
  char buffer[41];
  EXPECT_EQ(ms_content_hash("", 0, buffer, sizeof buffer), MS_OK);
  EXPECT_STREQ(buffer, "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(ms_content_hash("", 0, buffer, 10), MS_ERR_INVALID_SIZE);
}

TEST(CApi, GenerationErrorsSetTheLastError) {
  ms_family_params family;
  ms_family_params_default(&family);
  family.dim = 0;
  ms_collection* c = nullptr;
  EXPECT_EQ(ms_collection_generate(&family, 2, 5, &c), MS_ERR_INVALID_DIMENSION);
  EXPECT_EQ(c, nullptr);
  EXPECT_STRNE(ms_last_error(), "");
  EXPECT_EQ(ms_collection_generate(nullptr, 2, 5, &c), MS_ERR_INVALID_ARGUMENT);
  family.dim = 3;
  EXPECT_EQ(ms_collection_generate(&family, 2, 5, &c), MS_OK);
  EXPECT_STREQ(ms_last_error(), "");
  ms_collection_free(c);
}

TEST(CApi, SaveLoadKeepsTheHashButDropsLaws) {
  const Collection c = generated(2, 6);
  const auto path = (std::filesystem::temp_directory_path() / "metastab_capi_test.txt").string();
  ASSERT_EQ(ms_collection_save(c.ptr, path.c_str()), MS_OK);
  Collection back;
  ASSERT_EQ(ms_collection_load(path.c_str(), &back.ptr), MS_OK);
  char a[41], b[41];
  ms_collection_hash(c.ptr, a, sizeof a);
  ms_collection_hash(back.ptr, b, sizeof b);
  EXPECT_STREQ(a, b);
  size_t d = 0, n = 0, m = 0;
  ms_collection_shape(back.ptr, &d, &n, &m);
  EXPECT_EQ(d, 3u);
  EXPECT_EQ(n, 6u);
  EXPECT_EQ(m, 2u);
  EXPECT_TRUE(ms_collection_has_laws(c.ptr));
  EXPECT_FALSE(ms_collection_has_laws(back.ptr));
  std::filesystem::remove(path);
  ms_collection* missing = nullptr;
  EXPECT_EQ(ms_collection_load(path.c_str(), &missing), MS_ERR_IO);
}

TEST(CApi, FederatedWithOneLocalStepMatchesTraining) {
  const Collection c = generated(4, 10);
  ms_train_params p = small_train();
  p.r = 2;
  p.tau = 1;
  Output plain, fed;
  ASSERT_EQ(ms_train(c.ptr, &p, &plain.ptr), MS_OK);
  ASSERT_EQ(ms_fed_train(c.ptr, &p, &fed.ptr), MS_OK);
  EXPECT_EQ(hash_of(plain.ptr), hash_of(fed.ptr));
  EXPECT_EQ(take([&] {
              char* s = nullptr;
              ms_output_text(plain.ptr, &s);
              return s;
            }()),
            take([&] {
              char* s = nullptr;
              ms_output_text(fed.ptr, &s);
              return s;
            }()));
}

TEST(CApi, IteratesAndTraces) {
  const Collection c = generated(2, 8);
  ms_train_params p = small_train();
  p.record_loss = 1;
  p.radius = 0.5;
  Output out;
  ASSERT_EQ(ms_train(c.ptr, &p, &out.ptr), MS_OK);
  ASSERT_EQ(ms_output_dim(out.ptr), 3u);
  std::vector<double> last(3), avg(3);
  ASSERT_EQ(ms_output_iterates(out.ptr, last.data(), avg.data(), 3), MS_OK);
  EXPECT_LE(std::hypot(last[0], last[1], last[2]), 0.5 + 1e-12);
  EXPECT_EQ(ms_output_iterates(out.ptr, last.data(), nullptr, 2), MS_ERR_DIMENSION_MISMATCH);
  char* csv = nullptr;
  ASSERT_EQ(ms_output_trace_csv(out.ptr, &csv), MS_OK);
  EXPECT_EQ(take(csv).rfind("t,beta_t,fhat", 0), 0u);
  EXPECT_EQ(ms_output_local_trace_csv(out.ptr, &csv), MS_ERR_NOT_RECORDED);
}

TEST(CApi, ErrorReportAndPersonalization) {
  const Collection c = generated(2, 10);
  ms_train_params p = small_train();
  p.radius = 10.0;
  Output out;
  ASSERT_EQ(ms_fed_train(c.ptr, &p, &out.ptr), MS_OK);
  char* row = nullptr;
  ASSERT_EQ(ms_output_error_report(out.ptr, c.ptr, &p, 2000, &row), MS_OK);
  EXPECT_EQ(std::count(row, row + std::string(row).size(), ','), 6);
  ms_string_free(row);
  char* csv = nullptr;
  ASSERT_EQ(ms_output_personalization(out.ptr, c.ptr, &p, 1000, &csv), MS_OK);
  EXPECT_NE(take(csv).find("\nmean,"), std::string::npos);
}

TEST(CApi, StabilityPremiseAndReport) {
  ms_stability_params p;
  ms_stability_params_default(&p);
  p.family.dim = 3;
  const size_t ms[] = {2, 4}, ns[] = {10, 20};
  p.grid_m = ms;
  p.grid_n = ns;
  p.grid_len = 2;
  p.trials = 3;
  p.probes = 16;
  p.train.k = 3;
  p.train.t_max = 100;
  p.train.alpha = 0.01;
  p.train.beta_cap = 100.0;
  p.constant_probes = 500;
  Report r;
  EXPECT_EQ(ms_stability_run(&p, &r.ptr), MS_ERR_PREMISE);
  p.train.beta_cap = 0.0;
  p.input_hash = "cafe";
  ASSERT_EQ(ms_stability_run(&p, &r.ptr), MS_OK);
  double slope = 0.0, beta = 0.0;
  EXPECT_EQ(ms_report_value(r.ptr, "fitted_slope", &slope), MS_OK);
  EXPECT_TRUE(std::isfinite(slope));
  EXPECT_EQ(ms_report_value(r.ptr, "beta_cap", &beta), MS_OK);
  ms_constants k;
  ASSERT_EQ(ms_report_constants(r.ptr, &k), MS_OK);
  EXPECT_NEAR(beta, 1.0 / ms_meta_smoothness(&k, 0.01), 1e-15);
  char* csv = nullptr;
  ASSERT_EQ(ms_report_csv(r.ptr, "main", &csv), MS_OK);
  EXPECT_NE(take(csv).find("input_hash=cafe"), std::string::npos);
  EXPECT_EQ(ms_report_csv(r.ptr, "nope", &csv), MS_ERR_NOT_RECORDED);
  double missing = 0.0;
  EXPECT_EQ(ms_report_value(r.ptr, "nope", &missing), MS_ERR_NOT_RECORDED);
}

TEST(CApi, ShiftCloneHasZeroBound) {
  ms_shift_params p;
  ms_shift_params_default(&p);
  p.family.dim = 3;
  p.m = 3;
  p.n = 10;
  p.unseen = MS_UNSEEN_CLONE;
  p.tv_samples = 2000;
  p.constant_probes = 500;
  Report r;
  ASSERT_EQ(ms_shift_run(&p, &r.ptr), MS_OK);
  double d = 1.0;
  ASSERT_EQ(ms_report_value(r.ptr, "d_bound", &d), MS_OK);
  EXPECT_EQ(d, 0.0);
  p.unseen = MS_UNSEEN_DISSIMILAR;
  Report far;
  ASSERT_EQ(ms_shift_run(&p, &far.ptr), MS_OK);
  ASSERT_EQ(ms_report_value(far.ptr, "d_bound", &d), MS_OK);
  EXPECT_GT(d, 0.0);
}

TEST(CApi, NullHandlesAreRejected) {
  ms_train_params p = small_train();
  ms_output* out = nullptr;
  EXPECT_EQ(ms_train(nullptr, &p, &out), MS_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(ms_output_dim(nullptr), 0u);
  ms_collection_free(nullptr);
  ms_output_free(nullptr);
  ms_report_free(nullptr);
  ms_string_free(nullptr);
}
