#include "core/serialize.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "core/errors.hpp"

namespace metastab {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string collection_to_text(const TaskCollection& collection) {
  collection.validate();
  std::string out;
  out += std::to_string(collection.dim()) + " " + std::to_string(collection.n()) + " " +
         std::to_string(collection.m()) + "\n";
  for (std::size_t i = 0; i < collection.m(); ++i) {
    const auto& ds = collection.datasets[i];
    for (const auto* split : {&ds.inner, &ds.outer}) {
      const char* tag = split == &ds.inner ? "in" : "out";
      for (const auto& s : *split) {
        out += std::to_string(i);
        out += ' ';
        out += tag;
        for (Eigen::Index j = 0; j < s.x.size(); ++j) {
          out += ' ';
          out += format_double(s.x[j]);
        }
        out += ' ';
        out += format_double(s.y);
        out += '\n';
      }
    }
  }
  return out;
}

namespace {

double parse_double(const std::string& token, std::size_t line) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": invalid number '" + token + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& token, std::size_t line, const char* field) {
  std::size_t v = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::Parse, "line " + std::to_string(line) + ": invalid " + field + " '" + token + "'");
  }
  return v;
}

}  // namespace

TaskCollection collection_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  require(static_cast<bool>(std::getline(in, header)), ErrorCode::Parse, "line 1: missing header `d n m`");
  std::istringstream hs(header);
  std::string td, tn, tm, extra;
  if (!(hs >> td >> tn >> tm) || (hs >> extra)) fail(ErrorCode::Parse, "line 1: header must be `d n m`");
  const std::size_t d = parse_size(td, 1, "d");
  const std::size_t n = parse_size(tn, 1, "n");
  const std::size_t m = parse_size(tm, 1, "m");
  require(d >= 1 && n >= 1 && m >= 1, ErrorCode::Parse, "line 1: d, n and m must be positive");

  TaskCollection out;
  out.datasets.resize(m);
  std::string line;
  std::size_t number = 1;
  std::vector<std::string> tokens;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::istringstream ls(line);
    tokens.clear();
    for (std::string t; ls >> t;) tokens.push_back(t);
    if (tokens.size() != d + 3) {
      fail(ErrorCode::Parse, "line " + std::to_string(number) + ": expected " + std::to_string(d + 3) + " fields, got " +
                                 std::to_string(tokens.size()));
    }
    const std::size_t task = parse_size(tokens[0], number, "task index");
    require(task < m, ErrorCode::Parse, "line " + std::to_string(number) + ": task index out of range");
    Sample s;
    s.x.resize(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) s.x[static_cast<Eigen::Index>(j)] = parse_double(tokens[2 + j], number);
    s.y = parse_double(tokens[d + 2], number);
    if (tokens[1] == "in") {
      out.datasets[task].inner.push_back(std::move(s));
    } else if (tokens[1] == "out") {
      out.datasets[task].outer.push_back(std::move(s));
    } else {
      fail(ErrorCode::Parse, "line " + std::to_string(number) + ": split must be `in` or `out`");
    }
  }
  for (const auto& ds : out.datasets) {
    require(ds.inner.size() == n && ds.outer.size() == n, ErrorCode::Parse,
            "every task must list exactly n samples per split");
  }
  out.validate();
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open '" + path + "' for writing");
  f << content;
  require(static_cast<bool>(f), ErrorCode::Io, "failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void save_collection(const TaskCollection& collection, const std::string& path) {
  write_text(path, collection_to_text(collection));
}

TaskCollection load_collection(const std::string& path) { return collection_from_text(read_text(path)); }

std::string git_blob_hash(const std::string& content) {
  const std::string framed = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  require(EVP_Digest(framed.data(), framed.size(), digest, &length, EVP_sha1(), nullptr) == 1, ErrorCode::Io,
          "SHA-1 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string collection_hash(const TaskCollection& collection) {
  return git_blob_hash(collection_to_text(collection));
}

std::string output_to_text(const TrainerOutput& output) {
  std::string out;
  for (const auto* v : {&output.last_iterate, &output.averaged_iterate}) {
    for (Eigen::Index j = 0; j < v->size(); ++j) {
      if (j) out += ' ';
      out += format_double((*v)[j]);
    }
    out += '\n';
  }
  return out;
}

std::string output_hash(const TrainerOutput& output) { return git_blob_hash(output_to_text(output)); }

std::string trace_csv(const TrainerOutput& output) {
  struct Row {
    std::string beta, fhat, u, v;
  };
  std::map<std::size_t, Row> rows;
  for (const auto& p : output.loss_trace) {
    rows[p.t].beta = format_double(p.beta);
    rows[p.t].fhat = format_double(p.fhat);
  }
  for (const auto& p : output.overlap_trace) {
    Row& r = rows[p.t];
    r.beta = format_double(stepsize(p.t, output.beta_cap, output.mu));
    r.u = std::to_string(p.u);
    r.v = std::to_string(p.v);
  }
  std::string out = "t,beta_t,fhat,u_t,v_t\n";
  for (const auto& [t, r] : rows) out += std::to_string(t) + "," + r.beta + "," + r.fhat + "," + r.u + "," + r.v + "\n";
  return out;
}

std::string local_trace_csv(const std::vector<LocalStepRecord>& records) {
  std::string out = "round,user,local_step,beta_t,norm\n";
  for (const auto& r : records) {
    out += std::to_string(r.round) + "," + std::to_string(r.user) + "," + std::to_string(r.local_step) + "," +
           format_double(r.beta) + "," + format_double(r.norm) + "\n";
  }
  return out;
}

std::string coupled_trace_csv(const CoupledOutput& output) {
  std::string out = "t,beta_t,d,u_t,v_t\n";
  for (const auto& r : output.trace) {
    out += std::to_string(r.t) + "," + format_double(r.beta) + "," + format_double(r.d) + "," + std::to_string(r.u) +
           "," + std::to_string(r.v) + "\n";
  }
  return out;
}

std::string error_report_header() { return "test,gen,train,emp_min,pop_min,se_test,se_gen"; }

std::string error_report_row(const ErrorReport& r) {
  return format_double(r.test_error) + "," + format_double(r.generalization_error) + "," +
         format_double(r.training_error) + "," + format_double(r.empirical_min_value) + "," +
         format_double(r.population_min_value) + "," + format_double(r.se_test) + "," + format_double(r.se_gen);
}

std::string stability_csv(const StabilityReport& report, const std::string& input_hash) {
  std::string out = "m,n,gamma_hat,se,mean_divergence,gamma_theory\n";
  for (const auto& p : report.grid) {
    out += std::to_string(p.m) + "," + std::to_string(p.n) + "," + format_double(p.gamma_hat) + "," +
           format_double(p.se) + "," + format_double(p.mean_divergence) + "," + format_double(p.gamma_theory) + "\n";
  }
  out += "# summary,gamma_hat=" + format_double(report.gamma_hat) + ",gamma_theory=" +
         format_double(report.gamma_theory) + ",fitted_slope=" + format_double(report.fitted_slope) +
         ",input_hash=" + input_hash + "\n";
  return out;
}

std::string shift_csv(const ShiftReport& report, const std::string& input_hash) {
  std::string out = "seen_index,tv,se\n";
  for (std::size_t i = 0; i < report.tv_pairwise.size(); ++i) {
    out += std::to_string(i) + "," + format_double(report.tv_pairwise[i].mean) + "," +
           format_double(report.tv_pairwise[i].se) + "\n";
  }
  out += "# summary,tv_to_mixture=" + format_double(report.tv_to_mixture.mean) +
         ",tv_to_mixture_se=" + format_double(report.tv_to_mixture.se) + ",d_bound=" + format_double(report.d_bound);
  if (report.weighted_d_bound) out += ",weighted_d_bound=" + format_double(*report.weighted_d_bound);
  out += ",largek_gamma=" + format_double(report.largek_gamma);
  if (report.mixture_bound) out += ",mixture_bound=" + format_double(*report.mixture_bound);
  out += ",input_hash=" + input_hash + "\n";
  out += "# note," + report.constants_note + "\n";
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "figure,m,n,error_mean,error_se\n";
  for (const auto& c : result.cells) {
    out += std::string(figure_name(c.figure)) + "," + std::to_string(c.m) + "," + std::to_string(c.n) + "," +
           format_double(c.mean) + "," + format_double(c.se) + "\n";
  }
  return out;
}

std::string trend_csv(const SweepResult& result) {
  std::string out = "figure,direction,slope,se\n";
  for (const auto& t : result.trends) {
    out += std::string(figure_name(t.figure)) + "," + t.direction + "," + format_double(t.slope) + "," +
           format_double(t.se) + "\n";
  }
  return out;
}

}  // namespace metastab
