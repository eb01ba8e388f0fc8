#include "linesfm/emit.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "linesfm/errors.hpp"

namespace linesfm {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

const char* const kXyz[] = {"x", "y", "z"};

void add3(std::vector<std::string>& cols, const std::string& prefix) {
  for (const char* c : kXyz) cols.push_back(prefix + "_" + c);
}

std::string line_prefix(std::size_t i) { return "line" + std::to_string(i) + "_"; }

// Null for non-finite values so the JSON stays valid.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (i) out_ << ',';
      out_ << cols[i];
    }
    out_ << '\n';
  }

  CsvWriter& operator<<(double v) {
    if (!first_) out_ << ',';
    out_ << format_double(v);
    first_ = false;
    return *this;
  }

  template <typename Derived>
  CsvWriter& operator<<(const Eigen::MatrixBase<Derived>& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) *this << v[i];
    return *this;
  }

  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  std::ostream& out_;
  bool first_ = true;
};

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  body(out);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Io, "cannot create directory '" + dir.string() + "'");
  }
}

std::size_t line_count(const RunRecord& record) { return record.axes.size(); }

void write_plot(const RunRecord& record, std::ostream& os, const std::vector<std::string>& cols,
                const std::function<void(CsvWriter&, const Sample&)>& row) {
  CsvWriter w(os);
  w.header(cols);
  for (const auto& s : record.samples) {
    w << s.t;
    row(w, s);
    w.end_row();
  }
}

void write_plots(const RunRecord& record, const std::filesystem::path& dir) {
  const std::size_t n = line_count(record);
  make_dir(dir);

  std::vector<std::string> state{"t"}, error{"t"}, velocity{"t"}, eigen{"t"};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string p = line_prefix(i);
    add3(state, p + "h");
    add3(state, p + "hhat");
    state.insert(state.end(), {p + "chi_a", p + "chi_b", p + "chihat_a", p + "chihat_b"});
    add3(error, p + "err_h");
    add3(error, p + "err_chi");
    error.push_back(p + "plucker_error");
    eigen.insert(eigen.end(), {p + "sigma1_sq", p + "sigma2_sq"});
  }
  add3(velocity, "nu");
  add3(velocity, "om");
  eigen.insert(eigen.end(), {"aggregate_sigma1_sq", "aggregate_sigma2_sq"});

  write_file(dir / "state.csv", [&](std::ostream& os) {
    write_plot(record, os, state, [](CsvWriter& w, const Sample& s) {
      for (const auto& l : s.lines) w << l.h << l.h_hat << l.chi << l.chi_hat;
    });
  });
  write_file(dir / "error.csv", [&](std::ostream& os) {
    write_plot(record, os, error, [](CsvWriter& w, const Sample& s) {
      for (const auto& l : s.lines) w << l.err_h << l.err_chi << l.plucker_error;
    });
  });
  write_file(dir / "velocity.csv", [&](std::ostream& os) {
    write_plot(record, os, velocity,
               [](CsvWriter& w, const Sample& s) { w << s.nu << s.omega; });
  });
  write_file(dir / "eigenvalues.csv", [&](std::ostream& os) {
    write_plot(record, os, eigen, [](CsvWriter& w, const Sample& s) {
      for (const auto& l : s.lines) w << l.sigma_sq;
      w << s.sigma_sq_aggregate;
    });
  });
}

}  // namespace

std::vector<std::string> timeseries_columns(std::size_t n_lines) {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < n_lines; ++i) {
    const std::string p = line_prefix(i);
    add3(cols, p + "h");
    add3(cols, p + "hhat");
    cols.insert(cols.end(), {p + "chi_a", p + "chi_b", p + "chihat_a", p + "chihat_b"});
    add3(cols, p + "err_h");
    add3(cols, p + "err_chi");
  }
  add3(cols, "nu");
  add3(cols, "om");
  for (std::size_t i = 0; i < n_lines; ++i) {
    cols.push_back(line_prefix(i) + "sigma1_sq");
    cols.push_back(line_prefix(i) + "sigma2_sq");
  }
  return cols;
}

void write_timeseries_csv(const RunRecord& record, std::ostream& out) {
  CsvWriter w(out);
  w.header(timeseries_columns(line_count(record)));
  for (const auto& s : record.samples) {
    w << s.t;
    for (const auto& l : s.lines) {
      w << l.h << l.h_hat << l.chi << l.chi_hat << l.err_h << l.err_chi;
    }
    w << s.nu << s.omega;
    for (const auto& l : s.lines) w << l.sigma_sq;
    w.end_row();
  }
}

json summary_json(const RunRecord& record, const RunConfig& config) {
  json j;
  j["seed"] = record.seed;
  j["aborted"] = record.aborted;
  j["abort_reason"] = record.abort_reason;
  j["samples"] = record.samples.size();
  json lines = json::array();
  json finals = json::array();
  json times = json::array();
  for (std::size_t i = 0; i < record.lines.size(); ++i) {
    const LineSummary& l = record.lines[i];
    json lj;
    lj["index"] = i;
    lj["axis"] = to_string(l.axis);
    lj["initial_error"] = number(l.initial_error);
    lj["final_error"] = number(l.final_error);
    lj["convergence_time"] = l.convergence_time ? json(*l.convergence_time) : json(nullptr);
    lj["true_final"] = vector_json(l.true_final);
    lj["estimated_final"] = vector_json(l.estimated_final);
    lines.push_back(lj);
    finals.push_back(number(l.final_error));
    times.push_back(lj["convergence_time"]);
  }
  j["lines"] = lines;
  j["final_plucker_errors"] = finals;
  j["convergence_times"] = times;
  if (!record.samples.empty()) {
    const Sample& last = record.samples.back();
    j["final_sigma_sq"] = vector_json(last.sigma_sq_aggregate);
    j["final_nu"] = vector_json(last.nu);
    j["final_omega"] = vector_json(last.omega);
  }
  const RunDiagnostics& d = record.diagnostics;
  j["diagnostics"] = {
      {"max_h_dot", number(d.max_h_dot)},
      {"max_constraint_drift", number(d.max_constraint_drift)},
      {"max_h_hat_norm_drift", number(d.max_h_hat_norm_drift)},
      {"excitation_loss_steps", d.excitation_loss_steps},
      {"rank_deficient_steps", d.rank_deficient_steps},
      {"axis_switch_lines", d.axis_switch_lines},
  };
  j["config"] = to_json(config);
  return j;
}

json montecarlo_json(const MonteCarloSummary& s, const RunConfig& config) {
  const auto pct = [](const Percentiles& p) {
    return json{{"p10", number(p.p10)}, {"median", number(p.median)}, {"p90", number(p.p90)}};
  };
  json j;
  j["master_seed"] = s.master_seed;
  j["n_runs"] = s.n_runs;
  j["failures"] = s.failures;
  j["success_threshold"] = s.success_threshold;
  j["success_fraction"] = s.success_fraction;
  j["final_error"] = pct(s.final_error);
  j["convergence_time"] = pct(s.convergence_time);
  json runs = json::array();
  for (std::size_t i = 0; i < s.runs.size(); ++i) {
    const RunSummary& r = s.runs[i];
    json errors = json::array();
    for (double e : r.line_final_errors) errors.push_back(number(e));
    runs.push_back({{"index", i},
                    {"seed", r.seed},
                    {"failed", r.failed},
                    {"failure", r.failure},
                    {"final_error", number(r.final_error)},
                    {"convergence_time", number(r.convergence_time)},
                    {"line_final_errors", errors},
                    {"final_sigma_sq", vector_json(r.final_sigma_sq)}});
  }
  j["runs"] = runs;
  j["config"] = to_json(config);
  return j;
}

void emit(const RunRecord& record, const RunConfig& config, const std::filesystem::path& dir) {
  make_dir(dir);
  write_file(dir / "timeseries.csv",
             [&](std::ostream& os) { write_timeseries_csv(record, os); });
  write_file(dir / "summary.json",
             [&](std::ostream& os) { os << summary_json(record, config).dump(2) << '\n'; });
  if (config.plots) write_plots(record, dir / "plots");
}

void emit_montecarlo(const MonteCarloSummary& summary, const RunConfig& config,
                     const std::filesystem::path& dir) {
  make_dir(dir);
  write_file(dir / "montecarlo.json", [&](std::ostream& os) {
    os << montecarlo_json(summary, config).dump(2) << '\n';
  });
}

}  // namespace linesfm
