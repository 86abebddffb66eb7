#include "lkpolar/report.hpp"

#include "lkpolar/catalog.hpp"
#include "lkpolar/germ.hpp"
#include "lkpolar/lkmeasure.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lkpolar {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kMeasureStream = 0x100;
constexpr std::uint64_t kPolarStream = 0x200;
constexpr std::uint64_t kLocalStream = 0x300;
constexpr std::uint64_t kKinematicStream = 0x400;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool near_reference(const Estimate& e, double ref, double tol) {
  return std::abs(e.value - ref) <= tol * e.std_error + 1e-6 * std::max(1.0, std::abs(ref));
}

std::vector<int> default_ks(int lo, int hi) {
  std::vector<int> out;
  for (int k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

void check_ks(const std::vector<int>& ks, int lo, int hi, const char* what) {
  for (int k : ks)
    if (k < lo || k > hi)
      throw std::invalid_argument(std::string(what) + " " + std::to_string(k) + " outside [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "]");
}

ReportRow make_row(std::string quantity, int k, const Estimate& a) {
  ReportRow row;
  row.quantity = std::move(quantity);
  row.k = k;
  row.a = a;
  return row;
}

json estimate_json(const Estimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"n_samples", e.n_samples}, {"seed", e.seed}};
}

LkResult measure_row(const Shape& x, int k, const RunConfig& c, ReportRow& row) {
  const auto t0 = Clock::now();
  const RandomSource root(c.seed);
  const LkResult r = lk_measure(x, k, root.substream(kMeasureStream + static_cast<std::uint64_t>(k)),
                                {c.n_samples, c.threads, 50});
  row.wall_time_ms += elapsed_ms(t0);
  return r;
}

PolarLengthResult polar_row(const Shape& x, int q, const RunConfig& c, ReportRow& row) {
  const auto t0 = Clock::now();
  const RandomSource root(c.seed);
  PolarLengthOptions opts;
  opts.n_planes = c.n_samples;
  opts.threads = c.threads;
  opts.polar.alpha_mode = c.alpha_mode;
  const PolarLengthResult r = polar_length(x, q, root.substream(kPolarStream + static_cast<std::uint64_t>(q)), opts);
  row.wall_time_ms += elapsed_ms(t0);
  return r;
}

void keep_planes(const PolarLengthResult& r, int q, const RunConfig& c, VerificationReport& out) {
  if (c.planes_csv_path.empty()) return;
  for (const PlaneRecord& rec : r.planes) out.planes.push_back({q, rec});
}

void run_shape(const RunConfig& c, VerificationReport& out) {
  const Shape x = shape_from_id(c.target);
  const int n = x.ambient_dim();
  if (c.command == Command::kinematic) {
    const auto ks = c.ks.empty() ? default_ks(1, n - 1) : c.ks;
    check_ks(ks, 1, n - 1, "k");
    const RandomSource root(c.seed);
    for (int k : ks) {
      const auto t0 = Clock::now();
      const KinematicResult r = kinematic_check(x, k, root.substream(kKinematicStream + static_cast<std::uint64_t>(k)),
                                                {c.n_samples, c.threads, 50});
      ReportRow row = make_row("kinematic_ratio", k, r.ratio);
      row.reference = r.reference;
      row.pass = !r.division_flagged;
      row.method = "weighted slice integral over Lambda_{n-k}";
      row.wall_time_ms = elapsed_ms(t0);
      out.rows.push_back(row);
    }
    return;
  }
  const auto ks = c.ks.empty() ? default_ks(0, x.dim()) : c.ks;
  check_ks(ks, 0, n, c.command == Command::measure ? "k" : "q");
  for (int k : ks) {
    ReportRow row;
    row.k = k;
    row.reference = reference_lambda(c.target, k);
    if (c.command == Command::measure) {
      const LkResult r = measure_row(x, k, c, row);
      row.quantity = "Lambda";
      row.a = r.estimate;
      row.method = r.method;
      row.resampled = r.resampled;
      row.pass = !row.reference || near_reference(row.a, *row.reference, c.tolerance);
    } else if (c.command == Command::polar) {
      const PolarLengthResult r = polar_row(x, k, c, row);
      keep_planes(r, k, c, out);
      row.quantity = "L";
      row.a = r.estimate;
      row.method = "polar images, " + alpha_mode_name(c.alpha_mode);
      row.resampled = r.resampled;
      row.pass = !row.reference || near_reference(row.a, *row.reference, c.tolerance);
    } else {
      const LkResult lk = measure_row(x, k, c, row);
      const PolarLengthResult pl = polar_row(x, k, c, row);
      keep_planes(pl, k, c, out);
      row.quantity = "Lambda_vs_L";
      row.a = lk.estimate;
      row.b = pl.estimate;
      row.method = lk.method + " / polar images, " + alpha_mode_name(c.alpha_mode);
      row.resampled = lk.resampled + pl.resampled;
      row.pass = agrees(row.a, *row.b, c.tolerance) &&
                 (!row.reference || near_reference(row.a, *row.reference, c.tolerance));
    }
    out.rows.push_back(row);
  }
}

void run_germ(const RunConfig& c, VerificationReport& out) {
  const ConeGerm x = germ_from_id(c.target);
  const int n = x.ambient_dim();
  const auto ks = c.ks.empty() ? default_ks(0, n) : c.ks;
  check_ks(ks, 0, n, "k");
  LocalBudget budget;
  budget.n_samples = c.n_samples;
  budget.n_planes = c.n_samples;
  budget.n_dirs = 4 * c.n_samples;
  budget.threads = c.threads;
  budget.tolerance = c.tolerance;
  const auto t0 = Clock::now();
  const LocalReport rep = verify_local_identities(x, RandomSource(c.seed).substream(kLocalStream), budget, ks);
  const double per_row = elapsed_ms(t0) / static_cast<double>(3 * rep.ks.size() + rep.extra.size());
  for (std::size_t i = 0; i < rep.ks.size(); ++i) {
    const int k = rep.ks[i];
    const auto ref = reference_local(c.target, k);
    const std::pair<const char*, const Estimate*> sides[] = {
        {"sigma_diff", &rep.sigma_diff[i]}, {"L_loc", &rep.l_loc[i]}, {"lambda_loc", &rep.lambda_loc[i]}};
    for (const auto& [name, e] : sides) {
      ReportRow row = make_row(name, k, *e);
      row.reference = ref;
      row.pass = rep.row_pass[i] && (!ref || agrees(*e, *ref, c.tolerance));
      row.method = "local identities";
      row.wall_time_ms = per_row;
      out.rows.push_back(row);
    }
  }
  for (const LocalRow& e : rep.extra) {
    ReportRow row = make_row(e.name, e.k, e.a);
    row.b = e.b;
    row.pass = e.pass;
    row.method = "local identities";
    row.wall_time_ms = per_row;
    out.rows.push_back(row);
  }
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "measure") return Command::measure;
  if (name == "polar") return Command::polar;
  if (name == "local") return Command::local;
  if (name == "verify") return Command::verify;
  if (name == "kinematic") return Command::kinematic;
  throw std::invalid_argument("unknown command '" + name + "'");
}

std::string command_name(Command c) {
  switch (c) {
    case Command::measure: return "measure";
    case Command::polar: return "polar";
    case Command::local: return "local";
    case Command::verify: return "verify";
    case Command::kinematic: return "kinematic";
  }
  return "";
}

AlphaMode parse_alpha_mode(const std::string& name) {
  if (name == "closed-form") return AlphaMode::closed_form;
  if (name == "slice-chi") return AlphaMode::slice_chi;
  throw std::invalid_argument("unknown alpha mode '" + name + "'");
}

std::string alpha_mode_name(AlphaMode m) { return m == AlphaMode::closed_form ? "closed-form" : "slice-chi"; }

RunConfig config_from_json(const std::string& text, RunConfig base) {
  const json j = json::parse(text);
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  RunConfig c = std::move(base);
  if (j.contains("command")) c.command = parse_command(j.at("command").get<std::string>());
  for (const char* key : {"target", "shape", "germ"})
    if (j.contains(key)) c.target = j.at(key).get<std::string>();
  for (const char* key : {"k", "q"})
    if (j.contains(key)) c.ks = j.at(key).get<std::vector<int>>();
  if (j.contains("samples")) c.n_samples = j.at("samples").get<std::int64_t>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("alpha_mode")) c.alpha_mode = parse_alpha_mode(j.at("alpha_mode").get<std::string>());
  if (j.contains("tolerance")) c.tolerance = j.at("tolerance").get<double>();
  if (j.contains("report")) c.report_path = j.at("report").get<std::string>();
  if (j.contains("csv")) c.csv_path = j.at("csv").get<std::string>();
  if (j.contains("planes_csv")) c.planes_csv_path = j.at("planes_csv").get<std::string>();
  return c;
}

namespace {

json config_json(const RunConfig& c) {
  return {{"command", command_name(c.command)},
          {"target", c.target},
          {"k", c.ks},
          {"samples", c.n_samples},
          {"seed", c.seed},
          {"threads", c.threads},
          {"alpha_mode", alpha_mode_name(c.alpha_mode)},
          {"tolerance", c.tolerance},
          {"report", c.report_path},
          {"csv", c.csv_path},
          {"planes_csv", c.planes_csv_path}};
}

}  // namespace

std::string config_to_json(const RunConfig& c) { return config_json(c).dump(); }

bool VerificationReport::all_pass() const {
  for (const ReportRow& r : rows)
    if (!r.pass) return false;
  return true;
}

VerificationReport run(const RunConfig& config) {
  if (config.n_samples < 1) throw std::invalid_argument("samples must be positive");
  if (config.threads < 1) throw std::invalid_argument("threads must be positive");
  if (!(config.tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  if (config.target.empty()) throw std::invalid_argument("no shape or germ given");
  const auto t0 = Clock::now();
  VerificationReport out;
  out.config = config;
  if (config.command == Command::local)
    run_germ(config, out);
  else
    run_shape(config, out);
  out.wall_time_ms = elapsed_ms(t0);
  return out;
}

std::string report_to_json(const VerificationReport& r) {
  json rows = json::array();
  for (const ReportRow& row : r.rows) {
    json j = {{"shape", r.config.target},
              {"quantity", row.quantity},
              {"k", row.k},
              {"value", row.a.value},
              {"std_error", row.a.std_error},
              {"n_samples", row.a.n_samples},
              {"seed", row.a.seed},
              {"wall_time_ms", row.wall_time_ms},
              {"method", row.method},
              {"resampled", row.resampled},
              {"pass", row.pass}};
    if (row.b) j["b"] = estimate_json(*row.b);
    j["reference"] = row.reference ? json(*row.reference) : json(nullptr);
    rows.push_back(std::move(j));
  }
  const json doc = {{"schema", 1},
                    {"config", config_json(r.config)},
                    {"all_pass", r.all_pass()},
                    {"wall_time_ms", r.wall_time_ms},
                    {"rows", std::move(rows)}};
  return doc.dump(2);
}

void write_report(const VerificationReport& r, const std::string& path) {
  auto f = open_for_write(path);
  f << report_to_json(r) << '\n';
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

void emit_plot_data(const VerificationReport& r, const std::string& path) {
  auto f = open_for_write(path);
  f << "quantity,k,value,SE,reference\n";
  for (const ReportRow& row : r.rows)
    f << row.quantity << ',' << row.k << ',' << csv_number(row.a.value) << ',' << csv_number(row.a.std_error) << ','
      << (row.reference ? csv_number(*row.reference) : "") << '\n';
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

void emit_plane_data(const VerificationReport& r, const std::string& path) {
  auto f = open_for_write(path);
  f << "q,index,retries,rejected,frame,m\n";
  for (const PlaneRow& p : r.planes) {
    const PlaneRecord& rec = p.record;
    f << p.q << ',' << rec.index << ',' << rec.retries << ',';
    for (std::size_t i = 0; i < rec.rejected.size(); ++i) f << (i ? ";" : "") << rec.rejected[i];
    f << ',';
    for (Eigen::Index i = 0; i < rec.plane.size(); ++i) f << (i ? " " : "") << csv_number(rec.plane.data()[i]);
    f << ',';
    for (std::size_t i = 0; i < rec.m.size(); ++i) f << (i ? " " : "") << csv_number(rec.m[i]);
    f << '\n';
  }
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace lkpolar
