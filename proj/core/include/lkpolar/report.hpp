#pragma once

#include "lkpolar/geomkit.hpp"
#include "lkpolar/polar.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lkpolar {

enum class Command { measure, polar, local, verify, kinematic };

Command parse_command(const std::string& name);
std::string command_name(Command c);
AlphaMode parse_alpha_mode(const std::string& name);  // closed-form | slice-chi
std::string alpha_mode_name(AlphaMode m);

struct RunConfig {
  Command command = Command::verify;
  std::string target;   // shape id, or germ id for `local`
  std::vector<int> ks;  // empty: every k of the target
  std::int64_t n_samples = 2000;
  std::uint64_t seed = 7;
  int threads = 1;
  AlphaMode alpha_mode = AlphaMode::closed_form;
  double tolerance = 3.0;
  std::string report_path;
  std::string csv_path;
  std::string planes_csv_path;
};

// keys as in the JSON echo; missing keys keep their defaults
RunConfig config_from_json(const std::string& text, RunConfig base = {});
std::string config_to_json(const RunConfig& c);

struct ReportRow {
  std::string quantity;  // Lambda, L, Lambda_vs_L, sigma_diff, L_loc, lambda_loc, sigma_top, refined, kinematic_ratio
  int k = 0;
  Estimate a;
  std::optional<Estimate> b;
  std::optional<double> reference;
  bool pass = true;
  std::string method;
  std::int64_t resampled = 0;
  double wall_time_ms = 0.0;
};

struct PlaneRow {
  int q = 0;
  PlaneRecord record;
};

struct VerificationReport {
  RunConfig config;
  std::vector<ReportRow> rows;
  std::vector<PlaneRow> planes;
  double wall_time_ms = 0.0;

  bool all_pass() const;
};

// throws std::invalid_argument for unknown ids or k, PolarQuotaExceeded when
// the resample budget runs out
VerificationReport run(const RunConfig& config);

std::string report_to_json(const VerificationReport& r);
void write_report(const VerificationReport& r, const std::string& path);

// columns: quantity,k,value,SE,reference; value is the left side of two-sided rows
void emit_plot_data(const VerificationReport& r, const std::string& path);

// columns: q,index,retries,rejected,frame,m
void emit_plane_data(const VerificationReport& r, const std::string& path);

}  // namespace lkpolar
