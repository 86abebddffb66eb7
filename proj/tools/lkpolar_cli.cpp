#include "lkpolar/catalog.hpp"
#include "lkpolar/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::vector<int> parse_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad k list '" + text + "'");
    out.push_back(v);
  }
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

void print_rows(const lkpolar::VerificationReport& r) {
  std::printf("%-16s %3s %14s %12s %14s %12s %12s  %s\n", "quantity", "k", "value", "SE", "other", "other SE",
              "reference", "pass");
  for (const auto& row : r.rows) {
    std::printf("%-16s %3d %14.6f %12.3g", row.quantity.c_str(), row.k, row.a.value, row.a.std_error);
    if (row.b)
      std::printf(" %14.6f %12.3g", row.b->value, row.b->std_error);
    else
      std::printf(" %14s %12s", "-", "-");
    if (row.reference)
      std::printf(" %12.6f", *row.reference);
    else
      std::printf(" %12s", "-");
    std::printf("  %s\n", row.pass ? "pass" : "FAIL");
  }
  std::printf("%s in %.0f ms\n", r.all_pass() ? "all rows pass" : "some rows FAIL", r.wall_time_ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lipschitz-Killing measures and polar lengths of catalog shapes and germs"};
  app.footer("shapes: " + join(lkpolar::shape_id_forms()) + "\ngerms:  " + join(lkpolar::germ_id_forms()));

  std::string command, shape, germ, k_list, q_list, alpha_mode = "closed-form", config_path;
  lkpolar::RunConfig cfg;
  app.add_option("command", command, "measure | polar | local | verify | kinematic")->required();
  app.add_option("--shape", shape, "shape id");
  app.add_option("--germ", germ, "germ id (local)");
  app.add_option("--k", k_list, "comma list of degrees");
  app.add_option("--q", q_list, "comma list of degrees (alias of --k)");
  app.add_option("--samples", cfg.n_samples, "Monte Carlo samples or planes")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--alpha-mode", alpha_mode, "closed-form | slice-chi")
      ->check(CLI::IsMember({"closed-form", "slice-chi"}));
  app.add_option("--report", cfg.report_path, "JSON report path");
  app.add_option("--csv", cfg.csv_path, "CSV of quantity,k,value,SE,reference");
  app.add_option("--planes-csv", cfg.planes_csv_path, "per-plane CSV for polar runs");
  app.add_option("--tolerance", cfg.tolerance, "pass threshold in combined standard errors")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", config_path, "JSON config; flags given on the command line override it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::invalid_argument("cannot read config '" + config_path + "'");
      std::stringstream text;
      text << in.rdbuf();
      lkpolar::RunConfig file_cfg = lkpolar::config_from_json(text.str());
      // command line flags win over the file
      for (const auto* opt : app.get_options()) {
        if (opt->count() == 0) continue;
        const std::string name = opt->get_name();
        if (name == "--samples") file_cfg.n_samples = cfg.n_samples;
        if (name == "--seed") file_cfg.seed = cfg.seed;
        if (name == "--threads") file_cfg.threads = cfg.threads;
        if (name == "--tolerance") file_cfg.tolerance = cfg.tolerance;
        if (name == "--report") file_cfg.report_path = cfg.report_path;
        if (name == "--csv") file_cfg.csv_path = cfg.csv_path;
        if (name == "--planes-csv") file_cfg.planes_csv_path = cfg.planes_csv_path;
      }
      cfg = file_cfg;
      if (app.count("--alpha-mode") == 0) alpha_mode = lkpolar::alpha_mode_name(cfg.alpha_mode);
    }
    cfg.command = lkpolar::parse_command(command);
    cfg.alpha_mode = lkpolar::parse_alpha_mode(alpha_mode);
    if (!shape.empty() && !germ.empty()) throw std::invalid_argument("give either --shape or --germ");
    if (!shape.empty()) cfg.target = shape;
    if (!germ.empty()) cfg.target = germ;
    if (cfg.command == lkpolar::Command::local && !shape.empty()) throw std::invalid_argument("local needs --germ");
    if (cfg.command != lkpolar::Command::local && !germ.empty())
      throw std::invalid_argument(command + " needs --shape");
    if (!k_list.empty() && !q_list.empty()) throw std::invalid_argument("give either --k or --q");
    if (!k_list.empty()) cfg.ks = parse_list(k_list);
    if (!q_list.empty()) cfg.ks = parse_list(q_list);

    const lkpolar::VerificationReport report = lkpolar::run(cfg);
    print_rows(report);
    if (!cfg.report_path.empty()) lkpolar::write_report(report, cfg.report_path);
    if (!cfg.csv_path.empty()) lkpolar::emit_plot_data(report, cfg.csv_path);
    if (!cfg.planes_csv_path.empty()) lkpolar::emit_plane_data(report, cfg.planes_csv_path);
    return report.all_pass() ? 0 : 1;
  } catch (const lkpolar::PolarQuotaExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& [kind, count] : e.histogram) std::cerr << "  " << kind << ": " << count << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
