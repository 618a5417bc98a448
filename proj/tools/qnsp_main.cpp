// Command-line driver: run / sweep / verify / inspect.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "qnsp/checkpoint.hpp"
#include "qnsp/sweep.hpp"
#include "qnsp/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cmd_run(const std::string& config_path) {
  qnsp::RunConfig cfg = qnsp::load_config(config_path);
  fs::create_directories(cfg.output_dir);

  qnsp::Trajectory traj = qnsp::run(cfg);
  qnsp::write_csv_ledger(cfg.output_dir + "/ledger.csv", traj);

  json summary = qnsp::summary_json(traj);
  summary["config_hash"] = cfg.hash();
  {
    std::ofstream out(cfg.output_dir + "/summary.json");
    out << summary.dump(2) << "\n";
  }
  qnsp::save_state(cfg.output_dir + "/state_final", traj.final());
  if (cfg.checkpoint_every > 0) {
    int idx = 0;
    for (const auto& e : traj.saves) {
      if (idx % cfg.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof name, "/state_%06d", idx);
        qnsp::save_state(cfg.output_dir + name, e.state);
      }
      ++idx;
    }
  }

  std::cout << "run: " << (traj.completed ? "completed" : "terminated early")
            << ", steps=" << traj.steps.size() << ", saves=" << traj.saves.size()
            << "\n";
  if (traj.doping_shift != 0.0)
    std::cout << "doping mean-shifted by " << traj.doping_shift
              << " to match the initial mass\n";
  if (!traj.completed) std::cout << "cause: " << traj.termination_cause << "\n";
  std::cout << "mass drift (rel): " << summary["mass_drift_rel"] << "\n"
            << "energy monitor violations: " << summary["energy"]["violations"]
            << "\n"
            << "bd monitor violations: " << summary["bd_entropy"]["violations"]
            << "\n"
            << "ledger: " << cfg.output_dir << "/ledger.csv\n";
  return traj.completed ? 0 : 1;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::string& ladder) {
  qnsp::RunConfig cfg = qnsp::load_config(config_path);
  qnsp::SweepSchedule sched;
  sched.param = param;
  {
    std::istringstream is(ladder);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(is, tok, ',')) parts.push_back(tok);
    if (parts.size() != 3)
      throw qnsp::ConfigError("--ladder expects start,ratio,count");
    sched.start = std::stod(parts[0]);
    sched.ratio = std::stod(parts[1]);
    sched.count = std::stoi(parts[2]);
  }
  qnsp::SweepReport rep = qnsp::sweep(cfg, sched);
  fs::create_directories(cfg.output_dir);
  const std::string path = cfg.output_dir + "/sweep_" + param + ".json";
  {
    std::ofstream out(path);
    out << rep.to_json().dump(2) << "\n";
  }
  std::cout << rep.to_json().dump(2) << "\n";
  std::cout << "report: " << path << "\n";
  bool ok = rep.isolation_ok;
  for (const auto& r : rep.rungs) ok = ok && r.completed;
  return ok ? 0 : 1;
}

int cmd_verify(const std::string& kind, int n, int samples, double tol) {
  qnsp::VerifyResult res;
  if (kind == "bohm")
    res = qnsp::verify_bohm(n, samples, 0.5, tol > 0 ? tol : 1e-6);
  else if (kind == "truncation")
    res = qnsp::verify_truncation(std::max(samples, 20000));
  else if (kind == "commutator")
    res = qnsp::verify_commutator(n);
  else if (kind == "dissipation-identity")
    res = qnsp::verify_dissipation_identity(n, 99, tol > 0 ? tol : 1e-8);
  else if (kind == "mms-order")
    res = qnsp::verify_mms_order();
  else {
    std::cerr << "unknown verify kind '" << kind << "'\n";
    return 2;
  }
  json out = res.detail;
  out["kind"] = kind;
  out["pass"] = res.pass;
  std::cout << out.dump(2) << "\n";
  if (kind == "truncation" && out.contains("rows")) {
    std::cout << "delta,bound_name,sample_sup,certified_C,ratio\n";
    for (const auto& r : out["rows"])
      std::cout << r["delta"].get<double>() << ",\"" << r["bound"].get<std::string>()
                << "\"," << r["sample_sup"].get<double>() << ","
                << r["certified"].get<double>() << "," << r["ratio"].get<double>()
                << "\n";
  }
  return res.pass ? 0 : 1;
}

int cmd_inspect(const std::string& path) {
  qnsp::CheckpointField cf = qnsp::load_checkpoint_field(path);
  const qnsp::Grid& g = cf.fields.front().grid();
  std::cout << "QNSPF1 checkpoint: " << path << "\n"
            << "  dim = " << g.dim() << ", rank = " << static_cast<int>(cf.rank)
            << ", time = " << cf.time << "\n  n = [";
  for (int a = 0; a < g.dim(); ++a)
    std::cout << g.n(a) << (a + 1 < g.dim() ? ", " : "");
  std::cout << "], L = [";
  for (int a = 0; a < g.dim(); ++a)
    std::cout << g.length(a) << (a + 1 < g.dim() ? ", " : "");
  std::cout << "]\n";
  int c = 0;
  for (const auto& f : cf.fields) {
    std::cout << "  component " << c++ << ": min = " << qnsp::min_value(f)
              << ", max = " << qnsp::max_value(f) << ", mean = " << qnsp::mean(f)
              << ", l2 = " << qnsp::l2_norm(f) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudospectral quantum Navier-Stokes-Poisson desk simulator"};
  app.require_subcommand(1);

  std::string config_path, param, ladder, kind, checkpoint;
  int n = 64, samples = 20;
  double tol = -1;

  auto* run_cmd = app.add_subcommand("run", "time-step one configuration");
  run_cmd->add_option("config", config_path, "run configuration file")->required();

  auto* sweep_cmd =
      app.add_subcommand("sweep", "vanishing-limit ladder over one parameter");
  sweep_cmd->add_option("config", config_path, "base configuration")->required();
  sweep_cmd->add_option("--param", param, "eta | delta | mu | eps | eps_friction")
      ->required();
  sweep_cmd->add_option("--ladder", ladder, "start,ratio,count")->required();

  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  verify_cmd
      ->add_option("kind", kind,
                   "bohm | truncation | commutator | dissipation-identity | "
                   "mms-order")
      ->required();
  verify_cmd->add_option("--n", n, "grid modes (default 64)");
  verify_cmd->add_option("--samples", samples, "sample count");
  verify_cmd->add_option("--tol", tol, "override tolerance");

  auto* inspect_cmd = app.add_subcommand("inspect", "print a checkpoint header");
  inspect_cmd->add_option("checkpoint", checkpoint, "QNSPF1 file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(config_path);
    if (sweep_cmd->parsed()) return cmd_sweep(config_path, param, ladder);
    if (verify_cmd->parsed()) return cmd_verify(kind, n, samples, tol);
    if (inspect_cmd->parsed()) return cmd_inspect(checkpoint);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump(2) << "\n";
    return 2;
  }
  return 2;
}
