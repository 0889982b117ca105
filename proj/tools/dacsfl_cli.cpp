// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 dacsfl contributors

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "dacsfl/dacsfl.h"

namespace {

constexpr int kExitUndecided = 2;
constexpr int kExitUsage = 3;

struct RunConfig {
  uint64_t seed = 1;
  double radius = 0.1;
  double tol_zero = 1e-10;
  double tol_rank = 1e-8;
  double step = 1e-4;
  double horizon = 0.5;
  std::string candidates;
  std::string out;
  std::string mode = "internal";
  std::vector<std::string> files;
  std::vector<std::string> u;
  std::vector<std::string> v;
};

using System = std::unique_ptr<dacsfl_system, decltype(&dacsfl_system_free)>;
using Settings = std::unique_ptr<dacsfl_settings, decltype(&dacsfl_settings_free)>;
using Report = std::unique_ptr<dacsfl_report, decltype(&dacsfl_report_free)>;

struct Failure {
  dacsfl_status status;
};

void check(dacsfl_status st) {
  if (st != DACSFL_OK) throw Failure{st};
}

int exit_code_for(dacsfl_status st) {
  switch (st) {
    case DACSFL_ERR_CERTIFICATION:
    case DACSFL_ERR_SINGULAR:
    case DACSFL_ERR_NUMERICAL:
    case DACSFL_ERR_NOT_SUPPORTED:
      return kExitUndecided;
    default:
      return kExitUsage;
  }
}

System load(const std::string& path) {
  dacsfl_system* s = nullptr;
  check(dacsfl_system_load(path.c_str(), &s));
  return System(s, dacsfl_system_free);
}

Settings make_settings(const RunConfig& c) {
  dacsfl_settings* s = nullptr;
  check(dacsfl_settings_create(&s));
  Settings out(s, dacsfl_settings_free);
  check(dacsfl_settings_set_seed(s, c.seed));
  check(dacsfl_settings_set_radius(s, c.radius));
  check(dacsfl_settings_set_tol_zero(s, c.tol_zero));
  check(dacsfl_settings_set_tol_rank(s, c.tol_rank));
  check(dacsfl_settings_set_step(s, c.step));
  check(dacsfl_settings_set_horizon(s, c.horizon));
  return out;
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

const char* candidates_of(const RunConfig& c) { return c.candidates.empty() ? nullptr : c.candidates.c_str(); }

Report run(const std::string& command, const RunConfig& c) {
  Settings st = make_settings(c);
  dacsfl_report* r = nullptr;
  auto u = c_strings(c.u);
  auto v = c_strings(c.v);
  if (command == "verify-equivalence") {
    System a = load(c.files.at(0));
    System b = load(c.files.at(1));
    check(dacsfl_verify_equivalence(a.get(), b.get(), c.files.at(2).c_str(), st.get(), &r));
    return Report(r, dacsfl_report_free);
  }
  System sys = load(c.files.at(0));
  if (command == "check") {
    check(dacsfl_check(sys.get(), st.get(), &r));
  } else if (command == "reduce") {
    check(dacsfl_reduce(sys.get(), st.get(), &r));
  } else if (command == "explicitate") {
    check(dacsfl_explicitate(sys.get(), st.get(), &r));
  } else if (command == "distributions") {
    check(dacsfl_distributions(sys.get(), st.get(), &r));
  } else if (command == "linearize") {
    dacsfl_mode mode = c.mode == "external" ? DACSFL_MODE_EXTERNAL : DACSFL_MODE_INTERNAL;
    check(dacsfl_linearize(sys.get(), st.get(), mode, candidates_of(c), &r));
  } else if (command == "simulate") {
    check(dacsfl_simulate(sys.get(), st.get(), u.data(), u.size(), v.data(), v.size(), &r));
  } else {
    check(dacsfl_verify_correspondence(sys.get(), st.get(), candidates_of(c), u.data(), u.size(), v.data(),
                                       v.size(), &r));
  }
  return Report(r, dacsfl_report_free);
}

bool write_out(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
  return static_cast<bool>(os);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linearization checks for DAE control systems", "dacsfl"};
  app.require_subcommand(1);
  RunConfig c;
  app.add_option("--seed", c.seed, "Sampling seed")->capture_default_str();
  app.add_option("--radius", c.radius, "Neighborhood radius")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--tol-zero", c.tol_zero, "Zero-test tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--tol-rank", c.tol_rank, "Rank tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--step", c.step, "Integrator step")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--horizon", c.horizon, "Simulation horizon")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--candidates", c.candidates, "Candidate output file")->check(CLI::ExistingFile);
  app.add_option("--out", c.out, "Write the structured report to this file");
  app.fallthrough();

  auto file_command = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("system", c.files, "System file")->required()->expected(1)->check(CLI::ExistingFile);
    return sub;
  };
  file_command("check", "Reduction and (CR) at the working point");
  file_command("reduce", "Constraint reduction trace and restriction");
  file_command("explicitate", "Explicitation of the restriction");
  file_command("distributions", "Distribution sequences with ranks and involutivity");
  CLI::App* lin = file_command("linearize", "Decide feedback linearizability");
  lin->add_option("--mode", c.mode, "internal or external")
      ->check(CLI::IsMember({"internal", "external"}))
      ->capture_default_str();
  CLI::App* sim = file_command("simulate", "Simulate the restriction explicitation");
  sim->add_option("--u", c.u, "Input signal expressions in t");
  sim->add_option("--v", c.v, "Driving signal expressions in t");
  CLI::App* eq = app.add_subcommand("verify-equivalence", "Check an ex-fb witness between two systems");
  eq->add_option("files", c.files, "Source system, target system, witness")->required()->expected(3)->check(
      CLI::ExistingFile);
  CLI::App* cor = file_command("verify-correspondence", "Compare solutions with the canonical target");
  cor->add_option("--u", c.u, "Target input signal expressions in t");
  cor->add_option("--v", c.v, "Target driving signal expressions in t");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Report r = run(command, c);
    std::string text = dacsfl_report_text(r.get());
    const std::string summary = std::string(dacsfl_report_summary(r.get())) + "\n";
    if (!text.empty() && text.back() != '\n') text += "\n";
    bool has_summary = text.size() >= summary.size() && text.compare(text.size() - summary.size(), summary.size(),
                                                                     summary) == 0 &&
                       (text.size() == summary.size() || text[text.size() - summary.size() - 1] == '\n');
    std::cout << text << (has_summary ? "" : summary);
    if (!c.out.empty() && !write_out(c.out, dacsfl_report_document(r.get()))) {
      std::fprintf(stderr, "error (io): cannot write %s\n", c.out.c_str());
      return kExitUsage;
    }
    return static_cast<int>(dacsfl_report_verdict(r.get()));
  } catch (const Failure& f) {
    std::fprintf(stderr, "error (%s): %s\n", dacsfl_status_name(f.status), dacsfl_last_error());
    return exit_code_for(f.status);
  }
}
