// Command-line front end.
//
//   vpatch run <scenario.json | criterion name>... [--out DIR] [--plot] [--jobs N]
//   vpatch run --all-acceptance [--out DIR] [--jobs N]
//   vpatch list
//   vpatch regress <golden-dir> [--work DIR]
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 config error (JSON on
// stderr), 3 numerical failure, 4 regress found outputs with no golden copy
// and nothing worse. With several runs the most severe code wins, in the
// order 2, 3, 1, 4.
//
// --jobs N > 1 reruns this executable as hidden `worker` processes, one per
// scenario or criterion, so runs never share a process.

#include "vpatch/acceptance.hpp"
#include "vpatch/scenarios.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using namespace vpatch;

namespace {

constexpr int kPass = 0, kCheckFailed = 1, kConfigError = 2, kNumerical = 3, kFresh = 4;

int severity(int code) {
  switch (code) {
    case kConfigError: return 4;
    case kNumerical: return 3;
    case kCheckFailed: return 2;
    case kFresh: return 1;
    default: return 0;
  }
}

int worse(int a, int b) { return severity(a) >= severity(b) ? a : b; }

int status_of(const RunReport& r) {
  if (r.failed_numerically) return kNumerical;
  return r.pass() ? kPass : kCheckFailed;
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

struct Outcome {
  std::string line;
  int code = kPass;
};

// Runs `args` in a child copy of this executable; the child prints its summary line.
Outcome spawn(const std::string& args) {
  const std::string cmd = quote(fs::read_symlink("/proc/self/exe").string()) + " worker " + args;
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {"FAIL cannot start worker: " + cmd, kNumerical};
  char buf[4096];
  while (fgets(buf, sizeof buf, p)) o.line += buf;
  const int st = pclose(p);
  o.code = WIFEXITED(st) ? WEXITSTATUS(st) : kNumerical;
  while (!o.line.empty() && o.line.back() == '\n') o.line.pop_back();
  return o;
}

// Executes tasks with at most `jobs` running at once, printing lines in task order.
int run_all(const std::vector<std::function<Outcome()>>& tasks, int jobs) {
  int code = kPass;
  std::size_t next = 0, printed = 0;
  std::vector<std::optional<std::future<Outcome>>> futs(tasks.size());
  auto launch = [&] {
    while (next < tasks.size() && next - printed < static_cast<std::size_t>(jobs)) {
      futs[next] = std::async(std::launch::async, tasks[next]);
      ++next;
    }
  };
  launch();
  while (printed < tasks.size()) {
    const auto o = futs[printed]->get();
    std::cout << o.line << std::endl;
    code = worse(code, o.code);
    ++printed;
    launch();
  }
  return code;
}

void config_error(const ConfigError& e, const std::string& file) {
  auto j = e.to_json();
  if (!file.empty()) j["file"] = file;
  std::cerr << j.dump() << std::endl;
}

fs::path acceptance_dir(const std::string& out, int id) {
  return fs::path(out.empty() ? "out" : out) / acceptance_name(id);
}

Outcome acceptance_task(int id, const std::string& out, int jobs) {
  if (jobs > 1) {
    std::string args = "--criterion " + std::to_string(id);
    if (!out.empty()) args += " --out " + quote(out);
    return spawn(args);
  }
  const auto r = run_acceptance_scenario(id, acceptance_dir(out, id));
  return {summary_line(r), status_of(r)};
}

Scenario load(const std::string& file, const std::string& out, bool plot) {
  Scenario s = parse_scenario(fs::path(file));
  if (!out.empty()) s.output = fs::path(out) / s.name;
  if (plot) s.plot = true;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vortex patch corner dynamics"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run scenario configs or the acceptance suite");
  std::vector<std::string> files;
  std::string out;
  bool plot = false, all_acceptance = false;
  int jobs = 1;
  run->add_option("scenarios", files, "Scenario JSON files or acceptance criterion names (see list)");
  run->add_option("--out", out, "Write each scenario to DIR/<name>");
  run->add_flag("--plot", plot, "Also write SVG frames where supported");
  run->add_flag("--all-acceptance", all_acceptance, "Run the acceptance criteria");
  run->add_option("--jobs,-j", jobs, "Parallel worker processes")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("list", "List scenario kinds and acceptance criteria");

  auto* reg = app.add_subcommand("regress", "Rerun golden scenarios and compare their CSV output");
  std::string golden, work = "out/regress";
  reg->add_option("golden", golden, "Directory of golden cases")->required();
  reg->add_option("--work", work, "Scratch directory for the reruns");

  auto* worker = app.add_subcommand("worker");
  worker->group("");
  int criterion = 0;
  std::string wfile;
  worker->add_option("--criterion", criterion);
  worker->add_option("--scenario", wfile);
  worker->add_option("--out", out);
  worker->add_flag("--plot", plot);

  CLI11_PARSE(app, argc, argv);

  if (*list) {
    std::cout << "scenario kinds:\n";
    for (auto k : all_kinds()) std::cout << "  " << kind_name(k) << '\n';
    std::cout << "acceptance criteria:\n";
    for (int id = 1; id <= kAcceptanceCriteria; ++id) std::cout << "  " << acceptance_name(id) << '\n';
    return kPass;
  }

  if (*worker) {
    if (criterion > 0) {
      const auto r = run_acceptance_scenario(criterion, acceptance_dir(out, criterion));
      std::cout << summary_line(r) << std::endl;
      return status_of(r);
    }
    try {
      const auto r = run_scenario(load(wfile, out, plot));
      std::cout << summary_line(r) << std::endl;
      return status_of(r);
    } catch (const ConfigError& e) {
      config_error(e, wfile);
      return kConfigError;
    }
  }

  if (*reg) {
    std::vector<RegressEntry> entries;
    try {
      entries = regress(golden, work);
    } catch (const ConfigError& e) {
      config_error(e, golden);
      return kConfigError;
    }
    int code = kPass;
    for (const auto& e : entries) {
      const char* tag = e.status == RegressEntry::Status::pass   ? "PASS"
                        : e.status == RegressEntry::Status::fail ? "FAIL"
                                                                 : "NEW ";
      std::cout << tag << ' ' << e.scenario << '/' << e.file;
      if (!e.detail.empty()) std::cout << " | " << e.detail;
      std::cout << std::endl;
      code = worse(code, e.status == RegressEntry::Status::pass   ? kPass
                         : e.status == RegressEntry::Status::fail ? kCheckFailed
                                                                  : kFresh);
    }
    if (entries.empty()) {
      std::cerr << "no golden cases under " << golden << std::endl;
      return kConfigError;
    }
    return code;
  }

  std::vector<std::function<Outcome()>> tasks;
  if (all_acceptance) {
    if (!files.empty()) {
      config_error(ConfigError("$", "--all-acceptance takes no scenario files"), "");
      return kConfigError;
    }
    for (int id = 1; id <= kAcceptanceCriteria; ++id)
      tasks.push_back([id, out, jobs] { return acceptance_task(id, out, jobs); });
  } else {
    if (files.empty()) {
      config_error(ConfigError("$", "no scenario files given"), "");
      return kConfigError;
    }
    // Validate every config before running any of them.
    std::vector<Scenario> scenarios;
    for (const auto& f : files) {
      if (acceptance_id(f) > 0) {
        scenarios.emplace_back();
        continue;
      }
      try {
        scenarios.push_back(load(f, out, plot));
      } catch (const ConfigError& e) {
        config_error(e, f);
        return kConfigError;
      }
    }
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (const int id = acceptance_id(files[i]); id > 0) {
        tasks.push_back([id, out, jobs] { return acceptance_task(id, out, jobs); });
      } else if (jobs > 1) {
        std::string args = "--scenario " + quote(files[i]);
        if (!out.empty()) args += " --out " + quote(out);
        if (plot) args += " --plot";
        tasks.push_back([args] { return spawn(args); });
      } else {
        tasks.push_back([s = scenarios[i]] {
          const auto r = run_scenario(s);
          return Outcome{summary_line(r), status_of(r)};
        });
      }
    }
  }
  return run_all(tasks, jobs);
}
