// Acceptance driver: criteria 1-13 in process at full scale, criterion 14 by
// running the CLI's verify command twice and diffing its output trees.
//
// Exit status is nonzero when a criterion fails that is not listed with
// --known-failure. Known failures still print FAIL.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rggloc/acceptance.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Drops the manifest's wall-clock line; everything else must match.
std::string without_timestamp(const std::string& text) {
  std::istringstream is(text);
  std::string line, out;
  while (std::getline(is, line)) {
    if (line.find("\"timestamp\"") == std::string::npos) out += line + '\n';
  }
  return out;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), root).generic_string();
    const std::string body = slurp(e.path());
    files[rel] = rel == "manifest.json" ? without_timestamp(body) : body;
  }
  return files;
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

rggloc::CriterionResult reproducibility(const std::string& cli, const std::string& config, const fs::path& work) {
  rggloc::CriterionResult r;
  r.id = 14;
  r.title = "reproducibility";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path out = work / "verify_out";
  std::vector<int> codes;
  for (const char* name : {"run_a", "run_b"}) {
    const std::string cmd = quote(cli) + " verify --quiet --config " + quote(config) + " --out " + quote(out.string()) +
                            " > " + quote((work / (std::string(name) + ".log")).string()) + " 2>&1";
    const int status = std::system(cmd.c_str());
    codes.push_back(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
    if (fs::exists(out)) fs::rename(out, work / name);
  }
  // Exit 1 means some criterion failed inside verify; the files must still match.
  for (int c : codes) {
    if (c != 0 && c != 1) {
      r.detail = "verify exited with " + std::to_string(c);
      return r;
    }
  }
  const auto a = tree(work / "run_a");
  const auto b = tree(work / "run_b");
  std::set<std::string> names;
  for (const auto& [k, v] : a) names.insert(k);
  for (const auto& [k, v] : b) names.insert(k);
  std::vector<std::string> differing;
  for (const auto& k : names) {
    const auto ia = a.find(k), ib = b.find(k);
    if (ia == a.end() || ib == b.end() || ia->second != ib->second) differing.push_back(k);
  }
  r.pass = differing.empty() && !a.empty();
  std::ostringstream os;
  os << "two verify runs, " << names.size() << " files compared (manifest timestamp excluded); ";
  if (differing.empty()) {
    os << "all byte-identical";
  } else {
    os << differing.size() << " differ, first " << differing.front();
  }
  os << "; exit codes " << codes[0] << "," << codes[1];
  r.detail = os.str();
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rggloc acceptance criteria"};
  std::string cli, config, work = "acceptance_work", scale = "full";
  std::uint64_t seed = 20240611;
  std::vector<int> known;
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the rggloc executable")->required();
  app.add_option("--config", config, "config used for the reproducibility check")->required();
  app.add_option("--work", work, "scratch directory");
  app.add_option("--scale", scale, "quick or full");
  app.add_option("--seed", seed, "master seed for criteria 1-13");
  app.add_option("--known-failure", known, "criterion ids whose failure is documented");
  app.add_option("--only", only, "run only these criterion ids");
  CLI11_PARSE(app, argc, argv);

  rggloc::AcceptanceOptions opts;
  opts.scale = rggloc::parse_scale(scale);
  opts.seed = seed;

  std::vector<int> ids = rggloc::criterion_ids();
  ids.push_back(14);
  if (!only.empty()) {
    ids.erase(std::remove_if(ids.begin(), ids.end(),
                             [&](int id) { return std::find(only.begin(), only.end(), id) == only.end(); }),
              ids.end());
  }

  int unexpected = 0, passed = 0;
  for (int id : ids) {
    const auto start = std::chrono::steady_clock::now();
    rggloc::CriterionResult r = id == 14 ? reproducibility(cli, config, fs::path(work)) : rggloc::run_criterion(id, opts);
    if (id == 14) r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool is_known = std::find(known.begin(), known.end(), id) != known.end();
    passed += r.pass;
    if (!r.pass && !is_known) ++unexpected;
    std::printf("%s  [%.1f s]%s\n", rggloc::format_result(r).c_str(), r.seconds,
                !r.pass && is_known ? "  (known failure)" : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass; %d unexpected failure(s)\n", passed, ids.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
