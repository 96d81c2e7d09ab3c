#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(VARMETA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(run("--no-such-flag"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("run --out /tmp/x"), 2);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, BadConfigExitsOne) {
  const fs::path dir = fs::temp_directory_path() / "varmeta_cli_bad";
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ini") << "[grid]\nwhat = 1\n";
  EXPECT_EQ(run("run --config " + (dir / "bad.ini").string() + " --out " + (dir / "o").string()), 1);
  fs::remove_all(dir);
}

TEST(Cli, TinyRunIsDeterministic) {
  const fs::path dir = fs::temp_directory_path() / "varmeta_cli_run";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "tiny.ini") << "[experiment]\nscenario = obs_values\n"
                                     "[grid]\nq = 12\nn_steps = 10\n"
                                     "[model]\nbell_width = 3\n"
                                     "[solver]\ninner_iterations = 20\nouter_iterations = 1\n";
  const std::string cfg = (dir / "tiny.ini").string();
  ASSERT_EQ(run("run --config " + cfg + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run("run --config " + cfg + " --out " + (dir / "b").string()), 0);
  for (const char* f : {"summary.csv", "obs_values/history.csv", "obs_values/parameters.csv"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  EXPECT_EQ(run("plotdata --report " + (dir / "a" / "obs_values").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "a" / "obs_values" / "plot" / "convergence.csv"));
  fs::remove_all(dir);
}
