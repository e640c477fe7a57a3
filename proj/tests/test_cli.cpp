#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// stdout only; stderr goes to a file so error payloads can be inspected
Run run(const std::string& args, std::string* err = nullptr) {
  const std::string errfile = ::testing::TempDir() + "vallee_cli_err.txt";
  const std::string cmd = std::string(VALLEE_LAB_PATH) + " " + args + " 2>" + errfile;
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  if (err) {
    err->clear();
    if (FILE* f = fopen(errfile.c_str(), "r")) {
      while ((got = fread(buf.data(), 1, buf.size(), f)) > 0) err->append(buf.data(), got);
      fclose(f);
    }
  }
  return r;
}

bool has(const std::string& s, const std::string& needle) { return s.find(needle) != std::string::npos; }

// first number after "key": in pretty-printed JSON
double json_number(const std::string& s, const std::string& key) {
  const auto at = s.find("\"" + key + "\": ");
  if (at == std::string::npos) return std::nan("");
  return std::strtod(s.c_str() + at + key.size() + 4, nullptr);
}

}  // namespace

TEST(Cli, ConstantsJson) {
  const auto r = run("constants --q 0.5 --p 1 --u inf,2");
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(has(r.out, "\"schema\": \"vallee-lab/1\""));
  EXPECT_NEAR(json_number(r.out, "K"), 2.0, 1e-12);
  const auto second = r.out.substr(r.out.find("\"u\": 2"));
  EXPECT_NEAR(json_number(second, "K"), 2.0466534158, 1e-9);
}

TEST(Cli, ConstantsCsvAndErrors) {
  const auto r = run("constants --q 0.5 --u 1 --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("u,K,est_error,method,sigma,delta,hypergeom_residual\n", 0), 0U);
  std::string err;
  EXPECT_EQ(run("constants --q 0", &err).code, 2);
  EXPECT_TRUE(has(err, "\"kind\":\"domain\""));
  EXPECT_EQ(run("constants --q 1.5").code, 2);
  EXPECT_EQ(run("constants --q 0.5 --u 0.5").code, 2);
  EXPECT_EQ(run("constants").code, 2);
  EXPECT_EQ(run("nosuch").code, 2);
}

TEST(Cli, BestApprox) {
  const auto r = run("best-approx --phi series --a 0,0,0,0,1 --m 5 --s inf --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("value,lower,upper,certified_gap,solver,iterations\n", 0), 0U);
  EXPECT_NEAR(std::strtod(r.out.c_str() + r.out.find('\n') + 1, nullptr), 1.0, 1e-10);
  const auto d = run("best-approx --phi phi-delta --m 4 --s inf --beta 0.5 --E 2");
  ASSERT_EQ(d.code, 0);
  EXPECT_NEAR(json_number(d.out, "value"), 2.0, 1e-9);
  EXPECT_EQ(run("best-approx --phi extremal --m 3 --s 1").code, 2);
}

TEST(Cli, VerifyHarmonic) {
  const auto r = run("verify --theorem T1 --psi geometric --q 0.5 --s 2 --n 10 --p 1 --phi harmonic");
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(json_number(r.out, "ratio"), std::sqrt(0.75), 1e-6);
  EXPECT_TRUE(has(r.out, "\"psi_params\""));
  const auto c = run("verify --theorem T3 --psi genpoisson --alpha 1 --r 2 --s 2 --n 5 --p 2 --format csv");
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(c.out.rfind("n,p,lhs,rhs_leading,budget1,budget2,ratio,status\n5,2,", 0), 0U);
}

TEST(Cli, VerifyPreconditions) {
  std::string err;
  EXPECT_EQ(run("verify --theorem T4 --psi geometric --q 0.5 --n 5 --p 1", &err).code, 2);
  EXPECT_TRUE(has(err, "vallee-lab/1"));
  EXPECT_EQ(run("verify --theorem T1 --psi genpoisson --n 5 --p 1").code, 2);
  EXPECT_EQ(run("verify --theorem T1 --n 5 --p 6").code, 2);
  EXPECT_EQ(run("verify --theorem T1 --n 5 --p 0").code, 2);
  EXPECT_EQ(run("verify --theorem T9 --n 5 --p 1").code, 2);
}

TEST(Cli, SweepCsv) {
  const auto r = run("sweep --theorem T1 --psi geometric --q 0.5 --s inf --n-from 4 --n-to 7 --p half --format csv");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("n,p,lhs,rhs_leading,budget1,budget2,ratio,status\n", 0), 0U);
  std::size_t lines = 0;
  for (char c : r.out) lines += c == '\n';
  EXPECT_EQ(lines, 5U);
  EXPECT_TRUE(has(r.out, "\n4,2,"));
  EXPECT_TRUE(has(r.out, "\n7,3,"));
}

TEST(Cli, SweepErrors) {
  EXPECT_EQ(run("sweep --theorem T1 --n-from 9 --n-to 3").code, 2);
  EXPECT_EQ(run("sweep --theorem T2 --n-from 3 --n-to 5").code, 2);
  EXPECT_EQ(run("sweep --theorem T4 --psi heat --q 0.5 --n-from 3 --n-to 5").code, 2);
  // most rows fail when p exceeds n
  EXPECT_EQ(run("sweep --theorem T1 --s 2 --n-from 1 --n-to 6 --p 5 --format csv").code, 4);
}

TEST(Cli, SweepByteIdentical) {
  const std::string args = "sweep --theorem T1 --psi geometric --q 0.6 --s 2 --n-from 5 --n-to 12 --p 2";
  const auto a = run(args + " --format csv");
  const auto b = run(args + " --format csv");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto ja = run(args);
  const auto jb = run(args);
  EXPECT_EQ(ja.out, jb.out);
  EXPECT_TRUE(has(ja.out, "\"schema\": \"vallee-lab/1\""));
  EXPECT_TRUE(has(ja.out, "\"rows\""));
}
