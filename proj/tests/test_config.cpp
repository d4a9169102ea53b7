#include <doctest.h>

#include <string>

#include "dipole/config.hpp"
#include "dipole/error.hpp"

using namespace dipole;

namespace {

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_argument);
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("default configuration round trips through text") {
  const RunConfig c;
  CHECK(validation_errors(c).empty());
  const RunConfig back = parse_config(to_text(c));
  CHECK(back == c);
  CHECK(to_text(back) == to_text(c));
}

TEST_CASE("edited configuration round trips losslessly") {
  RunConfig c;
  set_key(c, "L", "8");
  set_key(c, "epsilon", "0.012345678901234567");
  set_key(c, "beta", "205.31415926535897");
  set_key(c, "seed", "18446744073709551615");
  set_key(c, "start", "ordered");
  set_key(c, "cd_betas", "10, 20.5, 1e3");
  set_key(c, "tol.zero", "3.3e-7");
  set_key(c, "simulate_gd", "true");
  set_key(c, "out", "some dir/out");
  const RunConfig back = parse_config(to_text(c));
  CHECK(back == c);
  CHECK_FALSE(back.epsilon_auto);
  CHECK(back.epsilon == 0.012345678901234567);
  CHECK(back.mc.beta == 205.31415926535897);
  CHECK(back.mc.seed == 18446744073709551615ull);
  CHECK(back.mc.start == StartKind::ordered);
  CHECK(back.cd_betas.size() == 3);
  CHECK(back.tolerance("zero") == 3.3e-7);
  CHECK(back.out == "some dir/out");
}

TEST_CASE("automatic epsilon follows L") {
  RunConfig c;
  set_key(c, "L", "8");
  CHECK(c.epsilon_auto);
  CHECK(c.spec().epsilon() == doctest::Approx(1.0 / 16.0));
  set_key(c, "epsilon", "0.25");
  CHECK(c.spec().epsilon() == 0.25);
  set_key(c, "epsilon", "auto");
  CHECK(c.spec().epsilon() == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("comments and blank lines are ignored") {
  const RunConfig c = parse_config("# sweep\n\n  L = 2   # small box\nbeta=7\n");
  CHECK(c.L == 2);
  CHECK(c.mc.beta == 7.0);
}

TEST_CASE("unknown keys are rejected") {
  RunConfig c;
  CHECK_THROWS_AS(set_key(c, "lattice_size", "4"), Error);
  CHECK_THROWS_AS(set_key(c, "tol.nonexistent", "1"), Error);
  CHECK(message_of("L = 2\nbogus = 1\n").find("bogus") != std::string::npos);
}

TEST_CASE("every problem is reported at once") {
  const std::string m = message_of("dim = 9\nL = x\nfoo = 1\nbeta = -1\nchains = 0\nno equals sign\n");
  CHECK(m.find("line 2") != std::string::npos);
  CHECK(m.find("line 3") != std::string::npos);
  CHECK(m.find("line 6") != std::string::npos);
  CHECK(m.find("dim") != std::string::npos);
  CHECK(m.find("beta") != std::string::npos);
  CHECK(m.find("chains") != std::string::npos);
}

TEST_CASE("semantic validation lists each violation") {
  RunConfig c;
  c.dim = 2;
  c.L = 1;
  c.kernel_tol = -1;
  c.quad_n0 = 64;
  c.quad_n_max = 16;
  const auto errors = validation_errors(c);
  CHECK(errors.size() >= 4);
  CHECK_THROWS_AS(validate(c), Error);
}

TEST_CASE("flags override values read from a file") {
  RunConfig c = parse_config("L = 2\nbeta = 3\n");
  set_key(c, "beta", "9");
  CHECK(c.L == 2);
  CHECK(c.mc.beta == 9.0);
}
