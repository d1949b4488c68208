#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "kamtori/diophantine.hpp"
#include "kamtori/survey.hpp"

using namespace kamtori;

namespace {

ProblemSetup free_setup() {
  ProblemSetup s = fixtures::desk_setup(1e-4);
  s.f.reset();
  return s;
}

std::string csv(const SurveyReport& r) {
  std::ostringstream os;
  write_survey_csv(os, r);
  return os.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("golden family keeps the golden ratio") {
  const auto fam = golden_family(5, 0.1);
  REQUIRE(fam.size() == 5);
  CHECK(fam.front()[0] == doctest::Approx(0.9));
  CHECK(fam[2] == golden_vector(2));
  CHECK(fam.back()[0] == doctest::Approx(1.1));
  for (const auto& w : fam) CHECK(w[1] / w[0] == doctest::Approx(golden_vector(2)[1]));
}

TEST_CASE("f = 0 survey has zero Lipschitz constants") {
  const auto fam = golden_family(3, 0.1);
  const SurveyReport r =
      survey(free_setup(), fam, {1e-4}, fixtures::desk_schedule(Mode::Practical), fixtures::desk_options());
  CHECK(r.all_converged());
  REQUIRE(r.lipschitz.size() == 1);
  CHECK(*r.lipschitz[0].gamma == 0.0);
  CHECK(*r.lipschitz[0].phi == 0.0);
  CHECK(*r.lipschitz[0].torus == *r.lipschitz[0].inverse_gradient);
  CHECK(!r.slope_gamma);
  const auto rows = measure_report(frequency_box(free_setup()), 2, {0.02}, 50, 64, *r.lipschitz[0].torus);
  CHECK(rows[0].transfer_factor == std::pow(1.0 + *r.lipschitz[0].inverse_gradient, 2));
}

TEST_CASE("a single frequency gives n/a Lipschitz columns") {
  const SurveyReport r = survey(free_setup(), {golden_vector(2)}, {1e-4},
                                fixtures::desk_schedule(Mode::Practical), fixtures::desk_options());
  CHECK(!r.lipschitz[0].gamma);
  const std::string s = csv(r);
  CHECK(count_lines(s) == 2);
  CHECK(s.find("n/a") != std::string::npos);
}

TEST_CASE("failures are isolated per frequency") {
  // the second frequency lies outside grad h(B)
  const std::vector<RealVec> w{golden_vector(2), {3.0, 0.6}, golden_vector(2, 1.05)};
  const SurveyReport r =
      survey(free_setup(), w, {1e-4, 1e-5}, fixtures::desk_schedule(Mode::Practical), fixtures::desk_options());
  CHECK(r.runs.size() == 6);
  CHECK(!r.all_converged());
  CHECK(r.runs[1].status.rfind("failed: ", 0) == 0);
  CHECK(r.runs[0].converged());
  CHECK(r.lipschitz[0].usable == 2);
  CHECK(count_lines(csv(r)) == 7);
}

TEST_CASE("survey output does not depend on the thread count") {
  RunOptions o = fixtures::desk_options();
  o.max_j = 1;
  const auto fam = golden_family(3, 0.05);
  const auto sp = fixtures::desk_schedule(Mode::Practical);
  const std::string a = csv(survey(fixtures::desk_setup(1e-4), fam, {1e-4}, sp, o, 1));
  const std::string b = csv(survey(fixtures::desk_setup(1e-4), fam, {1e-4}, sp, o, 3));
  CHECK(a == b);
}

TEST_CASE("measure report") {
  FrequencyDomain dom{{1.0, 1.0}, {2.0, 2.0}, 0.0, 1.5, true};
  const auto rows = measure_report(dom, 2, {0.0, 0.01, 0.02}, 100, 128, 0.5);
  CHECK(rows[0].measure_complement == 0.0);
  CHECK(rows[0].phase_space_estimate == 0.0);
  CHECK(rows[1].measure_complement < rows[2].measure_complement);
  CHECK(rows[2].transfer_factor == 2.25);
  CHECK(rows[2].phase_space_estimate ==
        doctest::Approx(4 * M_PI * M_PI * rows[2].measure_complement * 2.25));
  std::ostringstream os;
  write_phase_measure_csv(os, rows);
  CHECK(os.str().rfind("gamma,tau,K,grid,measure_complement,transfer_factor,phase_space_estimate\n", 0) == 0);
}

TEST_CASE("frequency box of the kinetic h is the ball") {
  const FrequencyDomain d = frequency_box(free_setup());
  CHECK(d.lo[0] == 0.5);
  CHECK(d.lo[1] == doctest::Approx(0.1));
  CHECK(d.hi[0] == 1.5);
  CHECK(d.hi[1] == doctest::Approx(1.1));
}
