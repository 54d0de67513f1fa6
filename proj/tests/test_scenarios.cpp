#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dmpc/scenarios.hpp"

using namespace dmpc;

namespace {

CoopPoint constant_point(const Scenario& s, const std::vector<Vec>& samples) {
  CoopPoint pt;
  for (int i = 0; i < s.num_agents(); ++i) {
    PeriodicTrajectory y(s.task.T, static_cast<int>(samples[i].size()));
    for (int tau = 0; tau < s.task.T; ++tau) y.at(tau) = samples[i];
    pt.y.push_back(std::move(y));
  }
  return pt;
}

}  // namespace

TEST_CASE("satellite scenario pins references to the configured orbit") {
  const Scenario s = make_satellite_scenario();
  CHECK(s.num_agents() == 5);
  CHECK(s.task.N == 141);
  CHECK(s.task.T == 47);
  CHECK(s.terminal == TerminalMode::equality);
  CHECK(s.task.known_W0 == 0.0);
  CHECK(s.convex == false);
  CHECK(s.default_steps == 1500);

  const double omega = satellite_nominal_rate();
  const double radius = satellite_nominal_radius();
  for (const auto& a : s.agents) {
    CHECK(a.ref_state_box.lo(0) == a.ref_state_box.hi(0));
    CHECK(a.ref_state_box.lo(0) == doctest::Approx(radius).epsilon(1e-12));
    CHECK(a.ref_state_box.lo(2) == 0.0);
    CHECK(a.ref_state_box.hi(2) == 0.0);
    CHECK(a.ref_state_box.lo(3) == doctest::Approx(omega).epsilon(1e-15));
    CHECK(a.ref_state_box.lo(3) == a.ref_state_box.hi(3));
    CHECK(std::isinf(a.ref_state_box.lo(1)));
    CHECK(std::isinf(a.ref_state_box.hi(1)));
    CHECK(a.ref_input_box.lo.isZero());
    CHECK(a.ref_input_box.hi.isZero());
  }
  // lower agent index starts ahead on the orbit
  for (int i = 0; i + 1 < 5; ++i)
    CHECK(s.agents[i].x0(1) - s.agents[i + 1].x0(1) ==
          doctest::Approx(25.0 * M_PI / 180.0).epsilon(1e-12));

  CHECK(s.events.size() == 1);
  CHECK(s.events[0].kind == Event::Kind::remove_agents);
  CHECK(s.events[0].time == 750);
  CHECK(s.events[0].remove == std::vector<int>{1, 3});
  CHECK(s.events[0].rebuild_path);
  REQUIRE(bool(s.objective_factory));
  auto reduced = s.objective_factory(Graph::path(3));
  CHECK(reduced->num_agents() == 3);
}

TEST_CASE("satellite initial state is a zero-thrust equilibrium orbit") {
  for (int T : {47, 50}) {
    SatelliteParams p;
    p.T = T;
    p.N = 3 * T;
    const Scenario s = make_satellite_scenario(p);
    const auto& a = s.agents[2];
    const double omega = 2.0 * M_PI / (T * a.model.h);
    CHECK(a.x0(3) == doctest::Approx(omega).epsilon(1e-15));
    const Vec x1 = a.model.step(a.x0, Vec::Zero(2));
    CHECK(x1(0) == doctest::Approx(a.x0(0)).epsilon(1e-12));
    CHECK(x1(1) - a.x0(1) == doctest::Approx(omega * a.model.h).epsilon(1e-12));
    CHECK(std::abs(x1(2)) < 1e-6);
    CHECK(x1(3) == doctest::Approx(omega).epsilon(1e-12));
  }
}

TEST_CASE("satellite cooperation cost vanishes at the target spacing") {
  const Scenario s = make_satellite_scenario();
  const int T = s.task.T;
  const double omega = s.agents[0].x0(3);
  const double h = s.agents[0].model.h;
  const double off = 45.0 * M_PI / 180.0;

  CoopPoint spread;
  for (int i = 0; i < 5; ++i) {
    PeriodicTrajectory y(T, 1);
    for (int tau = 0; tau < T; ++tau) y.at(tau)(0) = -i * off + omega * h * tau;
    spread.y.push_back(std::move(y));
  }
  CHECK(eval_coop_cost(*s.task.objective, spread) == doctest::Approx(0.0).epsilon(1e-12));

  // the advancing trajectory satisfies the admissible-set rows including the
  // period seam
  for (int i = 0; i < 5; ++i) {
    const auto& rows = s.task.coop_set.rows[i];
    const Vec r = rows.A * spread.y[i].flatten();
    for (int k = 0; k < r.size(); ++k) {
      CHECK(r(k) >= rows.lo(k) - 1e-9);
      CHECK(r(k) <= rows.hi(k) + 1e-9);
    }
  }

  // at the initial 25 degree spacing the cost is T * sum_i |N_i|^2 / 2 * gap^2
  std::vector<Vec> init;
  for (int i = 0; i < 5; ++i) init.push_back(s.agents[i].x0.segment(1, 1));
  const double gap = (25.0 - 45.0) * M_PI / 180.0;
  const double expected = T * 0.5 * (1 + 4 + 4 + 4 + 1) * gap * gap;
  CHECK(eval_coop_cost(*s.task.objective, constant_point(s, init)) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("narrow path agents swap sides through a wall constraint") {
  const Scenario s = make_narrow_path_scenario();
  CHECK(s.num_agents() == 2);
  CHECK(s.task.N == 20);
  CHECK(s.task.T == 1);
  CHECK(s.terminal == TerminalMode::lqr);
  CHECK(s.default_steps == 240);

  CHECK(s.agents[0].x0(0) == -20.0);
  CHECK(s.agents[1].x0(0) == 20.0);
  CHECK(s.agents[0].ref_state_box.hi(0) == doctest::Approx(24.5));
  CHECK(s.agents[0].ref_input_box.hi(0) == doctest::Approx(1.96));

  // each target sits inside the admissible output box of its agent
  const Vec t0 = (Vec(2) << 20.0, 0.0).finished();
  const Vec t1 = (Vec(2) << -20.0, 0.0).finished();
  CHECK(s.task.coop_set.y_box[0].contains(t0));
  CHECK(s.task.coop_set.y_box[1].contains(t1));

  // zero cooperation cost exactly at the swapped positions
  CHECK(eval_coop_cost(*s.task.objective, constant_point(s, {t0, t1})) == 0.0);

  // at the start the pulls are active with the configured weights
  const Vec p0 = s.agents[0].x0.head(2);
  const Vec p1 = s.agents[1].x0.head(2);
  const double expected = 3000.0 * pseudo_huber(0.01, 1600.0);  // squared distance 40^2
  CHECK(eval_coop_cost(*s.task.objective, constant_point(s, {p0, p1})) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("narrow path corridor walls forbid exactly the wall region") {
  const Scenario s = make_narrow_path_scenario();
  const auto& model = s.agents[0].model;
  REQUIRE(model.extra.size() == 1);
  const auto& wall = model.extra[0];
  CHECK(wall.ref_margin == 0.05);

  const Vec u = Vec::Zero(2);
  auto at = [&](double x1, double x2) {
    Vec x = Vec::Zero(4);
    x(0) = x1;
    x(1) = x2;
    return wall.value(x, u);
  };
  CHECK(at(0.0, 0.0) == doctest::Approx(-0.5));    // inside the channel
  CHECK(at(0.0, 2.0) == doctest::Approx(1.5));     // inside a wall
  CHECK(at(10.0, 2.0) == doctest::Approx(-6.0));   // beyond the corridor span
  CHECK(at(3.9, 0.6) == doctest::Approx(0.1));     // wall corner region
  CHECK(at(4.2, 0.6) == doctest::Approx(-0.2));    // past the span, off channel

  // analytic gradient matches finite differences away from the kinks
  for (auto [x1, x2] : {std::pair{1.3, 0.8}, {-2.0, -0.3}, {3.0, 1.4}, {-3.5, -2.0}}) {
    Vec x = Vec::Zero(4);
    x(0) = x1;
    x(1) = x2;
    Vec gx, gu;
    wall.gradient(x, u, gx, gu);
    for (int c = 0; c < 4; ++c) {
      Vec xp = x, xm = x;
      xp(c) += 1e-6;
      xm(c) -= 1e-6;
      const double fd = (wall.value(xp, u) - wall.value(xm, u)) / 2e-6;
      CHECK(gx(c) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(gu.isZero());
  }

  // both starting states are feasible for every decoupled constraint
  for (const auto& a : s.agents) {
    const Vec res = a.model.path_residuals(a.x0, u);
    CHECK(res.maxCoeff() <= 0.0);
  }
}

TEST_CASE("quadrotor scenario switches from circle agreement to leader following") {
  const Scenario s = make_quadrotor_scenario();
  CHECK(s.num_agents() == 4);
  CHECK(s.task.N == 10);
  CHECK(s.task.T == 50);
  CHECK(s.task.objective->aux_dim(0) == 3);
  CHECK(s.task.coop_set.aux_box[0].lo(0) == 1.0);
  CHECK(s.task.coop_set.aux_box[0].hi(0) == 2.0);
  REQUIRE(s.task_bank.count("leader_follow") == 1);
  const TaskSpec& follow = s.task_bank.at("leader_follow");
  CHECK(follow.N == 30);
  CHECK(follow.T == 1);
  CHECK(follow.objective->time_varying());
  REQUIRE(s.events.size() == 1);
  CHECK(s.events[0].kind == Event::Kind::switch_task);
  CHECK(s.events[0].time == 350);
  CHECK(s.events[0].task == "leader_follow");

  // hover starts are equilibria and respect the collision distance
  std::vector<AgentModel> models;
  std::vector<Vec> x0, u0;
  for (const auto& a : s.agents) {
    models.push_back(a.model);
    x0.push_back(a.x0);
    u0.push_back(quadrotor_hover_input());
    const Vec x1 = a.model.step(a.x0, quadrotor_hover_input());
    CHECK((x1 - a.x0).norm() < 1e-9);
  }
  const ResidualReport rep = constraint_residuals(models, s.couplings, s.graph, x0, u0);
  CHECK(rep.max_violation == 0.0);
}

TEST_CASE("quadrotor circle cost reduces to the radius reward on a perfect circle") {
  const Scenario s = make_quadrotor_scenario();
  const int T = s.task.T;
  const double ph = 45.0 * M_PI / 180.0;
  const double c1 = 0.3, c2 = -0.2, z = 1.1;

  for (double r : {2.0, 1.5}) {
    CoopPoint pt;
    for (int i = 0; i < 4; ++i) {
      PeriodicTrajectory y(T, 3);
      for (int tau = 0; tau < T; ++tau) {
        const double ang = 2.0 * M_PI * tau / T + ph * i;
        y.at(tau) << c1 + r * std::cos(ang), c2 + r * std::sin(ang), z;
      }
      pt.y.push_back(std::move(y));
      pt.aux.push_back((Vec(3) << r, c1, c2).finished());
    }
    CHECK(eval_coop_cost(*s.task.objective, pt) ==
          doctest::Approx(4.0 * (2.0 - r)).epsilon(1e-11));
  }
}

TEST_CASE("quadrotor leader reference ramps between the switch and the end") {
  const Scenario s = make_quadrotor_scenario();
  const auto& follow = s.task_bank.at("leader_follow");

  auto all_at = [&](const Vec& y) {
    CoopPoint pt;
    for (int i = 0; i < 4; ++i) {
      PeriodicTrajectory traj(1, 3);
      traj.at(0) = y;
      pt.y.push_back(std::move(traj));
    }
    return pt;
  };

  const Vec at_switch = (Vec(3) << -10.0, -10.0, 0.0).finished();
  const Vec at_end = (Vec(3) << 10.0, 10.0, 0.0).finished();
  CHECK(eval_coop_cost(*follow.objective, all_at(at_switch), 350.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval_coop_cost(*follow.objective, all_at(at_end), 700.0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval_coop_cost(*follow.objective, all_at(at_end), 350.0) > 100.0);
}

TEST_CASE("oracle scenario is the all-quadratic baseline") {
  const Scenario s = make_double_integrator_oracle_scenario();
  CHECK(s.num_agents() == 3);
  CHECK(s.convex);
  CHECK(s.terminal == TerminalMode::equality);
  CHECK(s.task.N == 4);
  CHECK(s.couplings.empty());

  // m = 3, spacing 1: positions -1, 0, 1
  CHECK(s.agents[0].x0(0) == doctest::Approx(-1.0));
  CHECK(s.agents[1].x0(0) == doctest::Approx(0.0));
  CHECK(s.agents[2].x0(0) == doctest::Approx(1.0));

  std::vector<Vec> init;
  for (const auto& a : s.agents) init.push_back(a.x0.head(1));
  CHECK(eval_coop_cost(*s.task.objective, constant_point(s, init)) ==
        doctest::Approx(2.0).epsilon(1e-12));

  // per-agent decision block u(Nq) + y(Tp) + x_T(Tn) + u_T(Tq) of the
  // two-agent, horizon-two instance
  const Scenario tiny = make_double_integrator_oracle_scenario(2, 2);
  int dim = 0;
  for (int i = 0; i < tiny.num_agents(); ++i) {
    const auto& model = tiny.agents[i].model;
    dim += tiny.task.N * model.q + tiny.task.T * (model.p + model.n + model.q) +
           tiny.task.objective->aux_dim(i);
  }
  CHECK(dim == 12);
}

TEST_CASE("every built-in scenario passes the static audit") {
  for (const auto& name : builtin_scenarios()) {
    const Scenario s = make_scenario(default_config(name));
    const auto findings = s.audit();
    for (const auto& f : findings) MESSAGE(name, ": ", f);
    CHECK(findings.empty());
  }
}

TEST_CASE("audit flags degenerate configurations") {
  Scenario s = make_double_integrator_oracle_scenario();

  SUBCASE("reference pinned on the path boundary") {
    s.agents[0].ref_state_box.lo(0) = 50.0;
    s.agents[0].ref_state_box.hi(0) = 50.0;
    const auto findings = s.audit();
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].find("pinned value not strictly inside") != std::string::npos);
  }
  SUBCASE("initial state outside the path bounds") {
    s.agents[2].x0(0) = 60.0;
    const auto findings = s.audit();
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].find("initial state violates") != std::string::npos);
  }
  SUBCASE("scaling below the horizon bound") {
    s.scaling.lambda = [](int N) { return static_cast<double>(N); };
    const auto findings = s.audit();
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].find("scaling") != std::string::npos);
  }
  SUBCASE("nonpositive coupling margin") {
    s.couplings.push_back(make_min_distance_coupling(0, 1, {0}, 0.1, 0.0));
    const auto findings = s.audit();
    REQUIRE(findings.size() == 1);
    CHECK(findings[0].find("tightening margin") != std::string::npos);
  }
}

TEST_CASE("scenario validation rejects structural mismatches") {
  SUBCASE("initial state dimension") {
    Scenario s = make_double_integrator_oracle_scenario();
    s.agents[1].x0 = Vec::Zero(3);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("nonpositive input weight") {
    Scenario s = make_double_integrator_oracle_scenario();
    s.agents[0].r_diag(0) = 0.0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("coupling row count against the owner degree") {
    Scenario s = make_double_integrator_oracle_scenario();
    s.couplings.push_back(make_min_distance_coupling(0, 5, {0}, 0.1, 0.05));
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("switch event without a bank entry") {
    Scenario s = make_double_integrator_oracle_scenario();
    Event e;
    e.kind = Event::Kind::switch_task;
    e.time = 10;
    e.task = "missing";
    s.events.push_back(e);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("event times must increase") {
    Scenario s = make_satellite_scenario();
    Event e = s.events[0];
    e.time = 750;
    s.events.push_back(e);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
  SUBCASE("removal without an objective factory") {
    Scenario s = make_double_integrator_oracle_scenario();
    Event e;
    e.kind = Event::Kind::remove_agents;
    e.time = 10;
    e.remove = {0};
    s.events.push_back(e);
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  }
}

TEST_CASE("change penalty follows the delta = coeff / T rule") {
  const Scenario sat = make_satellite_scenario();
  const ChangePenalty pen = make_change_penalty(sat.delta_coeff, sat.agents, sat.task.T);
  REQUIRE(pen.delta.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(pen.delta(i) == doctest::Approx(1e-4 / 47.0));
  REQUIRE(pen.angle.size() == 5);
  CHECK(pen.angle[0] == std::vector<int>{0});  // the output angle lives on the circle

  const Scenario np = make_narrow_path_scenario();
  const ChangePenalty pen2 = make_change_penalty(np.delta_coeff, np.agents, np.task.T);
  CHECK(pen2.delta(0) == doctest::Approx(1e-4));
  CHECK(pen2.angle[0].empty());

  CHECK_THROWS_AS(make_change_penalty(0.0, np.agents, 1), std::invalid_argument);
}

TEST_CASE("config serialization round-trips and rejects malformed input") {
  for (const auto& name : builtin_scenarios()) {
    const ScenarioConfig c = default_config(name);
    CHECK(config_from_json(config_to_json(c)) == c);
  }

  const auto path =
      (std::filesystem::temp_directory_path() / "dmpc_config_roundtrip.json").string();
  const ScenarioConfig c = default_config("narrow_path");
  save_scenario_config(c, path);
  CHECK(load_scenario_config(path) == c);
  std::remove(path.c_str());

  auto error_of = [](const nlohmann::json& j) {
    try {
      config_from_json(j);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of({{"scenario", "warp_drive"}}).find("unknown scenario") != std::string::npos);
  CHECK(error_of({{"steps", 10}}).find("config.scenario") != std::string::npos);
  CHECK(error_of({{"scenario", "satellite"}, {"steps", -3}}).find("config.steps") !=
        std::string::npos);
  CHECK(error_of({{"scenario", "satellite"}, {"params", 7}}).find("config.params") !=
        std::string::npos);
  CHECK(error_of({{"scenario", "satellite"}, {"plots", true}}).find("config.plots") !=
        std::string::npos);

  CHECK_THROWS_AS(default_config("warp_drive"), std::invalid_argument);
}

TEST_CASE("make_scenario applies overrides and names bad fields") {
  ScenarioConfig c;
  c.scenario = "double_integrator_oracle";
  c.params = {{"m", 4}, {"N", 6}};
  Scenario s = make_scenario(c);
  CHECK(s.num_agents() == 4);
  CHECK(s.task.N == 6);
  CHECK(s.default_steps == 60);

  c.steps = 10;
  CHECK(make_scenario(c).default_steps == 10);

  auto error_of = [](const ScenarioConfig& cfg) {
    try {
      make_scenario(cfg);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };

  ScenarioConfig bad;
  bad.scenario = "narrow_path";
  bad.params = {{"min_distance", "wide"}};
  CHECK(error_of(bad).find("params.min_distance: expected a number") != std::string::npos);

  bad.params = {{"frobnicate", 1}};
  CHECK(error_of(bad).find("params.frobnicate: unknown key") != std::string::npos);

  bad.scenario = "satellite";
  bad.params = {{"T", 20}};  // outside the band the rate bounds admit
  CHECK(error_of(bad).find("params.T: must be in [43, 52]") != std::string::npos);

  bad.params = {{"N", 3.5}};
  CHECK(error_of(bad).find("params.N: expected an integer") != std::string::npos);

  // defaults materialize to the same scenarios as the plain factories
  const Scenario direct = make_quadrotor_scenario();
  const Scenario via = make_scenario(default_config("quadrotor"));
  CHECK(via.num_agents() == direct.num_agents());
  CHECK(via.task.N == direct.task.N);
  CHECK(via.task.T == direct.task.T);
  CHECK(via.default_steps == direct.default_steps);
}
