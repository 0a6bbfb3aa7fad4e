#include "dsslab/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "dsslab/fields_norms.hpp"
#include "dsslab/physical.hpp"
#include "dsslab/pressure.hpp"
#include "dsslab/similarity.hpp"
#include "dsslab/stationary.hpp"
#include "dsslab/swirl.hpp"

namespace dsslab {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Mode m) { return m == Mode::SS ? "ss" : "dss"; }

Mode mode_from_string(const std::string& s) {
  if (s == "ss") return Mode::SS;
  if (s == "dss") return Mode::DSS;
  throw ConfigError("unknown mode '" + s + "' (expected ss or dss)");
}

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(lambda > 1, "lambda must exceed 1");
  need(delta > 0 && delta < 1, "delta must lie in (0, 1)");
  need(tol > 0 && newton_tol > 0, "tolerances must be positive");
  need(L > 0, "box half-width must be positive");
  need(N >= 16 && N % 2 == 0, "grid size N must be even and at least 16");
  need(k >= 1, "basis size k must be at least 1");
  need(sigma > 0 && spacing > 0, "basis width and spacing must be positive");
  need(epsilon > 0, "mollifier epsilon must be positive");
  need(amplitude >= 0 && aux_amplitude >= 0, "amplitudes must be nonnegative");
  need(data == "canonical" || data == "homogeneous" || data == "dss",
       "data must be canonical, homogeneous or dss");
  need(!(mode == Mode::SS && data == "dss"), "self-similar mode needs homogeneous data");
  need(system != System::NS, "runs use the mhd or vnsed system");
  need(slices >= 2, "at least two background slices are required");
  need(steps >= 16, "at least 16 integrator steps per period are required");
  need(cubic_samples >= 1 && trap_starts >= 1 && sphere_samples >= 1, "sample counts must be positive");
  need(pressure_slices >= 1, "at least one pressure slice is required");
  need(pad >= 1, "padding factor must be at least 1");
  need(heat_quad >= 8, "heat quadrature needs at least 8 points per axis");
  need(lei_nodes >= 4, "at least four s nodes are required");
  need(!output.empty(), "output directory must be set");
}

json RunConfig::to_json() const {
  return json{{"system", dsslab::to_string(system)},
              {"mode", dsslab::to_string(mode)},
              {"lambda", lambda},
              {"L", L},
              {"N", N},
              {"k", k},
              {"layout", dsslab::to_string(layout)},
              {"sigma", sigma},
              {"spacing", spacing},
              {"epsilon", epsilon},
              {"delta", delta},
              {"data", data},
              {"amplitude", amplitude},
              {"aux_amplitude", aux_amplitude},
              {"data_seed", data_seed},
              {"slices", slices},
              {"steps", steps},
              {"tol", tol},
              {"newton_tol", newton_tol},
              {"seed", seed},
              {"cubic_samples", cubic_samples},
              {"trap_starts", trap_starts},
              {"sphere_samples", sphere_samples},
              {"pressure_slices", pressure_slices},
              {"pad", pad},
              {"heat_quad", heat_quad},
              {"lei_nodes", lei_nodes},
              {"physical", physical},
              {"cross_check", cross_check},
              {"embeddings", embeddings},
              {"cache", cache},
              {"output", output}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    c.system = system_from_string(j.at("system").get<std::string>());
    c.mode = mode_from_string(j.at("mode").get<std::string>());
    c.layout = layout_from_string(j.at("layout").get<std::string>());
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("lambda", c.lambda);
  get("L", c.L);
  get("N", c.N);
  get("k", c.k);
  get("sigma", c.sigma);
  get("spacing", c.spacing);
  get("epsilon", c.epsilon);
  get("delta", c.delta);
  get("data", c.data);
  get("amplitude", c.amplitude);
  get("aux_amplitude", c.aux_amplitude);
  get("data_seed", c.data_seed);
  get("slices", c.slices);
  get("steps", c.steps);
  get("tol", c.tol);
  get("newton_tol", c.newton_tol);
  get("seed", c.seed);
  get("cubic_samples", c.cubic_samples);
  get("trap_starts", c.trap_starts);
  get("sphere_samples", c.sphere_samples);
  get("pressure_slices", c.pressure_slices);
  get("pad", c.pad);
  get("heat_quad", c.heat_quad);
  get("lei_nodes", c.lei_nodes);
  get("physical", c.physical);
  get("cross_check", c.cross_check);
  get("embeddings", c.embeddings);
  get("cache", c.cache);
  get("output", c.output);
  return c;
}

std::string RunConfig::table_key() const {
  std::ostringstream os;
  os << std::setprecision(17) << "dsslab-tables/1|" << dsslab::to_string(system) << '|' << dsslab::to_string(mode)
     << '|' << lambda << '|' << L << '|' << N << '|' << k << '|' << dsslab::to_string(layout) << '|' << sigma << '|'
     << spacing << '|' << epsilon << '|' << delta << '|' << data << '|' << amplitude << '|' << aux_amplitude << '|'
     << data_seed << '|' << slices;
  return os.str();
}

std::string content_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Multiple of the solve tolerance allowed between reduced systems.
constexpr double kCrossFactor = 10.0;

// ----- problem setup -----

struct Problem {
  RunConfig cfg;
  Grid grid;
  std::unique_ptr<Spectral> sp;
  double period = 0;
  std::unique_ptr<CutoffBackground> W;
  std::vector<std::unique_ptr<CutoffBackground>> aux;
  std::vector<const CutoffBackground*> aux_ptr;
  std::unique_ptr<GalerkinBasis> basis;
  CoeffTables tab;
  EnergyBudget budget;
};

SwirlData velocity_data(const RunConfig& c) {
  if (c.data == "canonical") return SwirlData::canonical(c.amplitude);
  if (c.data == "homogeneous") return make_homogeneous_data(c.data_seed, c.amplitude, Grid(c.L, 16)).swirl;
  return make_swirl_dss(c.data_seed, c.amplitude, c.lambda);
}

// Magnetic-type data: one swirl about e_1 for MHD; columns about e_1, e_2, e_3 with halving amplitudes for vNSEd.
std::vector<SwirlData> aux_data(const RunConfig& c, System sys) {
  std::vector<SwirlData> out;
  for (int n = 0; n < aux_count(sys); ++n) {
    SwirlData d;
    Vec3 axis{0, 0, 0};
    axis[n] = 1.0;
    d.terms.push_back({axis, c.aux_amplitude / std::pow(2.0, n), 0.0, 0.0});
    out.push_back(d);
  }
  return out;
}

std::unique_ptr<CutoffBackground> make_background(const SwirlData& d, const Problem& p) {
  const int slices = p.cfg.mode == Mode::SS ? 1 : p.cfg.slices;
  if (d.is_zero()) return std::make_unique<CutoffBackground>(CutoffBackground::zero(p.grid, p.period, slices));
  HeatBackground hb(std::make_shared<SwirlBackground>(d), p.grid, p.period, slices);
  CutoffOptions opt;
  opt.delta = p.cfg.delta;
  return std::make_unique<CutoffBackground>(CutoffBackground::build(hb, opt));
}

CoeffTables cached_tables(const Problem& p, const CutoffBackground& W,
                          const std::vector<const CutoffBackground*>& aux, System sys, const std::string& tag,
                          json& info) {
  const std::string key = p.cfg.table_key() + "|" + tag + "|" + dsslab::to_string(sys);
  const std::string hash = content_hash(key);
  info["key_hash"] = hash;
  const fs::path dir = fs::path(p.cfg.output) / "cache";
  const fs::path file = dir / ("tables-" + hash + ".bin");
  CoeffTables tab;
  if (p.cfg.cache && fs::exists(file) && load_tables(file.string(), key, tab)) {
    return tab;
  }
  tab = assemble_tables(*p.basis, W, aux, sys);
  tab.period = p.period;
  if (p.cfg.cache) {
    fs::create_directories(dir);
    save_tables(file.string(), tab, key);
  }
  return tab;
}

void say(std::ostream* log, const std::string& msg) {
  if (log) *log << "[dsslab] " << msg << std::endl;
}

template <class F>
auto stage(const std::string& name, std::ostream* log, F&& fn) -> decltype(fn()) {
  say(log, name);
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(name, e.what(), kConfigError);
  } catch (const CutoffError& e) {
    throw StageError(name, e.what(), kConfigError);
  } catch (const ArgumentError& e) {
    throw StageError(name, e.what(), kConfigError);
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), kNonConvergence);
  }
}

// ----- solve helpers -----

struct SolveOutcome {
  Eigen::VectorXd state;
  bool converged = false;
  double residual = 0;
};

SolveOutcome solve_system(const CoeffTables& tab, const EnergyBudget& b, const RunConfig& cfg) {
  SolveOutcome o;
  if (tab.stationary()) {
    const StationaryReport r = solve_stationary(tab, b.C2, cfg.newton_tol);
    o.state = r.x;
    o.converged = r.converged;
    o.residual = r.residual;
  } else {
    FixedPointOptions fo;
    fo.tol = cfg.tol;
    fo.steps = cfg.steps;
    const OrbitResult r = poincare_fixed_point(tab, b, fo);
    o.state = r.start;
    o.converged = r.converged;
    o.residual = r.fixed_point_residual;
  }
  return o;
}

json orbit_json(const OrbitResult& o, const EnergyBudget& b, const CoeffTables& tab, const RunConfig& cfg) {
  json j;
  j["converged"] = o.converged;
  j["status"] = o.status;
  j["iterations"] = o.iterations;
  j["newton_steps"] = o.newton_steps;
  j["projections"] = o.projections;
  j["fixed_point_residual"] = o.fixed_point_residual;
  j["halving_error"] = o.halving_error;
  const Eigen::VectorXd fine = period_map(o.start, tab, 2 * cfg.steps);
  j["reintegration_residual"] = (fine - o.start).norm();
  j["start"] = to_vec(o.start);
  j["rho"] = b.rho;
  j["method"] = "damped Poincare iteration with quasi-Newton steps on stall; RK4";
  return j;
}

json audit_json(const EnergyAudit& a, const OrbitResult& o) {
  json j{{"identity_max_error", a.identity_max_error},
         {"identity_tolerance", a.identity_tolerance},
         {"identity_ok", a.identity_ok},
         {"inequality_worst", a.inequality_worst},
         {"inequality_ok", a.inequality_ok},
         {"dissipation_integral", a.dissipation_integral},
         {"dissipation_bound", a.dissipation_bound},
         {"dissipation_ok", a.dissipation_ok},
         {"method", "sixth-order centred differences of E; tolerance 10x the step-halving change plus 1e-12 scale"}};
  j["trace"] = json{{"s", o.s}, {"energy", o.energy}, {"rhs_dE", o.rhs_dE}, {"dissipation", o.dissipation}};
  return j;
}

double max_cubic_ratio(const CoeffTables& tab, int samples, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g01;
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd x(tab.dim());
    for (int c = 0; c < x.size(); ++c) x[c] = g01(rng);
    x *= std::pow(10.0, -2.0 + 4.0 * (i % 5) / 4.0);
    const double n = x.norm();
    worst = std::max(worst, std::abs(cubic_energy_contribution(x, tab)) / (n * n * n));
  }
  return worst;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg, std::ostream* log, bool write_files) {
  cfg.validate();
  PipelineResult res;
  json& R = res.report;
  R["report_version"] = kReportVersion;
  R["config"] = cfg.to_json();
  R["config_hash"] = content_hash(cfg.to_json().dump());

  Problem p;
  p.cfg = cfg;
  const SimilarityMap map(cfg.lambda);
  p.period = map.period();
  const System sys = cfg.system;

  stage("background", log, [&] {
    p.grid = Grid(cfg.L, cfg.N);
    p.sp = std::make_unique<Spectral>(p.grid);
    p.W = make_background(velocity_data(cfg), p);
    for (const SwirlData& d : aux_data(cfg, sys)) p.aux.push_back(make_background(d, p));
    for (auto& a : p.aux) p.aux_ptr.push_back(a.get());
    json b{{"R0", p.W->R0()},
           {"slices", p.W->slices()},
           {"sup_lq", p.W->sup_lq()},
           {"sup_l4", p.W->sup_l4()},
           {"sup_lw_hm1", p.W->sup_lw_hm1()},
           {"div_max", p.W->sup_div()},
           {"periodic_spectral_div_max", max_abs(p.sp->divergence(p.W->slice(0).W))},
           {"corrector_max", p.W->corrector_max()},
           {"method", "analytic divergence of the cutoff part plus spectral divergence of the corrector"}};
    json aux = json::array();
    for (const auto* a : p.aux_ptr)
      aux.push_back({{"R0", a->R0()}, {"sup_lq", a->sup_lq()}, {"div_max", a->sup_div()}});
    b["aux"] = aux;
    R["background"] = b;
    return 0;
  });

  stage("basis", log, [&] {
    BasisOptions bo;
    bo.k = cfg.k;
    bo.layout = cfg.layout;
    bo.sigma = cfg.sigma;
    bo.spacing = cfg.spacing;
    p.basis = std::make_unique<GalerkinBasis>(build_basis(*p.sp, bo, cfg.epsilon));
    R["basis"] = {{"k", p.basis->k()},
                  {"requested", p.basis->requested},
                  {"dropped", p.basis->dropped},
                  {"gram_residual", p.basis->gram_residual},
                  {"div_max", p.basis->div_max},
                  {"molli_div_max", p.basis->molli_div_max},
                  {"epsilon", p.basis->epsilon}};
    return 0;
  });

  stage("tables", log, [&] {
    json info;
    p.tab = cached_tables(p, *p.W, p.aux_ptr, sys, "main", info);
    p.budget = EnergyBudget::make(forcing_norm_c2(*p.W, p.aux_ptr, sys), sys, p.period);
    info["C2"] = p.budget.C2;
    info["decay_rate"] = p.budget.decay_rate;
    info["rho"] = p.budget.rho;
    info["dim"] = p.tab.dim();
    R["tables"] = info;
    R["cubic"] = {{"samples", cfg.cubic_samples},
                  {"max_ratio", max_cubic_ratio(p.tab, cfg.cubic_samples, cfg.seed + 1)},
                  {"method", "|x . Q(x)| / |x|^3 over random states spanning four decades"}};
    return 0;
  });

  bool converged = true;
  Eigen::VectorXd xstar;
  OrbitResult orbit;

  if (cfg.mode == Mode::SS) {
    stage("stationary", log, [&] {
      const StationaryReport st = solve_stationary(p.tab, p.budget.C2, cfg.newton_tol);
      const SphereCertificate sc = sphere_certificate(p.tab, p.budget.C2, cfg.sphere_samples, cfg.seed + 2);
      R["stationary"] = {{"converged", st.converged},
                         {"status", st.status},
                         {"iterations", st.iterations},
                         {"gradient_steps", st.gradient_steps},
                         {"residual", st.residual},
                         {"norm", st.norm},
                         {"sphere_radius", st.sphere_radius},
                         {"state", to_vec(st.x)},
                         {"certificate",
                          {{"samples", sc.samples},
                           {"worst", sc.worst},
                           {"worst_sign", sc.worst_sign},
                           {"worst_cubic", sc.worst_cubic},
                           {"limit", sc.limit}}}};
      converged = converged && st.converged;
      xstar = st.x;
      return 0;
    });
  }

  stage("orbit", log, [&] {
    FixedPointOptions fo;
    fo.tol = cfg.tol;
    fo.steps = cfg.steps;
    orbit = poincare_fixed_point(p.tab, p.budget, fo);
    converged = converged && orbit.converged;
    json o = orbit_json(orbit, p.budget, p.tab, cfg);
    o["energy_audit"] = audit_json(energy_audit(orbit, p.tab, p.budget), orbit);
    // A transient orbit from a random start in the trap ball exercises the identity away from the fixed point.
    std::mt19937_64 rng(cfg.seed + 3);
    std::normal_distribution<double> g01;
    Eigen::VectorXd x0(p.tab.dim());
    for (int i = 0; i < x0.size(); ++i) x0[i] = g01(rng);
    if (x0.norm() > 0) x0 *= 0.5 * p.budget.rho / x0.norm();
    const OrbitResult tr = integrate_period(x0, p.tab, cfg.steps, true);
    o["transient_audit"] = audit_json(energy_audit(tr, p.tab, p.budget), tr);
    R["orbit"] = o;
    if (write_files) {
      fs::create_directories(cfg.output);
      write_orbit_csv((fs::path(cfg.output) / "orbit.csv").string(), orbit);
    }
    if (cfg.mode == Mode::DSS) xstar = orbit.start;
    return 0;
  });

  stage("trap", log, [&] {
    const TrapReport t = trap_test(p.tab, p.budget, cfg.trap_starts, cfg.seed + 4, cfg.steps);
    R["trap"] = {{"starts", t.starts},
                 {"violations", t.violations},
                 {"worst_margin", t.worst_margin},
                 {"slack", t.slack},
                 {"projections", orbit.projections},
                 {"fixed_point_converged", orbit.converged}};
    return 0;
  });

  if (cfg.cross_check) {
    stage("cross_system", log, [&] {
      // MHD with the first magnetic-type field, vNSEd with (that field, 0, 0), MHD without it, and NS.
      const CutoffBackground zero = CutoffBackground::zero(p.grid, p.period, p.W->slices());
      const CutoffBackground* first = p.aux_ptr.empty() ? &zero : p.aux_ptr[0];
      json info;
      auto run = [&](System s, std::vector<const CutoffBackground*> aux, const std::string& tag) {
        json ti;
        CoeffTables t = cached_tables(p, *p.W, aux, s, tag, ti);
        const EnergyBudget b = EnergyBudget::make(forcing_norm_c2(*p.W, aux, s), s, p.period);
        SolveOutcome o = solve_system(t, b, cfg);
        info[tag] = {{"converged", o.converged}, {"residual", o.residual}};
        return o;
      };
      const SolveOutcome mhd = run(System::MHD, {first}, "cross_mhd");
      const SolveOutcome vns = run(System::VNSED, {first, &zero, &zero}, "cross_vnsed");
      const SolveOutcome mhd0 = run(System::MHD, {&zero}, "cross_mhd_zero");
      const SolveOutcome ns = run(System::NS, {}, "cross_ns");
      const int k = p.basis->k();
      const double d_vns = (vns.state.head(2 * k) - mhd.state).cwiseAbs().maxCoeff();
      const double tail_vns = vns.state.tail(2 * k).cwiseAbs().maxCoeff();
      const double d_ns = (mhd0.state.head(k) - ns.state).cwiseAbs().maxCoeff();
      const double mag_ns = mhd0.state.tail(k).cwiseAbs().maxCoeff();
      const double tol = cfg.mode == Mode::SS ? cfg.newton_tol : cfg.tol;
      info["vnsed_vs_mhd_max_diff"] = d_vns;
      info["vnsed_unused_columns_max"] = tail_vns;
      info["mhd_zero_vs_ns_max_diff"] = d_ns;
      info["mhd_zero_magnetic_max"] = mag_ns;
      info["tolerance"] = kCrossFactor * tol;
      info["all_converged"] = mhd.converged && vns.converged && mhd0.converged && ns.converged;
      R["cross_system"] = info;
      return 0;
    });
  }

  stage("pressure", log, [&] {
    const Grid& g = p.grid;
    json pj;
    pj["idempotence_defect"] = riesz_idempotence_defect(g);
    const PressureBoundAudit a = pressure_bound_audit(*p.basis, *p.W, p.aux_ptr, orbit, cfg.pressure_slices, cfg.pad);
    pj["bound"] = {{"p_norm", a.p_norm},
                   {"rhs", a.rhs},
                   {"ratio", a.ratio},
                   {"W_norm", a.W_norm},
                   {"W_bound", a.W_bound},
                   {"W_ok", a.W_ok},
                   {"W_bound_display", a.W_bound_display},
                   {"aux_norms", a.aux_norms},
                   {"aux_ok", a.aux_ok},
                   {"slices", a.slices}};
    pj["poisson_residual"] = a.max_poisson_residual;
    const InterpolationAudit ia = interpolation_audit(*p.basis, orbit);
    pj["interpolation"] = {{"lhs", ia.lhs},           {"rhs", ia.rhs},         {"linf_l2", ia.linf_l2},
                           {"l2_h1", ia.l2_h1},       {"c_sob", ia.c_sob},     {"measured_sob", ia.measured_sob},
                           {"ok", ia.ok}};
    // Shear flow (periodic) and u = a give zero pressure.
    StressFields sh;
    sh.U = sample(g, [&](const Vec3& y) { return Vec3{std::sin(M_PI * y[1] / g.L), 0, 0}; });
    sh.Um = sh.U;
    sh.W = VecArray(g.size());
    pj["shear_p_max"] = max_abs(riesz_pressure(g, sh, 1).values);
    const int k = p.basis->k();
    Eigen::VectorXd xa(2 * k);
    xa.head(k) = xstar.head(k);
    xa.tail(k) = xstar.head(k);
    const StressFields ua = stress_fields(*p.basis, *p.W, {p.W.get()}, xa, 0.0);
    const PressureField pua = riesz_pressure(g, ua, cfg.pad);
    pj["u_equals_a_p_max"] = max_abs(pua.values);
    pj["method"] = "Riesz pair multipliers on a zero-padded grid; mean-zero gauge on the box";
    R["pressure"] = pj;
    return 0;
  });

  if (cfg.physical) {
    stage("physical", log, [&] {
      SolutionCandidate c = cfg.mode == Mode::SS
                                ? reconstruct_stationary(xstar, sys, *p.basis, *p.W, p.aux_ptr, map, true, cfg.pad)
                                : reconstruct(orbit, p.tab, *p.basis, *p.W, p.aux_ptr, map, cfg.pressure_slices, cfg.pad);
      json ph;
      const auto probes = default_probe_set(cfg.lambda);
      double vmax = 0;
      for (const auto& pr : probes) vmax = std::max(vmax, norm(c.velocity(pr.x, pr.t)));
      ph["dss_defect"] = dss_defect([&](const Vec3& x, double t) { return c.velocity(x, t); }, cfg.lambda, probes);
      ph["probe_velocity_max"] = vmax;
      const HeatDistanceReport hd = distance_to_heat_flow(c, 0.5, 3, 2, cfg.heat_quad);
      ph["heat_distance"] = {{"t", hd.t},
                             {"g", hd.g},
                             {"max_ratio_error", hd.max_ratio_error},
                             {"envelope", hd.envelope},
                             {"envelope_spread", hd.envelope_spread},
                             {"C0", hd.C0},
                             {"quad_points", hd.quad_points}};
      const LocalEnergyReport le = local_energy_report(c, {0.5, 1.0}, hd.C0);
      json rows = json::array();
      for (const auto& r : le.rows)
        rows.push_back({{"R", r.R},
                        {"x0_norm", norm(r.x0)},
                        {"energy_sup", r.energy_sup},
                        {"enstrophy", r.enstrophy},
                        {"spacetime", r.spacetime},
                        {"split_bound", r.split_bound}});
      ph["local_energy"] = {{"rows", rows}, {"finite", le.finite}, {"decay_ok", le.decay_ok}, {"split_ok", le.split_ok}};
      const InitialDataReport id = initial_data_convergence(c, 0.5, 2.0, {0.1, 0.03, 0.01, 0.003, 0.001}, hd.C0);
      ph["initial_data"] = {{"t", id.t},
                            {"total", id.total},
                            {"flow_part", id.flow_part},
                            {"heat_part", id.heat_part},
                            {"flow_bound", id.flow_bound},
                            {"flow_decreasing", id.flow_decreasing},
                            {"heat_decreasing", id.heat_decreasing},
                            {"bound_ok", id.bound_ok}};
      const LeiReport lei = local_energy_inequality(c, default_profile_bumps(p.period, cfg.seed + 5),
                                                    default_physical_bumps(cfg.lambda, cfg.seed + 6), cfg.lei_nodes,
                                                    cfg.pad);
      auto terms = [](const std::vector<LeiTerms>& v) {
        json a = json::array();
        for (const auto& t : v)
          a.push_back({{"lhs", t.lhs},
                       {"heat", t.heat},
                       {"flux", t.flux},
                       {"coupling", t.coupling},
                       {"residual", t.residual},
                       {"scale", t.scale}});
        return a;
      };
      ph["lei"] = {{"profile", terms(lei.profile)},
                   {"physical", terms(lei.physical)},
                   {"worst_relative", lei.worst_relative},
                   {"s_nodes", lei.s_nodes},
                   {"method", "trapezoid in s on one period, grid sums in y, Riesz pressure per node"}};
      R["physical"] = ph;
      return 0;
    });
  }

  if (cfg.embeddings) {
    stage("embeddings", log, [&] {
      const EmbeddingAudit a = embedding_audit(p.grid);
      json rows = json::array();
      for (const auto& r : a.rows)
        rows.push_back({{"name", r.name},
                        {"weak_l3", r.weak_l3},
                        {"morrey", r.morrey},
                        {"weighted_l2", r.weighted_l2},
                        {"ball_radius", r.ball_radius},
                        {"ball_l2", r.ball_l2},
                        {"weak_warning", r.weak_warning}});
      R["embeddings"] = {{"rows", rows},
                         {"k_morrey", a.k_morrey},
                         {"k_weighted", a.k_weighted},
                         {"c_morrey", a.c_morrey},
                         {"c_weighted", a.c_weighted},
                         {"inverse_radial_weak", a.inv_weak},
                         {"inverse_radial_weighted", a.inv_weighted},
                         {"tol", a.tol},
                         {"ordering_ok", a.ordering_ok},
                         {"ball_ok", a.ball_ok},
                         {"reference_ok", a.reference_ok}};
      return 0;
    });
  }

  const auto crit = evaluate_criteria(R);
  json cj = json::array();
  for (const auto& c : crit) cj.push_back({{"id", c.id}, {"name", c.name}, {"status", c.status}, {"detail", c.detail}});
  R["criteria"] = cj;
  R["converged"] = converged;
  res.exit_code = !converged ? kNonConvergence : criteria_exit_code(crit);
  R["exit_code"] = res.exit_code;
  if (write_files) {
    fs::create_directories(cfg.output);
    std::ofstream os(fs::path(cfg.output) / "report.json");
    os << R.dump(2) << '\n';
  }
  return res;
}

void write_profile_slice(const RunConfig& cfg, const std::vector<double>& x, int axis, const std::string& path) {
  cfg.validate();
  if (axis < 0 || axis > 2) throw ConfigError("slice axis must be 0, 1 or 2");
  Problem p;
  p.cfg = cfg;
  p.period = SimilarityMap(cfg.lambda).period();
  p.grid = Grid(cfg.L, cfg.N);
  p.sp = std::make_unique<Spectral>(p.grid);
  p.W = make_background(velocity_data(cfg), p);
  BasisOptions bo;
  bo.k = cfg.k;
  bo.layout = cfg.layout;
  bo.sigma = cfg.sigma;
  bo.spacing = cfg.spacing;
  const GalerkinBasis basis = build_basis(*p.sp, bo, cfg.epsilon);
  if (static_cast<int>(x.size()) < basis.k()) throw ConfigError("stored state is shorter than the basis");
  const VecArray U = basis.combine(x.data());
  const VecArray& W = p.W->slice(0).W;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << std::setprecision(17) << "y1,y2,y3,u1,u2,u3\n";
  const Grid& g = p.grid;
  const int mid = g.N / 2;
  for (int a = 0; a < g.N; ++a)
    for (int b = 0; b < g.N; ++b) {
      int ijk[3];
      ijk[axis] = mid;
      ijk[(axis + 1) % 3] = a;
      ijk[(axis + 2) % 3] = b;
      const std::size_t idx = g.index(ijk[0], ijk[1], ijk[2]);
      const Vec3 y = g.point(idx), u = U.at(idx) + W.at(idx);
      os << y[0] << ',' << y[1] << ',' << y[2] << ',' << u[0] << ',' << u[1] << ',' << u[2] << '\n';
    }
}

// ----- criteria -----

namespace {

double d6(const std::vector<double>& f, std::size_t i, double h) {
  return (-f[i - 3] + 9 * f[i - 2] - 45 * f[i - 1] + 45 * f[i + 1] - 9 * f[i + 2] + f[i + 3]) / (60 * h);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

// Recomputes the identity error from a stored trace.
bool trace_identity(const json& audit, std::string& detail) {
  const auto s = audit.at("trace").at("s").get<std::vector<double>>();
  const auto E = audit.at("trace").at("energy").get<std::vector<double>>();
  const auto dE = audit.at("trace").at("rhs_dE").get<std::vector<double>>();
  const double tol = audit.at("identity_tolerance").get<double>();
  if (s.size() < 7 || E.size() != s.size() || dE.size() != s.size()) {
    detail = "trace too short or inconsistent";
    return false;
  }
  const double h = s[1] - s[0];
  double err = 0;
  for (std::size_t i = 3; i + 3 < s.size(); ++i) err = std::max(err, std::abs(d6(E, i, h) - dE[i]));
  detail = "max |FD - rhs| " + fmt(err) + " <= " + fmt(tol);
  return err <= tol;
}

}  // namespace

std::vector<CriterionResult> evaluate_criteria(const json& R) {
  std::vector<CriterionResult> out;
  auto add = [&](int id, const std::string& name, const std::function<std::string(std::string&)>& fn) {
    CriterionResult c;
    c.id = id;
    c.name = name;
    try {
      c.status = fn(c.detail);
    } catch (const std::exception& e) {
      c.status = "fail";
      c.detail = std::string("missing or malformed report entry: ") + e.what();
    }
    out.push_back(c);
  };
  add(1, "orthonormality and divergence", [&](std::string& d) {
    const double gram = R.at("basis").at("gram_residual");
    const double div = R.at("basis").at("div_max");
    const double wdiv = R.at("background").at("div_max");
    d = "gram " + fmt(gram) + ", mode div " + fmt(div) + ", W div " + fmt(wdiv);
    return gram <= 1e-10 && div <= 1e-8 && wdiv <= 1e-8 ? "pass" : "fail";
  });
  add(2, "cubic cancellation", [&](std::string& d) {
    const double r = R.at("cubic").at("max_ratio");
    d = "max |cubic| / |x|^3 " + fmt(r) + " <= 1e-10";
    return r <= 1e-10 ? "pass" : "fail";
  });
  add(3, "energy identity", [&](std::string& d) {
    std::string d1, d2;
    const bool a = trace_identity(R.at("orbit").at("energy_audit"), d1);
    const bool b = trace_identity(R.at("orbit").at("transient_audit"), d2);
    d = "fixed point: " + d1 + "; transient: " + d2;
    return a && b ? "pass" : "fail";
  });
  add(4, "Gronwall trap", [&](std::string& d) {
    const int v = R.at("trap").at("violations");
    const int proj = R.at("trap").at("projections");
    const bool conv = R.at("trap").at("fixed_point_converged");
    d = std::to_string(v) + " violations of " + std::to_string(R.at("trap").at("starts").get<int>()) +
        " starts, " + std::to_string(proj) + " projections";
    return v == 0 && (!conv || proj == 0) ? "pass" : "fail";
  });
  add(5, "periodicity", [&](std::string& d) {
    const json& o = R.at("orbit");
    const double rho = o.at("rho"), res = o.at("fixed_point_residual"), re = o.at("reintegration_residual");
    d = "residual " + fmt(res) + " <= " + fmt(1e-6 * rho) + ", re-integration " + fmt(re) + " <= " + fmt(2e-6 * rho);
    return res <= 1e-6 * rho && re <= 2e-6 * rho ? "pass" : "fail";
  });
  add(6, "stationary certificate", [&](std::string& d) {
    if (!R.contains("stationary")) {
      d = "self-similar runs only";
      return "n/a";
    }
    const json& s = R.at("stationary");
    const double worst = s.at("certificate").at("worst"), lim = s.at("certificate").at("limit");
    const double res = s.at("residual"), nrm = s.at("norm"), rad = s.at("sphere_radius");
    d = "sphere worst " + fmt(worst) + " <= " + fmt(lim) + ", |P(x*)| " + fmt(res) + ", |x*| " + fmt(nrm) +
        " <= " + fmt(rad);
    return worst <= lim && res <= 1e-8 && nrm <= rad ? "pass" : "fail";
  });
  add(7, "cross-system oracle", [&](std::string& d) {
    if (!R.contains("cross_system")) {
      d = "cross check disabled";
      return "n/a";
    }
    const json& c = R.at("cross_system");
    const double tol = c.at("tolerance");
    const double a = c.at("vnsed_vs_mhd_max_diff"), b = c.at("vnsed_unused_columns_max");
    const double e = c.at("mhd_zero_vs_ns_max_diff"), f = c.at("mhd_zero_magnetic_max");
    d = "vNSEd vs MHD " + fmt(a) + ", unused columns " + fmt(b) + ", MHD(0) vs NS " + fmt(e) + ", magnetic " +
        fmt(f) + " <= " + fmt(tol);
    return c.at("all_converged").get<bool>() && a <= tol && b <= tol && e <= tol && f <= tol ? "pass" : "fail";
  });
  add(8, "pressure", [&](std::string& d) {
    const json& p = R.at("pressure");
    const double pr = p.at("poisson_residual"), id = p.at("idempotence_defect"), ratio = p.at("bound").at("ratio");
    const double sh = p.at("shear_p_max"), ua = p.at("u_equals_a_p_max");
    d = "Poisson " + fmt(pr) + ", idempotence " + fmt(id) + ", bound ratio " + fmt(ratio) + ", shear " + fmt(sh) +
        ", u=a " + fmt(ua);
    return pr <= 1e-8 && id <= 1e-10 && std::isfinite(ratio) && sh <= 1e-10 && ua <= 1e-10 ? "pass" : "fail";
  });
  add(9, "reconstruction scaling", [&](std::string& d) {
    if (!R.contains("physical")) {
      d = "physical audits disabled";
      return "n/a";
    }
    const json& h = R.at("physical").at("heat_distance");
    const double e = h.at("max_ratio_error"), s = h.at("envelope_spread");
    d = "ratio error " + fmt(e) + " <= 1e-2, envelope spread " + fmt(s) + " <= 2e-2";
    return e <= 1e-2 && s <= 2e-2 ? "pass" : "fail";
  });
  add(10, "local energy inequality", [&](std::string& d) {
    if (!R.contains("physical")) {
      d = "physical audits disabled";
      return "n/a";
    }
    const json& l = R.at("physical").at("lei");
    double worst = 0;
    for (const char* form : {"profile", "physical"})
      for (const auto& t : l.at(form)) {
        const double sc = t.at("scale"), r = t.at("residual");
        if (sc > 0) worst = std::min(worst, r / sc);
      }
    d = "min residual / scale " + fmt(worst) + " >= -1e-6";
    return worst >= -1e-6 ? "pass" : "fail";
  });
  add(11, "embeddings", [&](std::string& d) {
    if (!R.contains("embeddings")) {
      d = "embedding audit disabled";
      return "n/a";
    }
    const json& e = R.at("embeddings");
    d = "Morrey/weak " + fmt(e.at("c_morrey")) + " (sharp " + fmt(e.at("k_morrey")) + "), weighted/Morrey " +
        fmt(e.at("c_weighted")) + " (sharp " + fmt(e.at("k_weighted")) + "), |x|^-1: " +
        fmt(e.at("inverse_radial_weak")) + ", " + fmt(e.at("inverse_radial_weighted"));
    return e.at("ordering_ok").get<bool>() && e.at("ball_ok").get<bool>() && e.at("reference_ok").get<bool>()
               ? "pass"
               : "fail";
  });
  add(12, "determinism", [&](std::string& d) {
    d = "needs two runs (acceptance suite)";
    return "n/a";
  });
  return out;
}

int criteria_exit_code(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (r.status == "fail") return kCriterionFailure;
  return kPass;
}

void print_criteria(std::ostream& os, const std::vector<CriterionResult>& results) {
  for (const auto& r : results) {
    const std::string tag = r.status == "pass" ? "PASS" : r.status == "fail" ? "FAIL" : "N/A ";
    os << "[" << tag << "] criterion " << std::setw(2) << r.id << "  " << std::left << std::setw(28) << r.name
       << std::right << "  " << r.detail << '\n';
  }
}

}  // namespace dsslab
