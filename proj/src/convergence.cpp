#include "rbec/convergence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rbec {

int StudyConfig::reference_subdivisions() const {
  if (reference > 0) return reference;
  return levels.empty() ? 0 : 2 * *std::max_element(levels.begin(), levels.end());
}

void StudyConfig::validate() const {
  std::vector<std::string> problems;
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(e.what());
  }
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    problems.emplace_back(e.what());
  }
  if (order != 1 && order != 2) problems.push_back("order must be 1 or 2");
  if (levels.empty()) problems.push_back("study.levels must not be empty");
  for (int n : levels)
    if (n < 2) problems.push_back("every level needs N_h >= 2, got " + std::to_string(n));
  std::vector<int> sorted(levels);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) problems.push_back("study.levels contains duplicates");
  if (!sorted.empty()) {
    for (int n : sorted)
      if (n % sorted.front() != 0 || (n / sorted.front() & (n / sorted.front() - 1)) != 0) {
        problems.push_back("study.levels must be power-of-two multiples of the coarsest level, got " +
                           std::to_string(n));
      }
    const int ref = reference_subdivisions();
    if (ref <= sorted.back()) problems.push_back("study.reference must be finer than every level");
    else if (ref % sorted.back() != 0 || ((ref / sorted.back()) & (ref / sorted.back() - 1)) != 0)
      problems.push_back("study.reference must be a power-of-two multiple of the finest level");
  }
  if (!(density_flag_threshold > 0.0)) problems.push_back("density_flag_threshold must be > 0");
  if (!problems.empty()) {
    std::string msg = "invalid study configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
}

double LevelRow::err_energy() const { return std::abs(energy_diff); }
double LevelRow::err_lambda() const { return std::abs(lambda_diff); }

std::vector<std::optional<double>> compute_eoc(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw std::invalid_argument("compute_eoc: h and error lists differ in length");
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(h[i] > 0.0)) throw std::invalid_argument("compute_eoc: mesh sizes must be positive");
    if (!(err[i] >= 0.0)) throw std::invalid_argument("compute_eoc: errors must be nonnegative");
    if (i > 0 && !(h[i] < h[i - 1])) throw std::invalid_argument("compute_eoc: mesh sizes must strictly decrease");
  }
  std::vector<std::optional<double>> out;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    if (err[i] == 0.0 || err[i + 1] == 0.0) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(std::log(err[i] / err[i + 1]) / std::log(h[i] / h[i + 1]));
    }
  }
  return out;
}

double relative_density_error(const FeField& u_h, const FeField& u) {
  const FeField uh = prolongate(u_h, u.space_ptr());
  const FeSpace& space = u.space();
  const QuadratureRule& rule = space.high_order_rule();
  long double diff = 0.0L, ref = 0.0L;
  const Tabulation tab = space.tabulate(rule);
  std::array<Complex, 6> ca{}, cb{};
  const int nloc = space.dofs_per_element();
  for (int e = 0; e < space.num_elements(); ++e) {
    gather(uh, e, std::span<Complex>(ca.data(), nloc));
    gather(u, e, std::span<Complex>(cb.data(), nloc));
    long double ld = 0.0L, lr = 0.0L;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Complex va{}, vb{};
      for (int a = 0; a < nloc; ++a) {
        va += ca[a] * tab.value(static_cast<int>(q), a);
        vb += cb[a] * tab.value(static_cast<int>(q), a);
      }
      const double d = std::norm(va) - std::norm(vb);
      ld += rule.weights[q] * d * d;
      lr += rule.weights[q] * std::norm(vb) * std::norm(vb);
    }
    diff += ld * space.geometry(e).area;
    ref += lr * space.geometry(e).area;
  }
  return ref > 0.0L ? std::sqrt(static_cast<double>(diff / ref)) : 0.0;
}

namespace {

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string format_eoc(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream s;
  s << std::setprecision(6) << *v;
  return s.str();
}

}  // namespace

LevelRow measure_level(const GroundStateResult& level, const GroundStateResult& reference,
                       const GpeOperators& ref_ops, double density_flag_threshold) {
  require_space(ref_ops, reference.u, "measure_level");
  const FeSpace& coarse = level.u.space();
  LevelRow row;
  row.subdivisions = coarse.mesh().subdivisions();
  row.h = coarse.mesh().mesh_size();
  const FeField fine = prolongate(level.u, reference.u.space_ptr());
  const PhaseAlignment al = phase_align(fine, reference.u, ref_ops.mass());
  const ErrorNorms aligned = error_norms(fine, al.aligned, ref_ops.mass(), ref_ops.stiffness());
  const ErrorNorms raw = error_norms(fine, reference.u, ref_ops.mass(), ref_ops.stiffness());
  row.err_l2 = aligned.l2;
  row.err_h1 = aligned.h1;
  row.err_h1_seminorm = aligned.h1_seminorm;
  row.err_l2_unaligned = raw.l2;
  row.phase = al.theta;
  row.energy = level.energy;
  row.lambda = level.lambda;
  row.energy_diff = level.energy - reference.energy;
  row.lambda_diff = level.lambda - reference.lambda;
  row.density_error = relative_density_error(fine, reference.u);
  row.iterations = level.iterations;
  row.residual = level.residual_norm;
  if (row.density_error > density_flag_threshold) {
    row.flagged = true;
    std::ostringstream why;
    why << "relative density error " << std::setprecision(3) << row.density_error << " exceeds "
        << density_flag_threshold << ": possibly a distinct vortex configuration";
    row.flag_reason = why.str();
  }
  return row;
}

ConvergenceTable run_study(const StudyConfig& config, const LevelObserver& observer) {
  config.validate();
  std::vector<int> levels(config.levels);
  std::sort(levels.begin(), levels.end());
  const int ref_n = config.reference_subdivisions();
  const double r = config.params.half_width;
  auto log = [&](const std::string& msg) {
    if (config.log) config.log(msg);
  };

  ConvergenceTable table;
  table.strategy = config.warm_start
                       ? "coarsest level from the analytic starting value; every finer level and the reference "
                         "from the prolongated solution of the next coarser level"
                       : "every level and the reference from the analytic starting value";

  struct Solved {
    int n;
    GroundStateResult result;
    double seconds;
  };
  std::vector<Solved> solved;
  std::optional<FeField> previous;
  std::vector<int> all(levels);
  all.push_back(ref_n);
  std::shared_ptr<GpeOperators> ref_ops;
  for (int n : all) {
    log("solving N_h=" + std::to_string(n));
    const auto t0 = std::chrono::steady_clock::now();
    auto space = make_space(r, n, config.order);
    auto ops = std::make_shared<GpeOperators>(space, config.params);
    const FeField start = (config.warm_start && previous) ? normalize(prolongate(*previous, space), ops->mass())
                                                          : initial_guess(space, config.params, ops->mass());
    GroundStateResult res = [&] {
      try {
        return solve_ground_state(*ops, config.solver, start);
      } catch (const SolverError& e) {
        throw SolverError("level N_h=" + std::to_string(n) + ": " + e.what(), e.history());
      }
    }();
    const double secs = elapsed(t0);
    std::ostringstream msg;
    msg << std::setprecision(10) << "N_h=" << n << " E=" << res.energy << " lambda=" << res.lambda
        << " iterations=" << res.iterations << " residual=" << std::setprecision(3) << res.residual_norm << " ("
        << std::setprecision(3) << secs << " s)";
    log(msg.str());
    if (observer) observer(n, *ops, res);
    previous = res.u;
    solved.push_back({n, std::move(res), secs});
    if (n == ref_n) ref_ops = ops;
  }

  const Solved& ref = solved.back();
  table.reference = {ref_n,         2.0 * r / ref_n,          ref.result.energy, ref.result.lambda,
                     ref.result.iterations, ref.result.residual_norm, ref.seconds, ref.result.a4_holds};

  for (std::size_t i = 0; i + 1 < solved.size(); ++i) {
    LevelRow row = measure_level(solved[i].result, ref.result, *ref_ops, config.density_flag_threshold);
    row.seconds = solved[i].seconds;
    if (row.flagged) log("flagged N_h=" + std::to_string(row.subdivisions) + ": " + row.flag_reason);
    table.rows.push_back(row);
  }

  std::vector<double> h, l2, h1, en, la;
  for (const auto& row : table.rows) {
    h.push_back(row.h);
    l2.push_back(row.err_l2);
    h1.push_back(row.err_h1);
    en.push_back(row.err_energy());
    la.push_back(row.err_lambda());
  }
  const auto e1 = compute_eoc(h, l2), e2 = compute_eoc(h, h1), e3 = compute_eoc(h, en), e4 = compute_eoc(h, la);
  for (std::size_t i = 0; i < e1.size(); ++i) table.eoc.push_back({e1[i], e2[i], e3[i], e4[i]});
  return table;
}

void write_csv(std::ostream& out, const ConvergenceTable& table) {
  out << "h,errL2,errH1,errEnergy,errLambda\n";
  out << std::setprecision(10);
  for (const auto& row : table.rows) {
    out << row.h << ',' << row.err_l2 << ',' << row.err_h1 << ',' << row.err_energy() << ',' << row.err_lambda()
        << '\n';
  }
  for (const auto& e : table.eoc) {
    out << "eoc," << format_eoc(e.l2) << ',' << format_eoc(e.h1) << ',' << format_eoc(e.energy) << ','
        << format_eoc(e.lambda) << '\n';
  }
  for (const auto& row : table.rows)
    if (row.flagged) out << "# flagged h=" << row.h << ": " << row.flag_reason << '\n';
}

std::string metadata_json(const StudyConfig& config, const ConvergenceTable& table) {
  using nlohmann::ordered_json;
  ordered_json j;
  const auto& p = config.params;
  j["config"] = {
      {"domain", {{"half_width", p.half_width}}},
      {"mesh", {{"order", config.order}}},
      {"model", {{"beta", p.beta}, {"omega", p.omega}, {"gamma_x", p.gamma_x}, {"gamma_y", p.gamma_y}}},
      {"solver",
       {{"energy_tol", config.solver.energy_tol},
        {"max_iter", config.solver.max_iter},
        {"initial_step", config.solver.initial_step},
        {"backtrack_factor", config.solver.backtrack_factor},
        {"growth_factor", config.solver.growth_factor},
        {"max_step", config.solver.max_step},
        {"inner_tol", config.solver.inner_tol},
        {"residual_tol", config.solver.residual_tol},
        {"preconditioner", config.solver.preconditioner == Preconditioner::multigrid ? "multigrid" : "jacobi"}}},
      {"study",
       {{"levels", config.levels},
        {"reference", config.reference_subdivisions()},
        {"warm_start", config.warm_start},
        {"density_flag_threshold", config.density_flag_threshold}}}};
  j["reference"] = {{"subdivisions", table.reference.subdivisions},
                    {"h", table.reference.h},
                    {"energy", table.reference.energy},
                    {"lambda", table.reference.lambda},
                    {"iterations", table.reference.iterations},
                    {"residual", table.reference.residual},
                    {"seconds", table.reference.seconds},
                    {"a4_holds", table.reference.a4_holds},
                    {"note", "self-computed one nested level above the finest study level"}};
  j["strategy"] = table.strategy;
  j["h1_norm"] = "full H1 norm in errH1; the H1 seminorm is listed per level as errH1_seminorm";
  ordered_json levels = ordered_json::array();
  for (const auto& row : table.rows) {
    levels.push_back({{"subdivisions", row.subdivisions},
                      {"h", row.h},
                      {"errL2", row.err_l2},
                      {"errH1", row.err_h1},
                      {"errH1_seminorm", row.err_h1_seminorm},
                      {"errL2_unaligned", row.err_l2_unaligned},
                      {"energy", row.energy},
                      {"lambda", row.lambda},
                      {"energy_minus_reference", row.energy_diff},
                      {"lambda_minus_reference", row.lambda_diff},
                      {"density_error", row.density_error},
                      {"phase", row.phase},
                      {"iterations", row.iterations},
                      {"residual", row.residual},
                      {"seconds", row.seconds},
                      {"flagged", row.flagged},
                      {"flag_reason", row.flag_reason}});
  }
  j["levels"] = levels;
  ordered_json eoc = ordered_json::array();
  auto val = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  for (const auto& e : table.eoc)
    eoc.push_back({{"L2", val(e.l2)}, {"H1", val(e.h1)}, {"energy", val(e.energy)}, {"lambda", val(e.lambda)}});
  j["eoc"] = eoc;
  return j.dump(2);
}

}  // namespace rbec
