// kflow: command line front end.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kflow/coding.hpp"
#include "kflow/error.hpp"
#include "kflow/experiments.hpp"
#include "kflow/fbar.hpp"
#include "kflow/report.hpp"
#include "kflow/roof_bounds.hpp"
#include "kflow/word_io.hpp"

using namespace kflow;

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

using Items = std::vector<std::pair<std::string, std::string>>;

Items version_items(const std::string& command) { return {{"version", version_string()}, {"command", command}}; }

std::string u64(std::uint64_t v) { return std::to_string(v); }

// "h,v" -> FlowPoint, checked against the roof
FlowPoint parse_flow_point(const RoofFunction& f, const std::string& spec) {
  auto comma = spec.find(',');
  if (comma == std::string::npos) throw PreconditionError("point must be given as x_h,x_v: " + spec);
  double h = 0, v = 0;
  try {
    h = std::stod(spec.substr(0, comma));
    v = std::stod(spec.substr(comma + 1));
  } catch (const std::exception&) {
    throw PreconditionError("bad point: " + spec);
  }
  return make_flow_point(f, CirclePoint::from_double(h), v);
}

int cmd_cf(const std::string& alpha, int depth, bool check, double c, int n_min, int n_max, bool csv_out) {
  Rotation rot = cf_expand(alpha, depth);
  DiophantineReport rep;
  if (check) rep = in_class_D(rot, c, n_min, n_max);
  auto d_check = [&](int n) -> std::string {
    if (!check || n < n_min || n > n_max) return "";
    const auto& row = rep.rows[static_cast<std::size_t>(n - n_min)];
    return row.pass ? "pass" : "fail";
  };
  if (csv_out) {
    CsvWriter csv(std::cout);
    Items pre = version_items("cf");
    pre.insert(pre.end(), {{"alpha", alpha}, {"depth", std::to_string(depth)}});
    if (check) {
      pre.insert(pre.end(), {{"C", fmt(c)}, {"n_min", std::to_string(n_min)}, {"n_max", std::to_string(n_max)},
                             {"minimal_C", fmt(rep.minimal_c)}, {"note", rep.note}});
    }
    csv.preamble(pre);
    csv.row({"n", "a_n", "p_n", "q_n", "D-check"});
    csv.row({"0", "", u64(rot.p(0)), u64(rot.q(0)), d_check(0)});
    for (int n = 1; n <= rot.depth(); ++n) csv.row({std::to_string(n), u64(rot.a(n)), u64(rot.p(n)), u64(rot.q(n)), d_check(n)});
  } else {
    std::printf("alpha %s ~ %s\n", alpha.c_str(), fmt(rot.alpha()).c_str());
    std::printf("%4s %12s %22s %22s %8s\n", "n", "a_n", "p_n", "q_n", "D-check");
    std::printf("%4d %12s %22s %22s %8s\n", 0, "-", u64(rot.p(0)).c_str(), u64(rot.q(0)).c_str(), d_check(0).c_str());
    for (int n = 1; n <= rot.depth(); ++n)
      std::printf("%4d %12s %22s %22s %8s\n", n, u64(rot.a(n)).c_str(), u64(rot.p(n)).c_str(), u64(rot.q(n)).c_str(),
                  d_check(n).c_str());
    if (check)
      std::printf("D-check with C = %s: %s; minimal C %s; %s\n", fmt(c).c_str(), rep.all_pass ? "pass" : "fail",
                  fmt(rep.minimal_c).c_str(), rep.note.c_str());
  }
  return check && !rep.all_pass ? kViolation : kOk;
}

void dk_rows(CsvWriter& csv, const DkReport& rep) {
  for (const auto& row : rep.rows)
    csv.row({fmt(rep.z.value()), std::to_string(rep.m), std::to_string(rep.s), row.side, fmt(row.lhs), fmt(row.rhs),
             row.pass ? "1" : "0", fmt(row.margin)});
}

int cmd_dk(double gamma, bool raw, const std::string& alpha, int depth, double z, std::int64_t m, bool sweep,
           int cases, std::uint64_t seed, double slack) {
  RoofFunction f = RoofFunction::make(gamma, !raw);
  Rotation rot = cf_expand(alpha, depth);
  CsvWriter csv(std::cout);
  Items pre = version_items("dk-check");
  pre.insert(pre.end(), {{"gamma", fmt(gamma)}, {"normalize", raw ? "false" : "true"}, {"alpha", alpha},
                         {"depth", std::to_string(depth)}, {"slack", fmt(slack)}});
  if (sweep) pre.insert(pre.end(), {{"cases", std::to_string(cases)}, {"seed", u64(seed)}});
  csv.preamble(pre);
  csv.row({"z", "M", "s", "side", "lhs", "rhs", "pass", "margin"});
  if (!sweep) {
    DkReport rep = dk_bounds_check(f, rot, CirclePoint::from_double(z), m, slack);
    dk_rows(csv, rep);
    return rep.all_pass() ? kOk : kViolation;
  }
  std::mt19937_64 rng(seed);
  int failures = 0;
  for (int k = 0; k < cases; ++k) {
    int s = 3 + static_cast<int>(rng() % 10);
    if (s + 1 > rot.depth()) throw PreconditionError("depth too small for the sweep (needs 13)");
    std::uint64_t lo = rot.q(s), hi = rot.q(s + 1);
    auto mm = static_cast<std::int64_t>(lo + rng() % (hi - lo + 1));
    if (rng() & 1) mm = -mm;
    CirclePoint zz = CirclePoint::from_raw((static_cast<u128>(rng()) << 64) | rng());
    DkReport rep = dk_bounds_check(f, rot, zz, mm, slack);
    if (!rep.all_pass()) ++failures;
    dk_rows(csv, rep);
  }
  std::fprintf(stderr, "%d/%d cases pass\n", cases - failures, cases);
  return failures == 0 ? kOk : kViolation;
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& x, const std::string& y, double t, int steps) {
  ProductSystem sys = make_system(cfg);
  ProductPoint pp{parse_flow_point(sys.f1, x), parse_flow_point(sys.f2, y)};
  CsvWriter csv(std::cout);
  Items pre = version_items("simulate");
  for (auto& e : cfg.entries())
    if (e.first == "gamma1" || e.first == "gamma2" || e.first == "alpha1" || e.first == "alpha2" ||
        e.first == "cf_depth" || e.first == "normalize")
      pre.push_back(e);
  csv.preamble(pre);
  csv.row({"t", "x_h", "x_v", "N", "y_h", "y_v", "M"});
  auto emit = [&](double time, const ProductPoint& q, std::int64_t n, std::int64_t mm) {
    csv.row({fmt(time), fmt(q.first.h.value()), fmt(q.first.v), std::to_string(n), fmt(q.second.h.value()),
             fmt(q.second.v), std::to_string(mm)});
  };
  emit(0.0, pp, 0, 0);
  if (steps > 0) {
    std::int64_t n = 0, mm = 0;
    for (int k = 1; k <= steps; ++k) {
      ProductFlowResult r = flow(sys, pp, 1.0);
      n += r.n_first;
      mm += r.n_second;
      pp = r.point;
      emit(k, pp, n, mm);
    }
  } else {
    ProductFlowResult r = flow(sys, pp, t);
    emit(t, r.point, r.n_first, r.n_second);
  }
  return kOk;
}

int cmd_code(const ExperimentConfig& cfg, int m, std::int64_t n, std::uint64_t seed, int count, bool single,
             bool text, const std::string& prefix) {
  ProductSystem sys = make_system(cfg);
  Partition p1 = build_partition(sys.f1, m);
  Partition p2 = build_partition(sys.f2, m);
  std::fprintf(stderr, "atoms: flow 1 %zu, flow 2 %zu\n", p1.atom_count(), p2.atom_count());
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    ProductPoint pp = sample_invariant(sys, rng);
    SymbolicWord w = single ? code_single(sys.f1, sys.rot1, p1, pp.first, n) : code_orbit(sys, p1, p2, pp, n);
    std::string path = prefix + "_" + std::to_string(k) + (text ? ".txt" : ".kwrd");
    save_word(path, w, text);
    std::printf("%s\n", path.c_str());
  }
  return kOk;
}

int cmd_fbar(const std::string& a_path, const std::string& b_path, bool banded, std::size_t band,
             const std::string& witness_path) {
  SymbolicWord a = load_word(a_path), b = load_word(b_path);
  FbarResult res = banded ? fbar_banded(a, b, band) : fbar_distance(a, b);
  std::printf("mode %s\nlength %zu\ncardinality %zu\nfbar %s\n",
              banded ? ("banded (APPROXIMATE, band " + std::to_string(band) + ")").c_str() : "exact", a.size(),
              res.cardinality, fmt(res.value).c_str());
  if (!witness_path.empty()) {
    std::ofstream out(witness_path);
    if (!out) throw Error("cannot write " + witness_path);
    for (const auto& p : res.witness.pairs) out << p.i << ' ' << p.j << '\n';
  }
  return kOk;
}

int cmd_experiment(const std::string& mode, const std::string& config_path, const std::vector<std::string>& sets,
                   const std::string& out_dir) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw PreconditionError("--set expects key=value, got " + s);
    set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (mode == "standardness-probe") {
    ProbeResult r = run_standardness_probe(cfg);
    for (const auto& f : r.files) std::printf("%s\n", f.c_str());
    return kOk;
  }
  VerifyResult r = run_verification_sweeps(cfg);
  for (const auto& f : r.files) std::printf("%s\n", f.c_str());
  for (const auto& [name, s] : r.sweeps)
    std::printf("%-10s %lld/%lld  worst margin %s%s\n", name.c_str(), static_cast<long long>(s.passes),
                static_cast<long long>(s.cases), fmt(s.worst_margin).c_str(), s.hard ? "  [hard]" : "");
  return r.violation() ? kViolation : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"special flows over rotations, codings and the f-bar metric"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  auto* cf = app.add_subcommand("cf", "continued fraction expansion and convergents");
  std::string cf_alpha = "golden";
  int cf_depth = 20, n_min = 2, n_max = 0;
  double cf_c = 10.0;
  bool cf_check = false, cf_csv = false;
  cf->add_option("--alpha", cf_alpha, "rotation number: golden, sqrt2m1, sqrtK, p/q or a decimal");
  cf->add_option("--depth", cf_depth, "number of partial quotients");
  cf->add_flag("--check-D", cf_check, "test q_{n+1} < C q_n log q_n (log n)^2 over [n-min, n-max]");
  cf->add_option("--C", cf_c, "constant of the growth test");
  cf->add_option("--n-min", n_min, "first n of the growth test");
  cf->add_option("--n-max", n_max, "last n of the growth test (default depth - 1)");
  cf->add_flag("--csv", cf_csv, "CSV instead of a plain table");

  auto* dk = app.add_subcommand("dk-check", "Denjoy-Koksma bounds (CSV)");
  double dk_gamma = -0.5, dk_z = 0.1, dk_slack = 1.0;
  std::string dk_alpha = "golden";
  int dk_depth = 40, dk_cases = 1000;
  bool dk_raw = false, dk_sweep = false;
  std::int64_t dk_m = 100;
  std::uint64_t dk_seed = 1;
  dk->add_option("--gamma", dk_gamma, "roof exponent in (-1,0)");
  dk->add_option("--alpha", dk_alpha, "rotation number");
  dk->add_option("--depth", dk_depth, "continued fraction depth");
  dk->add_flag("--raw", dk_raw, "unit scale instead of the mean-one roof");
  auto* z_opt = dk->add_option("--z", dk_z, "base point");
  auto* m_opt = dk->add_option("--M", dk_m, "number of terms (signed)");
  auto* sweep_flag = dk->add_flag("--sweep", dk_sweep, "random z and M with q_s <= |M| <= q_{s+1}, s in [3,12]");
  sweep_flag->excludes(z_opt)->excludes(m_opt);
  dk->add_option("--cases", dk_cases, "sweep size");
  dk->add_option("--seed", dk_seed, "sweep seed");
  dk->add_option("--slack", dk_slack, "multiplicative slack on the constants");

  auto* sim = app.add_subcommand("simulate", "product special flow trajectory (CSV)");
  ExperimentConfig sim_cfg;
  std::string sim_x = "0.1,0", sim_y = "0.2,0";
  double sim_t = 1.0;
  int sim_steps = 0;
  bool sim_raw = false;
  sim->add_option("--gamma1", sim_cfg.gamma1, "first roof exponent");
  sim->add_option("--gamma2", sim_cfg.gamma2, "second roof exponent");
  sim->add_option("--alpha1", sim_cfg.alpha1, "first rotation number");
  sim->add_option("--alpha2", sim_cfg.alpha2, "second rotation number");
  sim->add_flag("--raw", sim_raw, "unit scale instead of the mean-one roofs");
  sim->add_option("--x", sim_x, "first point as x_h,x_v");
  sim->add_option("--y", sim_y, "second point as y_h,y_v");
  auto* t_opt = sim->add_option("--t", sim_t, "flow both points for time t");
  sim->add_option("--steps", sim_steps, "time-one iterations, one row each")->excludes(t_opt);

  auto* code = app.add_subcommand("code", "symbolic codings of random orbits");
  ExperimentConfig code_cfg;
  int code_m = 4, code_count = 1;
  std::int64_t code_n = 1000;
  std::uint64_t code_seed = 1;
  bool code_single = false, code_text = false;
  std::string code_prefix = "word";
  code->add_option("--m", code_m, "partition parameter");
  code->add_option("--N", code_n, "word length minus one");
  code->add_option("--seed", code_seed, "sampling seed");
  code->add_option("--count", code_count, "number of words");
  code->add_option("--gamma1", code_cfg.gamma1, "first roof exponent");
  code->add_option("--gamma2", code_cfg.gamma2, "second roof exponent");
  code->add_option("--alpha1", code_cfg.alpha1, "first rotation number");
  code->add_option("--alpha2", code_cfg.alpha2, "second rotation number");
  code->add_flag("--single", code_single, "code the first factor only");
  code->add_flag("--text", code_text, "one decimal symbol per line instead of KWRD");
  code->add_option("--out-prefix", code_prefix, "output path prefix");

  auto* fb = app.add_subcommand("fbar", "f-bar distance of two word files");
  std::string fa, fbp, witness;
  bool exact = false, banded = false;
  std::size_t band = 64;
  fb->add_option("--a", fa, "first word file")->required();
  fb->add_option("--b", fbp, "second word file")->required();
  auto* ex_flag = fb->add_flag("--exact", exact, "exact distance (default)");
  fb->add_flag("--banded", banded, "APPROXIMATE: matchings with |i - j| <= band width")->excludes(ex_flag);
  fb->add_option("--band-width", band, "band half width");
  fb->add_option("--emit-witness", witness, "write the matching as 'i j' lines");

  auto* ex = app.add_subcommand("experiment", "standardness probe or verification sweeps");
  std::string mode, config_path, out_dir;
  std::vector<std::string> sets;
  ex->add_option("mode", mode, "standardness-probe | verify")
      ->required()
      ->check(CLI::IsMember({"standardness-probe", "verify"}));
  ex->add_option("--config", config_path, "key = value config file");
  ex->add_option("--set", sets, "override one config key (key=value)");
  ex->add_option("--output-dir", out_dir, "directory for CSV/JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (cf->parsed()) return cmd_cf(cf_alpha, cf_depth, cf_check, cf_c, n_min, n_max > 0 ? n_max : cf_depth - 1, cf_csv);
    if (dk->parsed())
      return cmd_dk(dk_gamma, dk_raw, dk_alpha, dk_depth, dk_z, dk_m, dk_sweep, dk_cases, dk_seed, dk_slack);
    if (sim->parsed()) {
      sim_cfg.normalize = !sim_raw;
      return cmd_simulate(sim_cfg, sim_x, sim_y, sim_t, sim_steps);
    }
    if (code->parsed())
      return cmd_code(code_cfg, code_m, code_n, code_seed, code_count, code_single, code_text, code_prefix);
    if (fb->parsed()) return cmd_fbar(fa, fbp, banded, band, witness);
    if (ex->parsed()) return cmd_experiment(mode, config_path, sets, out_dir);
  } catch (const PreconditionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const RationalInputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kViolation;
  }
  return kUsage;
}
