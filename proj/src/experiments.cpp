#include "kflow/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "kflow/coding.hpp"
#include "kflow/error.hpp"
#include "kflow/fbar.hpp"
#include "kflow/matching.hpp"
#include "kflow/report.hpp"
#include "kflow/roof_bounds.hpp"

namespace kflow {

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw PreconditionError("bad number for " + key + ": " + v);
  return d;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long d = 0;
  try {
    d = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw PreconditionError("bad integer for " + key + ": " + v);
  return d;
}

int to_small_int(const std::string& key, const std::string& v) {
  auto d = to_int(key, v);
  if (d < std::numeric_limits<int>::min() || d > std::numeric_limits<int>::max())
    throw PreconditionError("integer out of range for " + key);
  return static_cast<int>(d);
}

std::string join(const std::vector<std::int64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void validate(const ExperimentConfig& c) {
  auto in_range = [](double g) { return g > -1.0 && g < 0.0; };
  if (!in_range(c.gamma1) || !in_range(c.gamma2)) throw PreconditionError("gamma1, gamma2 must lie in (-1, 0)");
  if (c.gamma1 == c.gamma2) throw PreconditionError("gamma1 must differ from gamma2");
  if (c.m < 2) throw PreconditionError("m must be >= 2");
  if (c.pair_count < 0) throw PreconditionError("pair_count must be >= 0");
  if (c.n_list.empty()) throw PreconditionError("n_list is empty");
  for (auto n : c.n_list)
    if (n < 0) throw PreconditionError("n_list entries must be >= 0");
  if (c.eps2 < 0) throw PreconditionError("eps2 must be >= 0");
  if (c.dk_cases < 0 || c.dichotomy_pairs < 0 || c.sandwich_points < 0 || c.nlower_cases < 0)
    throw PreconditionError("sample counts must be >= 0");
  if (c.sandwich_horizon <= std::exp(1.0)) throw PreconditionError("sandwich_horizon must exceed e");
  if (c.sandwich_grid < 1) throw PreconditionError("sandwich_grid must be >= 1");
  if (c.shadow_k_min < 1 || c.shadow_k_max < c.shadow_k_min || c.shadow_k_max > 24)
    throw PreconditionError("need 1 <= shadow_k_min <= shadow_k_max <= 24");
}

// Runs task(i) for i in [0, n) on a few threads; results are written by index.
void parallel_for(int threads, std::size_t n, const std::function<void(std::size_t)>& task) {
  std::size_t hw = threads > 0 ? static_cast<std::size_t>(threads)
                               : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  hw = std::min(hw, std::max<std::size_t>(1, n));
  if (hw <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < hw; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::ofstream open_output(const ExperimentConfig& cfg, const std::string& name, std::vector<std::string>& files) {
  std::filesystem::create_directories(cfg.output_dir);
  std::string path = (std::filesystem::path(cfg.output_dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  files.push_back(path);
  return out;
}

std::vector<std::pair<std::string, std::string>> preamble(const ExperimentConfig& cfg, const std::string& table) {
  std::vector<std::pair<std::string, std::string>> items{{"version", version_string()}, {"table", table}};
  for (auto& e : cfg.entries()) items.push_back(e);
  return items;
}

CirclePoint random_circle_point(std::mt19937_64& rng) {
  u128 hi = rng(), lo = rng();
  return CirclePoint::from_raw((hi << 64) | lo);
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const {
  return {{"gamma1", fmt(gamma1)},
          {"gamma2", fmt(gamma2)},
          {"alpha1", alpha1},
          {"alpha2", alpha2},
          {"cf_depth", std::to_string(cf_depth)},
          {"normalize", normalize ? "true" : "false"},
          {"m", std::to_string(m)},
          {"n_list", join(n_list)},
          {"pair_count", std::to_string(pair_count)},
          {"seed", std::to_string(seed)},
          {"eps2", fmt(eps2)},
          {"dk_cases", std::to_string(dk_cases)},
          {"dichotomy_pairs", std::to_string(dichotomy_pairs)},
          {"sandwich_points", std::to_string(sandwich_points)},
          {"sandwich_horizon", fmt(sandwich_horizon)},
          {"sandwich_grid", std::to_string(sandwich_grid)},
          {"nlower_cases", std::to_string(nlower_cases)},
          {"shadow_k_min", std::to_string(shadow_k_min)},
          {"shadow_k_max", std::to_string(shadow_k_max)}};
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "gamma1") cfg.gamma1 = to_double(key, v);
  else if (key == "gamma2") cfg.gamma2 = to_double(key, v);
  else if (key == "alpha1") cfg.alpha1 = v;
  else if (key == "alpha2") cfg.alpha2 = v;
  else if (key == "cf_depth") cfg.cf_depth = to_small_int(key, v);
  else if (key == "normalize") {
    if (v != "true" && v != "false") throw PreconditionError("normalize must be true or false");
    cfg.normalize = v == "true";
  } else if (key == "m") cfg.m = to_small_int(key, v);
  else if (key == "n_list") {
    cfg.n_list.clear();
    std::stringstream ss(v);
    for (std::string item; std::getline(ss, item, ',');) cfg.n_list.push_back(to_int(key, trim(item)));
  } else if (key == "pair_count") cfg.pair_count = to_small_int(key, v);
  else if (key == "seed") {
    auto s = to_int(key, v);
    if (s < 0) throw PreconditionError("seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "eps2") cfg.eps2 = to_double(key, v);
  else if (key == "threads") cfg.threads = to_small_int(key, v);
  else if (key == "output_dir") cfg.output_dir = v;
  else if (key == "dk_cases") cfg.dk_cases = to_small_int(key, v);
  else if (key == "dichotomy_pairs") cfg.dichotomy_pairs = to_small_int(key, v);
  else if (key == "sandwich_points") cfg.sandwich_points = to_small_int(key, v);
  else if (key == "sandwich_horizon") cfg.sandwich_horizon = to_double(key, v);
  else if (key == "sandwich_grid") cfg.sandwich_grid = to_small_int(key, v);
  else if (key == "nlower_cases") cfg.nlower_cases = to_small_int(key, v);
  else if (key == "shadow_k_min") cfg.shadow_k_min = to_small_int(key, v);
  else if (key == "shadow_k_max") cfg.shadow_k_max = to_small_int(key, v);
  else throw PreconditionError("unknown config key: " + key);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw PreconditionError("config line " + std::to_string(lineno) + ": missing '='");
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config " + path);
  return parse_config(in);
}

std::pair<double, double> rweps0_sides(double gamma1, double gamma2, double eps0, double eps2, double r) {
  const double g1 = std::abs(gamma1), g2 = std::abs(gamma2);
  const double lhs = (std::pow(r, (1.0 / (1.0 + g2) + 0.5 * eps0) * (1.0 + g2 - eps2) - 1.0) - 0.5) /
                     std::pow(r, (1.0 / (1.0 + g2) + eps0) * (1.0 + g1 + eps2));
  const double rhs = (std::pow(r, (1.0 - eps0) * (1.0 + g2 + eps2) - 1.0) + 0.5) /
                     std::pow(r, (1.0 - 2.0 * eps0) * (1.0 + g1 - eps2));
  return {lhs, rhs};
}

EpsilonPair epsilon_params(double gamma1, double gamma2, double eps2) {
  const double g1 = std::abs(gamma1), g2 = std::abs(gamma2);
  if (!(gamma1 > -1 && gamma1 < 0 && gamma2 > -1 && gamma2 < 0)) throw PreconditionError("gammas must lie in (-1, 0)");
  if (!(g1 > g2)) throw PreconditionError("epsilon parameters need |gamma1| > |gamma2|");
  if (!(eps2 >= 0)) throw PreconditionError("eps2 must be >= 0");
  EpsilonPair e;
  e.eps2 = eps2;
  e.eps0 = 2.0 * eps2 / (g2 * (1.0 + g2));
  e.side_lhs = (1.0 - 2.0 * e.eps0) * (1.0 + g1 - eps2);
  e.side_rhs = 1.0 + g2 + eps2;
  if (!(e.side_lhs > e.side_rhs))
    throw PreconditionError("eps2 = " + fmt(eps2) + " violates (1-2eps0)(1+|g1|-eps2) > 1+|g2|+eps2 (" +
                            fmt(e.side_lhs) + " <= " + fmt(e.side_rhs) + "); choose a smaller eps2");
  for (int k = 10; k <= 30; ++k) {
    auto r = std::int64_t{1} << k;
    auto [lhs, rhs] = rweps0_sides(gamma1, gamma2, e.eps0, eps2, static_cast<double>(r));
    e.grid.emplace_back(r, lhs > rhs);
  }
  for (std::size_t i = e.grid.size(); i-- > 0;) {
    if (!e.grid[i].second) break;
    e.r0_estimate = e.grid[i].first;
  }
  return e;
}

ProductSystem make_system(const ExperimentConfig& cfg) {
  return ProductSystem{RoofFunction::make(cfg.gamma1, cfg.normalize), RoofFunction::make(cfg.gamma2, cfg.normalize),
                       cf_expand(cfg.alpha1, cfg.cf_depth), cf_expand(cfg.alpha2, cfg.cf_depth)};
}

ProbeResult run_standardness_probe(const ExperimentConfig& cfg, bool write_files) {
  validate(cfg);
  const ProductSystem sys = make_system(cfg);
  const Partition part1 = build_partition(sys.f1, cfg.m);
  const Partition part2 = build_partition(sys.f2, cfg.m);
  const std::int64_t n_max = *std::max_element(cfg.n_list.begin(), cfg.n_list.end());

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::pair<ProductPoint, ProductPoint>> starts;
  for (int p = 0; p < cfg.pair_count; ++p) {
    ProductPoint a = sample_invariant(sys, rng);
    ProductPoint b = sample_invariant(sys, rng);
    starts.emplace_back(a, b);
  }

  const std::size_t per_pair = cfg.n_list.size();
  std::vector<ProbeRow> r1(starts.size() * per_pair), r2(r1.size()), rp(r1.size());
  parallel_for(cfg.threads, starts.size(), [&](std::size_t p) {
    SymbolicWord wa = code_orbit(sys, part1, part2, starts[p].first, n_max);
    SymbolicWord wb = code_orbit(sys, part1, part2, starts[p].second, n_max);
    const std::uint32_t a2 = part2.alphabet_size();
    SymbolicWord sa1 = project_first(wa, a2), sb1 = project_first(wb, a2);
    SymbolicWord sa2 = project_second(wa, a2), sb2 = project_second(wb, a2);
    for (std::size_t k = 0; k < per_pair; ++k) {
      const std::int64_t n = cfg.n_list[k];
      auto prefix = [&](const SymbolicWord& w) {
        SymbolicWord out;
        out.alphabet_size = w.alphabet_size;
        out.symbols.assign(w.symbols.begin(), w.symbols.begin() + n + 1);
        return out;
      };
      auto fill = [&](ProbeRow& row, const SymbolicWord& x, const SymbolicWord& y) {
        FbarResult fr = fbar_distance(prefix(x), prefix(y));
        row.n = n;
        row.pair = static_cast<int>(p);
        row.length = static_cast<std::size_t>(n + 1);
        row.fbar = fr.value;
        row.cardinality = fr.cardinality;
        row.good = is_good_matching(fr.witness, n + 1, 0.01);
      };
      fill(rp[p * per_pair + k], wa, wb);
      fill(r1[p * per_pair + k], sa1, sb1);
      fill(r2[p * per_pair + k], sa2, sb2);
    }
  });

  ProbeResult res{r1, r2, rp, {}};
  if (write_files) {
    auto emit = [&](const std::string& name, const std::string& table, const std::vector<ProbeRow>& rows,
                    std::uint32_t alphabet) {
      std::ofstream out = open_output(cfg, name, res.files);
      CsvWriter csv(out);
      auto pre = preamble(cfg, table);
      pre.emplace_back("alphabet_size", std::to_string(alphabet));
      pre.emplace_back("fbar_normalizer", "word length N+1");
      pre.emplace_back("good_matching_eps", "0.01");
      csv.preamble(pre);
      csv.row({"N", "pair", "length", "fbar", "cardinality", "good_matching"});
      for (const auto& r : rows)
        csv.row({std::to_string(r.n), std::to_string(r.pair), std::to_string(r.length), fmt(r.fbar),
                 std::to_string(r.cardinality), r.good ? "1" : "0"});
    };
    emit("probe_single1.csv", "single-flow-1", res.single1, part1.alphabet_size());
    emit("probe_single2.csv", "single-flow-2", res.single2, part2.alphabet_size());
    emit("probe_product.csv", "product", res.product, part1.alphabet_size() * part2.alphabet_size());
  }
  return res;
}

bool VerifyResult::violation() const {
  for (const auto& [name, s] : sweeps)
    if (s.hard && s.passes < s.cases) return true;
  return false;
}

namespace {

double relative_margin(const InequalityRow& row) {
  double scale = std::max({std::abs(row.lhs), std::abs(row.rhs), 1e-300});
  return row.margin / scale;
}

}  // namespace

VerifyResult run_verification_sweeps(const ExperimentConfig& cfg, bool write_files) {
  validate(cfg);
  VerifyResult res;
  const ProductSystem sys = make_system(cfg);
  // larger |gamma| goes first
  const bool swapped = std::abs(cfg.gamma1) < std::abs(cfg.gamma2);
  res.eps = swapped ? epsilon_params(cfg.gamma2, cfg.gamma1, cfg.eps2) : epsilon_params(cfg.gamma1, cfg.gamma2, cfg.eps2);
  const RoofFunction& steep = swapped ? sys.f2 : sys.f1;
  const Rotation& steep_rot = swapped ? sys.rot2 : sys.rot1;

  std::mt19937_64 rng(cfg.seed);
  const RoofFunction* roofs[2] = {&sys.f1, &sys.f2};
  const Rotation* rots[2] = {&sys.rot1, &sys.rot2};

  // DK sweep
  std::vector<std::vector<std::string>> dk_rows;
  SweepSummary dk{0, 0, std::numeric_limits<double>::infinity(), true};
  for (int c = 0; c < cfg.dk_cases; ++c) {
    int which = c % 2;
    const Rotation& rot = *rots[which];
    CirclePoint z = random_circle_point(rng);
    int s = 3 + static_cast<int>(rng() % 10);
    if (s + 1 > rot.depth()) throw PreconditionError("cf_depth too small for the DK sweep");
    std::uint64_t lo = rot.q(s), hi = rot.q(s + 1);
    auto m = static_cast<std::int64_t>(lo + rng() % (hi - lo + 1));
    if (rng() & 1) m = -m;
    DkReport rep = dk_bounds_check(*roofs[which], rot, z, m, 1.0);
    ++dk.cases;
    if (rep.all_pass()) ++dk.passes;
    for (const auto& row : rep.rows) {
      dk.worst_margin = std::min(dk.worst_margin, relative_margin(row));
      dk_rows.push_back({std::to_string(c), std::to_string(which + 1), fmt(z.value()), std::to_string(m),
                         std::to_string(rep.s), std::to_string(rep.q_s), std::to_string(rep.q_next), row.side,
                         fmt(row.lhs), fmt(row.rhs), fmt(row.margin), row.pass ? "1" : "0"});
    }
  }
  res.sweeps["dk"] = dk;

  // dichotomy sweep
  std::vector<std::vector<std::string>> di_rows;
  SweepSummary di{0, 0, std::numeric_limits<double>::infinity(), true};
  for (int c = 0; c < cfg.dichotomy_pairs; ++c) {
    int which = c % 2;
    const RoofFunction& f = *roofs[which];
    FlowPoint z = sample_invariant(f, rng);
    double w = std::pow(10.0, 3.0 + 2.0 * unit_uniform(rng));
    double shift = (rng() & 1) ? 1.0 / w : -1.0 / w;
    FlowPoint zp{z.h + CirclePoint::from_double(shift), z.v};
    double fz = f.value(zp.h);
    if (!(zp.v < fz)) zp.v = 0.5 * fz;
    double d0 = circle_dist(z.h, zp.h).value;
    double t_max = dichotomy_horizon(1.0 / d0);
    DichotomyReport rep = dichotomy_check(f, *rots[which], z, zp, t_max);
    ++di.cases;
    if (rep.pass()) ++di.passes;
    di.worst_margin = std::min(di.worst_margin, rep.min_ratio - 100.0);
    di_rows.push_back({std::to_string(c), std::to_string(which + 1), fmt(rep.w), fmt(t_max),
                       std::to_string(rep.grid_points), std::to_string(rep.isometric), std::to_string(rep.separated),
                       fmt(rep.min_ratio), std::to_string(rep.violations.size())});
  }
  res.sweeps["dichotomy"] = di;

  // sandwich sweep
  std::vector<std::pair<ProductPoint, SandwichSweep>> sw(static_cast<std::size_t>(cfg.sandwich_points));
  for (auto& s : sw) s.first = sample_invariant(sys, rng);
  parallel_for(cfg.threads, sw.size(), [&](std::size_t i) {
    sw[i].second = sandwich_sweep(sys, sw[i].first.first, sw[i].first.second, cfg.sandwich_horizon, cfg.eps2,
                                  cfg.sandwich_grid);
  });
  SweepSummary sa{0, 0, std::numeric_limits<double>::infinity(), false};
  std::vector<std::vector<std::string>> sa_rows;
  for (std::size_t i = 0; i < sw.size(); ++i) {
    const auto& s = sw[i].second;
    bool ok = s.pass_fraction >= s.allowance;
    ++sa.cases;
    if (ok) ++sa.passes;
    sa.worst_margin = std::min(sa.worst_margin, s.pass_fraction - s.allowance);
    sa_rows.push_back({std::to_string(i), fmt(cfg.sandwich_horizon), std::to_string(s.grid_size),
                       std::to_string(s.passes), fmt(s.pass_fraction), fmt(s.allowance), ok ? "1" : "0"});
  }
  res.sweeps["sandwich"] = sa;

  // N lower bound sweep
  SweepSummary nl{0, 0, std::numeric_limits<double>::infinity(), false};
  std::vector<std::vector<std::string>> nl_rows;
  for (int c = 0; c < cfg.nlower_cases; ++c) {
    int which = c % 2;
    FlowPoint z = sample_invariant(*roofs[which], rng);
    double t = std::exp(std::log(1e2) + (std::log(1e6) - std::log(1e2)) * unit_uniform(rng));
    NLowerBoundReport rep = n_lower_bound_check(*roofs[which], *rots[which], z, t);
    if (rep.precondition_met) {
      ++nl.cases;
      if (rep.pass) ++nl.passes;
      nl.worst_margin = std::min(nl.worst_margin, rep.margin);
    }
    nl_rows.push_back({std::to_string(c), std::to_string(which + 1), fmt(t), std::to_string(rep.n), fmt(rep.bound),
                       std::to_string(rep.relevant_index), rep.precondition_met ? "1" : "0",
                       rep.precondition_met ? (rep.pass ? "1" : "0") : "", fmt(rep.margin)});
  }
  res.sweeps["n_lower"] = nl;

  // shadow set sweep
  SweepSummary sh{0, 0, std::numeric_limits<double>::infinity(), false};
  std::vector<std::vector<std::string>> sh_rows;
  const double c1 = 1.0 / steep.minimum();
  for (int k = cfg.shadow_k_min; k <= cfg.shadow_k_max; ++k) {
    std::int64_t r = std::int64_t{1} << k;
    double measure = shadow_set_measure(steep_rot, r, res.eps.eps0, c1);
    double bound = shadow_set_bound(r, res.eps.eps0, c1);
    bool ok = measure <= bound;
    ++sh.cases;
    if (ok) ++sh.passes;
    sh.worst_margin = std::min(sh.worst_margin, bound - measure);
    sh_rows.push_back({std::to_string(r), fmt(res.eps.eps0), fmt(c1), fmt(measure), fmt(bound), ok ? "1" : "0"});
  }
  res.sweeps["shadow"] = sh;

  if (write_files) {
    auto emit = [&](const std::string& name, const std::string& table, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
      std::ofstream out = open_output(cfg, name, res.files);
      CsvWriter csv(out);
      auto pre = preamble(cfg, table);
      pre.emplace_back("eps0", fmt(res.eps.eps0));
      pre.emplace_back("r0_estimate", std::to_string(res.eps.r0_estimate));
      csv.preamble(pre);
      csv.row(header);
      for (const auto& r : rows) csv.row(r);
    };
    emit("verify_dk.csv", "dk", {"case", "flow", "z", "M", "s", "q_s", "q_s1", "side", "lhs", "rhs", "margin", "pass"},
         dk_rows);
    emit("verify_dichotomy.csv", "dichotomy",
         {"pair", "flow", "W", "t_max", "grid_points", "isometric", "separated", "min_ratio", "violations"}, di_rows);
    emit("verify_sandwich.csv", "sandwich",
         {"point", "T", "grid_size", "passes", "pass_fraction", "allowance", "pass"}, sa_rows);
    emit("verify_n_lower.csv", "n_lower",
         {"case", "flow", "t", "N", "bound", "relevant_index", "precondition_met", "pass", "margin"}, nl_rows);
    emit("verify_shadow.csv", "shadow", {"R", "eps0", "C1", "measure", "bound", "pass"}, sh_rows);

    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, s] : res.sweeps) {
      nlohmann::json e;
      e["cases"] = s.cases;
      e["passes"] = s.passes;
      if (std::isfinite(s.worst_margin))
        e["worst_margin"] = s.worst_margin;
      else
        e["worst_margin"] = nullptr;
      j[name] = e;
    }
    std::ofstream out = open_output(cfg, "summary.json", res.files);
    out << j.dump(2) << '\n';
  }
  return res;
}

}  // namespace kflow
