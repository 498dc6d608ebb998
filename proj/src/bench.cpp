#include "greenbf/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "greenbf/power_model.hpp"

namespace greenbf::bench {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int axis_tag(SweepAxis a) {
  switch (a) {
    case SweepAxis::None: return 0;
    case SweepAxis::SinrDb: return 1;
    case SweepAxis::NUsers: return 2;
    case SweepAxis::NAntennas: return 3;
  }
  return 0;
}

SystemConfig apply_axis(const SystemConfig& base, SweepAxis axis, double value) {
  SystemConfig cfg = base;
  switch (axis) {
    case SweepAxis::None:
      break;
    case SweepAxis::SinrDb:
      cfg.sinr_targets =
          Vector::Constant(cfg.n_users, db_to_linear(value));
      break;
    case SweepAxis::NUsers: {
      cfg.n_users = static_cast<int>(value);
      const double gamma = base.sinr_targets(0);
      cfg.sinr_targets = Vector::Constant(cfg.n_users, gamma);
      break;
    }
    case SweepAxis::NAntennas:
      cfg.n_antennas = static_cast<int>(value);
      break;
  }
  return cfg;
}

int count_active(const BeamformerSet& w, const SystemConfig& cfg) {
  int active = 0;
  for (int n = 0; n < w.n_antennas(); ++n)
    if (w.per_antenna_power(n) > cfg.on_threshold()) ++active;
  return active;
}

TrialStatus map_sca_status(sca::ScaStatus s) {
  switch (s) {
    case sca::ScaStatus::Solved:
    case sca::ScaStatus::Degraded:
      return TrialStatus::Solved;
    case sca::ScaStatus::Infeasible:
      return TrialStatus::Infeasible;
    case sca::ScaStatus::Failed:
      return TrialStatus::Failed;
  }
  return TrialStatus::Failed;
}

/// Physical-model pricing of a beamformer: the recorded totals always use
/// the base config's PA exponent, whatever the scheme designed with.
void fill_power_fields(TrialRecord& rec, const BeamformerSet& w,
                       const SystemConfig& cfg, bool joint) {
  const double pa = pa_power(w, cfg);
  const double rf = joint ? rf_power_exact(w, cfg, cfg.on_threshold())
                          : cfg.p_rf * cfg.n_antennas;
  const PowerBreakdown b = make_breakdown(pa, rf, cfg.p_static);
  rec.total_w = b.total;
  rec.pa_w = b.pa;
  rec.rf_w = b.rf;
  rec.active_antennas = count_active(w, cfg);
}

TrialRecord run_one(const Channel& channel, const SystemConfig& cfg,
                    const ExperimentConfig& exp, sca::Scheme scheme,
                    uint64_t seed) {
  TrialRecord rec;
  rec.seed = seed;
  rec.scheme = scheme;
  rec.n_antennas = cfg.n_antennas;
  rec.n_users = cfg.n_users;
  rec.sinr_db = linear_to_db(cfg.sinr_targets(0));
  rec.beta = sca::scheme_fixed_pa(scheme) ? 0.0 : cfg.beta;
  rec.epsilon = cfg.epsilon;

  sca::ScaOptions opts = exp.sca;
  opts.scheme = scheme;

  const auto t0 = std::chrono::steady_clock::now();
  if (sca::scheme_is_joint(scheme)) {
    const antsel::SelectionResult sel = antsel::select_antennas(channel, cfg, opts);
    rec.candidates = static_cast<int>(sel.candidates.size());
    switch (sel.status) {
      case antsel::SelectionStatus::Solved:
        rec.status = TrialStatus::Solved;
        rec.sca_iterations = sel.sca_iterations_full;
        fill_power_fields(rec, sel.chosen_w, cfg, true);
        break;
      case antsel::SelectionStatus::Infeasible:
        rec.status = TrialStatus::Infeasible;
        break;
      case antsel::SelectionStatus::Failed:
        rec.status = TrialStatus::Failed;
        break;
    }
  } else {
    const sca::ScaTrace trace = sca::sca_solve(channel, cfg, opts);
    rec.status = map_sca_status(trace.status);
    rec.sca_iterations = trace.sca_iterations;
    if (rec.status == TrialStatus::Solved)
      fill_power_fields(rec, trace.final_w, cfg, false);
  }
  const auto t1 = std::chrono::steady_clock::now();
  if (exp.record_timing)
    rec.wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return rec;
}

int pool_size(size_t n_tasks) {
  unsigned threads = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("GREENBF_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) threads = static_cast<unsigned>(v);
  }
  if (threads < 1) threads = 1;
  return static_cast<int>(std::min<size_t>(threads, std::max<size_t>(n_tasks, 1)));
}

}  // namespace

std::string sweep_axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::SinrDb: return "sinr_db";
    case SweepAxis::NUsers: return "n_users";
    case SweepAxis::NAntennas: return "n_antennas";
    case SweepAxis::None: return "none";
  }
  return "none";
}

bool sweep_axis_from_name(const std::string& name, SweepAxis& out) {
  for (SweepAxis a : {SweepAxis::SinrDb, SweepAxis::NUsers,
                      SweepAxis::NAntennas, SweepAxis::None}) {
    if (sweep_axis_name(a) == name) {
      out = a;
      return true;
    }
  }
  return false;
}

std::string trial_status_name(TrialStatus s) {
  switch (s) {
    case TrialStatus::Solved: return "solved";
    case TrialStatus::Infeasible: return "infeasible";
    case TrialStatus::Failed: return "failed";
  }
  return "failed";
}

void ExperimentConfig::validate() const {
  base.validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (schemes.empty()) throw std::invalid_argument("schemes must not be empty");
  if (!(pathloss_scale > 0.0))
    throw std::invalid_argument("pathloss_scale must be > 0");
  if (axis != SweepAxis::None && sweep_values.empty())
    throw std::invalid_argument("sweep_values required for a sweep axis");
  for (double v : sweep_values) {
    if ((axis == SweepAxis::NUsers || axis == SweepAxis::NAntennas) &&
        (v < 1.0 || v != std::floor(v)))
      throw std::invalid_argument("count-valued sweep values must be positive integers");
  }
}

std::vector<TrialRecord> run_sweep(const ExperimentConfig& exp) {
  exp.validate();
  const std::vector<double> values =
      exp.axis == SweepAxis::None ? std::vector<double>{0.0} : exp.sweep_values;

  struct Task {
    int value_index;
    int trial;
  };
  std::vector<Task> tasks;
  for (int vi = 0; vi < static_cast<int>(values.size()); ++vi)
    for (int t = 0; t < exp.trials; ++t) tasks.push_back({vi, t});

  const int n_schemes = static_cast<int>(exp.schemes.size());
  std::vector<TrialRecord> records(tasks.size() * n_schemes);

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t ti = next.fetch_add(1);
      if (ti >= tasks.size()) return;
      const Task task = tasks[ti];
      const SystemConfig cfg =
          apply_axis(exp.base, exp.axis, values[task.value_index]);
      const uint64_t seed = mix_seed(exp.base_seed, axis_tag(exp.axis),
                                     task.value_index, task.trial);
      Channel channel;
      try {
        cfg.validate();
        channel = gen_channel(seed, cfg.n_users, cfg.n_antennas,
                              exp.pathloss_scale);
      } catch (const std::exception&) {
        for (int si = 0; si < n_schemes; ++si) {
          TrialRecord& rec = records[ti * n_schemes + si];
          rec.seed = seed;
          rec.scheme = exp.schemes[si];
          rec.status = TrialStatus::Failed;
        }
        continue;
      }
      for (int si = 0; si < n_schemes; ++si) {
        TrialRecord& rec = records[ti * n_schemes + si];
        try {
          rec = run_one(channel, cfg, exp, exp.schemes[si], seed);
        } catch (const std::exception&) {
          rec = TrialRecord{};
          rec.seed = seed;
          rec.scheme = exp.schemes[si];
          rec.n_antennas = cfg.n_antennas;
          rec.n_users = cfg.n_users;
          rec.status = TrialStatus::Failed;
        }
      }
    }
  };

  const int n_threads = pool_size(tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  return records;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {
const char* kCsvHeader =
    "seed,scheme,n_antennas,n_users,sinr_db,beta,epsilon,status,total_w,pa_w,"
    "rf_w,active_antennas,sca_iterations,candidates,wall_ms";
}

void write_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << kCsvHeader << "\n";
  for (const TrialRecord& r : records) {
    out << r.seed << ',' << sca::scheme_name(r.scheme) << ',' << r.n_antennas
        << ',' << r.n_users << ',' << format_double(r.sinr_db) << ','
        << format_double(r.beta) << ',' << format_double(r.epsilon) << ','
        << trial_status_name(r.status) << ',';
    if (r.status == TrialStatus::Solved) {
      out << format_double(r.total_w) << ',' << format_double(r.pa_w) << ','
          << format_double(r.rf_w);
    } else {
      out << ",,";
    }
    out << ',' << r.active_antennas << ',' << r.sca_iterations << ','
        << r.candidates << ',' << r.wall_ms << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrialRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  if (trim(line) != kCsvHeader)
    throw std::runtime_error("unexpected csv header in " + path);

  std::vector<TrialRecord> records;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split(trim(line), ',');
    if (f.size() != 15)
      throw std::runtime_error("bad csv row in " + path + ": " + line);
    TrialRecord r;
    r.seed = std::strtoull(f[0].c_str(), nullptr, 10);
    if (!sca::scheme_from_name(f[1], r.scheme))
      throw std::runtime_error("unknown scheme in csv: " + f[1]);
    r.n_antennas = std::stoi(f[2]);
    r.n_users = std::stoi(f[3]);
    r.sinr_db = std::strtod(f[4].c_str(), nullptr);
    r.beta = std::strtod(f[5].c_str(), nullptr);
    r.epsilon = std::strtod(f[6].c_str(), nullptr);
    if (f[7] == "solved")
      r.status = TrialStatus::Solved;
    else if (f[7] == "infeasible")
      r.status = TrialStatus::Infeasible;
    else if (f[7] == "failed")
      r.status = TrialStatus::Failed;
    else
      throw std::runtime_error("unknown status in csv: " + f[7]);
    if (r.status == TrialStatus::Solved) {
      r.total_w = std::strtod(f[8].c_str(), nullptr);
      r.pa_w = std::strtod(f[9].c_str(), nullptr);
      r.rf_w = std::strtod(f[10].c_str(), nullptr);
    }
    r.active_antennas = std::stoi(f[11]);
    r.sca_iterations = std::stoi(f[12]);
    r.candidates = std::stoi(f[13]);
    r.wall_ms = std::strtoll(f[14].c_str(), nullptr, 10);
    records.push_back(r);
  }
  return records;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

class KeyValues {
 public:
  explicit KeyValues(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": empty key or value");
      if (!values_.emplace(key, value).second)
        throw std::runtime_error("duplicate config key: " + key);
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end())
      throw std::runtime_error("missing config key: " + key);
    std::string v = it->second;
    values_.erase(it);
    return v;
  }

  std::string take_or(const std::string& key, const std::string& fallback) {
    return has(key) ? take(key) : fallback;
  }

  void expect_empty() const {
    if (!values_.empty())
      throw std::runtime_error("unknown config key: " + values_.begin()->first);
  }

 private:
  std::map<std::string, std::string> values_;
};

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || !std::isfinite(d))
    throw std::runtime_error("config key " + key + ": bad number '" + v + "'");
  return d;
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d))
    throw std::runtime_error("config key " + key + ": expected an integer");
  return static_cast<long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::runtime_error("config key " + key + ": expected true/false");
}

}  // namespace

ExperimentConfig parse_config(const std::string& path) {
  KeyValues kv(path);
  if (to_long("config_version", kv.take("config_version")) != 1)
    throw std::runtime_error("unsupported config_version (expected 1)");

  ExperimentConfig exp;
  SystemConfig& cfg = exp.base;
  cfg.n_antennas = static_cast<int>(to_long("n_antennas", kv.take("n_antennas")));
  cfg.n_users = static_cast<int>(to_long("n_users", kv.take("n_users")));

  if (kv.has("sinr_db") && kv.has("sinr_linear"))
    throw std::runtime_error("give sinr_db or sinr_linear, not both");
  double gamma = 0.0;
  if (kv.has("sinr_db"))
    gamma = db_to_linear(to_double("sinr_db", kv.take("sinr_db")));
  else
    gamma = to_double("sinr_linear", kv.take("sinr_linear"));
  cfg.sinr_targets = Vector::Constant(cfg.n_users, gamma);

  if (kv.has("p_antenna_max_dbm"))
    cfg.p_antenna_max =
        dbm_to_watts(to_double("p_antenna_max_dbm", kv.take("p_antenna_max_dbm")));
  else
    cfg.p_antenna_max = to_double("p_antenna_max_w", kv.take("p_antenna_max_w"));

  if (kv.has("p_sum_max_dbm"))
    cfg.p_sum_max =
        dbm_to_watts(to_double("p_sum_max_dbm", kv.take("p_sum_max_dbm")));
  else
    cfg.p_sum_max = to_double("p_sum_max_w", kv.take("p_sum_max_w"));

  cfg.eta_max = to_double("eta_max", kv.take("eta_max"));
  cfg.beta = to_double("beta", kv.take("beta"));
  cfg.p_rf = to_double("p_rf_w", kv.take("p_rf_w"));
  cfg.p_static = to_double("p_static_w", kv.take("p_static_w"));

  const bool has_sigma = kv.has("sigma2_w");
  const bool has_psd = kv.has("noise_psd_dbm_per_hz") || kv.has("bandwidth_hz");
  if (has_sigma && has_psd)
    throw std::runtime_error("give sigma2_w or noise_psd_dbm_per_hz+bandwidth_hz, not both");
  if (has_sigma) {
    cfg.sigma2 = to_double("sigma2_w", kv.take("sigma2_w"));
  } else if (kv.has("noise_psd_dbm_per_hz") && kv.has("bandwidth_hz")) {
    cfg.sigma2 = noise_power(
        to_double("noise_psd_dbm_per_hz", kv.take("noise_psd_dbm_per_hz")),
        to_double("bandwidth_hz", kv.take("bandwidth_hz")));
  } else {
    throw std::runtime_error(
        "noise spec required: sigma2_w, or noise_psd_dbm_per_hz with bandwidth_hz");
  }

  cfg.epsilon = kv.has("epsilon_w")
                    ? to_double("epsilon_w", kv.take("epsilon_w"))
                    : 1e-4 * cfg.p_antenna_max;

  // Default pathloss: full sum power on one antenna gives a 20 dB SNR.
  exp.pathloss_scale =
      kv.has("pathloss_scale")
          ? to_double("pathloss_scale", kv.take("pathloss_scale"))
          : 100.0 * cfg.sigma2 / cfg.p_sum_max;

  if (!sweep_axis_from_name(kv.take_or("sweep_axis", "none"), exp.axis))
    throw std::runtime_error("unknown sweep_axis");
  if (kv.has("sweep_values")) {
    for (const std::string& tok : split(kv.take("sweep_values"), ','))
      exp.sweep_values.push_back(to_double("sweep_values", trim(tok)));
  }
  exp.trials = static_cast<int>(to_long("trials", kv.take_or("trials", "1")));
  exp.base_seed = static_cast<uint64_t>(
      to_long("base_seed", kv.take_or("base_seed", "1")));

  const std::string schemes = kv.take_or(
      "schemes",
      "joint_nonlinear,joint_fixed_pa,bf_only_nonlinear,bf_only_fixed_pa");
  for (const std::string& tok : split(schemes, ',')) {
    sca::Scheme s;
    if (!sca::scheme_from_name(trim(tok), s))
      throw std::runtime_error("unknown scheme: " + trim(tok));
    exp.schemes.push_back(s);
  }

  exp.output_path = kv.take_or("output", "sweep.csv");
  exp.record_timing =
      to_bool("record_timing", kv.take_or("record_timing", "false"));

  exp.sca.max_iterations = static_cast<int>(to_long(
      "sca_max_iterations", kv.take_or("sca_max_iterations", "100")));
  exp.sca.rel_tol = to_double("sca_rel_tol", kv.take_or("sca_rel_tol", "1e-6"));
  exp.sca.solver_tol =
      to_double("solver_tol", kv.take_or("solver_tol", "1e-9"));
  exp.sca.solver_max_iter = static_cast<int>(
      to_long("solver_max_iter", kv.take_or("solver_max_iter", "200")));
  exp.sca.anneal_epsilon =
      to_bool("anneal_epsilon", kv.take_or("anneal_epsilon", "false"));

  kv.expect_empty();
  exp.validate();
  return exp;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records,
                                    SweepAxis axis) {
  auto value_of = [axis](const TrialRecord& r) -> double {
    switch (axis) {
      case SweepAxis::SinrDb: return r.sinr_db;
      case SweepAxis::NUsers: return r.n_users;
      case SweepAxis::NAntennas: return r.n_antennas;
      case SweepAxis::None: return 0.0;
    }
    return 0.0;
  };

  std::map<std::pair<double, std::string>, std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& r : records)
    groups[{value_of(r), sca::scheme_name(r.scheme)}].push_back(&r);

  std::vector<AggregateRow> rows;
  for (const auto& [key, members] : groups) {
    AggregateRow row;
    row.sweep_value = key.first;
    sca::scheme_from_name(key.second, row.scheme);
    row.n_trials = static_cast<int>(members.size());
    double sum = 0, sum2 = 0, pa = 0, rf = 0, act = 0, iters = 0;
    for (const TrialRecord* r : members) {
      if (r->status != TrialStatus::Solved) continue;
      ++row.n_solved;
      sum += r->total_w;
      sum2 += r->total_w * r->total_w;
      pa += r->pa_w;
      rf += r->rf_w;
      act += r->active_antennas;
      iters += r->sca_iterations;
    }
    if (row.n_solved > 0) {
      const double n = row.n_solved;
      row.mean_total = sum / n;
      row.mean_pa = pa / n;
      row.mean_rf = rf / n;
      row.mean_active = act / n;
      row.mean_iterations = iters / n;
      if (row.n_solved > 1) {
        const double var =
            std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
        row.stderr_total = std::sqrt(var / n);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "sweep_value,scheme,n_trials,n_solved,mean_total_w,stderr_total_w,"
         "mean_pa_w,mean_rf_w,mean_active_antennas,mean_sca_iterations\n";
  for (const AggregateRow& r : rows) {
    out << format_double(r.sweep_value) << ',' << sca::scheme_name(r.scheme)
        << ',' << r.n_trials << ',' << r.n_solved << ','
        << format_double(r.mean_total) << ',' << format_double(r.stderr_total)
        << ',' << format_double(r.mean_pa) << ',' << format_double(r.mean_rf)
        << ',' << format_double(r.mean_active) << ','
        << format_double(r.mean_iterations) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace greenbf::bench
