#include "lrgibbs/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "lrgibbs/errors.hpp"
#include "lrgibbs/exact.hpp"
#include "lrgibbs/model.hpp"

namespace lrgibbs::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string key_of(const std::vector<std::pair<std::string, double>>& parts) {
  std::string out;
  for (const auto& [name, value] : parts) {
    if (!out.empty()) out += ',';
    out += name + ':' + format_double(value);
  }
  return out;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void stamp(DataTable& t, const SweepSpec& spec) {
  t.set_meta("kind", to_string(spec.kind));
  t.set_meta("spec_hash", spec_hash(spec));
  t.set_meta("engine", to_string(spec.engine));
  t.set_meta("tebd", "dbeta=" + format_double(spec.tebd.dbeta) + ";cutoff=" + format_double(spec.tebd.cutoff) +
                         ";chi_max=" + std::to_string(spec.tebd.chi_max) + ";order=" + std::to_string(spec.tebd.order));
  t.set_meta("created", timestamp());
}

/// Read access to one Gibbs state, whichever engine produced it.
class StateView {
 public:
  virtual ~StateView() = default;
  virtual double expectation(const PlacedObservable& o) const = 0;
  virtual double covariance(const PlacedObservable& a, const PlacedObservable& b) const = 0;
};

class ExactView final : public StateView {
 public:
  ExactView(const exact::SpectralGibbs& rho, exact::Options opt) : rho_(rho), opt_(opt) {}
  double expectation(const PlacedObservable& o) const override { return exact::expectation(rho_, o, opt_); }
  double covariance(const PlacedObservable& a, const PlacedObservable& b) const override {
    return exact::covariance(rho_, a, b, opt_);
  }

 private:
  const exact::SpectralGibbs& rho_;
  exact::Options opt_;
};

class MpoView final : public StateView {
 public:
  explicit MpoView(const tensornet::Mpo& mpo) : env_(mpo) {}
  double expectation(const PlacedObservable& o) const override { return env_.expectation(o); }
  double covariance(const PlacedObservable& a, const PlacedObservable& b) const override {
    return env_.covariance(a, b);
  }

 private:
  tensornet::Environment env_;
};

struct VisitLog {
  std::vector<std::string> warnings;
};

/// Calls fn(beta_index, state) for every beta, in ascending beta order.
void visit_states(const LrTfiChain& chain, const std::vector<double>& betas, Engine engine, const SweepSpec& spec,
                  const std::function<void(std::size_t, const StateView&)>& fn, VisitLog* log) {
  std::vector<std::size_t> order(betas.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return betas[a] < betas[b]; });
  if (engine == Engine::exact) {
    exact::Options opt;
    opt.max_sites = spec.exact_capacity;
    const exact::SpectrumPtr spectrum = exact::diagonalize(build_lr_tfi(chain), opt);
    for (std::size_t i : order) {
      const exact::SpectralGibbs rho = exact::gibbs(spectrum, betas[i]);
      fn(i, ExactView(rho, opt));
    }
    return;
  }
  tensornet::Mpo mpo = tensornet::Mpo::identity(chain.n);
  for (std::size_t i : order) {
    const tensornet::EvolveReport rep = tensornet::evolve(mpo, chain, betas[i], spec.tebd);
    if (rep.rounded && log) {
      log->warnings.push_back("beta=" + format_double(betas[i]) + " rounded down to " + format_double(mpo.beta()));
    }
    fn(i, MpoView(mpo));
  }
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void record_warnings(DataTable& t, const std::vector<VisitLog>& logs) {
  int count = 0;
  for (const auto& l : logs) {
    for (const auto& w : l.warnings) t.set_meta("warning." + std::to_string(count++), w);
  }
}

}  // namespace

const char* to_string(Engine e) {
  switch (e) {
    case Engine::exact:
      return "exact";
    case Engine::tensornet:
      return "tensornet";
    case Engine::automatic:
      return "auto";
  }
  return "?";
}

Engine engine_from_string(const std::string& name) {
  if (name == "exact") return Engine::exact;
  if (name == "tensornet") return Engine::tensornet;
  if (name == "auto") return Engine::automatic;
  throw ConfigError("unknown engine: " + name);
}

const char* to_string(Kind k) {
  switch (k) {
    case Kind::stability:
      return "stability";
    case Kind::decay:
      return "decay";
    case Kind::locind:
      return "locind";
    case Kind::lrb_fit:
      return "lrb-fit";
    case Kind::bound_compare:
      return "bounds";
  }
  return "?";
}

Kind kind_from_string(const std::string& name) {
  for (Kind k : {Kind::stability, Kind::decay, Kind::locind, Kind::lrb_fit, Kind::bound_compare}) {
    if (name == to_string(k)) return k;
  }
  if (name == "lrb_fit") return Kind::lrb_fit;
  if (name == "bound_compare") return Kind::bound_compare;
  throw ConfigError("unknown experiment kind: " + name);
}

void SweepSpec::validate() const {
  if (alphas.empty() || betas.empty() || sizes.empty()) throw ConfigError("sweep lists must be nonempty");
  if ((kind == Kind::stability || kind == Kind::bound_compare) && epsilons.empty())
    throw ConfigError("epsilon list must be nonempty");
  for (double a : alphas) {
    if (!(a > 0)) throw ConfigError("alpha must be positive");
  }
  for (double b : betas) {
    if (!(b >= 0)) throw ConfigError("beta must be nonnegative");
  }
  for (double e : epsilons) {
    if (!(e >= 0)) throw ConfigError("epsilon must be nonnegative");
  }
  for (int n : sizes) {
    if (n < 2) throw ConfigError("N must be at least 2");
  }
  if (auto_exact_max < 1 || exact_capacity < 1) throw ConfigError("engine caps must be positive");
  if (workers < 0) throw ConfigError("workers must be nonnegative");
  if (!(fit_window >= 0)) throw ConfigError("fit_window must be nonnegative");
  if (lrb_time_points < 1) throw ConfigError("lrb_time_points must be positive");
  try {
    tensornet::validate(tebd);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

Engine SweepSpec::engine_for(int n) const {
  if (engine != Engine::automatic) return engine;
  return n <= auto_exact_max ? Engine::exact : Engine::tensornet;
}

SweepSpec spec_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "kind",       "engine",         "alphas",         "betas",   "epsilons", "sizes",       "J",
      "h",          "tebd",           "auto_exact_max", "exact_capacity", "output", "seed",  "workers",
      "anchor",     "noise_floor",    "fit_window",     "lrb_site", "lrb_distances", "lrb_time_points",
      "kappa_beta"};
  if (!j.is_object()) throw ConfigError("sweep spec must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown spec field: " + key);
  }
  SweepSpec s;
  try {
    if (j.contains("kind")) s.kind = kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("engine")) s.engine = engine_from_string(j.at("engine").get<std::string>());
    s.alphas = j.value("alphas", s.alphas);
    s.betas = j.value("betas", s.betas);
    s.epsilons = j.value("epsilons", s.epsilons);
    s.sizes = j.value("sizes", s.sizes);
    s.J = j.value("J", s.J);
    s.h = j.value("h", s.h);
    if (j.contains("tebd")) {
      const auto& t = j.at("tebd");
      s.tebd.dbeta = t.value("dbeta", s.tebd.dbeta);
      s.tebd.cutoff = t.value("cutoff", s.tebd.cutoff);
      s.tebd.chi_max = t.value("chi_max", s.tebd.chi_max);
      s.tebd.order = t.value("order", s.tebd.order);
      const std::string mode = t.value("cutoff_mode", std::string("discarded_weight"));
      if (mode == "discarded_weight") s.tebd.mode = tensornet::CutoffMode::discarded_weight;
      else if (mode == "relative_singular") s.tebd.mode = tensornet::CutoffMode::relative_singular;
      else throw ConfigError("unknown cutoff_mode: " + mode);
    }
    s.auto_exact_max = j.value("auto_exact_max", s.auto_exact_max);
    s.exact_capacity = j.value("exact_capacity", s.exact_capacity);
    s.output = j.value("output", s.output);
    s.seed = j.value("seed", s.seed);
    s.workers = j.value("workers", s.workers);
    s.anchor = j.value("anchor", s.anchor);
    s.noise_floor = j.value("noise_floor", s.noise_floor);
    s.fit_window = j.value("fit_window", s.fit_window);
    s.lrb_site = j.value("lrb_site", s.lrb_site);
    s.lrb_distances = j.value("lrb_distances", s.lrb_distances);
    s.lrb_time_points = j.value("lrb_time_points", s.lrb_time_points);
    if (j.contains("kappa_beta")) s.kappa_beta = j.at("kappa_beta").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed sweep spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json to_json(const SweepSpec& s) {
  nlohmann::json j{{"kind", to_string(s.kind)},
                   {"engine", to_string(s.engine)},
                   {"alphas", s.alphas},
                   {"betas", s.betas},
                   {"epsilons", s.epsilons},
                   {"sizes", s.sizes},
                   {"J", s.J},
                   {"h", s.h},
                   {"tebd",
                    {{"dbeta", s.tebd.dbeta},
                     {"cutoff", s.tebd.cutoff},
                     {"chi_max", s.tebd.chi_max},
                     {"order", s.tebd.order},
                     {"cutoff_mode", s.tebd.mode == tensornet::CutoffMode::discarded_weight ? "discarded_weight"
                                                                                             : "relative_singular"}}},
                   {"auto_exact_max", s.auto_exact_max},
                   {"exact_capacity", s.exact_capacity},
                   {"output", s.output},
                   {"seed", s.seed},
                   {"anchor", s.anchor},
                   {"noise_floor", s.noise_floor},
                   {"fit_window", s.fit_window},
                   {"lrb_site", s.lrb_site},
                   {"lrb_distances", s.lrb_distances},
                   {"lrb_time_points", s.lrb_time_points}};
  if (s.kappa_beta) j["kappa_beta"] = *s.kappa_beta;
  return j;
}

std::string spec_hash(const SweepSpec& s) {
  // Worker count and output path do not change results.
  nlohmann::json j = to_json(s);
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void DataTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw DomainError("row width does not match the column count");
  rows.push_back(std::move(row));
}

std::size_t DataTable::column_index(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("missing column: " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> DataTable::column(const std::string& name) const {
  const std::size_t c = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

void DataTable::set_meta(const std::string& key, const std::string& value) {
  if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos || value.find('\n') != std::string::npos)
    throw DomainError("metadata must be single-line key=value");
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

std::optional<std::string> DataTable::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void DataTable::write_csv(std::ostream& out) const {
  for (const auto& [k, v] : metadata) out << "# " << k << '=' << v << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << format_double(r[c]);
    out << '\n';
  }
}

void DataTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  write_csv(out);
  if (!out) throw ConfigError("failed writing " + path);
}

DataTable DataTable::read_csv(std::istream& in) {
  DataTable t;
  std::string line;
  bool header = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("metadata line without '='");
      t.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (!header) {
      t.columns = split(line);
      header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) throw ConfigError("ragged CSV row");
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (end == c.c_str()) throw ConfigError("non-numeric CSV cell: " + c);
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (!header) throw ConfigError("CSV has no header");
  return t;
}

DataTable DataTable::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_csv(in);
}

FitResult linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DomainError("fit inputs differ in length");
  const auto n = xs.size();
  if (n < 2) throw DomainError("fit needs at least two points");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("fit needs at least two distinct x values");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r = syy > 0 ? std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0) : 1.0;
  f.n_points = static_cast<int>(n);
  return f;
}

WorkerPool::WorkerPool(int workers) {
  const int hw = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  workers_ = workers > 0 ? workers : hw;
}

void WorkerPool::run(std::size_t jobs, const std::function<void(std::size_t)>& job) const {
  const auto threads = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(workers_), jobs));
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

Region middle_pair(int n) {
  if (n < 2) throw DomainError("middle pair needs N >= 2");
  return Region{n / 2 - 1, n / 2};
}

StabilityResult stability_sweep(const SweepSpec& spec) {
  spec.validate();
  // One job per (N, alpha, field shift); shift 0 is the unperturbed chain.
  std::vector<double> shifts{0.0};
  for (double e : spec.epsilons) shifts.push_back(e);
  struct Job {
    int n;
    double alpha;
    std::size_t shift;
  };
  std::vector<Job> jobs;
  for (int n : spec.sizes) {
    for (double a : spec.alphas) {
      for (std::size_t s = 0; s < shifts.size(); ++s) jobs.push_back({n, a, s});
    }
  }
  std::vector<std::vector<Measurement>> results(jobs.size());
  std::vector<VisitLog> logs(jobs.size());
  WorkerPool(spec.workers).run(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    auto& out = results[j];
    out.assign(spec.betas.size(), Measurement{});
    try {
      const LrTfiChain chain = LrTfiChain::make(job.n, job.alpha, spec.J, spec.h + shifts[job.shift]);
      const PlacedObservable zz = pauli_string(middle_pair(job.n), "zz");
      visit_states(chain, spec.betas, spec.engine_for(job.n), spec,
                   [&](std::size_t b, const StateView& s) { out[b].value = s.expectation(zz); }, &logs[j]);
    } catch (const Error& e) {
      for (auto& m : out) m = {false, e.what(), kNaN};
    }
  });

  StabilityResult res;
  DataTable& t = res.table;
  t.columns = {"N", "alpha", "beta", "epsilon", "value_unperturbed", "value_perturbed", "abs_diff", "engine", "status"};
  stamp(t, spec);
  t.set_meta("observable", "ZZ on sites floor(N/2)-1, floor(N/2) (0-based)");
  t.set_meta("perturbation", "V = sum_i Z_i, field h -> h + epsilon");
  t.set_meta("codes", "engine: 0 exact, 1 tensornet; status: 0 ok, 1 failed");
  int failures = 0;
  std::size_t j = 0;
  for (int n : spec.sizes) {
    for (double a : spec.alphas) {
      const std::size_t base = j;
      for (std::size_t b = 0; b < spec.betas.size(); ++b) {
        const Measurement& m0 = results[base][b];
        std::vector<double> xs;
        std::vector<double> ys;
        for (std::size_t s = 1; s < shifts.size(); ++s) {
          const Measurement& m1 = results[base + s][b];
          const bool ok = m0.ok && m1.ok;
          if (!ok) t.set_meta("failure." + std::to_string(failures++), m0.ok ? m1.error : m0.error);
          const double diff = ok ? std::abs(m1.value - m0.value) : kNaN;
          t.add_row({static_cast<double>(n), a, spec.betas[b], shifts[s], m0.value, m1.value, diff,
                     spec.engine_for(n) == Engine::exact ? 0.0 : 1.0, ok ? 0.0 : 1.0});
          if (ok) {
            xs.push_back(shifts[s]);
            ys.push_back(diff);
          }
        }
        if (sorted_unique(xs).size() >= 2) {
          res.epsilon_fits[key_of({{"N", n}, {"alpha", a}, {"beta", spec.betas[b]}})] = linear_fit(xs, ys);
        }
      }
      j += shifts.size();
    }
  }
  record_warnings(t, logs);
  for (const auto& [key, fit] : res.epsilon_fits) {
    t.set_meta("fit." + key, "slope=" + format_double(fit.slope) + ";intercept=" + format_double(fit.intercept) +
                                 ";r=" + format_double(fit.r) + ";n=" + std::to_string(fit.n_points));
  }
  return res;
}

ProfileResult decay_profile(const SweepSpec& spec) {
  spec.validate();
  struct Job {
    int n;
    double alpha;
  };
  std::vector<Job> jobs;
  for (int n : spec.sizes) {
    if (spec.anchor < 0 || spec.anchor + 3 >= n) throw ConfigError("decay profile needs 0 <= anchor and anchor + 4 < N");
    for (double a : spec.alphas) jobs.push_back({n, a});
  }
  // rows[j][b]: (d, cov) pairs
  std::vector<std::vector<std::vector<std::pair<int, double>>>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::vector<VisitLog> logs(jobs.size());
  WorkerPool(spec.workers).run(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    results[j].assign(spec.betas.size(), {});
    try {
      const LrTfiChain chain = LrTfiChain::make(job.n, job.alpha, spec.J, spec.h);
      const PlacedObservable oa = pauli_string(Region{spec.anchor, spec.anchor + 1}, "zz");
      visit_states(chain, spec.betas, spec.engine_for(job.n), spec,
                   [&](std::size_t b, const StateView& s) {
                     for (int first = spec.anchor + 2; first + 1 < job.n; ++first) {
                       const PlacedObservable ob = pauli_string(Region{first, first + 1}, "zz");
                       results[j][b].emplace_back(first - (spec.anchor + 1), s.covariance(oa, ob));
                     }
                   },
                   &logs[j]);
    } catch (const Error& e) {
      errors[j] = e.what();
    }
  });

  ProfileResult res;
  DataTable& t = res.table;
  t.columns = {"N", "alpha", "beta", "d", "cov", "abs_cov", "flag"};
  stamp(t, spec);
  t.set_meta("observables", "O_A = ZZ on (anchor, anchor+1), O_B = ZZ sliding right; d = d(A,B)");
  t.set_meta("anchor", std::to_string(spec.anchor));
  t.set_meta("noise_floor", format_double(spec.noise_floor));
  t.set_meta("fit_window", "d >= " + format_double(spec.fit_window) + " * N");
  t.set_meta("codes", "flag: 0 ok, 1 below noise floor");
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!errors[j].empty()) {
      t.set_meta("failure." + key_of({{"N", jobs[j].n}, {"alpha", jobs[j].alpha}}), errors[j]);
      continue;
    }
    for (std::size_t b = 0; b < spec.betas.size(); ++b) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (const auto& [d, cov] : results[j][b]) {
        const bool floor = !(std::abs(cov) >= spec.noise_floor);
        t.add_row({static_cast<double>(jobs[j].n), jobs[j].alpha, spec.betas[b], static_cast<double>(d), cov,
                   std::abs(cov), floor ? 1.0 : 0.0});
        if (!floor && d >= spec.fit_window * jobs[j].n) {
          xs.push_back(std::log(static_cast<double>(d)));
          ys.push_back(std::log(std::abs(cov)));
        }
      }
      if (sorted_unique(xs).size() >= 2) {
        const std::string key = key_of({{"N", jobs[j].n}, {"alpha", jobs[j].alpha}, {"beta", spec.betas[b]}});
        const FitResult fit = linear_fit(xs, ys);
        res.fits[key] = fit;
        t.set_meta("fit." + key, "slope=" + format_double(fit.slope) + ";intercept=" + format_double(fit.intercept) +
                                     ";r=" + format_double(fit.r) + ";n=" + std::to_string(fit.n_points));
      }
    }
  }
  record_warnings(t, logs);
  return res;
}

double worst_increase(const std::vector<double>& ds, const std::vector<double>& values, double d_min) {
  if (ds.size() != values.size()) throw DomainError("profile columns differ in length");
  double worst = -INFINITY;
  for (std::size_t i = 0; i + 1 < ds.size(); ++i) {
    if (ds[i] < d_min) continue;
    if (values[i] > 0) {
      worst = std::max(worst, values[i + 1] / values[i] - 1.0);
    } else if (values[i + 1] > 0) {
      worst = INFINITY;
    }
  }
  return worst;
}

ProfileResult locind_profile(const SweepSpec& spec) {
  spec.validate();
  struct Job {
    int n;
    double alpha;
    int buffer;  // -1: full chain
  };
  std::vector<Job> jobs;
  for (int n : spec.sizes) {
    if (n < 2) throw ConfigError("locind needs N >= 2");
    const int c = n / 2 - 1;
    const int room = std::min(c, n - c - 2);
    for (double a : spec.alphas) {
      jobs.push_back({n, a, -1});
      for (int l = 0; l <= room; ++l) jobs.push_back({n, a, l});
    }
  }
  std::vector<std::vector<Measurement>> results(jobs.size());
  std::vector<VisitLog> logs(jobs.size());
  WorkerPool(spec.workers).run(jobs.size(), [&](std::size_t j) {
    const Job& job = jobs[j];
    auto& out = results[j];
    out.assign(spec.betas.size(), Measurement{});
    try {
      const LrTfiChain full = LrTfiChain::make(job.n, job.alpha, spec.J, spec.h);
      const int c = job.n / 2 - 1;
      // H_B on the contiguous block [c - l, c + 1 + l] equals a prefix chain with the same couplings.
      const int size = job.buffer < 0 ? job.n : 2 + 2 * job.buffer;
      const int offset = job.buffer < 0 ? c : job.buffer;
      const LrTfiChain chain = full.prefix(size);
      const PlacedObservable zz = pauli_string(Region{offset, offset + 1}, "zz");
      // One engine per series keeps systematic errors common to all rows.
      visit_states(chain, spec.betas, spec.engine_for(job.n), spec,
                   [&](std::size_t b, const StateView& s) { out[b].value = s.expectation(zz); }, &logs[j]);
    } catch (const Error& e) {
      for (auto& m : out) m = {false, e.what(), kNaN};
    }
  });

  ProfileResult res;
  DataTable& t = res.table;
  t.columns = {"N", "alpha", "beta", "d", "value_full", "value_restricted", "abs_diff", "region_size"};
  stamp(t, spec);
  t.set_meta("observable", "ZZ on the middle pair; B grows symmetrically around it; d = d(A, B^c)");
  t.set_meta("full_region", "when B is the whole chain d is reported as buffer + 1");
  int failures = 0;
  std::size_t j = 0;
  while (j < jobs.size()) {
    const std::size_t base = j;
    std::size_t end = base + 1;
    while (end < jobs.size() && jobs[end].buffer >= 0) ++end;
    for (std::size_t b = 0; b < spec.betas.size(); ++b) {
      const Measurement& full = results[base][b];
      std::vector<double> ds;
      std::vector<double> vs;
      for (std::size_t r = base + 1; r < end; ++r) {
        const Measurement& m = results[r][b];
        const bool ok = full.ok && m.ok;
        if (!ok) t.set_meta("failure." + std::to_string(failures++), full.ok ? m.error : full.error);
        const int size = 2 + 2 * jobs[r].buffer;
        const double diff = ok ? (size == jobs[r].n ? 0.0 : std::abs(full.value - m.value)) : kNaN;
        const double d = jobs[r].buffer + 1.0;
        t.add_row({static_cast<double>(jobs[r].n), jobs[r].alpha, spec.betas[b], d, full.value, m.value, diff,
                   static_cast<double>(size)});
        ds.push_back(d);
        vs.push_back(diff);
      }
      const std::string key = key_of({{"N", jobs[base].n}, {"alpha", jobs[base].alpha}, {"beta", spec.betas[b]}});
      t.set_meta("worst_increase." + key, format_double(worst_increase(ds, vs, 2.0)));
      std::vector<double> lx;
      std::vector<double> ly;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (vs[i] > 0) {
          lx.push_back(std::log(ds[i]));
          ly.push_back(std::log(vs[i]));
        }
      }
      if (sorted_unique(lx).size() >= 2) res.fits[key] = linear_fit(lx, ly);
    }
    j = end;
  }
  record_warnings(t, logs);
  return res;
}

LrbFitResult lrb_fit(const SweepSpec& spec) {
  spec.validate();
  if (spec.engine == Engine::tensornet) throw ConfigError("lrb-fit runs on the exact engine only");
  const int n = spec.sizes.front();
  if (n > 10) throw CapacityError("lrb-fit is limited to N <= 10");
  LrbFitResult res;
  res.table.columns = {"alpha", "d", "t", "measured", "envelope_unit", "ratio"};
  res.kappas.columns = {"alpha", "d", "kappa"};
  stamp(res.table, spec);
  stamp(res.kappas, spec);
  res.table.set_meta("observables", "O_A = Z at lrb_site, O_B = Z at lrb_site + d");
  res.table.set_meta("envelope", "(e^{v t} - 1) / (1 + d)^alpha, v = 2 g u");
  res.kappa_max = 0.0;
  res.kappa_min = INFINITY;
  std::vector<double> lx;
  std::vector<double> ly;
  exact::Options opt;
  opt.max_sites = spec.exact_capacity;
  for (double alpha : spec.alphas) {
    const Hamiltonian h = build_lr_tfi(n, alpha, spec.J, spec.h);
    const exact::SpectrumPtr spectrum = exact::diagonalize(h, opt);
    bounds::LrbParams p;
    p.kappa_lr = 1.0;
    p.alpha = alpha;
    p.dimension = 1;
    p.g = h.g();
    p.k = h.locality();
    p.u = u_constant(h.lattice(), alpha);
    const double v = p.v();
    // The exponential envelope does not depend on beta; any beta below beta* satisfies its precondition.
    const bounds::Regime regime{bounds::RegimeKind::high_temperature, 0.5 * p.beta_star(), std::nullopt};
    const CMatrix oa = exact::dense(pauli_string(Region{spec.lrb_site}, "z"), n, opt);
    double kmax = 0.0;
    double kmin = INFINITY;
    for (int d : spec.lrb_distances) {
      const int site_b = spec.lrb_site + d;
      if (d < 1 || site_b >= n) throw ConfigError("lrb distance leaves the chain");
      const CMatrix ob = exact::dense(pauli_string(Region{site_b}, "z"), n, opt);
      double kappa = 0.0;
      for (int i = 1; i <= spec.lrb_time_points; ++i) {
        const double t = (static_cast<double>(i) / spec.lrb_time_points) * d / (2.0 * v);
        const double measured = exact::commutator_norm(*spectrum, oa, ob, t);
        const double unit = bounds::lrb_envelope(p, regime, t, d);
        const double ratio = measured / unit;
        kappa = std::max(kappa, ratio);
        res.table.add_row({alpha, static_cast<double>(d), t, measured, unit, ratio});
      }
      res.kappas.add_row({alpha, static_cast<double>(d), kappa});
      kmax = std::max(kmax, kappa);
      kmin = std::min(kmin, kappa);
      lx.push_back(std::log(1.0 + d));
      ly.push_back(std::log(kappa));
    }
    res.kappas.set_meta("variation.alpha:" + format_double(alpha), format_double(kmax / kmin));
    res.kappa_max = std::max(res.kappa_max, kmax);
    res.kappa_min = std::min(res.kappa_min, kmin);
    res.variation = std::max(res.variation, kmax / kmin);
  }
  if (sorted_unique(lx).size() >= 2) res.fit = linear_fit(lx, ly);
  res.kappas.set_meta("kappa_max", format_double(res.kappa_max));
  res.kappas.set_meta("variation", format_double(res.variation));
  return res;
}

BoundCompareResult bound_compare(const SweepSpec& spec) {
  spec.validate();
  SweepSpec measure = spec;
  measure.kind = Kind::stability;
  const StabilityResult stab = stability_sweep(measure);
  BoundCompareResult res;
  res.configured = spec.kappa_beta.has_value();
  const double kappa = spec.kappa_beta.value_or(1.0);
  DataTable& t = res.table;
  t.columns = {"N", "alpha", "beta", "epsilon", "measured", "bound", "ratio", "violated"};
  stamp(t, spec);
  t.set_meta("mode", res.configured ? "configured" : "fitted");
  t.set_meta("bound", "epsilon (v u / 2) kappa(beta) |O_A| k |A| e^{|A|/k + 1}, |A| = k = 2, |O_A| = 1");
  const auto& rows = stab.table.rows;
  const std::size_t cN = stab.table.column_index("N");
  const std::size_t cA = stab.table.column_index("alpha");
  const std::size_t cB = stab.table.column_index("beta");
  const std::size_t cE = stab.table.column_index("epsilon");
  const std::size_t cD = stab.table.column_index("abs_diff");
  for (const auto& r : rows) {
    const int n = static_cast<int>(r[cN]);
    const double alpha = r[cA];
    const Hamiltonian h = build_lr_tfi(n, alpha, spec.J, spec.h);
    const double u = u_constant(h.lattice(), alpha);
    const double v = 2.0 * h.g() * u;
    const double bound = bounds::stability_rhs(r[cE], v, u, kappa, 1.0, h.locality(), 2.0);
    const double measured = r[cD];
    const double ratio = bound > 0 ? measured / bound : (measured > 0 ? INFINITY : 0.0);
    const bool violated = res.configured && measured > bound;
    if (violated) res.all_hold = false;
    if (!res.configured && std::isfinite(ratio)) res.inferred_kappa = std::max(res.inferred_kappa, ratio);
    t.add_row({r[cN], alpha, r[cB], r[cE], measured, bound, ratio, violated ? 1.0 : 0.0});
  }
  if (!res.configured) t.set_meta("inferred_kappa_beta", format_double(res.inferred_kappa));
  return res;
}

}  // namespace lrgibbs::experiments
