#include "pinnflow/train.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include <Eigen/Dense>

#include "pinnflow/errors.hpp"
#include "pinnflow/parallel.hpp"

#include "json.hpp"

namespace pinnflow::train {

using nlohmann::json;

void TrainConfig::validate() const {
  if (iterations < 1) throw ConfigError("TrainConfig: iterations must be >= 1");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (!(lr_min > 0) || !(lr_init >= lr_min)) {
    throw ConfigError("TrainConfig: need 0 < lr_min <= lr_init");
  }
  if (plateau_patience < 1 || !(plateau_factor > 0 && plateau_factor < 1)) {
    throw ConfigError("TrainConfig: invalid plateau settings");
  }
  if (log_period < 1) throw ConfigError("TrainConfig: log_period must be >= 1");
  if (chunk_size < 1) throw ConfigError("TrainConfig: chunk_size must be >= 1");
}

AdamState make_adam_state(std::size_t n_params, const TrainConfig& cfg) {
  AdamState s;
  s.m.assign(n_params, 0.0);
  s.v.assign(n_params, 0.0);
  s.lr = cfg.lr_init;
  s.lr_min = cfg.lr_min;
  s.plateau_patience = cfg.plateau_patience;
  s.plateau_factor = cfg.plateau_factor;
  s.plateau_min_improve = cfg.plateau_min_improve;
  s.smoothing = cfg.plateau_smoothing;
  return s;
}

void adam_step(net::ParamVector& params, const net::ParamVector& grad, AdamState& s) {
  if (params.data.size() != grad.data.size() || params.data.size() != s.m.size()) {
    throw InvalidArgumentError("adam_step: dimension mismatch");
  }
  if (!grad.all_finite()) {
    throw NumericFaultError("adam_step: non-finite gradient");
  }
  s.t += 1;
  const auto n = static_cast<Eigen::Index>(params.data.size());
  Eigen::Map<Eigen::ArrayXd> p(params.data.data(), n);
  Eigen::Map<Eigen::ArrayXd> m(s.m.data(), n);
  Eigen::Map<Eigen::ArrayXd> v(s.v.data(), n);
  Eigen::Map<const Eigen::ArrayXd> g(grad.data.data(), n);

  m = s.beta1 * m + (1.0 - s.beta1) * g;
  v = s.beta2 * v + (1.0 - s.beta2) * g.square();
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  p -= (s.lr / bc1) * m / ((v / bc2).sqrt() + s.eps);
}

double update_smoothed_loss(AdamState& s, double loss) {
  s.smoothed = std::isnan(s.smoothed) ? loss
                                      : s.smoothing * s.smoothed + (1.0 - s.smoothing) * loss;
  return s.smoothed;
}

void plateau_schedule(AdamState& s, double smoothed_loss) {
  if (!std::isfinite(smoothed_loss)) return;
  if (smoothed_loss < s.best_smoothed * (1.0 - s.plateau_min_improve)) {
    s.best_smoothed = smoothed_loss;
    s.last_improve_t = s.t;
    return;
  }
  if (s.t - s.last_improve_t >= s.plateau_patience) {
    s.lr = std::max(s.lr * s.plateau_factor, s.lr_min);
    s.last_improve_t = s.t;
  }
}

// ---- checkpoint ----------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'P', 'F', 'L', 'O', 'W', 'C', 'K', '1'};
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  json header = {
      {"spec", ck.spec.to_json()},
      {"iteration", ck.iteration},
      {"t", ck.opt.t},
      {"beta1", ck.opt.beta1},
      {"beta2", ck.opt.beta2},
      {"eps", ck.opt.eps},
      {"lr_min", ck.opt.lr_min},
      {"plateau_patience", ck.opt.plateau_patience},
      {"plateau_factor", ck.opt.plateau_factor},
      {"plateau_min_improve", ck.opt.plateau_min_improve},
      {"smoothing", ck.opt.smoothing},
      {"last_improve_t", ck.opt.last_improve_t},
      {"rng", ck.rng_state},
      {"n_params", ck.params.data.size()},
  };
  const std::string hs = header.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write checkpoint: " + tmp.string());
    os.write(kMagic, sizeof(kMagic));
    const uint64_t hlen = hs.size();
    os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    const auto write_vec = [&os](const std::vector<double>& v) {
      os.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    write_vec(ck.params.data);
    write_vec(ck.opt.m);
    write_vec(ck.opt.v);
    const double scalars[3] = {ck.opt.lr, ck.opt.smoothed, ck.opt.best_smoothed};
    os.write(reinterpret_cast<const char*>(scalars), sizeof(scalars));
    if (!os.good()) throw ConfigError("checkpoint write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is.good() || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError("bad checkpoint magic: " + path.string());
  }
  uint64_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  is.read(hs.data(), static_cast<std::streamsize>(hlen));
  const json header = json::parse(hs);

  Checkpoint ck;
  ck.spec = net::MlpSpec::from_json(header.at("spec"));
  ck.iteration = header.at("iteration").get<int64_t>();
  ck.rng_state = header.at("rng").get<std::string>();
  const auto n = header.at("n_params").get<std::size_t>();
  ck.opt.t = header.at("t").get<int64_t>();
  ck.opt.beta1 = header.at("beta1").get<double>();
  ck.opt.beta2 = header.at("beta2").get<double>();
  ck.opt.eps = header.at("eps").get<double>();
  ck.opt.lr_min = header.at("lr_min").get<double>();
  ck.opt.plateau_patience = header.at("plateau_patience").get<int64_t>();
  ck.opt.plateau_factor = header.at("plateau_factor").get<double>();
  ck.opt.plateau_min_improve = header.at("plateau_min_improve").get<double>();
  ck.opt.smoothing = header.at("smoothing").get<double>();
  ck.opt.last_improve_t = header.at("last_improve_t").get<int64_t>();

  const auto read_vec = [&is, &path](std::vector<double>& v, std::size_t count) {
    v.resize(count);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is.good()) throw ConfigError("checkpoint truncated: " + path.string());
  };
  read_vec(ck.params.data, n);
  read_vec(ck.opt.m, n);
  read_vec(ck.opt.v, n);
  double scalars[3];
  is.read(reinterpret_cast<char*>(scalars), sizeof(scalars));
  if (!is.good()) throw ConfigError("checkpoint truncated: " + path.string());
  ck.opt.lr = scalars[0];
  ck.opt.smoothed = scalars[1];
  ck.opt.best_smoothed = scalars[2];
  return ck;
}

// ---- evaluation helper ----------------------------------------------------

std::vector<std::array<double, 3>> forward_values(const net::MlpSpec& spec,
                                                  const net::ParamVector& params,
                                                  std::span<const Vec2> pts) {
  std::vector<std::array<double, 3>> out(pts.size());
  constexpr std::size_t kChunk = 2048;
  for (std::size_t base = 0; base < pts.size(); base += kChunk) {
    const std::size_t n = std::min(kChunk, pts.size() - base);
    Eigen::MatrixXd m(2, static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      m(0, k) = pts[base + k].x;
      m(1, k) = pts[base + k].y;
    }
    const net::BatchEval ev = net::forward_batch(spec, params, m);
    for (std::size_t k = 0; k < n; ++k) {
      out[base + k] = {ev.out(0, k), ev.out(1, k), ev.out(2, k)};
    }
  }
  return out;
}

// ---- training loop ---------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

}  // namespace

TrainResult train(const TrainInputs& in) {
  if (!in.samples) throw InvalidArgumentError("train: samples required");
  in.cfg.validate();
  in.spec.validate();
  std::filesystem::create_directories(in.run_dir);

  const loss::Assembler assembler(*in.samples, in.physics, in.loss_opts);
  const int n = static_cast<int>(in.samples->interior.size());
  const int m_eff = std::min<int>(in.cfg.batch_size, n);
  const int workers = in.cfg.workers > 0 ? in.cfg.workers : configured_workers();

  net::ParamVector params;
  AdamState adam;
  Rng rng(in.cfg.seed);
  int64_t it0 = 0;
  if (in.resume_from) {
    Checkpoint ck = load_checkpoint(*in.resume_from);
    if (ck.spec.to_json() != in.spec.to_json()) {
      throw ConfigError("train: checkpoint spec does not match run spec");
    }
    params = std::move(ck.params);
    adam = std::move(ck.opt);
    rng.deserialize(ck.rng_state);
    it0 = ck.iteration;
  } else {
    params = net::init_params(in.spec, in.cfg.seed);
    adam = make_adam_state(params.data.size(), in.cfg);
  }

  TrainResult result;
  result.run_dir = in.run_dir;
  result.metrics_csv = in.run_dir / "metrics.csv";
  result.eval_csv = in.run_dir / "eval.csv";
  result.checkpoint = in.run_dir / "checkpoint.bin";

  const bool fresh = !std::filesystem::exists(result.metrics_csv);
  std::ofstream metrics(result.metrics_csv, std::ios::app);
  if (!metrics) throw ConfigError("cannot open metric log");
  if (fresh) metrics << "iter,total,pde,bc,r_cont,r_xmom,r_ymom,lr,wall_ms\n";
  metrics.precision(10);

  std::ofstream evalcsv;
  std::vector<std::array<double, 3>> ref_values;
  if (in.reference && !in.eval_points.empty()) {
    const bool fresh_eval = !std::filesystem::exists(result.eval_csv);
    evalcsv.open(result.eval_csv, std::ios::app);
    if (fresh_eval) evalcsv << "iter,mse,rel_l2\n";
    evalcsv.precision(10);
    ref_values = oracle::reference_at(*in.reference, in.eval_points);
  }

  const auto do_eval = [&](int64_t iter) -> oracle::Metrics {
    const auto pred = forward_values(in.spec, params, in.eval_points);
    const auto m = oracle::velocity_metrics(pred, ref_values);
    evalcsv << iter << ',' << m.mse << ',' << m.rel_l2 << '\n' << std::flush;
    return m;
  };

  const auto checkpoint_now = [&](int64_t completed, const std::filesystem::path& to) {
    Checkpoint ck;
    ck.spec = in.spec;
    ck.params = params;
    ck.opt = adam;
    ck.rng_state = rng.serialize();
    ck.iteration = completed;
    save_checkpoint(ck, to);
  };

  // Rolling timestamps for the wall-clock-per-1000-iterations column.
  std::vector<Clock::time_point> marks(1001);
  marks[it0 % 1001] = Clock::now();

  net::ParamVector grad;
  loss::LossReport report;
  std::vector<double> loss_tail;

  for (int64_t iter = it0; iter < in.cfg.iterations; ++iter) {
    const std::vector<int> batch = sampling::draw_batch(*in.samples, m_eff, rng);
    try {
      report = loss::pde_loss_gradient(assembler, in.spec, params, batch, grad, workers,
                                       in.cfg.chunk_size);
      adam_step(params, grad, adam);
    } catch (const NumericFaultError& err) {
      checkpoint_now(iter, in.run_dir / "checkpoint-failure.bin");
      json failure = {{"iteration", iter},
                      {"error", err.what()},
                      {"loss_tail", loss_tail}};
      std::ofstream(in.run_dir / "failure.json") << failure.dump(2) << "\n";
      throw;
    }
    plateau_schedule(adam, update_smoothed_loss(adam, report.total));

    loss_tail.push_back(report.total);
    if (loss_tail.size() > 20) loss_tail.erase(loss_tail.begin());

    const int64_t done = iter + 1;
    marks[done % 1001] = Clock::now();
    report.iteration = done;

    if (done % in.cfg.log_period == 0 || done == in.cfg.iterations) {
      const int64_t window = std::min<int64_t>(done - it0, 1000);
      const double wall_ms =
          window > 0
              ? ms_between(marks[(done - window) % 1001], marks[done % 1001]) * 1000.0 /
                    window
              : 0.0;
      metrics << done << ',' << report.total << ',' << report.pde << ',' << report.bc
              << ',' << report.r_cont << ',' << report.r_xmom << ',' << report.r_ymom
              << ',' << adam.lr << ',' << wall_ms << '\n';
    }
    if (evalcsv.is_open() && in.cfg.eval_period > 0 &&
        (done % in.cfg.eval_period == 0 && done != in.cfg.iterations)) {
      result.final_metrics = do_eval(done);
    }
    if (in.cfg.checkpoint_period > 0 && done % in.cfg.checkpoint_period == 0 &&
        done != in.cfg.iterations) {
      checkpoint_now(done, result.checkpoint);
    }
  }

  metrics << std::flush;
  checkpoint_now(in.cfg.iterations, result.checkpoint);
  if (evalcsv.is_open()) {
    result.final_metrics = do_eval(in.cfg.iterations);
  }
  result.last_report = report;
  result.iterations_run = in.cfg.iterations - it0;
  return result;
}

}  // namespace pinnflow::train
