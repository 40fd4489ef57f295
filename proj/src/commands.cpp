#include "fem/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "json.hpp"

#include "fem/io.hpp"
#include "fem/leakage.hpp"
#include "fem/metrics.hpp"
#include "fem/protection.hpp"
#include "fem/synth.hpp"
#include "fem/train.hpp"

namespace fem::cmd {

using json = nlohmann::ordered_json;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write failed on '" + path + "'");
}

void write_report(const std::string& path, const json& j) {
  if (path.empty()) return;
  write_text(path, j.dump(2) + "\n");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string hex64(uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json histogram_json(const eval::MetricsReport& r) {
  json h = json::array();
  for (uint64_t c : r.histogram) h.push_back(c);
  return h;
}

loss::LossWeights loss_preset(const std::string& name) {
  if (name == "full") return {1.0, 0.5, 10.0};
  if (name == "mse") return {1.0, 0.0, 0.0};
  if (name == "pd") return {0.0, 0.5, 0.0};
  if (name == "pd+ced") return {0.0, 0.5, 10.0};
  throw ValueError("unknown loss preset '" + name + "' (full | mse | pd | pd+ced)");
}

model::Variant parse_variant(const std::string& name) {
  if (name == "kan") return model::Variant::Kan;
  if (name == "mlp") return model::Variant::Mlp;
  throw ValueError("unknown model variant '" + name + "' (kan | mlp)");
}

}  // namespace

void cmd_synth(const SynthArgs& args, std::ostream& log) {
  if (args.out.empty()) throw ValueError("synth: --out is required");
  const auto target_enc =
      synth::encoder_new(derive_seed(args.seed, "synth.encoder.target"), args.latent_dim, args.dim);
  const auto source_enc =
      synth::encoder_new(derive_seed(args.seed, "synth.encoder.source"), args.latent_dim, args.dim);
  auto ds = synth::build_paired_dataset(target_enc, source_enc, args.ids, args.samples, args.sigma,
                                        args.seed, args.first_id);
  io::save_paired(args.out, ds);
  log << "synth: wrote " << ds.size() << " pairs (dim " << ds.dim() << ", ids " << args.first_id
      << ".." << args.first_id + args.ids - 1 << ") to " << args.out << "\n";

  json rep;
  rep["command"] = "synth";
  rep["config"] = {{"ids", args.ids},       {"samples", args.samples},
                   {"sigma", args.sigma},   {"latent_dim", args.latent_dim},
                   {"dim", args.dim},       {"first_id", args.first_id},
                   {"seed", args.seed},     {"out", args.out}};
  rep["format_version"] = io::kFormatVersion;
  rep["pairs"] = ds.size();

  if (ds.size() > 0) {
    const auto enrolled = eval::enroll_mean(ds.target, ds.labels);
    const auto genuine = eval::genuine_scores(ds.target, ds.labels, enrolled);
    double g = 0.0;
    for (double v : genuine) g += v;
    g /= static_cast<double>(genuine.size());
    double i = 0.0;
    if (enrolled.ids.size() > 1) {
      const auto impostor = eval::impostor_scores(ds.target, ds.labels, enrolled, 2000,
                                                  derive_seed(args.seed, "synth.check"));
      for (double v : impostor) i += v;
      i /= static_cast<double>(impostor.size());
    }
    log << "synth: target-space mean cosine genuine " << num(g) << ", impostor " << num(i)
        << " (gap " << num(g - i) << ")\n";
    rep["target_space"] = {{"mean_genuine_cosine", g},
                           {"mean_impostor_cosine", i},
                           {"separability_gap", g - i}};
  }
  write_report(args.report, rep);
}

void cmd_train(const TrainArgs& args, std::ostream& log) {
  if (args.data.empty()) throw ValueError("train: --data is required");
  if (args.out.empty()) throw ValueError("train: --out is required");
  const auto ds = io::load_paired(args.data);
  if (ds.size() == 0) throw ValueError("train: dataset '" + args.data + "' is empty");

  const auto variant = parse_variant(args.variant);
  std::vector<Index> widths = args.widths;
  if (widths.empty()) {
    widths = model::default_widths();
    widths.front() = widths.back() = ds.dim();
  }
  const auto grid = kan::SplineGrid::uniform(args.grid_size, args.spline_order);

  auto cfg = model::TrainConfig::defaults(variant);
  cfg.epochs = args.epochs;
  cfg.batch_size = args.batch;
  cfg.seed = args.seed;
  cfg.lambdas = loss_preset(args.loss);
  if (args.lambda_mse >= 0.0) cfg.lambdas.mse = args.lambda_mse;
  if (args.lambda_pd >= 0.0) cfg.lambdas.pd = args.lambda_pd;
  if (args.lambda_ced >= 0.0) cfg.lambdas.ced = args.lambda_ced;
  if (args.lr > 0.0) cfg.opt.lr = args.lr;

  auto m = model::FemModel<float>::build(variant, widths, grid,
                                         derive_seed(args.seed, "train.init"));
  log << "train: " << args.variant << " model, " << m.parameter_count() << " parameters, "
      << ds.size() << " pairs, " << cfg.epochs << " epochs\n";

  const auto history = model::train(m, ds.source, ds.target, cfg);
  for (size_t e = 0; e < history.size(); ++e)
    log << "train: epoch " << e + 1 << "/" << history.size() << " mse " << num(history[e].mse)
        << " pd " << num(history[e].pd) << " ced " << num(history[e].ced) << " total "
        << num(history[e].total) << "\n";

  io::save_model(args.out, m);
  log << "train: wrote model to " << args.out << " (checksum " << hex64(m.checksum()) << ")\n";

  if (!args.history.empty()) {
    std::string csv = "epoch,mse,pd,ced,total\n";
    for (size_t e = 0; e < history.size(); ++e)
      csv += std::to_string(e + 1) + "," + num(history[e].mse) + "," + num(history[e].pd) + "," +
             num(history[e].ced) + "," + num(history[e].total) + "\n";
    write_text(args.history, csv);
  }

  json rep;
  rep["command"] = "train";
  rep["config"] = {{"data", args.data},
                   {"variant", args.variant},
                   {"epochs", cfg.epochs},
                   {"batch", cfg.batch_size},
                   {"lr", cfg.opt.lr},
                   {"loss", args.loss},
                   {"lambda_mse", cfg.lambdas.mse},
                   {"lambda_pd", cfg.lambdas.pd},
                   {"lambda_ced", cfg.lambdas.ced},
                   {"widths", widths},
                   {"grid_size", args.grid_size},
                   {"spline_order", args.spline_order},
                   {"seed", args.seed},
                   {"out", args.out}};
  rep["format_version"] = io::kFormatVersion;
  rep["parameters"] = m.parameter_count();
  rep["checksum"] = hex64(m.checksum());
  json hist = json::array();
  for (const auto& h : history)
    hist.push_back({{"mse", h.mse}, {"pd", h.pd}, {"ced", h.ced}, {"total", h.total}});
  rep["history"] = hist;
  write_report(args.report, rep);
}

void cmd_map(const MapArgs& args, std::ostream& log) {
  if (args.data.empty()) throw ValueError("map: --data is required");
  if (args.weights.empty()) throw ValueError("map: --weights is required");
  if (args.out.empty()) throw ValueError("map: --out is required");
  const auto ds = io::load_paired(args.data);
  auto m = io::load_model(args.weights);
  data::Dataset mapped;
  mapped.labels = ds.labels;
  mapped.embeddings = m.map(ds.source);
  io::save_dataset(args.out, mapped);

  double mean_cos = 0.0;
  if (ds.size() > 0) {
    for (Index r = 0; r < ds.size(); ++r)
      mean_cos += eval::cosine(mapped.embeddings.row(r), ds.target.row(r));
    mean_cos /= static_cast<double>(ds.size());
  }
  log << "map: mapped " << ds.size() << " embeddings to " << args.out
      << " (mean cosine to paired target " << num(mean_cos) << ")\n";

  json rep;
  rep["command"] = "map";
  rep["config"] = {{"data", args.data}, {"weights", args.weights}, {"out", args.out}};
  rep["format_version"] = io::kFormatVersion;
  rep["rows"] = mapped.embeddings.rows();
  rep["dim"] = mapped.embeddings.cols();
  rep["mean_cosine_to_target"] = mean_cos;
  write_report(args.report, rep);
}

void cmd_protect(const ProtectArgs& args, std::ostream& log) {
  if (args.data.empty()) throw ValueError("protect: --data is required");
  if (args.out.empty()) throw ValueError("protect: --out is required");
  auto ds = io::load_paired(args.data);
  const Index dim = ds.dim();
  Index produced = dim;

  if (args.scheme == "polyprotect") {
    std::map<uint32_t, prot::PolyProtectParams> params;
    ds.prot.scheme = data::Scheme::PolyProtect;
    for (Index r = 0; r < ds.size(); ++r) {
      const uint32_t label = ds.labels[static_cast<size_t>(r)];
      auto it = params.find(label);
      if (it == params.end()) {
        auto p = prot::polyprotect_gen(derive_seed(args.seed, "protect.polyprotect", label),
                                       args.m, args.overlap);
        it = params.emplace(label, std::move(p)).first;
        ds.prot.poly.emplace_back(label, it->second);
      }
      const VecF protec = prot::polyprotect(VecF(ds.source.row(r).transpose()), it->second);
      produced = protec.size();
      ds.source.row(r) = prot::pad_to_dim(protec, dim).transpose();
    }
    log << "protect: polyprotect (m " << args.m << ", overlap " << args.overlap << ") over "
        << params.size() << " identities; " << dim << " -> " << produced
        << " dims per row, zero-padded back to " << dim << "\n";
  } else if (args.scheme == "mlphash") {
    prot::MlpHashParams p;
    p.seed = derive_seed(args.seed, "protect.mlphash");
    p.widths = {dim};
    p.tau = args.tau;
    ds.prot.scheme = data::Scheme::MlpHash;
    ds.prot.mlphash = p;
    prot::MlpHasher hasher(p, dim);
    for (Index r = 0; r < ds.size(); ++r) {
      const VecF protec = hasher.apply(VecF(ds.source.row(r).transpose()));
      produced = protec.size();
      ds.source.row(r) = prot::pad_to_dim(protec, dim).transpose();
    }
    log << "protect: mlphash (tau " << num(args.tau) << ") applied; " << dim << " -> " << produced
        << " binary dims per row\n";
  } else {
    throw ValueError("unknown protection scheme '" + args.scheme +
                     "' (polyprotect | mlphash)");
  }

  io::save_paired(args.out, ds);
  log << "protect: wrote " << ds.size() << " pairs to " << args.out << "\n";

  json rep;
  rep["command"] = "protect";
  rep["config"] = {{"data", args.data},   {"scheme", args.scheme}, {"m", args.m},
                   {"overlap", args.overlap}, {"tau", args.tau},   {"seed", args.seed},
                   {"out", args.out}};
  rep["format_version"] = io::kFormatVersion;
  rep["rows"] = ds.size();
  rep["produced_dims"] = produced;
  rep["stored_dims"] = dim;
  write_report(args.report, rep);
}

void cmd_leak(const LeakArgs& args, std::ostream& log) {
  if (args.data.empty()) throw ValueError("leak: --data is required");
  if (args.out.empty()) throw ValueError("leak: --out is required");
  auto ds = io::load_paired(args.data);
  leak::LeakageSpec spec;
  spec.fraction = args.fraction;
  spec.total_dim = ds.dim();
  const Index kept = spec.kept();
  ds.source = leak::leak_rows(ds.source, spec);
  io::save_paired(args.out, ds);
  log << "leak: kept first " << kept << " of " << spec.total_dim << " dims (fraction "
      << num(args.fraction) << "), zero-filled the rest; wrote " << args.out << "\n";

  json rep;
  rep["command"] = "leak";
  rep["config"] = {{"data", args.data}, {"fraction", args.fraction}, {"out", args.out}};
  rep["format_version"] = io::kFormatVersion;
  rep["kept_dims"] = kept;
  rep["total_dims"] = spec.total_dim;
  write_report(args.report, rep);
}

void cmd_eval(const EvalArgs& args, std::ostream& log) {
  if (args.probes.empty()) throw ValueError("eval: --probes is required");
  if (args.pairs.empty()) throw ValueError("eval: --pairs is required");

  MatF probes;
  std::vector<uint32_t> probe_labels;
  const std::string magic = io::peek_magic(args.probes);
  std::string block = args.probe_block;
  if (block == "auto") block = magic == "EMBD" ? "embedded" : "source";
  if (block == "embedded") {
    const auto d = io::load_dataset(args.probes);
    probes = d.embeddings;
    probe_labels = d.labels;
  } else if (block == "source" || block == "target") {
    const auto d = io::load_paired(args.probes);
    probes = block == "source" ? d.source : d.target;
    probe_labels = d.labels;
  } else {
    throw ValueError("eval: unknown probe block '" + args.probe_block +
                     "' (auto | embedded | source | target)");
  }
  if (probes.rows() == 0) throw ValueError("eval: probe set is empty");

  const auto pairs = io::load_paired(args.pairs);
  if (pairs.size() == 0) throw ValueError("eval: pairs set '" + args.pairs + "' is empty");
  const auto enrolled = eval::enroll_mean(pairs.target, pairs.labels);

  const auto impostor = eval::impostor_scores(pairs.target, pairs.labels, enrolled,
                                              static_cast<size_t>(args.impostors),
                                              derive_seed(args.seed, "eval.calibration"));
  const auto threshold = eval::calibrate_threshold(impostor, args.far);
  auto metrics = eval::asr(probes, probe_labels, enrolled, threshold);

  const Index cap = 500;  // keep the O(n^2) MMD affordable on big probe sets
  const Index pn = std::min(cap, probes.rows());
  const Index tn = std::min(cap, pairs.target.rows());
  metrics.mmd = eval::mmd<float>(probes.topRows(pn), pairs.target.topRows(tn));

  if (!args.scores_csv.empty()) {
    std::string csv = "# femmap scores v" + std::to_string(io::kFormatVersion) + "\n";
    csv += "index,label,score,success\n";
    for (size_t i = 0; i < metrics.scores.size(); ++i)
      csv += std::to_string(i) + "," + std::to_string(probe_labels[i]) + "," +
             num(metrics.scores[i]) + "," + std::to_string(int(metrics.success_flags[i])) + "\n";
    write_text(args.scores_csv, csv);
  }

  log << "eval: threshold " << num(threshold.value) << " at target FAR " << num(args.far)
      << " (achieved " << num(threshold.achieved_far) << " on " << threshold.calibration_size
      << " impostor pairs)\n";
  log << "eval: mean cosine " << num(metrics.mean_cosine) << ", median "
      << num(metrics.median_cosine) << ", mmd " << num(metrics.mmd) << "\n";
  log << "eval: asr " << num(metrics.asr) << " (" << metrics.successes << "/" << metrics.attempts
      << " accepted, per-identity any-success " << num(metrics.per_identity_any_rate) << ")\n";

  json rep;
  rep["command"] = "eval";
  rep["config"] = {{"probes", args.probes},   {"probe_block", block}, {"pairs", args.pairs},
                   {"far", args.far},         {"impostors", args.impostors},
                   {"seed", args.seed}};
  rep["format_version"] = io::kFormatVersion;
  rep["threshold"] = {{"value", threshold.value},
                      {"far_target", threshold.far_target},
                      {"achieved_far", threshold.achieved_far},
                      {"calibration_size", threshold.calibration_size}};
  rep["metrics"] = {{"asr", metrics.asr},
                    {"successes", metrics.successes},
                    {"attempts", metrics.attempts},
                    {"per_identity_any_rate", metrics.per_identity_any_rate},
                    {"mean_cosine", metrics.mean_cosine},
                    {"median_cosine", metrics.median_cosine},
                    {"mmd", metrics.mmd},
                    {"mmd_rows", {pn, tn}},
                    {"histogram_bins", eval::kHistogramBins},
                    {"histogram_range", {-1.0, 1.0}},
                    {"histogram", histogram_json(metrics)}};
  write_report(args.report, rep);
}

}  // namespace fem::cmd
