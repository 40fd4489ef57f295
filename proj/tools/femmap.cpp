#include <iostream>

#include "CLI11.hpp"
#include "fem/commands.hpp"
#include "fem/common.hpp"

// Exit codes: 0 ok, 1 unexpected, 2 usage/bad arguments, 3 I/O,
// 4 malformed file, 5 numeric failure (diverged training, degenerate matrix).

int main(int argc, char** argv) {
  using namespace fem;

  CLI::App app{"femmap: map face embeddings across model spaces and probe template protection"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file (key = value, [subcommand] sections); flags win");

  cmd::SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a paired synthetic embedding dataset");
  s->add_option("--ids", synth.ids, "number of identities")->capture_default_str();
  s->add_option("--samples", synth.samples, "samples per identity")->capture_default_str();
  s->add_option("--sigma", synth.sigma, "latent noise stddev within an identity")
      ->capture_default_str();
  s->add_option("--latent", synth.latent_dim, "encoder latent dim")->capture_default_str();
  s->add_option("--dim", synth.dim, "embedding dim")->capture_default_str();
  s->add_option("--first-id", synth.first_id,
                "first identity index (pick a disjoint range for held-out sets)")
      ->capture_default_str();
  s->add_option("--seed", synth.seed, "root seed")->capture_default_str();
  s->add_option("--out", synth.out, "output EMBP path")->required();
  s->add_option("--report", synth.report, "JSON report path");

  cmd::TrainArgs train;
  auto* t = app.add_subcommand("train", "train a mapping network on a paired dataset");
  t->add_option("--data", train.data, "input EMBP path")->required();
  t->add_option("--model", train.variant, "variant: kan | mlp")->capture_default_str();
  t->add_option("--epochs", train.epochs, "training epochs")->capture_default_str();
  t->add_option("--batch", train.batch, "batch size")->capture_default_str();
  t->add_option("--lr", train.lr, "learning rate (default per variant)");
  t->add_option("--loss", train.loss, "loss preset: full | mse | pd | pd+ced")
      ->capture_default_str();
  t->add_option("--lmse", train.lambda_mse, "override lambda_mse");
  t->add_option("--lpd", train.lambda_pd, "override lambda_pd");
  t->add_option("--lced", train.lambda_ced, "override lambda_ced");
  t->add_option("--widths", train.widths, "layer widths (default 512,1024,3072,512)")
      ->delimiter(',');
  t->add_option("--grid", train.grid_size, "KAN spline grid intervals")->capture_default_str();
  t->add_option("--order", train.spline_order, "KAN spline order")->capture_default_str();
  t->add_option("--seed", train.seed, "root seed")->capture_default_str();
  t->add_option("--out", train.out, "output FEMW path")->required();
  t->add_option("--history", train.history, "per-epoch loss CSV path");
  t->add_option("--report", train.report, "JSON report path");

  cmd::MapArgs map;
  auto* m = app.add_subcommand("map", "map the source block of a paired dataset");
  m->add_option("--data", map.data, "input EMBP path")->required();
  m->add_option("--weights", map.weights, "FEMW model path")->required();
  m->add_option("--out", map.out, "output EMBD path")->required();
  m->add_option("--report", map.report, "JSON report path");

  cmd::ProtectArgs protect;
  auto* p = app.add_subcommand("protect", "apply template protection to the source block");
  p->add_option("--data", protect.data, "input EMBP path")->required();
  p->add_option("--scheme", protect.scheme, "polyprotect | mlphash")->capture_default_str();
  p->add_option("--m", protect.m, "polyprotect window size")->capture_default_str();
  p->add_option("--overlap", protect.overlap, "polyprotect window overlap")->capture_default_str();
  p->add_option("--tau", protect.tau, "mlphash binarization threshold")->capture_default_str();
  p->add_option("--seed", protect.seed, "root seed (drives per-identity secrets)")
      ->capture_default_str();
  p->add_option("--out", protect.out, "output EMBP path")->required();
  p->add_option("--report", protect.report, "JSON report path");

  cmd::LeakArgs leak;
  auto* l = app.add_subcommand("leak", "simulate partial template leakage on the source block");
  l->add_option("--data", leak.data, "input EMBP path")->required();
  l->add_option("--fraction", leak.fraction, "leaked prefix fraction in (0, 1]")->required();
  l->add_option("--out", leak.out, "output EMBP path")->required();
  l->add_option("--report", leak.report, "JSON report path");

  cmd::EvalArgs eval;
  auto* e = app.add_subcommand("eval", "verify probes against enrolled targets, report ASR");
  e->add_option("--probes", eval.probes, "probe embeddings (EMBD, or EMBP block)")->required();
  e->add_option("--probe-block", eval.probe_block, "auto | embedded | source | target")
      ->capture_default_str();
  e->add_option("--pairs", eval.pairs, "reference EMBP (enrollment + impostor calibration)")
      ->required();
  e->add_option("--far", eval.far, "target false acceptance rate")->capture_default_str();
  e->add_option("--impostors", eval.impostors, "impostor pairs for calibration")
      ->capture_default_str();
  e->add_option("--seed", eval.seed, "root seed")->capture_default_str();
  e->add_option("--report", eval.report, "JSON report path");
  e->add_option("--scores", eval.scores_csv, "per-probe score CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) cmd::cmd_synth(synth, std::cout);
    if (t->parsed()) cmd::cmd_train(train, std::cout);
    if (m->parsed()) cmd::cmd_map(map, std::cout);
    if (p->parsed()) cmd::cmd_protect(protect, std::cout);
    if (l->parsed()) cmd::cmd_leak(leak, std::cout);
    if (e->parsed()) cmd::cmd_eval(eval, std::cout);
  } catch (const ValueError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const ShapeError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const IoError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  } catch (const FormatError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  } catch (const DivergedError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 5;
  } catch (const DegenerateMatrixError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 5;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
