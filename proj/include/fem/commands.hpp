#ifndef FEM_COMMANDS_HPP
#define FEM_COMMANDS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fem/common.hpp"

namespace fem::cmd {

// One struct per subcommand; the CLI fills these from flags/config and the
// tests call the functions directly. Every command that writes a --report
// embeds its fully resolved configuration in the report.

struct SynthArgs {
  Index ids = 200;
  Index samples = 5;
  double sigma = 0.05;
  Index latent_dim = 64;
  Index dim = 512;
  Index first_id = 0;
  uint64_t seed = 0;
  std::string out;
  std::string report;
};

struct TrainArgs {
  std::string data;
  std::string variant = "kan";  // kan | mlp
  int epochs = 20;
  Index batch = 128;
  double lr = -1.0;  // < 0: use the variant default
  std::string loss = "full";  // full | mse | pd | pd+ced
  double lambda_mse = -1.0;  // < 0: use the preset value
  double lambda_pd = -1.0;
  double lambda_ced = -1.0;
  std::vector<Index> widths;  // empty: 512-1024-3072-512
  int grid_size = 5;
  int spline_order = 3;
  uint64_t seed = 0;
  std::string out;
  std::string history;
  std::string report;
};

struct MapArgs {
  std::string data;
  std::string weights;
  std::string out;
  std::string report;
};

struct ProtectArgs {
  std::string data;
  std::string scheme = "polyprotect";  // polyprotect | mlphash
  int m = 5;
  int overlap = 4;
  double tau = 0.0;
  uint64_t seed = 0;
  std::string out;
  std::string report;
};

struct LeakArgs {
  std::string data;
  double fraction = 1.0;
  std::string out;
  std::string report;
};

struct EvalArgs {
  std::string probes;
  std::string probe_block = "auto";  // auto | embedded | source | target
  std::string pairs;
  double far = 0.01;
  Index impostors = 100000;
  uint64_t seed = 0;
  std::string report;
  std::string scores_csv;
};

void cmd_synth(const SynthArgs& args, std::ostream& log);
void cmd_train(const TrainArgs& args, std::ostream& log);
void cmd_map(const MapArgs& args, std::ostream& log);
void cmd_protect(const ProtectArgs& args, std::ostream& log);
void cmd_leak(const LeakArgs& args, std::ostream& log);
void cmd_eval(const EvalArgs& args, std::ostream& log);

}  // namespace fem::cmd

#endif
