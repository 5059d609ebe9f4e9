#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qcrypt/replay.hpp"
#include "qcrypt/report.hpp"

#ifndef QCRYPT_FIXTURE_DIR
#define QCRYPT_FIXTURE_DIR "fixtures"
#endif

int main(int argc, char** argv) {
  CLI::App app{"Simulator for single-photon key distribution and quantum coin tossing"};
  app.set_config("--config", "", "Read options from an INI file (flags win over file values)");

  qcrypt::ExperimentConfig cfg;
  bool replay_tables = false;
  std::string fixtures_dir = QCRYPT_FIXTURE_DIR;
  std::string out_path;
  std::uint64_t seed = cfg.seed;
  int compare_count = -1;

  app.add_option("--protocol", cfg.protocol, "bb84 or cointoss")->capture_default_str();
  app.add_option("--n", cfg.n, "Photons per trial")->capture_default_str();
  app.add_option("--trials", cfg.trials, "Monte Carlo repetitions")->capture_default_str();
  app.add_option("--seed", seed, "Master seed; every stream derives from it")
      ->capture_default_str();
  app.add_option("--loss", cfg.loss, "P(photon lost in transit)")->capture_default_str();
  app.add_option("--efficiency", cfg.efficiency, "P(detector fires on an arriving photon)")
      ->capture_default_str();
  app.add_option("--eve", cfg.eve, "none | rect | diag | random | angle:<radians>")
      ->capture_default_str();
  app.add_option("--eve-fraction", cfg.eve_fraction, "Share of pulses the eavesdropper touches")
      ->capture_default_str();
  app.add_option("--compare-fraction", cfg.compare_fraction,
                 "Share of sifted bits sacrificed for comparison")
      ->capture_default_str();
  app.add_option("--compare-count", compare_count,
                 "Compare exactly this many sifted bits (overrides the fraction)");
  app.add_option("--allowed-disagreements", cfg.allowed_disagreements,
                 "Tolerated comparison mismatches; nonzero departs from the base protocol")
      ->capture_default_str();
  app.add_option("--cheat", cfg.cheat,
                 "honest | late-fabrication | mixed-bases | mixed-angle | epr")
      ->capture_default_str();
  app.add_option("--storage-loss", cfg.storage_loss,
                 "P(a stored entangled photon decoheres before the claim)")
      ->capture_default_str();
  app.add_option("--cheat-angle", cfg.cheat_angle, "Tilt of the mixed-angle encoding, radians")
      ->capture_default_str();
  app.add_flag("--bob-delays", cfg.bob_delays,
               "Bob stores arrived photons and measures after his guess");
  app.add_flag("--auth", cfg.auth, "Authenticate the classical channel");
  app.add_option("--auth-pool-bits", cfg.auth_pool_bits, "Initial shared authentication key bits")
      ->capture_default_str();
  app.add_option("--tag-width", cfg.tag_width, "Authentication tag width in bits")
      ->capture_default_str();
  app.add_option("--output", cfg.output, "text | json | csv")->capture_default_str();
  app.add_option("--out", out_path, "Write the report here instead of stdout");
  app.add_option("--transcript", cfg.transcript_path,
                 "Append per-trial JSON-lines transcripts to this file");
  app.add_flag("--replay-paper", replay_tables,
               "Replay the two recorded 15-pulse walkthroughs and check every cell");
  app.add_option("--fixtures", fixtures_dir, "Directory holding the recorded tables")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cfg.seed = seed;
  if (compare_count >= 0) cfg.compare_count = compare_count;

  try {
    if (replay_tables) {
      std::vector<qcrypt::ReplayResult> results = qcrypt::replay_recorded_tables(fixtures_dir);
      std::cout << qcrypt::format_replay(results);
      for (const auto& r : results)
        if (!r.pass) return 1;
      return 0;
    }

    cfg.validate();
    qcrypt::StatsReport report = qcrypt::run_experiment(cfg);
    std::string rendered = report.render();
    if (out_path.empty()) {
      std::cout << rendered;
    } else {
      std::ofstream out(out_path);
      if (!out) throw qcrypt::IoError("cannot open output file " + out_path);
      out << rendered;
      if (!out.good()) throw qcrypt::IoError("failed writing output file " + out_path);
    }
    return 0;
  } catch (const qcrypt::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
