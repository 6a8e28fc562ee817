// Writes a synthetic pool (manifest, feature files, annotation files) for
// desk-scale runs of posterctl. Label signal is split between appearance
// and text; see poster/synthetic.hpp for the construction.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "poster/eval.hpp"
#include "poster/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic poster pool"};
  std::string out;
  std::string counts = "PoliticalPoster=400,PoliticalOther=600,OffTopic=200,Natural=300,NonPoliticalPoster=200";
  poster::SyntheticConfig cfg;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--counts", counts, "Category=count,...")->capture_default_str();
  app.add_option("--dim", cfg.appearance_dim, "Appearance vector dimension")->capture_default_str();
  app.add_option("--shift", cfg.appearance_shift, "Class shift of appearance-kind samples")->capture_default_str();
  app.add_option("--text-share", cfg.text_share, "Fraction of text-kind samples")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto setup = poster::parse_custom_setup(counts);
    const auto samples = poster::generate_synthetic(setup.counts, cfg);
    const auto manifest = poster::write_synthetic_pool(samples, out);
    std::cout << "wrote " << samples.size() << " samples to " << manifest.string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
