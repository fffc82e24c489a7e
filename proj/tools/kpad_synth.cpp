#include <CLI11.hpp>
#include <iostream>

#include "kpad/errors.hpp"
#include "kpad/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write a synthetic biscuit image tree for the kpad pipeline", "kpad_synth"};
  std::string out;
  std::size_t ok = 300;
  std::size_t nok = 300;
  std::uint64_t seed = 42;
  int size = 97;
  app.add_option("--out", out, "Root directory")->required();
  app.add_option("--ok", ok)->capture_default_str();
  app.add_option("--nok", nok, "Spread evenly over the three NOK classes")->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--size", size, "Image side in pixels")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    kpad::synth::BiscuitStyle style;
    style.size = size;
    const auto records = kpad::synth::write_dataset(out, ok, nok, seed, style);
    std::cout << "wrote " << records.size() << " images to " << out << '\n';
  } catch (const kpad::Error& e) {
    std::cerr << e.what() << '\n';
    return e.exit_code();
  }
  return 0;
}
