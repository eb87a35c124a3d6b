#include <edgefed/reporting.hpp>
#include <edgefed/scenario_io.hpp>
#include <edgefed/synth.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  edgefed::SynthOptions opt;
  std::filesystem::path out;
  CLI::App app{"Generate a synthetic Toronto-like scenario"};
  app.add_option("--nodes", opt.nodes, "Edge nodes in total")->check(CLI::Range(3, 192));
  app.add_option("--seed", opt.seed, "Topology seed");
  app.add_option("--out", out, "Output file (stdout when omitted)");
  CLI11_PARSE(app, argc, argv);
  try {
    const std::string text = edgefed::dump_scenario(edgefed::synth_toronto(opt));
    if (out.empty())
      std::cout << text;
    else
      edgefed::write_file_atomic(out, text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
