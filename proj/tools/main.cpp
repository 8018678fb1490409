#include "cli.hpp"

int main(int argc, char** argv) { return swarmcalc::cli::run({argv + 1, argv + argc}); }
