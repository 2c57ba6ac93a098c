#include "curvespec/cli.hpp"

int main(int argc, char** argv) { return curvespec::cli::run(argc, argv); }
