#include "sib/cli/commands.hpp"

int main(int argc, char** argv) { return sib::cli::run_main(argc, argv); }
