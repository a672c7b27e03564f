#include "commands.hpp"

int main(int argc, char** argv) { return lmfrail::cli::run_cli(argc, argv); }
