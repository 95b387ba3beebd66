#include "commands.hpp"

int main(int argc, char** argv) { return krein::cli::run_cli(argc, argv); }
