#include "driftguard/cli.hpp"

int main(int argc, char** argv) { return driftguard::cli::run(argc, argv); }
