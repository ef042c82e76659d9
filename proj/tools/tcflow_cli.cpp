#include "tcflow/cli.hpp"

int main(int argc, char** argv) { return tcflow::cli::run(argc, argv); }
