#include "ffbs/cli.hpp"

int main(int argc, char** argv) { return ffbs::cli_main(argc, argv); }
