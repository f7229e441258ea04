#include "hkcg/cli.hpp"

int main(int argc, char** argv) { return hkcg::run_cli(argc, argv); }
