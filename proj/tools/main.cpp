#include "surfcorr/cli.hpp"

int main(int argc, char** argv) { return surfcorr::run_cli(argc, argv); }
