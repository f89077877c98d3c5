#include "dinw/cli.hpp"

int main(int argc, char** argv) { return dinw::run_cli(argc, argv); }
