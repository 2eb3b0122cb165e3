#include "mesobell/cli.hpp"

int main(int argc, char** argv) { return mesobell::run_cli(argc, argv); }
