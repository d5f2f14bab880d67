#include "sdt/cli.hpp"

int main(int argc, char** argv) { return sdt::run(argc, argv); }
