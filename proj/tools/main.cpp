#include "localboost/harness.hpp"

int main(int argc, char** argv) { return localboost::cli_main(argc, argv); }
