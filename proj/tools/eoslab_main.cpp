#include "eoslab/experiment.hpp"

int main(int argc, char** argv) { return eoslab::cli_main(argc, argv); }
