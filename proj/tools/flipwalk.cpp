#include "flipwalk/experiment.hpp"

int main(int argc, char** argv) { return flipwalk::cli_main(argc, argv); }
