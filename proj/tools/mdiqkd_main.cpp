#include "mdiqkd/dataset_io.hpp"

int main(int argc, char** argv) { return mdiqkd::io::run_cli(argc, argv); }
