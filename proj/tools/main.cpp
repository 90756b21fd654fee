#include <iostream>

#include "cli_dispatch.hpp"

int main(int argc, char** argv) { return lamperti::cli::dispatch(argc, argv, std::cout, std::cerr); }
