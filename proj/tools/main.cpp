#include "prefforge/orchestrator.hpp"

int main(int argc, char** argv) {
  return prefforge::orchestrator::cli_dispatch(argc, argv);
}
