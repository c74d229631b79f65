#include "impulse_game/parallel.hpp"

#include <cstdlib>
#include <string>

namespace impulse_game {

int worker_count() {
  if (const char* env = std::getenv("IMPULSE_GAME_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace impulse_game
