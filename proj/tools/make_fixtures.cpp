// Regenerates the fabricated corpora under data/. Usage: make_fixtures <data-dir>
//
// The output is committed; rerunning with the same code reproduces it byte for byte.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pcf/random.hpp"
#include "pcf/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

std::string id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%02zu", prefix, i);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

struct Movie {
  std::string id;
  double action, romance, comedy;
  int year;
};

Movie random_movie(pcf::Rng& rng, std::string movie_id) {
  Movie m{std::move(movie_id), rng.uniform01(), rng.uniform01(), rng.uniform01(),
          1960 + static_cast<int>(rng.below(61))};
  m.action = std::round(m.action * 10) / 10;
  m.romance = std::round(m.romance * 10) / 10;
  m.comedy = std::round(m.comedy * 10) / 10;
  return m;
}

void write_movies(const fs::path& p, const std::vector<Movie>& movies) {
  std::ofstream f(p);
  f << "# fabricated item features: action,romance,comedy in [0,1]; release year\n";
  f << "item_id,action,romance,comedy,year\n";
  for (const auto& m : movies) f << m.id << ',' << m.action << ',' << m.romance << ',' << m.comedy << ',' << m.year << '\n';
}

// Ten fabricated users over 24 movies; u10 likes everything it rates.
void toy(const fs::path& dir) {
  fs::create_directories(dir);
  pcf::Rng rng(20240101);
  std::vector<Movie> movies;
  for (std::size_t i = 1; i <= 24; ++i) movies.push_back(random_movie(rng, id("m", i)));
  std::vector<Movie> candidates;
  for (std::size_t i = 1; i <= 5; ++i) candidates.push_back(random_movie(rng, id("c", i)));
  write_movies(dir / "features.csv", movies);
  write_movies(dir / "candidates.csv", candidates);

  // Taste weights over (action, romance, comedy, recency).
  const double tastes[10][4] = {
      {4, -2, 0, 0}, {-2, 4, 0, 0}, {0, 0, 4, -1}, {2, 2, -2, 0}, {-3, 0, 3, 0},
      {0, -3, 0, 3}, {3, 0, 0, -3}, {0, 3, 3, 0}, {1, -1, 1, -1}, {0, 0, 0, 0},
  };
  std::ofstream f(dir / "ratings.csv");
  f << "# fabricated ratings on a 1-5 scale\n";
  f << "user_id,item_id,rating\n";
  for (std::size_t u = 0; u < 10; ++u) {
    for (const auto& m : movies) {
      if (rng.uniform01() < 0.3) continue;
      const double recency = (m.year - 1990) / 30.0;
      const double s = tastes[u][0] * (m.action - 0.5) + tastes[u][1] * (m.romance - 0.5) +
                       tastes[u][2] * (m.comedy - 0.5) + tastes[u][3] * recency;
      double r = u == 9 ? 4.0 + static_cast<double>(rng.below(2)) : 3.0 + 2.0 * std::tanh(1.5 * s);
      r = std::round(std::clamp(r + (u == 9 ? 0.0 : rng.uniform(-0.3, 0.3)), 1.0, 5.0));
      f << id("u", u + 1) << ',' << m.id << ',' << r << '\n';
    }
  }
}

// Items in [-1,1]^2; four users whose tastes follow quadrant (XOR) or linear rules.
void preference_corpus(const fs::path& dir, bool use_xor, std::uint64_t seed) {
  fs::create_directories(dir);
  pcf::Rng rng(seed);
  std::vector<pcf::Vector> items;
  for (std::size_t i = 0; i < 200; ++i) items.push_back(pcf::synthetic::xor_point(rng, 0.05));
  {
    std::ofstream f(dir / "features.csv");
    f << "# fabricated 2-feature items\n";
    f << "item_id,f1,f2\n";
    for (std::size_t i = 0; i < items.size(); ++i) f << "i" << i + 1 << ',' << num(items[i][0]) << ',' << num(items[i][1]) << '\n';
  }
  const double directions[4][2] = {{1, 1}, {1, -0.5}, {-0.3, 1}, {-1, -1}};
  std::ofstream f(dir / "ratings.csv");
  f << "# fabricated ratings on a 1-5 scale\n";
  f << "user_id,item_id,rating\n";
  for (std::size_t u = 0; u < 4; ++u) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      const double x1 = std::stod(num(items[i][0]));
      const double x2 = std::stod(num(items[i][1]));
      bool likes;
      if (use_xor) {
        likes = (x1 * x2 > 0.0) == (u % 2 == 0);
      } else {
        likes = directions[u][0] * x1 + directions[u][1] * x2 > 0.0;
      }
      const int r = likes ? 4 + static_cast<int>(rng.below(2)) : 1 + static_cast<int>(rng.below(2));
      f << id("u", u + 1) << ",i" << i + 1 << ',' << r << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <data-dir>\n";
    return 1;
  }
  const fs::path root(argv[1]);
  toy(root / "toy");
  preference_corpus(root / "xor", true, 777);
  preference_corpus(root / "linear", false, 778);
  return 0;
}
