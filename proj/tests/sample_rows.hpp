#pragma once

// The twelve pretraining rows for the "nice weather" example, written out by hand.

#include <optional>
#include <string>
#include <vector>

namespace lexent::oracle {

struct ReferenceRow {
  std::string first;
  std::string second;
  std::optional<int> nfsp;
  int nmsp;
};

inline const std::string kEnCur = "The weather is nice.";
inline const std::string kEnNext = "Shall we go out?";
inline const std::string kEnRand = "Random sentence.";
inline const std::string kJaCur = "いい天気ね。";
inline const std::string kJaNext = "お出掛けしよ？";
inline const std::string kJaRand = "ランダム文。";

inline std::vector<ReferenceRow> reference_rows() {
  return {
      {kEnNext, kEnCur, std::nullopt, 2}, {kJaNext, kJaCur, std::nullopt, 2},
      {kJaNext, kEnCur, std::nullopt, 2}, {kEnNext, kJaCur, std::nullopt, 2},
      {kJaCur, kJaNext, std::nullopt, 1}, {kEnCur, kEnNext, std::nullopt, 1},
      {kEnCur, kJaNext, 1, 1},            {kJaCur, kEnNext, 1, 1},
      {kEnCur, kJaRand, 0, 0},            {kJaCur, kEnRand, 0, 0},
      {kEnCur, kEnRand, std::nullopt, 0}, {kJaCur, kJaRand, std::nullopt, 0},
  };
}

}  // namespace lexent::oracle
