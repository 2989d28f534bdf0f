#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "perfal/common.hpp"

namespace perfal::synth {

/// Statement of a generated test method. Loop bodies run `bound` times.
struct Stmt {
  enum class Kind { Assign, Declare, Assert, Call, If, For, While };
  Kind kind = Kind::Assign;
  int a = 0, b = 0, c = 0;  // variable indices and literals, meaning depends on kind
  int target = 0;           // Call: index into the callee table
  int bound = 0;            // For / While
  std::vector<Stmt> body;
  std::vector<Stmt> orelse;
};

struct Method {
  std::vector<Stmt> body;
};

struct Program {
  std::vector<Method> methods;
  double noise = 1.0;  // multiplicative label noise
};

/// Callee names and their per-call cost.
struct Callee {
  const char* receiver;
  const char* method;
  double cost;
};
const std::vector<Callee>& callees();

Program random_program(Rng& rng);

/// Java source for a test class named `class_name`.
std::string render(const Program& p, const std::string& class_name);

/// Noise-free cost: one unit per simple statement, the callee cost per call,
/// branches weighted one half each, loop bodies scaled by their bound.
double program_cost(const Program& p);

/// Label in milliseconds: (base + cost) * noise.
double program_label(const Program& p);

struct SyntheticFile {
  std::string path;  // relative, e.g. "synth/SynthTest007.java"
  std::string source;
  double label = 0.0;
};

/// n >= 20 files; byte-identical for a fixed seed.
std::vector<SyntheticFile> generate(int n, std::uint64_t seed);

/// Writes the sources under out_dir plus out_dir/labels.csv (path,duration_ms).
void write_corpus(const std::vector<SyntheticFile>& files, const std::string& out_dir);

}  // namespace perfal::synth
