#include "perfal/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace perfal::synth {

namespace {

constexpr int kVars = 3;
constexpr int kMaxDepth = 3;
constexpr int kMaxLoops = 2;
constexpr double kHabit = 0.8;
constexpr double kBase = 20.0;
constexpr int kBounds[] = {5, 10, 20, 40};

// File-level habits: tests of one component tend to call the same API and
// iterate over similarly sized inputs.
struct Profile {
  int callee = 0;
  int bound = 0;
};

std::vector<Stmt> random_block(Rng& rng, const Profile& prof, int depth, int loops, int min, int max);

Stmt random_stmt(Rng& rng, const Profile& prof, int depth, int loops) {
  Stmt s;
  s.a = static_cast<int>(rng.below(kVars));
  s.b = static_cast<int>(rng.below(kVars));
  s.c = 1 + static_cast<int>(rng.below(9));
  const double r = rng.uniform();
  if (depth < kMaxDepth && r < 0.12) {
    s.kind = Stmt::Kind::If;
    s.body = random_block(rng, prof, depth + 1, loops, 1, 3);
    if (rng.uniform() < 0.5) s.orelse = random_block(rng, prof, depth + 1, loops, 1, 3);
  } else if (loops < kMaxLoops && r < 0.30) {
    s.kind = rng.uniform() < 0.7 ? Stmt::Kind::For : Stmt::Kind::While;
    s.bound = rng.uniform() < kHabit ? kBounds[prof.bound] : kBounds[rng.below(4)];
    s.body = random_block(rng, prof, depth + 1, loops + 1, 1, 3);
  } else if (r < 0.50) {
    s.kind = Stmt::Kind::Call;
    s.target = rng.uniform() < kHabit ? prof.callee : static_cast<int>(rng.below(callees().size()));
  } else if (r < 0.65) {
    s.kind = Stmt::Kind::Assert;
  } else if (r < 0.85) {
    s.kind = Stmt::Kind::Assign;
  } else {
    s.kind = Stmt::Kind::Declare;
  }
  return s;
}

std::vector<Stmt> random_block(Rng& rng, const Profile& prof, int depth, int loops, int min, int max) {
  const int n = min + static_cast<int>(rng.below(static_cast<std::uint64_t>(max - min + 1)));
  std::vector<Stmt> out;
  for (int i = 0; i < n; ++i) out.push_back(random_stmt(rng, prof, depth, loops));
  return out;
}

double block_cost(const std::vector<Stmt>& block);

double stmt_cost(const Stmt& s) {
  switch (s.kind) {
    case Stmt::Kind::Assign:
    case Stmt::Kind::Declare:
    case Stmt::Kind::Assert: return 1.0;
    case Stmt::Kind::Call: return callees()[static_cast<std::size_t>(s.target)].cost;
    case Stmt::Kind::If: return 1.0 + 0.5 * block_cost(s.body) + 0.5 * block_cost(s.orelse);
    case Stmt::Kind::For: return 1.0 + s.bound / 20.0 * block_cost(s.body);
    // counter declaration, then the body plus its increment per round
    case Stmt::Kind::While: return 2.0 + s.bound / 20.0 * (block_cost(s.body) + 1.0);
  }
  return 0.0;
}

double block_cost(const std::vector<Stmt>& block) {
  double c = 0;
  for (const auto& s : block) c += stmt_cost(s);
  return c;
}

class Renderer {
 public:
  std::string run(const Program& p, const std::string& name) {
    out_ = "package synth;\n\nimport org.junit.Test;\n\nimport static org.junit.Assert.assertEquals;\n\n";
    out_ += "public class " + name + " {\n";
    for (const auto& c : callees()) {
      std::string type = c.receiver;
      type[0] = static_cast<char>(type[0] - 'a' + 'A');
      out_ += "    private final " + type + " " + c.receiver + " = new " + type + "();\n";
    }
    for (std::size_t m = 0; m < p.methods.size(); ++m) {
      out_ += "\n    @Test\n    public void test" + std::to_string(m) + "() {\n";
      fresh_ = 0;
      for (int v = 0; v < kVars; ++v) line(2, "int x" + std::to_string(v) + " = " + std::to_string(v + 1) + ";");
      block(p.methods[m].body, 2, 0);
      out_ += "    }\n";
    }
    out_ += "}\n";
    return out_;
  }

 private:
  void line(int indent, const std::string& text) { out_ += std::string(static_cast<std::size_t>(4 * indent), ' ') + text + "\n"; }

  static std::string var(int i) { return "x" + std::to_string(i); }

  void block(const std::vector<Stmt>& b, int indent, int loops) {
    for (const auto& s : b) stmt(s, indent, loops);
  }

  void stmt(const Stmt& s, int indent, int loops) {
    const auto lit = std::to_string(s.c);
    switch (s.kind) {
      case Stmt::Kind::Assign: line(indent, var(s.a) + " = " + var(s.b) + " + " + lit + ";"); break;
      case Stmt::Kind::Declare:
        line(indent, "int t" + std::to_string(fresh_++) + " = " + var(s.a) + " * " + lit + ";");
        break;
      case Stmt::Kind::Assert: line(indent, "assertEquals(" + var(s.a) + ", " + var(s.b) + ");"); break;
      case Stmt::Kind::Call: {
        const auto& c = callees()[static_cast<std::size_t>(s.target)];
        line(indent, std::string(c.receiver) + "." + c.method + "(" + var(s.a) + ");");
        break;
      }
      case Stmt::Kind::If:
        line(indent, "if (" + var(s.a) + " > " + lit + ") {");
        block(s.body, indent + 1, loops);
        if (!s.orelse.empty()) {
          line(indent, "} else {");
          block(s.orelse, indent + 1, loops);
        }
        line(indent, "}");
        break;
      case Stmt::Kind::For: {
        const auto i = "i" + std::to_string(loops);
        line(indent, "for (int " + i + " = 0; " + i + " < " + std::to_string(s.bound) + "; " + i + "++) {");
        block(s.body, indent + 1, loops + 1);
        line(indent, "}");
        break;
      }
      case Stmt::Kind::While: {
        const auto w = "w" + std::to_string(fresh_++);
        line(indent, "int " + w + " = 0;");
        line(indent, "while (" + w + " < " + std::to_string(s.bound) + ") {");
        block(s.body, indent + 1, loops + 1);
        line(indent + 1, w + "++;");
        line(indent, "}");
        break;
      }
    }
  }

  std::string out_;
  int fresh_ = 0;
};

}  // namespace

const std::vector<Callee>& callees() {
  static const std::vector<Callee> table = {
      {"list", "add", 0.2}, {"helper", "compute", 1.0}, {"db", "save", 4.0}, {"service", "query", 12.0}};
  return table;
}

Program random_program(Rng& rng) {
  Program p;
  Profile prof;
  prof.callee = static_cast<int>(rng.below(callees().size()));
  prof.bound = static_cast<int>(rng.below(4));
  const int methods = 1 + static_cast<int>(rng.below(3));
  for (int m = 0; m < methods; ++m) p.methods.push_back({random_block(rng, prof, 0, 0, 3, 10)});
  p.noise = std::exp(0.15 * rng.normal());
  return p;
}

std::string render(const Program& p, const std::string& class_name) { return Renderer().run(p, class_name); }

double program_cost(const Program& p) {
  double c = 0;
  for (const auto& m : p.methods) c += block_cost(m.body) + kVars;
  return c;
}

double program_label(const Program& p) { return (kBase + program_cost(p)) * p.noise; }

std::vector<SyntheticFile> generate(int n, std::uint64_t seed) {
  if (n < 20) throw ConfigError("a synthetic corpus needs at least 20 files");
  std::vector<SyntheticFile> out;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto p = random_program(rng);
    char name[32];
    std::snprintf(name, sizeof name, "SynthTest%04d", i);
    out.push_back({std::string("synth/") + name + ".java", render(p, name), program_label(p)});
  }
  return out;
}

void write_corpus(const std::vector<SyntheticFile>& files, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path root(out_dir);
  fs::create_directories(root);
  std::ofstream labels(root / "labels.csv", std::ios::binary);
  labels << "path,duration_ms\n";
  char buf[64];
  for (const auto& f : files) {
    const auto path = root / f.path;
    fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << f.source;
    std::snprintf(buf, sizeof buf, "%.6f", f.label);
    labels << f.path << ',' << buf << '\n';
  }
  if (!labels) throw Error("could not write " + (root / "labels.csv").string());
}

}  // namespace perfal::synth
