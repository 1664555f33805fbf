// Segments each word given on the command line with a small built-in
// vocabulary, or with the vocabulary file named by --vocab.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tokbias/tokenizer.hpp"

namespace {

constexpr const char* kDemoVocab =
    "<unk>\t0\n"
    "lehrer\t-6\nlehrerin\t-9\nin\t-3\nnen\t-4\nlehr\t-7\ner\t-3\n"
    "a\t-5\nb\t-5\nc\t-5\nd\t-5\ne\t-5\nf\t-5\ng\t-5\nh\t-5\ni\t-5\nj\t-5\nk\t-5\nl\t-5\nm\t-5\n"
    "n\t-5\no\t-5\np\t-5\nq\t-5\nr\t-5\ns\t-5\nt\t-5\nu\t-5\nv\t-5\nw\t-5\nx\t-5\ny\t-5\nz\t-5\n";

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> words;
  std::string vocab_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--vocab" && i + 1 < argc) {
      vocab_path = argv[++i];
    } else {
      words.push_back(a);
    }
  }
  if (words.empty()) words = {"lehrer", "lehrerin", "lehrerinnen"};

  try {
    std::ifstream file;
    std::istringstream demo(kDemoVocab);
    std::istream* in = &demo;
    if (!vocab_path.empty()) {
      file.open(vocab_path, std::ios::binary);
      if (!file) {
        std::cerr << "cannot open vocabulary '" << vocab_path << "'\n";
        return 2;
      }
      in = &file;
    }
    const auto vocab = tokbias::load_vocab(*in);
    for (const auto& w : words) {
      const auto seg = tokbias::segment(vocab, w);
      std::cout << w << '\t' << seg.n_tokens << '\t';
      for (std::size_t i = 0; i < seg.tokens.size(); ++i) std::cout << (i ? " " : "") << seg.tokens[i];
      std::cout << '\t' << seg.score << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
