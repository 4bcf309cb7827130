#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "rtm/learners.hpp"

namespace rtm {

/// Whitespace-separated token stream used by the flat model files.
class TokenWriter {
 public:
  TokenWriter& operator<<(const std::string& s);
  TokenWriter& operator<<(double v);
  TokenWriter& operator<<(long long v);
  TokenWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  TokenWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
  void newline();
  void vector(const VectorXd& v);
  void matrix(const MatrixXd& m);
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool lineStart_ = true;
};

class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : in_(text) {}
  std::string next();
  void expect(const std::string& token);
  double nextDouble();
  long long nextInt();
  VectorXd vector();
  MatrixXd matrix();
  bool atEnd();

 private:
  std::istringstream in_;
};

void writeSpec(TokenWriter& w, const ModelSpec& spec);
ModelSpec readSpec(TokenReader& r);
void writeModel(TokenWriter& w, const TrainedModel& m);
TrainedModel readModel(TokenReader& r);
void writeEnsemble(TokenWriter& w, const Ensemble& e);
Ensemble readEnsemble(TokenReader& r);

}  // namespace rtm
