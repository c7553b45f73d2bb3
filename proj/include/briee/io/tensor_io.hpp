#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace briee::io {

// Plain-text tensor container used for all parameter checkpoints.
//
//   briee-tensors 1
//   meta <single-line string, typically JSON>
//   tensor <name> <rows> <cols>
//   <rows lines of cols space-separated %.17g values>
//   ...
//
// %.17g guarantees doubles survive a write/read round trip bit-exactly.

struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

class TensorFile {
 public:
  std::string meta;
  std::vector<NamedTensor> tensors;

  bool has(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return true;
    return false;
  }

  const Eigen::MatrixXd& get(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return t.value;
    throw std::runtime_error("tensor file: missing tensor '" + name + "'");
  }

  void add(std::string name, Eigen::MatrixXd value) {
    tensors.push_back({std::move(name), std::move(value)});
  }

  void add_scalar(std::string name, double value) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = value;
    add(std::move(name), std::move(m));
  }

  double get_scalar(const std::string& name) const {
    const auto& m = get(name);
    if (m.rows() != 1 || m.cols() != 1)
      throw std::runtime_error("tensor file: '" + name + "' is not a scalar");
    return m(0, 0);
  }

  void write(std::ostream& os) const {
    os << "briee-tensors 1\n";
    if (meta.find('\n') != std::string::npos)
      throw std::invalid_argument("tensor file: meta must be a single line");
    os << "meta " << meta << "\n";
    char buf[32];
    for (const auto& t : tensors) {
      os << "tensor " << t.name << " " << t.value.rows() << " " << t.value.cols() << "\n";
      for (Eigen::Index i = 0; i < t.value.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.value.cols(); ++j) {
          std::snprintf(buf, sizeof(buf), "%.17g", t.value(i, j));
          os << (j ? " " : "") << buf;
        }
        os << "\n";
      }
    }
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("tensor file: cannot open for writing: " + path);
    write(os);
    if (!os) throw std::runtime_error("tensor file: write failed: " + path);
  }

  static TensorFile read(std::istream& is, const std::string& origin) {
    TensorFile out;
    std::string line;
    if (!std::getline(is, line) || line != "briee-tensors 1")
      throw std::runtime_error("tensor file: bad magic/version in " + origin);
    if (!std::getline(is, line) || line.rfind("meta", 0) != 0)
      throw std::runtime_error("tensor file: missing meta line in " + origin);
    out.meta = line.size() > 5 ? line.substr(5) : std::string();
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::istringstream hdr(line);
      std::string kw, name;
      Eigen::Index rows = 0, cols = 0;
      hdr >> kw >> name >> rows >> cols;
      if (kw != "tensor" || !hdr || rows < 0 || cols < 0)
        throw std::runtime_error("tensor file: malformed tensor header in " + origin + ": " + line);
      Eigen::MatrixXd m(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
          if (!(is >> m(i, j)))
            throw std::runtime_error("tensor file: truncated values for '" + name + "' in " + origin);
      is.ignore(1, '\n');
      out.add(std::move(name), std::move(m));
    }
    return out;
  }

  static TensorFile load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("tensor file: cannot open: " + path);
    return read(is, path);
  }
};

}  // namespace briee::io
