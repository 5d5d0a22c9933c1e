#include "koopbrs/dataset.hpp"

#include "koopbrs/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>

namespace koopbrs {
namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Dataset::Dataset(Mat X_, Mat U_, Mat Xp_) : X(std::move(X_)), U(std::move(U_)), Xp(std::move(Xp_)) {
  if (U.rows() != X.rows() || Xp.rows() != X.rows() || Xp.cols() != X.cols()) {
    throw DimensionMismatch("dataset blocks disagree in shape");
  }
}

Mat Dataset::xu() const {
  Mat out(size(), state_dim() + input_dim());
  out << X, U;
  return out;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Mat x(n, state_dim()), u(n, input_dim()), xp(n, state_dim());
  for (Eigen::Index k = 0; k < n; ++k) {
    x.row(k) = X.row(rows[k]);
    u.row(k) = U.row(rows[k]);
    xp.row(k) = Xp.row(rows[k]);
  }
  return Dataset(std::move(x), std::move(u), std::move(xp));
}

void write_csv(const Dataset& D, std::ostream& out) {
  const int n = D.state_dim();
  const int m = D.input_dim();
  for (int i = 0; i < n; ++i) out << (i ? "," : "") << "x" << i + 1;
  for (int j = 0; j < m; ++j) out << ",u" << j + 1;
  for (int i = 0; i < n; ++i) out << ",xp" << i + 1;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
  };
  for (int r = 0; r < D.size(); ++r) {
    for (int i = 0; i < n; ++i) {
      if (i) out << ',';
      put(D.X(r, i));
    }
    for (int j = 0; j < m; ++j) {
      out << ',';
      put(D.U(r, j));
    }
    for (int i = 0; i < n; ++i) {
      out << ',';
      put(D.Xp(r, i));
    }
    out << '\n';
  }
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset CSV: missing header");
  const auto header = split_commas(line);
  int n = 0, m = 0, np = 0;
  static const std::regex name(R"((x|u|xp)(\d+))");
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::smatch mt;
    if (!std::regex_match(header[c], mt, name)) {
      throw ConfigError("dataset CSV: unexpected column '" + header[c] + "'");
    }
    const int idx = std::stoi(mt[2]);
    int& counter = mt[1] == "x" ? n : (mt[1] == "u" ? m : np);
    const bool in_order = (mt[1] == "x" && m == 0 && np == 0) || (mt[1] == "u" && np == 0) || mt[1] == "xp";
    if (!in_order || idx != counter + 1) {
      throw ConfigError("dataset CSV: header must read x1..xn,u1..um,xp1..xpn");
    }
    ++counter;
  }
  if (n == 0 || np != n) throw ConfigError("dataset CSV: header must read x1..xn,u1..um,xp1..xpn");

  const int width = 2 * n + m;
  std::vector<double> values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_commas(line);
    if (static_cast<int>(cells.size()) != width) {
      throw ConfigError("dataset CSV line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                        " values");
    }
    for (const auto& cell : cells) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ConfigError("dataset CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      values.push_back(v);
    }
  }
  const auto N = static_cast<Eigen::Index>(values.size() / width);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> all(values.data(), N, width);
  return Dataset(all.leftCols(n), all.middleCols(n, m), all.rightCols(n));
}

}  // namespace koopbrs
