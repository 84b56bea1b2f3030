#include "csetlab/protocol.hpp"

#include <sstream>

namespace csetlab {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

}  // namespace

std::string describe(const Action& action) {
  return std::visit(
      Overload{
          [](const InsertAction& a) { return "insert " + describe(a.item) + " -> " + a.object; },
          [](const RemoveAction& a) { return "remove from " + a.object; },
          [](const ReadAction& a) { return "read " + a.reg; },
          [](const WriteAction& a) {
            std::ostringstream os;
            os << "write " << a.reg << " := " << a.value;
            return os.str();
          },
          [](const DecideAction& a) {
            std::ostringstream os;
            os << "decide " << a.value;
            return os.str();
          },
      },
      action);
}

std::string describe(const Response& response) {
  return std::visit(
      Overload{
          [](const NoResponse&) { return std::string("-"); },
          [](const InsertedResponse&) { return std::string("inserted"); },
          [](const RemovedResponse& r) {
            return r.item ? "removed " + describe(*r.item) : std::string("removed null");
          },
          [](const ReadResponse& r) {
            std::ostringstream os;
            if (r.value) {
              os << "read " << *r.value;
            } else {
              os << "read unset";
            }
            return os.str();
          },
          [](const WroteResponse&) { return std::string("wrote"); },
      },
      response);
}

namespace {

void enc_u64(std::string& out, std::uint64_t v) {
  char buf[20];
  int n = 0;
  do {
    buf[n++] = static_cast<char>('0' + v % 10);
    v /= 10;
  } while (v != 0);
  while (n > 0) out.push_back(buf[--n]);
  out.push_back(';');
}

void enc_i64(std::string& out, std::int64_t v) {
  if (v < 0) {
    out.push_back('-');
    enc_u64(out, static_cast<std::uint64_t>(-(v + 1)) + 1);
  } else {
    enc_u64(out, static_cast<std::uint64_t>(v));
  }
}

}  // namespace

void encode(std::string& out, const Item& item) {
  out.push_back('I');
  enc_u64(out, item.uid);
}

void encode(std::string& out, const Action& action) {
  std::visit(Overload{
                 [&](const InsertAction& a) {
                   out.push_back('i');
                   out += a.object;
                   encode(out, a.item);
                 },
                 [&](const RemoveAction& a) {
                   out.push_back('r');
                   out += a.object;
                   out.push_back(';');
                 },
                 [&](const ReadAction& a) {
                   out.push_back('g');
                   out += a.reg;
                   out.push_back(';');
                 },
                 [&](const WriteAction& a) {
                   out.push_back('w');
                   out += a.reg;
                   out.push_back(':');
                   enc_i64(out, a.value);
                 },
                 [&](const DecideAction& a) {
                   out.push_back('d');
                   enc_i64(out, a.value);
                 },
             },
             action);
}

void encode(std::string& out, const Response& response) {
  std::visit(Overload{
                 [&](const NoResponse&) { out.push_back('0'); },
                 [&](const InsertedResponse&) { out.push_back('1'); },
                 [&](const RemovedResponse& r) {
                   out.push_back('2');
                   if (r.item) {
                     encode(out, *r.item);
                     out.push_back(r.marker_sibling_consumed ? 'c' : '.');
                   } else {
                     out.push_back('n');
                   }
                 },
                 [&](const ReadResponse& r) {
                   out.push_back('3');
                   if (r.value) {
                     enc_i64(out, *r.value);
                   } else {
                     out.push_back('n');
                   }
                 },
                 [&](const WroteResponse&) { out.push_back('4'); },
             },
             response);
}

void encode(std::string& out, const LocalState& local) {
  out.push_back('L');
  enc_i64(out, local.phase);
  out.push_back('[');
  for (std::int64_t v : local.ints) enc_i64(out, v);
  out.push_back('|');
  for (const Item& it : local.items) encode(out, it);
  out.push_back(']');
}

}  // namespace csetlab
