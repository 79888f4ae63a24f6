#include "mcalc/calculus.hpp"

#include <cmath>
#include <map>

#include "mcalc/errors.hpp"

namespace mcalc {

namespace {

std::vector<IAPolicy> tagged_family(const char* factory, std::uint64_t seed) {
  auto make = std::string(factory) == "riemann" ? riemann_policy : geometric_policy;
  return {make("uniform", "midpoint", 0), make("dyadic", "midpoint", 0),
          make("randomized", "midpoint", seed)};
}

CalculusPtr make_riemann() {
  auto c = std::make_shared<CalculusChoice>();
  c->id = "riemann";
  c->y = magma("real_add");
  c->m = magma("ext_real_add");
  c->g_out = magma("ext_real_add");
  c->elem = {"riemann", c->y, c->m, c->g_out, ExpansionOrder::YFirst,
             [](const Value& a, const Value& m) -> Value { return num(a) * num(m); }};
  c->orientations = {"e", "neg"};
  c->default_policies = [](Space::Kind k, std::uint64_t seed) -> std::vector<IAPolicy> {
    switch (k) {
      case Space::Kind::Interval1D: return tagged_family("riemann", seed);
      case Space::Kind::GridFaces: return {grid2d_policy("center"), grid2d_policy("centerswap")};
      case Space::Kind::GridEdges: return {edge_policy()};
      default: return {discrete_policy()};
    }
  };
  return c;
}

CalculusPtr make_product() {
  auto c = std::make_shared<CalculusChoice>();
  c->id = "product";
  c->y = magma("pos_mul");
  c->m = magma("ext_real_add");
  c->g_out = magma("ext_nonneg_mul");
  c->elem = {"product", c->y, c->m, c->g_out, ExpansionOrder::YFirst,
             [](const Value& a, const Value& m) -> Value { return std::pow(num(a), num(m)); }};
  c->orientations = {"e", "neg"};
  c->default_policies = [](Space::Kind k, std::uint64_t seed) -> std::vector<IAPolicy> {
    switch (k) {
      case Space::Kind::Interval1D: return tagged_family("geometric", seed);
      case Space::Kind::GridFaces:
      case Space::Kind::GridEdges:
        fail(Err::WrongSpaceKind, "the product calculus has no grid policy family");
      default: return {discrete_policy()};
    }
  };
  return c;
}

CalculusPtr make_free(const std::string& key, const std::string& alphabet, ExpansionOrder order) {
  if (alphabet.empty()) fail(Err::Schema, "free calculus needs a nonempty alphabet");
  auto c = std::make_shared<CalculusChoice>();
  c->id = key;
  c->y = c->m = c->g_out = magma("free:" + alphabet);
  c->elem = {key, c->y, c->m, c->g_out, order,
             [](const Value& a, const Value& m) -> Value {
               return Value(FreeTerm::node(term(a), term(m)));
             }};
  c->orientations = {"e"};
  c->default_policies = [](Space::Kind, std::uint64_t) -> std::vector<IAPolicy> {
    return {atomic_policy()};
  };
  return c;
}

}  // namespace

CalculusPtr calculus(const std::string& key) {
  static std::map<std::string, CalculusPtr> cache;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  CalculusPtr c;
  if (key == "riemann") c = make_riemann();
  else if (key == "product") c = make_product();
  else if (key.rfind("free:", 0) == 0) {
    std::string rest = key.substr(5);
    size_t colon = rest.find(':');
    if (colon == std::string::npos) {
      c = make_free(key, rest, ExpansionOrder::YFirst);
    } else if (rest.substr(colon + 1) == "mfirst") {
      c = make_free(key, rest.substr(0, colon), ExpansionOrder::MFirst);
    } else {
      fail(Err::UnknownKey, "no calculus registered as '" + key + "'");
    }
  } else {
    fail(Err::UnknownKey, "no calculus registered as '" + key + "'");
  }

  check_element(c->elem);
  cache.emplace(key, c);
  return c;
}

}  // namespace mcalc
