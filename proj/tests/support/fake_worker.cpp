// Test double for a runner: speaks the wire protocol and implements a few
// canned entrypoints. Launched as `fake_worker <source> <entrypoint>`. A
// source containing a line "# behaviour: NAME" runs canned entrypoint NAME
// instead, so sampled programs can pick their behaviour.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <unistd.h>

#include "tri/wire.hpp"

using tri::json;
using tri::Value;

namespace {

json ok(const std::string& id, const Value& v) { return {{"id", id}, {"status", "ok"}, {"value", tri::to_wire(v)}}; }

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: fake_worker SOURCE ENTRYPOINT\n";
    return 2;
  }
  std::string entry = argv[2];
  {
    std::ifstream src(argv[1]);
    const std::string marker = "# behaviour: ";
    for (std::string line; std::getline(src, line);) {
      if (line.rfind(marker, 0) == 0) entry = line.substr(marker.size());
    }
  }
  std::ios::sync_with_stdio(false);
  for (std::string line; std::getline(std::cin, line);) {
    json req;
    try {
      req = json::parse(line);
    } catch (const json::exception&) {
      return 3;
    }
    const auto id = req.value("id", std::string());
    std::vector<Value> args;
    for (const auto& a : req.at("args")) args.push_back(tri::from_wire(a));
    json resp;
    auto int_arg = [&] { return args.at(0).as_int(); };

    if (entry == "inc") {
      resp = ok(id, Value::integer(int_arg() + 1));
    } else if (entry == "echo") {
      resp = ok(id, args.at(0));
    } else if (entry == "invalid_neg") {
      if (int_arg() < 0) resp = {{"id", id}, {"status", "invalid-input"}, {"message", "ValueError"}};
      else resp = ok(id, args.at(0));
    } else if (entry == "raise") {
      resp = {{"id", id}, {"status", "error"}, {"message", "ZeroDivisionError"}};
    } else if (entry == "loop") {
      if (int_arg() == 2) std::this_thread::sleep_for(std::chrono::hours(1));
      resp = ok(id, args.at(0));
    } else if (entry == "crash") {
      if (int_arg() == 2) std::_Exit(9);
      resp = ok(id, args.at(0));
    } else if (entry == "garbage") {
      std::cout << "this is not json" << std::endl;
      continue;
    } else if (entry == "wrong_id") {
      resp = ok(id + "x", args.at(0));
    } else if (entry == "big") {
      resp = ok(id, Value::str(std::string(4 << 20, 'x')));
    } else if (entry == "subset_pred") {
      resp = ok(id, Value::subset({Value::integer(int_arg() - 1)}));
    } else if (entry == "full_pred") {
      resp = ok(id, Value::full_set({Value::integer(int_arg() - 1), Value::integer(int_arg() - 2)}));
    } else if (entry == "plus2") {
      resp = ok(id, Value::integer(int_arg() + 2));
    } else if (entry == "dec") {
      resp = ok(id, Value::integer(int_arg() - 1));
    } else if (entry == "inc_enum") {
      resp = ok(id, Value::full_set({Value::integer(int_arg() + 1)}));
    } else if (entry == "dec_set") {
      resp = ok(id, Value::full_set({Value::integer(int_arg() - 1)}));
    } else if (entry == "is4") {
      resp = ok(id, Value::boolean(int_arg() == 4));
    } else if (entry == "post_inc") {
      resp = ok(id, Value::boolean(args.at(1).as_int() == int_arg() + 1));
    } else if (entry == "pid") {
      resp = ok(id, Value::integer(static_cast<long long>(::getpid())));
    } else {
      resp = {{"id", id}, {"status", "error"}, {"message", "unknown entrypoint " + entry}};
    }
    std::cout << resp.dump() << std::endl;
  }
  return 0;
}
