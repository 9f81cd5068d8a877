#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "alphatown/classify.hpp"
#include "alphatown/constructions.hpp"
#include "alphatown/error.hpp"
#include "alphatown/family.hpp"
#include "alphatown/search.hpp"
#include "alphatown/synthesis.hpp"

namespace alphatown::cli {

namespace {

using nlohmann::json;

std::uint64_t default_budget(std::uint64_t fallback) {
  const char* raw = std::getenv("ALPHATOWN_BUDGET");
  if (raw == nullptr || *raw == '\0') return fallback;
  const std::string text(raw);
  if (!std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw_invalid("ALPHATOWN_BUDGET must be a nonnegative integer, got \"" + text + "\"");
  }
  try {
    return std::stoull(text);
  } catch (const std::out_of_range&) {
    throw_invalid("ALPHATOWN_BUDGET out of range");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_invalid("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw_invalid("cannot write " + path);
}

json invocation(const std::vector<std::string>& args) {
  return {{"subcommand", args.empty() ? "" : args.front()}, {"arguments", args}};
}

// Writes the document to --out (and a short summary to stdout) or the whole
// document to stdout.
void emit(std::ostream& out, const std::optional<std::string>& path, json document, json summary) {
  if (!path) {
    out << dump_document(document);
    return;
  }
  write_file(*path, dump_document(document));
  summary["out"] = *path;
  out << dump_document(summary);
}

// Certificates nest the family under "family", search results under "witness".
SetFamily family_from_document(const std::string& text) {
  json document;
  try {
    document = json::parse(text);
  } catch (const json::parse_error& e) {
    throw_invalid("family document: malformed JSON at byte " + std::to_string(e.byte));
  }
  if (document.is_object() && document.contains("family")) return family_from_json(document["family"]);
  if (document.is_object() && document.contains("witness")) return family_from_json(document["witness"]);
  return family_from_json(document);
}

struct Options {
  std::string kind;
  std::uint64_t s = 0;
  std::uint64_t i = 0;
  std::uint64_t modulus = 0;
  std::uint64_t n = 0;
  std::optional<std::uint64_t> n_opt;
  std::optional<std::uint64_t> modulus_opt;
  std::uint64_t member_limit = kDefaultMemberLimit;
  std::optional<std::uint64_t> budget;
  std::optional<std::size_t> depth;
  std::optional<std::string> out;
  std::string pattern;
  std::string family;
  unsigned jobs = 1;
  std::size_t k = 0;
  std::size_t ell = 0;
  bool list = false;
  std::uint64_t list_limit = 1'000'000;
};

int run_construct(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  json provenance;
  std::optional<SetFamily> family;
  if (o.kind == "zero") {
    family = zero_block(o.modulus, o.n, o.member_limit);
    provenance = {{"kind", "zero"}, {"modulus", o.modulus}, {"n", o.n}, {"member_limit", o.member_limit}};
  } else if (o.kind == "block" || o.kind == "coblock") {
    const BlockParams params{o.kind == "block" ? BlockKind::kBlock : BlockKind::kCoblock, o.s, o.i, o.modulus, o.n};
    family = make_block(params);
    provenance = to_json(params);
  } else {
    throw_invalid("--kind must be block, coblock or zero");
  }
  auto document = family_to_json(*family);
  document["provenance"] = provenance;
  document["invocation"] = invocation(args);
  emit(out, o.out, std::move(document),
       {{"size", family->size()}, {"ground_size", family->ground_size()}, {"modulus", family->modulus()}});
  return kSuccess;
}

int run_synthesize(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto pattern = Pattern::parse(o.pattern, o.modulus);
  SynthesisOptions options;
  options.member_limit = o.member_limit;
  options.verify_budget = o.budget.value_or(default_budget(kDefaultNodeBudget));
  const auto certificate = synthesize(pattern, o.n, o.depth.value_or(pattern.length()), options);
  auto document = to_json(certificate);
  document["invocation"] = invocation(args);
  emit(out, o.out, std::move(document),
       {{"pattern", pattern.to_string()},
        {"modulus", pattern.modulus()},
        {"n", o.n},
        {"size", certificate.size()},
        {"verified", certificate.verified}});
  return certificate.verified ? kSuccess : kViolation;
}

int run_verify(const Options& o, std::ostream& out) {
  const auto family = family_from_document(read_file(o.family));
  const auto modulus = o.modulus_opt.value_or(family.modulus());
  if (modulus != family.modulus()) {
    throw_invalid("--modulus " + std::to_string(modulus) + " differs from the family's modulus " +
                  std::to_string(family.modulus()));
  }
  const auto pattern = Pattern::parse(o.pattern, modulus);
  const auto outcome = verify_pattern(family, pattern, o.depth, o.budget.value_or(default_budget(kDefaultNodeBudget)));
  auto document = to_json(outcome);
  document["pattern"] = pattern.to_string();
  document["modulus"] = modulus;
  document["size"] = family.size();
  document["ground_size"] = family.ground_size();
  out << dump_document(document);
  return outcome.passed() ? kSuccess : kViolation;
}

int run_search(const Options& o, const std::vector<std::string>& args, std::ostream& out) {
  const auto pattern = Pattern::parse(o.pattern, o.modulus);
  SearchOptions options;
  options.node_budget = o.budget.value_or(default_budget(SearchOptions{}.node_budget));
  options.jobs = o.jobs;
  const auto result = exact_max_family(pattern, o.n, options);
  auto document = to_json(result, pattern, o.n);
  if (o.out) document["invocation"] = invocation(args);
  emit(out, o.out, document,
       {{"value", result.value}, {"status", document["status"]}, {"nodes_explored", result.nodes_explored}});
  return result.status == SearchStatus::kExhausted ? kSuccess : kViolation;
}

int run_classify(const Options& o, std::ostream& out) {
  const auto pattern = Pattern::parse(o.pattern, o.modulus);
  auto document = to_json(classify_pattern(pattern));
  if (o.n_opt) document["bounds_at_n"] = to_json(bounds_report(pattern, *o.n_opt));
  out << dump_document(document);
  return kSuccess;
}

int run_bounds(const Options& o, std::ostream& out) {
  const auto pattern = Pattern::parse(o.pattern, o.modulus);
  out << dump_document(to_json(bounds_report(pattern, o.n)));
  return kSuccess;
}

int run_enumerate(const Options& o, std::ostream& out) {
  const auto summary = enumerate_big_patterns(o.k, o.ell, o.modulus);
  const auto document = to_json(summary);
  if (!o.list) {
    out << dump_document(document);
    return kSuccess;
  }
  if (summary.count > o.list_limit) {
    throw Error(ErrorKind::kBudgetExhausted,
                "listing " + summary.count.str() + " patterns exceeds --limit " + std::to_string(o.list_limit));
  }
  // Streams the "patterns" array in key order without holding the list.
  out << '{';
  bool first = true;
  bool listed = false;
  const auto write_patterns = [&] {
    out << (first ? "" : ",") << "\"patterns\":[";
    bool first_pattern = true;
    (void)enumerate_big_patterns(o.k, o.ell, o.modulus, [&](const Pattern& pattern) {
      out << (first_pattern ? "" : ",") << json(pattern.to_string()).dump();
      first_pattern = false;
    });
    out << ']';
    first = false;
    listed = true;
  };
  for (const auto& [key, value] : document.items()) {
    if (!listed && key > "patterns") write_patterns();
    out << (first ? "" : ",") << json(key).dump() << ':' << value.dump();
    first = false;
  }
  if (!listed) write_patterns();
  out << "}\n";
  return kSuccess;
}

void report_error(std::ostream& err, std::string_view kind, const std::string& message) {
  err << dump_document({{"error", {{"kind", kind}, {"message", message}}}});
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
    case ErrorKind::kGroundTooSmall:
      return kInvalid;
    case ErrorKind::kBudgetExhausted:
      return kViolation;
    case ErrorKind::kInternal:
      break;
  }
  return kInternalFailure;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Construct, verify, search and classify families with prescribed intersection residues"};
  app.name("alphatown");
  app.require_subcommand(1);
  Options o;

  auto* construct = app.add_subcommand("construct", "Build a block, co-block or zero block");
  construct->add_option("--kind", o.kind, "block | coblock | zero")->required();
  construct->add_option("--s", o.s, "Subset size");
  construct->add_option("--i", o.i, "Residue class of m");
  construct->add_option("--modulus", o.modulus)->required();
  construct->add_option("--n", o.n, "Ground size")->required();
  construct->add_option("--member-limit", o.member_limit, "Cap on zero-block members");
  construct->add_option("--out", o.out);

  auto* synth = app.add_subcommand("synthesize", "Plan, build and verify a family for a pattern");
  synth->add_option("--pattern", o.pattern)->required();
  synth->add_option("--modulus", o.modulus)->required();
  synth->add_option("--n", o.n)->required();
  synth->add_option("--verify-depth", o.depth);
  synth->add_option("--member-limit", o.member_limit);
  synth->add_option("--budget", o.budget, "Verification node budget");
  synth->add_option("--out", o.out);

  auto* verify = app.add_subcommand("verify", "Check a family file against a pattern");
  verify->add_option("--family", o.family)->required();
  verify->add_option("--pattern", o.pattern)->required();
  verify->add_option("--modulus", o.modulus_opt);
  verify->add_option("--max-depth", o.depth);
  verify->add_option("--budget", o.budget);

  auto* search = app.add_subcommand("search", "Exact maximum family by branch and bound");
  search->add_option("--pattern", o.pattern)->required();
  search->add_option("--modulus", o.modulus)->required();
  search->add_option("--n", o.n)->required();
  search->add_option("--budget", o.budget);
  search->add_option("--jobs", o.jobs)->check(CLI::Range(1U, 256U));
  search->add_option("--out", o.out);

  auto* classify = app.add_subcommand("classify", "Asymptotic classification of a pattern");
  classify->add_option("--pattern", o.pattern)->required();
  classify->add_option("--modulus", o.modulus)->required();
  classify->add_option("--n", o.n_opt);

  auto* enumerate = app.add_subcommand("enumerate", "Count (or list) the big-side patterns at a level");
  enumerate->add_option("--k", o.k)->required();
  enumerate->add_option("--ell", o.ell)->required();
  enumerate->add_option("--modulus", o.modulus)->required();
  enumerate->add_flag("--list", o.list);
  enumerate->add_option("--limit", o.list_limit, "Refuse to list more patterns than this");

  auto* bounds = app.add_subcommand("bounds", "Numeric upper bounds at n");
  bounds->add_option("--pattern", o.pattern)->required();
  bounds->add_option("--modulus", o.modulus)->required();
  bounds->add_option("--n", o.n)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    report_error(err, to_string(ErrorKind::kInvalidInput), e.what());
    return kInvalid;
  }

  try {
    if (*construct) return run_construct(o, args, out);
    if (*synth) return run_synthesize(o, args, out);
    if (*verify) return run_verify(o, out);
    if (*search) return run_search(o, args, out);
    if (*classify) return run_classify(o, out);
    if (*enumerate) return run_enumerate(o, out);
    if (*bounds) return run_bounds(o, out);
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::bad_alloc&) {
    report_error(err, to_string(ErrorKind::kInternal), "out of memory");
    return kInternalFailure;
  } catch (const std::exception& e) {
    report_error(err, to_string(ErrorKind::kInternal), e.what());
    return kInternalFailure;
  }
  report_error(err, to_string(ErrorKind::kInternal), "no subcommand ran");
  return kInternalFailure;
}

}  // namespace alphatown::cli
